/* cc -I include c/demo.c ../../target/debug/libseasonal_threshold_ffi.a -lm -lpthread -ldl -o demo */
#include <stdio.h>
#include "seasonal_threshold.h"

int main(void) {
    const double m1[4] = {-2.0, 0.5, 1.0, -1.5};
    const double m2[4] = {0.5, 1.0, 2.0, -0.5};
    StLinearization *h = NULL;
    if (st_linearization_new(2, m1, m2, 2.0, &h) != ST_STATUS_OK) {
        fprintf(stderr, "error: %s\n", st_last_error_message());
        return 1;
    }
    StThresholdReport rep;
    if (st_find_threshold(h, 0.0, &rep) != ST_STATUS_OK) {
        fprintf(stderr, "error: %s\n", st_last_error_message());
        st_linearization_free(h);
        return 1;
    }
    printf("theta* = %.12f, regime %d\n", rep.theta_star, (int)rep.regime);

    double rho;
    StStatus s = st_rho(h, 2.0, &rho);
    printf("rho(2.0): status %d, %s\n", (int)s, st_last_error_message());
    st_linearization_free(h);
    return 0;
}
