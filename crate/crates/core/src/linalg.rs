//! Small dense matrices: exponential, spectral radius/abscissa, Perron
//! eigenpairs and the Metzler / irreducibility predicates.
//!
//! Dimensions here are tiny (a handful of states), so everything is a plain
//! row-major `Vec<f64>`. General complex spectra for `n >= 3` are delegated
//! to nalgebra's Schur decomposition; everything the threshold machinery
//! depends on (exponential, Perron vectors) is computed here.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Dense column vector.
pub type Vector = Vec<f64>;

/// Default Perron tolerance (relative eigen-residual).
pub const DEFAULT_PERRON_TOL: f64 = 1e-12;
pub const DEFAULT_PERRON_MAX_ITER: usize = 10_000;
/// Truncation tolerance handed to [`mat_exp`] by the higher-level modules.
pub const DEFAULT_EXP_TOL: f64 = 1e-16;

/// Square `n x n` real matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        if data.len() != n * n {
            return Err(invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(invalid(format!("row {i} has {} entries, expected {n}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// `self + s * I`
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += s;
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vector {
        debug_assert_eq!(x.len(), self.n);
        self.data.chunks(self.n).map(|row| dot(row, x)).collect()
    }

    /// `self^T x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vector {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let xi = x[i];
            for j in 0..n {
                y[j] += self[(i, j)] * xi;
            }
        }
        y
    }

    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.n)
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.rows()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n)).finish()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix sum");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix difference");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vector {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

/// `e^A` by scaling and squaring around a truncated Taylor series.
///
/// `A` is scaled by `2^-s` until its 1-norm is at most 1/2, and the series
/// order is the smallest one whose remainder bound drops below `tol * 2^-s`.
pub fn mat_exp(a: &Matrix, tol: f64) -> Result<Matrix> {
    if !a.is_finite() {
        return Err(invalid("mat_exp: non-finite entries"));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(invalid(format!("mat_exp: tol must lie in (0, 1e-6], got {tol}")));
    }
    let n = a.n();
    let norm = a.norm_1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a.scale(0.5f64.powi(s));
    let bn = b.norm_1();

    // remainder of the order-m series is bounded by bn^(m+1)/(m+1)! * 1/(1 - bn/(m+2))
    let local_tol = tol * 0.5f64.powi(s);
    let mut order = 1usize;
    let mut term = bn;
    loop {
        let next = term * bn / (order as f64 + 1.0);
        if next * 2.0 <= local_tol || order >= 30 {
            break;
        }
        term = next;
        order += 1;
    }

    // Horner: I + B/1 (I + B/2 (I + ... (I + B/m)))
    let id = Matrix::identity(n);
    let mut p = id.clone();
    for k in (1..=order).rev() {
        p = &id + &(&b * &p).scale(1.0 / k as f64);
    }
    for _ in 0..s {
        p = &p * &p;
    }
    if !p.is_finite() {
        return Err(invalid("mat_exp: result overflowed"));
    }
    Ok(p)
}

/// Eigenvalues as (re, im) pairs. Closed form for `n <= 2`, Schur otherwise.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<(f64, f64)>> {
    if !a.is_finite() {
        return Err(invalid("eigenvalues: non-finite entries"));
    }
    match a.n() {
        1 => Ok(vec![(a[(0, 0)], 0.0)]),
        2 => {
            let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
            let half_tr = 0.5 * (p + s);
            let half_diff = 0.5 * (p - s);
            let disc = half_diff * half_diff + q * r;
            if disc >= 0.0 {
                let root = disc.sqrt();
                Ok(vec![(half_tr + root, 0.0), (half_tr - root, 0.0)])
            } else {
                let root = (-disc).sqrt();
                Ok(vec![(half_tr, root), (half_tr, -root)])
            }
        }
        _ => Ok(a
            .to_nalgebra()
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect()),
    }
}

/// `max |lambda|` over the spectrum.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.into_iter().map(|(re, im)| re.hypot(im)).fold(0.0, f64::max))
}

/// `max Re(lambda)` over the spectrum.
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|(re, _)| re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// True iff every off-diagonal entry is nonnegative.
pub fn is_metzler(a: &Matrix) -> bool {
    let n = a.n();
    (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] >= 0.0))
}

fn reaches_all(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for (j, s) in seen.iter_mut().enumerate() {
            if !*s && i != j && edge(i, j) {
                *s = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Strong connectivity of the graph with an edge `i -> j` whenever
/// `A[i][j] != 0` (`i != j`). Exact comparison with zero.
pub fn is_irreducible(a: &Matrix) -> bool {
    let n = a.n();
    reaches_all(n, |i, j| a[(i, j)] != 0.0) && reaches_all(n, |i, j| a[(j, i)] != 0.0)
}

/// Nonnegative, irreducible, and some power is entrywise positive
/// (Wielandt: checking up to `(n-1)^2 + 1` suffices).
pub fn is_primitive(a: &Matrix) -> bool {
    if a.as_slice().iter().any(|&x| x < 0.0) || !is_irreducible(a) {
        return false;
    }
    let n = a.n();
    let pattern: Vec<bool> = a.as_slice().iter().map(|&x| x > 0.0).collect();
    let mut power = pattern.clone();
    let bound = (n - 1) * (n - 1) + 1;
    for _ in 0..bound {
        if power.iter().all(|&b| b) {
            return true;
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if power[i * n + k] {
                    for j in 0..n {
                        next[i * n + j] |= pattern[k * n + j];
                    }
                }
            }
        }
        power = next;
    }
    power.iter().all(|&b| b)
}

/// LU factorization with partial pivoting.
pub(crate) struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub(crate) fn new(n: usize, mut lu: Vec<f64>) -> Result<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::Conditioning(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Smallest over largest pivot magnitude; a cheap conditioning proxy.
    pub(crate) fn pivot_ratio(&self) -> f64 {
        let piv = (0..self.n).map(|k| self.lu[k * self.n + k].abs());
        let (lo, hi) = piv.fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
        lo / hi
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vector {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// Solve `A x = b`.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vector> {
    if b.len() != a.n() {
        return Err(invalid("solve: dimension mismatch"));
    }
    Ok(Lu::new(a.n(), a.as_slice().to_vec())?.solve(b))
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.n();
    let lu = Lu::new(n, a.as_slice().to_vec())?;
    if lu.pivot_ratio() < 1e-14 {
        return Err(Error::Conditioning("matrix is numerically singular".into()));
    }
    let mut inv = Matrix::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        let col = lu.solve(&e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// Perron root with right and left eigenvectors, normalized so that
/// `|v|_2 = 1` and `<v, v_star> = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronPair {
    pub rho: f64,
    pub v: Vector,
    pub v_star: Vector,
}

impl PerronPair {
    /// `(|M v - rho v|, |M^T v_star - rho v_star|)`
    pub fn residuals(&self, m: &Matrix) -> (f64, f64) {
        let r = axpy(-self.rho, &self.v, &m.mul_vec(&self.v));
        let l = axpy(-self.rho, &self.v_star, &m.tr_mul_vec(&self.v_star));
        (norm2(&r), norm2(&l))
    }
}

/// Dominant eigenvector of a primitive nonnegative matrix.
///
/// Noda iteration: inverse iteration shifted by the Collatz-Wielandt upper
/// bound `max_i (Ax)_i / x_i`, which always lies above the Perron root, so
/// the Perron root stays the eigenvalue nearest to the shift and iterates
/// stay positive. Convergence is superlinear even when `A` is close to a
/// multiple of the identity, where plain power iteration stalls.
fn noda_vector(a: &Matrix, tol: f64, max_iter: usize) -> Result<(Vector, usize)> {
    let n = a.n();
    let scale = a.norm_fro().max(f64::MIN_POSITIVE);
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut residual = f64::INFINITY;
    // (x, residual, iteration) of the first iterate inside the budget
    let mut met: Option<(Vector, f64, usize)> = None;
    for iter in 0..max_iter {
        let y = a.mul_vec(&x);
        let lambda = dot(&x, &y);
        residual = norm2(&axpy(-lambda, &x, &y));
        if let Some((best, best_res, at)) = met {
            // one polishing step: the one-sided Rayleigh quotient is only
            // first-order accurate, and the caller swaps it for the two-sided one
            return Ok(if residual < best_res { (x, iter) } else { (best, at) });
        }
        // half the budget, so the two-sided Rayleigh quotient still meets `tol`
        if residual <= 0.5 * tol * scale {
            met = Some((x.clone(), residual, iter));
        }
        let upper = x
            .iter()
            .zip(&y)
            .map(|(xi, yi)| yi / xi)
            .fold(f64::NEG_INFINITY, f64::max);
        let shift = upper + 1e-14 * upper.abs().max(scale * 1e-3);
        let next = Lu::new(n, a.shift(-shift).scale(-1.0).as_slice().to_vec())
            .map(|lu| lu.solve(&x))
            .ok()
            .filter(|z| z.iter().all(|v| v.is_finite() && *v > 0.0));
        let z = match next {
            Some(z) => z,
            // shift collided with the root or rounding flipped a sign: fall back to a power step
            None => y.iter().map(|v| v.max(0.0)).collect(),
        };
        let nz = norm2(&z);
        if nz == 0.0 || !nz.is_finite() {
            return match met {
                Some((x, _, at)) => Ok((x, at)),
                None => Err(Error::Convergence { iterations: iter, residual }),
            };
        }
        x = z.into_iter().map(|v| v / nz).collect();
    }
    match met {
        Some((x, _, at)) => Ok((x, at)),
        None => Err(Error::Convergence { iterations: max_iter, residual }),
    }
}

/// Perron pair of an entrywise positive (or nonnegative primitive) matrix.
///
/// Residuals are measured relative to the Frobenius norm of `m`:
/// `|M v - rho v| <= tol * |M|_F`, and likewise for the left vector.
pub fn perron_pair(m: &Matrix, tol: f64, max_iter: usize) -> Result<PerronPair> {
    if !m.is_finite() {
        return Err(invalid("perron_pair: non-finite entries"));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(invalid(format!("perron_pair: tol must lie in (0, 1e-6], got {tol}")));
    }
    if max_iter == 0 {
        return Err(invalid("perron_pair: max_iter must be positive"));
    }
    let positive = m.as_slice().iter().all(|&x| x > 0.0);
    if !positive && !is_primitive(m) {
        return Err(Error::Structure(
            "perron_pair needs an entrywise positive or primitive nonnegative matrix".into(),
        ));
    }
    let (v, it_right) = noda_vector(m, tol, max_iter)?;
    let (w, _) = noda_vector(&m.transpose(), tol, max_iter.saturating_sub(it_right).max(1))?;
    let vw = dot(&v, &w);
    let v_star: Vector = w.iter().map(|x| x / vw).collect();
    let rho = dot(&m.mul_vec(&v), &v_star);
    let pair = PerronPair { rho, v, v_star };
    let (rr, rl) = pair.residuals(m);
    let scale = m.norm_fro();
    let worst = rr.max(rl / norm2(&pair.v_star).max(1.0));
    if !(rho > 0.0) || worst > tol * scale {
        return Err(Error::Convergence { iterations: max_iter, residual: worst });
    }
    Ok(pair)
}

/// Perron data of an irreducible Metzler matrix `A`: the spectral abscissa
/// `mu` with positive right/left eigenvectors (`A v = mu v`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetzlerPerron {
    pub mu: f64,
    pub v: Vector,
    pub v_star: Vector,
}

pub fn metzler_perron(a: &Matrix, tol: f64, max_iter: usize) -> Result<MetzlerPerron> {
    if !is_metzler(a) || !is_irreducible(a) {
        return Err(Error::Structure("expected an irreducible Metzler matrix".into()));
    }
    // shift to a nonnegative matrix with positive diagonal, hence primitive
    let c = (0..a.n()).map(|i| -a[(i, i)]).fold(0.0, f64::max) + 1.0;
    let p = perron_pair(&a.shift(c), tol, max_iter)?;
    Ok(MetzlerPerron { mu: p.rho - c, v: p.v, v_star: p.v_star })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&Matrix::zeros(2), 1e-12).unwrap();
        assert_eq!(e, Matrix::identity(2));
    }

    #[test]
    fn exp_of_diagonal() {
        let e = mat_exp(&Matrix::from_diag(&[1.0, -2.0]), 1e-14).unwrap();
        assert!(close(e[(0, 0)], 1f64.exp(), 1e-14));
        assert!(close(e[(1, 1)], (-2f64).exp(), 1e-15));
        assert_eq!(e[(0, 1)], 0.0);
        assert_eq!(e[(1, 0)], 0.0);
    }

    #[test]
    fn exp_of_nilpotent_terminates() {
        let e = mat_exp(&m(&[&[0.0, 1.0], &[0.0, 0.0]]), 1e-12).unwrap();
        assert_eq!(e, m(&[&[1.0, 1.0], &[0.0, 1.0]]));
    }

    #[test]
    fn exp_rejects_bad_input() {
        assert!(Matrix::new(2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(mat_exp(&Matrix::zeros(2), 1e-3).is_err());
    }

    #[test]
    fn spectral_radius_examples() {
        assert!(close(spectral_radius(&Matrix::from_diag(&[3.0, -5.0])).unwrap(), 5.0, 1e-14));
        assert!(close(spectral_radius(&m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap(), 3.0, 1e-14));
        let expected = (5.0 + 33f64.sqrt()) / 2.0;
        assert!(close(spectral_radius(&m(&[&[1.0, 2.0], &[3.0, 4.0]])).unwrap(), expected, 1e-12));
    }

    #[test]
    fn spectral_radius_general_dimension() {
        // rotation block plus a real eigenvalue: spectrum {2i, -2i, -1}
        let a = m(&[&[0.0, -2.0, 0.0], &[2.0, 0.0, 0.0], &[0.0, 0.0, -1.0]]);
        assert!(close(spectral_radius(&a).unwrap(), 2.0, 1e-12));
        assert!(close(spectral_abscissa(&a).unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn spectral_abscissa_examples() {
        assert!(close(spectral_abscissa(&Matrix::from_diag(&[-1.0, -2.0])).unwrap(), -1.0, 1e-15));
        assert!(close(spectral_abscissa(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap(), 1.0, 1e-15));
        // unfavorable insect linearization: (-2.5 + sqrt(6.25 - 4)) / 2
        let du = m(&[&[-1.5, 1.0], &[0.5, -1.0]]);
        assert!(close(spectral_abscissa(&du).unwrap(), -0.5, 1e-14));
    }

    #[test]
    fn perron_symmetric() {
        let p = perron_pair(&m(&[&[2.0, 1.0], &[1.0, 2.0]]), 1e-12, 10_000).unwrap();
        let s = 0.5f64.sqrt();
        assert!(close(p.rho, 3.0, 1e-12));
        for i in 0..2 {
            assert!(close(p.v[i], s, 1e-12));
            assert!(close(p.v_star[i], s, 1e-12));
        }
        let p = perron_pair(&m(&[&[1.0, 0.5], &[0.5, 1.0]]), 1e-12, 10_000).unwrap();
        assert!(close(p.rho, 1.5, 1e-12));
        assert!(close(p.v[0], s, 1e-12) && close(p.v[1], s, 1e-12));
    }

    #[test]
    fn perron_nonsymmetric_left_vector() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let p = perron_pair(&a, 1e-12, 10_000).unwrap();
        let rho = (5.0 + 33f64.sqrt()) / 2.0;
        assert!(close(p.rho, rho, 1e-12));
        assert!(close(p.v_star[1] / p.v_star[0], (rho - 1.0) / 3.0, 1e-11));
        assert!(close(dot(&p.v, &p.v_star), 1.0, 1e-14));
        assert!(close(norm2(&p.v), 1.0, 1e-14));
    }

    #[test]
    fn perron_near_identity_converges() {
        let a = m(&[&[1.0, 1e-7], &[3e-7, 1.0 - 2e-7]]);
        let p = perron_pair(&a, 1e-12, 10_000).unwrap();
        let (r, l) = p.residuals(&a);
        assert!(r < 1e-12 && l < 1e-12);
        assert!(close(p.rho, spectral_radius(&a).unwrap(), 1e-14));
    }

    #[test]
    fn perron_structure_errors() {
        assert!(matches!(
            perron_pair(&m(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-12, 100),
            Err(Error::Structure(_))
        ));
        // irreducible but periodic (not primitive)
        assert!(matches!(
            perron_pair(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), 1e-12, 100),
            Err(Error::Structure(_))
        ));
        assert!(matches!(
            perron_pair(&m(&[&[1.0, -1.0], &[1.0, 1.0]]), 1e-12, 100),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn metzler_predicate() {
        assert!(is_metzler(&m(&[&[-5.0, 2.0], &[3.0, -1.0]])));
        assert!(!is_metzler(&m(&[&[1.0, -0.1], &[0.0, 1.0]])));
        // insect Jacobian at zero has off-diagonals b and h
        assert!(is_metzler(&m(&[&[-1.5, 1.0], &[0.5, -1.0]])));
    }

    #[test]
    fn irreducibility_predicate() {
        assert!(is_irreducible(&m(&[&[0.0, 1.0], &[1.0, 0.0]])));
        assert!(!is_irreducible(&m(&[&[1.0, 1.0], &[0.0, 1.0]])));
        assert!(is_irreducible(&m(&[&[-1.5, 1.0], &[0.5, -1.0]])));
        assert!(is_irreducible(&Matrix::zeros(1)));
        // 3-cycle
        let c = m(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        assert!(is_irreducible(&c));
        assert!(!is_primitive(&c));
        assert!(is_primitive(&c.shift(1.0)));
    }

    #[test]
    fn metzler_perron_matches_abscissa() {
        let a = m(&[&[-1.5, 2.0], &[1.0, -0.5]]);
        let mp = metzler_perron(&a, 1e-12, 10_000).unwrap();
        assert!(close(mp.mu, 0.5, 1e-12));
        let s = 0.5f64.sqrt();
        assert!(close(mp.v[0], s, 1e-12) && close(mp.v[1], s, 1e-12));
    }

    #[test]
    fn lu_solve_and_inverse() {
        let a = m(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let x = solve(&a, &[3.0, 2.0, 4.0]).unwrap();
        for (xi, ei) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!(close(*xi, ei, 1e-14));
        }
        let inv = inverse(&a).unwrap();
        let id = &a * &inv;
        assert!((&id - &Matrix::identity(3)).max_abs() < 1e-14);
        assert!(inverse(&m(&[&[1.0, 2.0], &[2.0, 4.0]])).is_err());
    }

    #[test]
    fn serde_round_trip_rows() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let b: Matrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<Matrix>("[[1.0,2.0],[3.0]]").is_err());
    }
}
