//! Dense complex kernels: Hermitian eigendecomposition, polar part, spectral
//! norm, signature and Pfaffians.
//!
//! Every routine works on square [`ComplexMatrix`] values. Tolerances named
//! `tol` are relative to `max(1, ‖input‖)`; `gap_tol` and `sigma_min_tol`
//! are absolute.
//!
//! Matrices are stored as nalgebra values; eigendecompositions and SVDs run
//! in faer, with nalgebra's own routines as a fallback.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_GAP_TOL: f64 = 1e-6;
pub const DEFAULT_SIGMA_MIN_TOL: f64 = 1e-10;
/// Largest size accepted by [`pfaffian_combinatorial`] (10395 matchings).
pub const COMBINATORIAL_LIMIT: usize = 12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, n)
}

pub fn from_real(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| C64::new(x, 0.0))
}

pub fn diag_real(d: &[f64]) -> ComplexMatrix {
    let n = d.len();
    let mut m = zeros(n);
    for (k, &v) in d.iter().enumerate() {
        m[(k, k)] = C64::new(v, 0.0);
    }
    m
}

/// `i·X`.
pub fn times_i(x: &ComplexMatrix) -> ComplexMatrix {
    x * I
}

pub fn real_part(x: &ComplexMatrix) -> DMatrix<f64> {
    x.map(|z| z.re)
}

/// Largest imaginary part, in absolute value.
pub fn max_imag(x: &ComplexMatrix) -> f64 {
    x.iter().fold(0.0, |m, z| m.max(z.im.abs()))
}

pub fn max_abs(x: &ComplexMatrix) -> f64 {
    x.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn is_finite(x: &ComplexMatrix) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn require_square(x: &ComplexMatrix) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::ShapeMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", x.nrows(), x.ncols()),
        });
    }
    Ok(x.nrows())
}

pub fn require_same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", a.nrows(), a.ncols()),
            found: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    Ok(())
}

/// Products of matrices this large go through faer's blocked kernels.
const FAER_MUL_MIN: usize = 48;

/// `a·b`.
pub fn mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    if a.nrows().min(a.ncols()).min(b.ncols()) < FAER_MUL_MIN {
        return a * b;
    }
    from_faer((to_faer(a) * to_faer(b)).as_ref())
}

/// `a*·b`.
pub fn mul_adj(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    mul(&a.adjoint(), b)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    mul(a, b) - mul(b, a)
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    mul(a, b) + mul(b, a)
}

/// `(X + X*)/2`.
pub fn hermitian_part(x: &ComplexMatrix) -> ComplexMatrix {
    (x + x.adjoint()) * C64::new(0.5, 0.0)
}

/// `(X − X*)/(2i)`, so that `X = re + i·im` with both parts Hermitian.
pub fn skew_hermitian_part(x: &ComplexMatrix) -> ComplexMatrix {
    (x - x.adjoint()) * C64::new(0.0, -0.5)
}

pub fn hermiticity_residual(x: &ComplexMatrix) -> f64 {
    operator_norm(&(x - x.adjoint()))
}

/// `max(‖U*U − I‖, ‖UU* − I‖)`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    let id = identity(n);
    operator_norm(&(mul_adj(u, u) - &id)).max(operator_norm(&(mul(u, &u.adjoint()) - id)))
}

/// Columns orthonormal: `‖V*V − I‖`.
pub fn isometry_defect(v: &ComplexMatrix) -> f64 {
    operator_norm(&(mul_adj(v, v) - identity(v.ncols())))
}

/// Largest singular value.
pub fn operator_norm(x: &ComplexMatrix) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    if x.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    match to_faer(x).singular_values() {
        Ok(s) if s.iter().all(|v| v.is_finite()) => s.into_iter().fold(0.0, f64::max),
        _ => {
            let gram = hermitian_part(&mul_adj(x, x));
            gram.symmetric_eigenvalues()
                .iter()
                .fold(0.0f64, |m, &l| m.max(l))
                .sqrt()
        }
    }
}

/// A full SVD `X = U diag(s) V*`, returned as `(U, s, V*)`.
///
/// Every factorization is checked for consistency before use: nalgebra's
/// bidiagonal SVD occasionally returns a wrong one for complex inputs with
/// paired singular values. The order of attempts is faer, nalgebra on `X`
/// and on `X*`, then the eigendecomposition of the Hermitian dilation
/// `[[0, X], [X*, 0]]`.
pub fn checked_svd(x: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let n = require_square(x)?;
    if n == 0 {
        return Ok((zeros(0), Vec::new(), zeros(0)));
    }
    if let Some(f) = faer_svd(x) {
        return Ok(f);
    }
    if let Some(f) = bidiagonal_svd(x) {
        return Ok(f);
    }
    if let Some((u, s, v_t)) = bidiagonal_svd(&x.adjoint()) {
        return Ok((v_t.adjoint(), s, u.adjoint()));
    }
    dilation_svd(x)
}

fn svd_is_consistent(x: &ComplexMatrix, u: &ComplexMatrix, s: &[f64], v_t: &ComplexMatrix) -> bool {
    let n = x.nrows();
    let scale = x.norm().max(1.0);
    let tol = 1e-12 * n.max(4) as f64;
    let mut us = u.clone();
    for (k, &sk) in s.iter().enumerate() {
        us.column_mut(k).scale_mut(sk);
    }
    s.iter().all(|&v| v >= 0.0 && v.is_finite())
        && (mul(&us, v_t) - x).norm() <= tol * scale
        && (mul_adj(u, u) - identity(n)).norm() <= tol
        && (mul(v_t, &v_t.adjoint()) - identity(n)).norm() <= tol
}

fn bidiagonal_svd(x: &ComplexMatrix) -> Option<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let svd = x.clone().try_svd(true, true, f64::EPSILON, 0)?;
    let (u, v_t) = (svd.u?, svd.v_t?);
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    svd_is_consistent(x, &u, &s, &v_t).then_some((u, s, v_t))
}

/// The dilation has eigenpairs `±σ_k` with vectors `(u_k, ±v_k)/√2`.
fn dilation_svd(x: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let n = x.nrows();
    let mut d = zeros(2 * n);
    d.view_mut((0, n), (n, n)).copy_from(x);
    d.view_mut((n, 0), (n, n)).copy_from(&x.adjoint());
    let eig = herm_eig(&d, DEFAULT_TOL)?;
    let root2 = std::f64::consts::SQRT_2;
    let mut u = zeros(n);
    let mut v = zeros(n);
    let mut s = Vec::with_capacity(n);
    for k in 0..n {
        let col = eig.vectors.column(2 * n - 1 - k);
        s.push(eig.eigenvalues[2 * n - 1 - k].max(0.0));
        u.set_column(k, &(col.rows(0, n) * c64(root2, 0.0)));
        v.set_column(k, &(col.rows(n, n) * c64(root2, 0.0)));
    }
    // near-zero singular values mix the halves; re-orthonormalize
    let u = gram_schmidt(&u);
    let v = gram_schmidt(&v);
    Ok((u, s, v.adjoint()))
}

fn gram_schmidt(m: &ComplexMatrix) -> ComplexMatrix {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..q.ncols() {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for z in q.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
    }
    q
}

pub fn singular_values(x: &ComplexMatrix) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    match checked_svd(x) {
        Ok((_, s, _)) => s,
        Err(_) => {
            let gram = hermitian_part(&mul_adj(x, x));
            gram.symmetric_eigenvalues()
                .iter()
                .map(|&l| l.max(0.0).sqrt())
                .collect()
        }
    }
}

pub fn smallest_singular_value(x: &ComplexMatrix) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    singular_values(x).into_iter().fold(f64::INFINITY, f64::min)
}

/// Eigenvalues in ascending order with matching unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) V*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let s = f(l);
            for v in scaled.column_mut(k).iter_mut() {
                *v *= s;
            }
        }
        mul(&scaled, &self.vectors.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|l| l)
    }

    /// Smallest eigenvalue magnitude.
    pub fn gap(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, l| m.min(l.abs()))
    }
}

/// Hermitian eigendecomposition. The input is symmetrized as `(H + H*)/2`
/// after checking `‖H − H*‖_F ≤ tol·max(1, ‖H‖_F)`.
pub fn herm_eig(h: &ComplexMatrix, tol: f64) -> Result<EigDecomposition> {
    let n = require_square(h)?;
    if n == 0 {
        return Ok(EigDecomposition {
            eigenvalues: Vec::new(),
            vectors: zeros(0),
        });
    }
    let residual = (h - h.adjoint()).norm();
    if residual > tol * h.norm().max(1.0) {
        return Err(Error::NonHermitian { residual });
    }
    let sym = hermitian_part(h);
    let (values, vectors) = match faer_herm_eig(&sym) {
        Some(pair) => pair,
        None => {
            let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 1000 * n.max(10))
                .ok_or(Error::NoConvergence)?;
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(EigDecomposition {
        eigenvalues,
        vectors,
    })
}

fn to_faer(x: &ComplexMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)])
}

fn from_faer(x: faer::MatRef<'_, C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)])
}

fn faer_herm_eig(h: &ComplexMatrix) -> Option<(Vec<f64>, ComplexMatrix)> {
    let eig = to_faer(h).self_adjoint_eigen(faer::Side::Lower).ok()?;
    let values: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    values
        .iter()
        .all(|v| v.is_finite())
        .then(|| (values, from_faer(eig.U())))
}

fn faer_svd(x: &ComplexMatrix) -> Option<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let svd = to_faer(x).svd().ok()?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let u = from_faer(svd.U());
    let v_t = from_faer(svd.V()).adjoint();
    svd_is_consistent(x, &u, &s, &v_t).then_some((u, s, v_t))
}

/// Functional calculus `f(H)` for Hermitian `H`.
pub fn herm_fn(h: &ComplexMatrix, tol: f64, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    Ok(herm_eig(h, tol)?.apply_fn(f))
}

/// Square root of a positive semidefinite matrix; small negative
/// eigenvalues from roundoff are clamped to zero.
pub fn psd_sqrt(h: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    herm_fn(h, tol, |l| l.max(0.0).sqrt())
}

/// The unitary factor `X (X*X)^{-1/2}` of the polar decomposition,
/// computed from one checked SVD as `U V*`.
pub fn polar(x: &ComplexMatrix, sigma_min_tol: f64) -> Result<ComplexMatrix> {
    require_square(x)?;
    if x.is_empty() {
        return Ok(zeros(0));
    }
    let (u, sv, v_t) = checked_svd(x)?;
    let sigma_min = sv.iter().fold(f64::INFINITY, |m, &s| m.min(s));
    if sigma_min < sigma_min_tol {
        return Err(Error::NearSingular { sigma_min });
    }
    Ok(mul(&u, &v_t))
}

/// Half the difference between the number of positive and negative
/// eigenvalues.
pub fn signature(h: &ComplexMatrix, gap_tol: f64) -> Result<i64> {
    signature_and_gap(h, gap_tol).map(|(s, _)| s)
}

/// Signature together with the smallest eigenvalue magnitude.
pub fn signature_and_gap(h: &ComplexMatrix, gap_tol: f64) -> Result<(i64, f64)> {
    let size = require_square(h)?;
    if size % 2 == 1 {
        return Err(Error::OddDimension { size });
    }
    let eig = herm_eig(h, DEFAULT_TOL)?;
    let gap = eig.gap();
    if gap < gap_tol {
        return Err(Error::GapTooSmall { gap });
    }
    let pos = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count() as i64;
    let neg = eig.eigenvalues.len() as i64 - pos;
    Ok((
        (pos - neg) / 2,
        if eig.size() == 0 { f64::INFINITY } else { gap },
    ))
}

fn check_skew(r: &ComplexMatrix, tol: f64) -> Result<usize> {
    let n = require_square(r)?;
    let residual = (r + r.transpose()).norm();
    if residual > tol * r.norm().max(1.0) {
        return Err(Error::NotSkew { residual });
    }
    Ok(n)
}

/// Pfaffian of a real skew-symmetric matrix stored as complex entries.
///
/// Skew-symmetric Gaussian elimination to tridiagonal form with partial
/// pivoting; each row/column swap flips the sign and the Pfaffian is the
/// product of the retained superdiagonal pivots.
pub fn pfaffian_real_skew(r: &ComplexMatrix, tol: f64) -> Result<f64> {
    let scale = max_abs(r).max(1.0);
    let imag = max_imag(r);
    if imag > tol * scale {
        return Err(Error::NotReal { residual: imag });
    }
    let n = check_skew(r, tol)?;
    if n % 2 == 1 {
        return Err(Error::OddDimension { size: n });
    }
    let mut a = real_part(r);
    // exact antisymmetry for the elimination
    for i in 0..n {
        a[(i, i)] = 0.0;
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] - a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
    Ok(pfaffian_skew_elimination(a))
}

pub(crate) fn pfaffian_skew_elimination(mut a: DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry below the diagonal in column k
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].abs();
        for i in (k + 2)..n {
            if a[(i, k)].abs() > best {
                best = a[(i, k)].abs();
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == 0.0 {
            return 0.0;
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = ((k + 2)..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<f64> = ((k + 2)..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Pfaffian as the signed sum over all perfect matchings. Exponential
/// cost; intended as a reference for sizes up to [`COMBINATORIAL_LIMIT`].
pub fn pfaffian_combinatorial(r: &ComplexMatrix) -> Result<C64> {
    let n = require_square(r)?;
    if n > COMBINATORIAL_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: COMBINATORIAL_LIMIT,
        });
    }
    check_skew(r, 1e-12)?;
    if n % 2 == 1 {
        return Ok(ZERO);
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(matching_sum(r, &idx))
}

fn matching_sum(a: &ComplexMatrix, idx: &[usize]) -> C64 {
    if idx.is_empty() {
        return ONE;
    }
    let first = idx[0];
    let mut total = ZERO;
    for k in 1..idx.len() {
        let rest: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != 0 && p != k)
            .map(|(_, &v)| v)
            .collect();
        let term = a[(first, idx[k])] * matching_sum(a, &rest);
        if k % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Determinant through LU.
pub fn determinant(x: &ComplexMatrix) -> C64 {
    x.clone().determinant()
}

/// A unitary whose columns are common eigenvectors of a commuting
/// Hermitian family.
///
/// A random real combination of the family is diagonalized; eigenvalue
/// clusters closer than `cluster_tol·max(1, max‖Y_r‖)` are refined
/// recursively by restricting the family to each cluster.
pub fn common_eigenbasis(
    ys: &[ComplexMatrix],
    cluster_tol: f64,
    rng: &mut impl rand::Rng,
) -> Result<ComplexMatrix> {
    let n = match ys.first() {
        Some(y) => require_square(y)?,
        None => return Ok(identity(0)),
    };
    for y in &ys[1..] {
        require_same_shape(&ys[0], y)?;
    }
    let scale = ys.iter().map(operator_norm).fold(1.0, f64::max);
    refine_basis(ys, cluster_tol * scale, rng, 0).inspect(|v| debug_assert_eq!(v.nrows(), n))
}

fn refine_basis(
    ys: &[ComplexMatrix],
    tol: f64,
    rng: &mut impl rand::Rng,
    depth: usize,
) -> Result<ComplexMatrix> {
    let n = ys[0].nrows();
    if n <= 1 || depth > 8 {
        return Ok(identity(n));
    }
    // nothing to split once the family is scalar on this subspace
    let scalar = ys.iter().all(|y| {
        let mean = y.trace() / C64::new(n as f64, 0.0);
        operator_norm(&(y - identity(n) * mean)) <= tol
    });
    if scalar {
        return Ok(identity(n));
    }
    let mut m = zeros(n);
    for y in ys {
        m += hermitian_part(y) * C64::new(rng.gen_range(0.5..1.5), 0.0);
    }
    let eig = herm_eig(&m, 1e-6)?;
    let mut out = eig.vectors.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.eigenvalues[end] - eig.eigenvalues[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let vc = eig.vectors.columns(start, end - start).into_owned();
            let restricted: Vec<ComplexMatrix> =
                ys.iter().map(|y| mul(&mul_adj(&vc, y), &vc)).collect();
            let inner = refine_basis(&restricted, tol, rng, depth + 1)?;
            out.columns_mut(start, end - start)
                .copy_from(&mul(&vc, &inner));
        }
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, random_real_skew, random_unitary, rng};

    #[test]
    fn eig_identity_and_diagonal() {
        let e = herm_eig(&identity(3), DEFAULT_TOL).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let e = herm_eig(&diag_real(&[1.0, -1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(e.eigenvalues, vec![-1.0, 1.0]);
    }

    #[test]
    fn eig_random_reconstruction() {
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 16);
        let e = herm_eig(&h, DEFAULT_TOL).unwrap();
        assert!(operator_norm(&(e.reconstruct() - &h)) <= 1e-10 * operator_norm(&h));
        assert!(isometry_defect(&e.vectors) <= 1e-12);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut x = identity(2);
        x[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(
            herm_eig(&x, DEFAULT_TOL),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn polar_trivial_cases() {
        let mut r = rng(4);
        let u = random_unitary(&mut r, 6);
        let p = polar(&u, DEFAULT_SIGMA_MIN_TOL).unwrap();
        assert!(operator_norm(&(p - &u)) < 1e-12);
        let p = polar(&(identity(4) * c64(3.0, 0.0)), DEFAULT_SIGMA_MIN_TOL).unwrap();
        assert!(operator_norm(&(p - identity(4))) < 1e-14);
    }

    #[test]
    fn polar_reconstructs_and_is_unitary() {
        let mut r = rng(5);
        let x = random_matrix(&mut r, 8);
        let p = polar(&x, DEFAULT_SIGMA_MIN_TOL).unwrap();
        assert!(unitarity_defect(&p) < 1e-12);
        let modulus = psd_sqrt(&(x.adjoint() * &x), DEFAULT_TOL).unwrap();
        assert!(operator_norm(&(&p * modulus - &x)) < 1e-10 * operator_norm(&x));
    }

    #[test]
    fn svd_paths_agree() {
        let mut r = rng(9);
        let x = random_matrix(&mut r, 7);
        let (u, s, v_t) = dilation_svd(&x).unwrap();
        assert!(svd_is_consistent(&x, &u, &s, &v_t));
        let (_, s2, _) = checked_svd(&x).unwrap();
        for (a, b) in s.iter().zip(&s2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_of_paired_singular_values() {
        // off-diagonal blocks of structured unitaries have every singular
        // value doubled
        let mut r = rng(66);
        for k in 0..200 {
            let m = 1 + k % 6;
            let (w, h) = if k % 2 == 0 {
                (crate::random::random_symplectic_unitary(&mut r, 2 * m), m)
            } else {
                (crate::random::random_twisted_unitary(&mut r, 4 * m), 2 * m)
            };
            let b = w.view((0, h), (h, h)).into_owned();
            let p = polar(&b, DEFAULT_SIGMA_MIN_TOL).unwrap();
            assert!(unitarity_defect(&p) < 1e-12);
            assert!(hermiticity_residual(&(p.adjoint() * &b)) < 1e-12);
        }
    }

    #[test]
    fn polar_rejects_singular() {
        let mut x = identity(3);
        x[(2, 2)] = ZERO;
        assert!(matches!(
            polar(&x, DEFAULT_SIGMA_MIN_TOL),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn signature_counts() {
        assert_eq!(
            signature(&diag_real(&[1.0, -1.0]), DEFAULT_GAP_TOL).unwrap(),
            0
        );
        assert_eq!(
            signature(&diag_real(&[1.0, 1.0, 1.0, -1.0]), DEFAULT_GAP_TOL).unwrap(),
            1
        );
        assert!(matches!(
            signature(&diag_real(&[1.0, 1e-9]), DEFAULT_GAP_TOL),
            Err(Error::GapTooSmall { .. })
        ));
        assert!(matches!(
            signature(&diag_real(&[1.0, 1.0, -1.0]), DEFAULT_GAP_TOL),
            Err(Error::OddDimension { size: 3 })
        ));
    }

    #[test]
    fn pfaffian_two_by_two() {
        let mut m = zeros(2);
        m[(0, 1)] = c64(2.5, 0.0);
        m[(1, 0)] = c64(-2.5, 0.0);
        assert_eq!(pfaffian_real_skew(&m, DEFAULT_TOL).unwrap(), 2.5);
        assert_eq!(pfaffian_combinatorial(&m).unwrap(), c64(2.5, 0.0));
    }

    #[test]
    fn pfaffian_block_diagonal() {
        let mut m = zeros(4);
        m[(0, 1)] = c64(3.0, 0.0);
        m[(1, 0)] = c64(-3.0, 0.0);
        m[(2, 3)] = c64(-0.5, 0.0);
        m[(3, 2)] = c64(0.5, 0.0);
        assert!((pfaffian_real_skew(&m, DEFAULT_TOL).unwrap() + 1.5).abs() < 1e-15);
        assert!((pfaffian_combinatorial(&m).unwrap() - c64(-1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pfaffian_errors() {
        assert!(matches!(
            pfaffian_real_skew(&identity(2), DEFAULT_TOL),
            Err(Error::NotSkew { .. })
        ));
        assert!(matches!(
            pfaffian_real_skew(&zeros(3), DEFAULT_TOL),
            Err(Error::OddDimension { size: 3 })
        ));
        let mut m = zeros(2);
        m[(0, 1)] = c64(0.0, 1.0);
        m[(1, 0)] = c64(0.0, -1.0);
        assert!(matches!(
            pfaffian_real_skew(&m, DEFAULT_TOL),
            Err(Error::NotReal { .. })
        ));
        assert!(matches!(
            pfaffian_combinatorial(&zeros(14)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        let mut r = rng(6);
        for n in [2, 4, 6, 8] {
            let m = random_real_skew(&mut r, n);
            let pf = pfaffian_real_skew(&m, DEFAULT_TOL).unwrap();
            let det = determinant(&m).re;
            assert!((pf * pf - det).abs() <= 1e-8 * det.abs().max(1e-300));
        }
    }

    #[test]
    fn common_eigenbasis_splits_degenerate_family() {
        let mut r = rng(11);
        let u = random_unitary(&mut r, 6);
        let a = &u * diag_real(&[1.0, 1.0, 1.0, 2.0, 2.0, 3.0]) * u.adjoint();
        let b = &u * diag_real(&[0.0, 5.0, 5.0, 0.0, 1.0, 1.0]) * u.adjoint();
        let v = common_eigenbasis(&[a.clone(), b.clone()], 1e-9, &mut r).unwrap();
        assert!(isometry_defect(&v) < 1e-12);
        for m in [&a, &b] {
            let d = v.adjoint() * m * &v;
            let off = d
                .iter()
                .enumerate()
                .filter(|(k, _)| k % 7 != 0)
                .fold(0.0f64, |acc, (_, z)| acc.max(z.norm()));
            assert!(off < 1e-10, "{off}");
        }
    }

    #[test]
    fn operator_norm_cases() {
        assert!((operator_norm(&(identity(3) * c64(2.0, 0.0))) - 2.0).abs() < 1e-14);
        let mut r = rng(9);
        let u = random_unitary(&mut r, 5);
        assert!((operator_norm(&u) - 1.0).abs() < 1e-12);
    }
}
