//! Structured canonical forms and `K₂` witnesses.
//!
//! * [`diag_anti_selfdual`]: symplectic diagonalization of a Hermitian
//!   `X` with `X^♯ = −X`.
//! * [`real_skew_canonical`]: `X = U D Uᵀ` for real skew `X` with `U`
//!   orthogonal and `D` made of 2×2 blocks `[[0, a], [−a, 0]]`.
//! * Witnesses conjugating a Hermitian, anti-τ-symmetric `S` close to the
//!   canonical representative, one per symmetry type, or the obstruction
//!   when the class is nontrivial.
//! * The commuting pair `U = polar(A)*·polar(B)`, `K = H₃` extracted from a
//!   witness of an almost representation of the sphere.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::invariants::{bott_matrix, trivial_bott_matrix};
use crate::matkernel::{
    c64, from_real, herm_eig, hermitian_part, hermiticity_residual, identity, mul, mul_adj,
    operator_norm, polar, psd_sqrt, require_same_shape, require_square, smallest_singular_value,
    zeros, ComplexMatrix, C64, DEFAULT_GAP_TOL, DEFAULT_SIGMA_MIN_TOL, DEFAULT_TOL,
};
use crate::random::{exp_skew_hermitian, random_lie_element, rng};
use crate::symmetry::{
    self, dual, phi_conjugate, phi_inverse, sharp_sharp, tau_residual, time_reversal, SymmetryClass,
};

/// Relative tolerance for the symmetry hypotheses on inputs.
pub const HYPOTHESIS_TOL: f64 = 1e-8;
/// Smallest `|a_i|` for which the skew canonical form is usable.
pub const RANK_TOL: f64 = 1e-10;
/// Blocks of a witness below this smallest singular value get perturbed.
pub const BLOCK_SIGMA_MIN: f64 = 1e-8;
const PERTURBATION_RETRIES: usize = 5;

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub witness: ComplexMatrix,
    /// `‖S − W·(canonical)·W*‖`.
    pub bound: f64,
    /// `bound ≤ ‖S² − I‖ + 1e−8`.
    pub certified: bool,
    /// `‖S² − I‖`.
    pub norm_defect: f64,
}

fn scale(x: &ComplexMatrix) -> f64 {
    operator_norm(x).max(1.0)
}

fn require_hermitian(x: &ComplexMatrix) -> Result<()> {
    let residual = hermiticity_residual(x);
    if residual > HYPOTHESIS_TOL * scale(x) {
        return Err(Error::WrongSymmetry { residual });
    }
    Ok(())
}

/// Checks `τ(X) = sign·X` where `tau` is one of the involutions.
fn require_tau(
    x: &ComplexMatrix,
    tau: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
    sign: f64,
) -> Result<ComplexMatrix> {
    let t = tau(x)?;
    let residual = operator_norm(&(&t - x * c64(sign, 0.0)));
    if residual > HYPOTHESIS_TOL * scale(x) {
        return Err(Error::WrongSymmetry { residual });
    }
    // exact averaging of the hypothesis
    Ok(hermitian_part(&((x + t * c64(sign, 0.0)) * c64(0.5, 0.0))))
}

fn norm_condition(s: &ComplexMatrix) -> Result<f64> {
    let defect = operator_norm(&(mul(s, s) - identity(s.nrows())));
    if defect >= 1.0 {
        return Err(Error::NormConditionFailed { defect });
    }
    Ok(defect)
}

/// `X = W·diag(D, −D)·W*` with `W^♯ = W* = W⁻¹` and `D ≥ 0`, for Hermitian
/// `X` of size `2N` with `X^♯ = −X`.
///
/// Eigenvectors are taken by decreasing eigenvalue; each is orthogonalized
/// against the accepted vectors and their time-reversal partners `−Z b̄`,
/// then accepted together with its partner. `W = [B, −Z B̄]`.
pub fn diag_anti_selfdual(x: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    let n = require_square(x)?;
    SymmetryClass::SelfDual.check_size(n)?;
    require_hermitian(x)?;
    let x = require_tau(x, dual, -1.0)?;
    let half = n / 2;
    if half == 0 {
        return Ok((zeros(0), Vec::new()));
    }
    let eig = herm_eig(&x, DEFAULT_TOL)?;
    let mut cols = None;
    for threshold in [0.5, 0.1] {
        cols = pair_eigenvectors(&eig.vectors, half, threshold);
        if cols.is_some() {
            break;
        }
    }
    let (mut bs, mut ts) = cols.ok_or(Error::DegenerateFailure)?;
    let mut d = Vec::with_capacity(half);
    for j in 0..half {
        let mut value = bs[j].dotc(&(&x * &bs[j])).re;
        if value < 0.0 {
            // (b, Tb) ↦ (Tb, −b) keeps the pairing and flips the sign
            let b = bs[j].clone();
            bs[j] = ts[j].clone();
            ts[j] = -b;
            value = -value;
        }
        d.push(value);
    }
    let mut w = zeros(n);
    for j in 0..half {
        w.set_column(j, &bs[j]);
        w.set_column(half + j, &ts[j]);
    }
    Ok((w, d))
}

type Column = nalgebra::DVector<C64>;

fn pair_eigenvectors(
    vectors: &ComplexMatrix,
    half: usize,
    threshold: f64,
) -> Option<(Vec<Column>, Vec<Column>)> {
    let n = vectors.nrows();
    let mut bs: Vec<Column> = Vec::with_capacity(half);
    let mut ts: Vec<Column> = Vec::with_capacity(half);
    for k in (0..n).rev() {
        if bs.len() == half {
            break;
        }
        let mut v = vectors.column(k).into_owned();
        for _ in 0..2 {
            for c in bs.iter().chain(ts.iter()) {
                let p = c.dotc(&v);
                v -= c * p;
            }
        }
        let norm = v.norm();
        if norm < threshold {
            continue;
        }
        v /= c64(norm, 0.0);
        ts.push(Column::from_vec(time_reversal(v.as_slice())));
        bs.push(v);
    }
    (bs.len() == half).then_some((bs, ts))
}

/// Witness for Hermitian `S` with `S^♯ = −S` and `‖S² − I‖ < 1`: a
/// symplectic unitary `W` with `‖S − W·diag(I, −I)·W*‖ ≤ ‖S² − I‖`.
pub fn k2_quaternion_witness(s: &ComplexMatrix) -> Result<WitnessReport> {
    let n = require_square(s)?;
    SymmetryClass::SelfDual.check_size(n)?;
    require_hermitian(s)?;
    let s = require_tau(s, dual, -1.0)?;
    let norm_defect = norm_condition(&s)?;
    let (w, _) = diag_anti_selfdual(&s)?;
    let j = trivial_bott_matrix(n / 2);
    let bound = operator_norm(&(&s - mul(&mul(&w, &j), &w.adjoint())));
    Ok(WitnessReport {
        witness: w,
        bound,
        certified: bound <= norm_defect + 1e-8,
        norm_defect,
    })
}

/// `X = U D Uᵀ` for real skew `X` of size `4n`.
///
/// Returns the orthogonal `U` and `a_1, …, a_{2n}` with `a_2, …, a_{2n} > 0`
/// and `sign(a_1) = (−1)ⁿ`, so `det U = (−1)ⁿ·sign Pf(X)`. Computed from
/// the eigenvectors of the Hermitian matrix `iX`: an eigenvector
/// `x + iy` for `μ > 0` yields the columns `√2·y, √2·x` of a block with
/// `a = μ`.
pub fn real_skew_canonical(x: &ComplexMatrix) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let size = require_square(x)?;
    let sc = scale(x);
    let imag = crate::matkernel::max_imag(x);
    if imag > RANK_TOL * sc {
        return Err(Error::NotReal { residual: imag });
    }
    let skew = operator_norm(&(x + x.transpose()));
    if skew > RANK_TOL * sc {
        return Err(Error::NotSkew { residual: skew });
    }
    if size % 4 != 0 {
        return Err(Error::BadDimension { size, multiple: 4 });
    }
    let mut r = x.map(|z| z.re);
    for i in 0..size {
        r[(i, i)] = 0.0;
        for j in (i + 1)..size {
            let v = 0.5 * (r[(i, j)] - r[(j, i)]);
            r[(i, j)] = v;
            r[(j, i)] = -v;
        }
    }
    let blocks = size / 2;
    if blocks == 0 {
        return Ok((DMatrix::identity(0, 0), Vec::new()));
    }
    let eig = herm_eig(&(from_real(&r) * c64(0.0, 1.0)), DEFAULT_TOL)?;
    let smallest = eig.eigenvalues[size - blocks];
    if smallest < RANK_TOL * sc {
        return Err(Error::RankDeficient { value: smallest });
    }
    let root2 = std::f64::consts::SQRT_2;
    let mut u = DMatrix::<f64>::zeros(size, size);
    for b in 0..blocks {
        let v = eig.vectors.column(size - 1 - b);
        for i in 0..size {
            u[(i, 2 * b)] = root2 * v[i].im;
            u[(i, 2 * b + 1)] = root2 * v[i].re;
        }
    }
    // re-orthonormalize against roundoff inside eigenvalue clusters
    let mut u = polar(&from_real(&u), DEFAULT_SIGMA_MIN_TOL)?.map(|z| z.re);
    let quarter = size / 4;
    if quarter % 2 == 1 {
        u.column_mut(0).neg_mut();
    }
    let d = u.transpose() * &r * &u;
    let a = (0..blocks).map(|b| d[(2 * b, 2 * b + 1)]).collect();
    Ok((u, a))
}

/// The representative `S₀` of size `4n`: 2×2 blocks `[[0, i], [−i, 0]]`,
/// the first one multiplied by `(−1)ⁿ`. `Pf(S₀) = 1`.
pub fn s0(n: usize) -> ComplexMatrix {
    let mut s = zeros(4 * n);
    for b in 0..2 * n {
        let sign = if b == 0 && n % 2 == 1 { -1.0 } else { 1.0 };
        s[(2 * b, 2 * b + 1)] = c64(0.0, sign);
        s[(2 * b + 1, 2 * b)] = c64(0.0, -sign);
    }
    s
}

/// Witness for Hermitian `S` with `Sᵀ = −S` and `‖S² − I‖ < 1`: a real
/// orthogonal `W` of determinant one with `‖S − W S₀ Wᵀ‖ ≤ ‖S² − I‖`.
/// Fails with [`Error::NontrivialClass`] exactly when `Pf(S) < 0`.
pub fn k2_real_witness(s: &ComplexMatrix) -> Result<WitnessReport> {
    let size = require_square(s)?;
    if size % 4 != 0 {
        return Err(Error::BadDimension { size, multiple: 4 });
    }
    require_hermitian(s)?;
    let s = require_tau(s, |m| Ok(m.transpose()), -1.0)?;
    let norm_defect = norm_condition(&s)?;
    let x = &s * c64(0.0, -1.0);
    let x = x.map(|z| c64(z.re, 0.0));
    let (u, a) = real_skew_canonical(&x)?;
    let det = u.determinant();
    let n = size / 4;
    if det < 0.0 {
        // Pf(S) = (−1)ⁿ Pf(X) = (−1)ⁿ det(U) Π a
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        let pfaffian = parity * det * a.iter().product::<f64>();
        return Err(Error::NontrivialClass { pfaffian });
    }
    let w = from_real(&u);
    let bound = operator_norm(&(&s - mul(&mul(&w, &s0(n)), &w.transpose())));
    Ok(WitnessReport {
        witness: w,
        bound,
        certified: bound <= norm_defect + 1e-8,
        norm_defect,
    })
}

/// Witness for Hermitian `S` with `S^{♯⊗♯} = −S`: a unitary `W` with
/// `W^{♯⊗♯} = W*` and `‖S − W·diag(I, −I)·W*‖ ≤ ‖S² − I‖`, obtained as
/// `Φ⁻¹(W₂ W₁ᵀ)` from the real witnesses `W₁` of `Φ(diag(I, −I))` and `W₂`
/// of `Φ(S)`.
pub fn k2_twisted_witness(s: &ComplexMatrix) -> Result<WitnessReport> {
    let size = require_square(s)?;
    if size % 4 != 0 {
        return Err(Error::BadDimension { size, multiple: 4 });
    }
    require_hermitian(s)?;
    let s = require_tau(s, sharp_sharp, -1.0)?;
    let norm_defect = norm_condition(&s)?;
    let j = trivial_bott_matrix(size / 2);
    let w1 = k2_real_witness(&antisymmetrized(&phi_conjugate(&j)?))?.witness;
    let w2 = k2_real_witness(&antisymmetrized(&phi_conjugate(&s)?))?.witness;
    let w = phi_inverse(&mul(&w2, &w1.transpose()))?;
    let bound = operator_norm(&(&s - mul(&mul(&w, &j), &w.adjoint())));
    Ok(WitnessReport {
        witness: w,
        bound,
        certified: bound <= norm_defect + 1e-8,
        norm_defect,
    })
}

fn antisymmetrized(x: &ComplexMatrix) -> ComplexMatrix {
    hermitian_part(&((x - x.transpose()) * c64(0.5, 0.0)))
}

/// A commuting pair extracted from an almost representation of the
/// sphere, with its residuals.
#[derive(Debug, Clone)]
pub struct CommutingPair {
    pub u: ComplexMatrix,
    pub k: ComplexMatrix,
    /// `‖[U, K]‖`.
    pub commutator_residual: f64,
    /// `‖U^τ − U‖`; zero in the complex class.
    pub symmetry_residual: f64,
    /// `‖U(1 − K²)^{1/2} − (H₁ + iH₂)‖`.
    pub reconstruction_residual: f64,
    /// Size of the perturbation applied to make the witness blocks
    /// invertible; zero when none was needed.
    pub perturbation: f64,
}

/// `U = polar(A)*·polar(B)` and `K = H₃`, where `[A*; B*]` are the first
/// columns of a structured witness for the polar part of the Bott matrix.
///
/// The symmetric class uses [`k2_quaternion_witness`], the self-dual class
/// [`k2_twisted_witness`] (which reports a nontrivial Pfaffian-Bott class
/// as [`Error::NontrivialClass`]). When a block is nearly singular the
/// witness is moved by `exp(εG)` with `G` in the Lie algebra of its
/// symmetry group, `ε` starting at ten times the deficit.
pub fn commuting_pair_from_sphere(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    h3: &ComplexMatrix,
    class: SymmetryClass,
    seed: u64,
) -> Result<CommutingPair> {
    let n = require_square(h1)?;
    require_same_shape(h1, h2)?;
    require_same_shape(h1, h3)?;
    class.check_size(n)?;
    let hs = [h1, h2, h3].map(|h| symmetry::enforce(&hermitian_part(h), class));
    let [h1, h2, h3] = hs;
    let (h1, h2, h3) = (h1?, h2?, h3?);
    let b = bott_matrix(&h1, &h2, &h3)?;
    let eig = herm_eig(&b, DEFAULT_TOL)?;
    let gap = eig.gap();
    if gap < DEFAULT_GAP_TOL {
        return Err(Error::GapTooSmall { gap });
    }
    let mut w = match class {
        SymmetryClass::Symmetric => k2_quaternion_witness(&eig.apply_fn(f64::signum))?.witness,
        SymmetryClass::SelfDual => k2_twisted_witness(&eig.apply_fn(f64::signum))?.witness,
        SymmetryClass::Complex => {
            // descending order puts the positive eigenvectors first
            let m = 2 * n;
            ComplexMatrix::from_fn(m, m, |r, c| eig.vectors[(r, m - 1 - c)])
        }
    };
    let tau_big = move |x: &ComplexMatrix| -> ComplexMatrix {
        match class {
            SymmetryClass::Symmetric => dual(x).expect("even size"),
            SymmetryClass::SelfDual => sharp_sharp(x).expect("size 4N"),
            SymmetryClass::Complex => -x,
        }
    };
    let mut rng = rng(seed);
    let mut perturbation = 0.0;
    let mut blocks = witness_blocks(&w, n);
    let deficit = BLOCK_SIGMA_MIN - blocks.2;
    if deficit > 0.0 {
        let mut eps = 10.0 * deficit.max(f64::EPSILON);
        let original = w.clone();
        let mut fixed = false;
        for _ in 0..PERTURBATION_RETRIES {
            let g = random_lie_element(&mut rng, 2 * n, tau_big);
            let g = &g * c64(1.0 / operator_norm(&g).max(1e-300), 0.0);
            w = mul(&original, &exp_skew_hermitian(&g, eps));
            blocks = witness_blocks(&w, n);
            if blocks.2 >= BLOCK_SIGMA_MIN {
                perturbation = eps;
                fixed = true;
                break;
            }
            eps *= 10.0;
        }
        if !fixed {
            return Err(Error::PerturbationFailed);
        }
        log::debug!("witness perturbed by {perturbation:.3e}");
    }
    let (a, bb, _) = blocks;
    let u = mul_adj(
        &polar(&a, DEFAULT_SIGMA_MIN_TOL)?,
        &polar(&bb, DEFAULT_SIGMA_MIN_TOL)?,
    );
    let k = h3;
    let commutator_residual = operator_norm(&crate::matkernel::commutator(&u, &k));
    let symmetry_residual = tau_residual(&u, class)?;
    let root = psd_sqrt(&(identity(n) - mul(&k, &k)), 1e-6)?;
    let target = &h1 + &h2 * c64(0.0, 1.0);
    let reconstruction_residual = operator_norm(&(mul(&u, &root) - target));
    let _ = rng.gen::<u8>();
    Ok(CommutingPair {
        u,
        k,
        commutator_residual,
        symmetry_residual,
        reconstruction_residual,
        perturbation,
    })
}

/// `(A, B, min σ)` with `A*`, `B*` the upper and lower `n×n` blocks of the
/// first `n` columns of `w`.
fn witness_blocks(w: &ComplexMatrix, n: usize) -> (ComplexMatrix, ComplexMatrix, f64) {
    let a = w.view((0, 0), (n, n)).adjoint();
    let b = w.view((n, 0), (n, n)).adjoint();
    let sigma = smallest_singular_value(&a).min(smallest_singular_value(&b));
    (a, b, sigma)
}

/// `‖polar(a*b) − polar(a)*·polar(b)‖` for invertible `a`, `b` with
/// `aa* + bb* = I`.
pub fn polar_product_check(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let n = require_square(a)?;
    require_same_shape(a, b)?;
    let residual = operator_norm(&(mul(a, &a.adjoint()) + mul(b, &b.adjoint()) - identity(n)));
    if residual > 1e-8 {
        return Err(Error::HypothesisFailed { residual });
    }
    let sigma = smallest_singular_value(a).min(smallest_singular_value(b));
    if sigma < DEFAULT_SIGMA_MIN_TOL {
        return Err(Error::HypothesisFailed { residual: sigma });
    }
    let lhs = polar(&mul_adj(a, b), DEFAULT_SIGMA_MIN_TOL)?;
    let rhs = mul_adj(
        &polar(a, DEFAULT_SIGMA_MIN_TOL)?,
        &polar(b, DEFAULT_SIGMA_MIN_TOL)?,
    );
    Ok(operator_norm(&(lhs - rhs)))
}
