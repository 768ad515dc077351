//! The Bott matrix, the Bott and Pfaffian-Bott indices, the lift from a pair
//! of almost commuting unitaries to an almost representation of the sphere,
//! and the indices of position matrices compressed by a projection.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{
    anticommutator, c64, common_eigenbasis, herm_eig, hermitian_part, identity, mul, mul_adj,
    operator_norm, pfaffian_real_skew, polar, require_same_shape, require_square,
    signature_and_gap, skew_hermitian_part, unitarity_defect, zeros, ComplexMatrix, C64,
    DEFAULT_SIGMA_MIN_TOL,
};
use crate::random::{random_vector, rng};
use crate::relations::{sphere_residual, torus2_residual};
use crate::symmetry::{self, phi_conjugate, tau_residual, time_reversal, SymmetryClass};
use crate::wannier::compress_positions;
use crate::{elapsed_since, Stopwatch};

/// Sphere residual at which the Bott matrix is guaranteed invertible.
pub const SPHERE_RESIDUAL_LIMIT: f64 = 0.25;
/// Largest unitarity defect accepted before polar correction.
pub const MAX_UNITARY_DEFECT: f64 = 0.1;
/// Default bound on `‖[P, X̂_r]‖` for compressed indices.
pub const DEFAULT_COMMUTATOR_LIMIT: f64 = 0.5;
/// Relative distance from self-duality tolerated (and symmetrized away).
pub const SELF_DUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    /// Bott index, or ±1 for the Pfaffian-Bott index.
    pub value: i64,
    /// Smallest eigenvalue magnitude of the Bott matrix.
    pub gap: f64,
    /// Relation residual of the tuple as given (sphere or torus).
    pub input_residual: f64,
    /// Sphere residual of the Hermitian triple fed to the Bott matrix.
    pub sphere_residual: f64,
    pub class: SymmetryClass,
    pub elapsed_seconds: f64,
}

/// `B = [[H₃, H₁ + iH₂], [H₁ − iH₂, −H₃]]`.
pub fn bott_matrix(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    h3: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = require_square(h1)?;
    require_same_shape(h1, h2)?;
    require_same_shape(h1, h3)?;
    let mut b = zeros(2 * n);
    let ih2 = h2 * c64(0.0, 1.0);
    b.view_mut((0, 0), (n, n)).copy_from(h3);
    b.view_mut((0, n), (n, n)).copy_from(&(h1 + &ih2));
    b.view_mut((n, 0), (n, n)).copy_from(&(h1 - &ih2));
    b.view_mut((n, n), (n, n)).copy_from(&(-h3));
    Ok(b)
}

/// Bott index of a Hermitian triple with sphere residual below 1/4.
pub fn bott_index(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    h3: &ComplexMatrix,
    gap_tol: f64,
) -> Result<IndexReport> {
    bott_index_with_limit(h1, h2, h3, gap_tol, Some(SPHERE_RESIDUAL_LIMIT))
}

/// [`bott_index`] with a caller-chosen residual gate; `None` skips it and
/// relies on the spectral gap alone.
pub fn bott_index_with_limit(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    h3: &ComplexMatrix,
    gap_tol: f64,
    residual_limit: Option<f64>,
) -> Result<IndexReport> {
    let clock = Stopwatch::start();
    let delta = gated_sphere_residual(h1, h2, h3, residual_limit)?;
    let (value, gap) = signature_and_gap(&bott_matrix(h1, h2, h3)?, gap_tol)?;
    Ok(IndexReport {
        value,
        gap,
        input_residual: delta,
        sphere_residual: delta,
        class: SymmetryClass::Complex,
        elapsed_seconds: elapsed_since(clock),
    })
}

fn gated_sphere_residual(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    h3: &ComplexMatrix,
    limit: Option<f64>,
) -> Result<f64> {
    let delta = sphere_residual(h1, h2, h3)?.delta;
    match limit {
        Some(limit) if delta >= limit => Err(Error::ResidualTooLarge { delta, limit }),
        _ => Ok(delta),
    }
}

/// Pfaffian-Bott index of a self-dual Hermitian triple.
pub fn pf_bott_index(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    h3: &ComplexMatrix,
    gap_tol: f64,
) -> Result<IndexReport> {
    pf_bott_index_with_limit(h1, h2, h3, gap_tol, Some(SPHERE_RESIDUAL_LIMIT))
}

pub fn pf_bott_index_with_limit(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    h3: &ComplexMatrix,
    gap_tol: f64,
    residual_limit: Option<f64>,
) -> Result<IndexReport> {
    let clock = Stopwatch::start();
    let n = require_square(h1)?;
    SymmetryClass::SelfDual.check_size(n)?;
    let delta = gated_sphere_residual(h1, h2, h3, residual_limit)?;
    let (h1, h2, h3) = (
        require_self_dual(h1)?,
        require_self_dual(h2)?,
        require_self_dual(h3)?,
    );
    let (value, gap) = pf_bott_value(&bott_matrix(&h1, &h2, &h3)?, gap_tol)?;
    Ok(IndexReport {
        value,
        gap,
        input_residual: delta,
        sphere_residual: delta,
        class: SymmetryClass::SelfDual,
        elapsed_seconds: elapsed_since(clock),
    })
}

fn require_self_dual(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let residual = tau_residual(x, SymmetryClass::SelfDual)?;
    if residual > SELF_DUAL_TOL * operator_norm(x).max(1.0) {
        return Err(Error::NotSelfDual { residual });
    }
    symmetry::symmetrize(x, SymmetryClass::SelfDual)
}

/// Sign of the Pfaffian of `−i·Φ(polar B)`, normalized so that
/// `diag(I, −I)` has index `+1`.
fn pf_bott_value(b: &ComplexMatrix, gap_tol: f64) -> Result<(i64, f64)> {
    let eig = herm_eig(b, crate::matkernel::DEFAULT_TOL)?;
    let gap = eig.gap();
    if gap < gap_tol {
        return Err(Error::GapTooSmall { gap });
    }
    if b.nrows() == 0 {
        return Ok((1, f64::INFINITY));
    }
    let s = eig.apply_fn(f64::signum);
    let r = phi_conjugate(&s)? * c64(0.0, -1.0);
    let imag = r.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let skew = operator_norm(&(&r + r.transpose()));
    let residual = imag.max(skew);
    if residual > 1e-6 {
        return Err(Error::NotSkewAfterPhi { residual });
    }
    let real = r.map(|z| c64(z.re, 0.0));
    let pf = pfaffian_real_skew(&real, 1e-6)?;
    let quarter = b.nrows() / 4;
    let parity = if quarter.is_multiple_of(2) { 1 } else { -1 };
    Ok((if pf > 0.0 { parity } else { -parity }, gap))
}

/// The functions `f, g, h` on the unit circle used by the torus-to-sphere
/// lift. They satisfy `f² + g² + h² = 1` and `gh = 0`.
#[derive(Clone, Default)]
pub enum CircleFunctions {
    /// `f = cos θ`; `h = sin θ` on `[0, π]`, else 0; `g = −sin θ` on
    /// `[π, 2π]`, else 0.
    #[default]
    Piecewise,
    /// Any other choice, evaluated pointwise on eigenvalue angles.
    Custom(Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>),
}

impl fmt::Debug for CircleFunctions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircleFunctions::Piecewise => f.write_str("Piecewise"),
            CircleFunctions::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl CircleFunctions {
    pub fn custom(fns: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        CircleFunctions::Custom(Arc::new(fns))
    }

    /// `(f, g, h)` at angle `θ`.
    pub fn eval(&self, theta: f64) -> [f64; 3] {
        match self {
            CircleFunctions::Piecewise => {
                let t = theta.rem_euclid(std::f64::consts::TAU);
                let (s, c) = t.sin_cos();
                if t <= std::f64::consts::PI {
                    [c, 0.0, s.max(0.0)]
                } else {
                    [c, (-s).max(0.0), 0.0]
                }
            }
            CircleFunctions::Custom(fns) => fns(theta),
        }
    }

    /// Largest `|f² + g² + h² − 1|` and largest `|gh|` over a uniform grid.
    pub fn max_defects(&self, samples: usize) -> (f64, f64) {
        (0..samples).fold((0.0f64, 0.0f64), |(sum, prod), k| {
            let t = std::f64::consts::TAU * k as f64 / samples as f64;
            let [f, g, h] = self.eval(t);
            (
                sum.max((f * f + g * g + h * h - 1.0).abs()),
                prod.max((g * h).abs()),
            )
        })
    }
}

pub fn default_circle_functions() -> CircleFunctions {
    CircleFunctions::Piecewise
}

/// `(H₁, H₂, H₃)` from a pair of unitaries:
/// `H₁ = f(U₂)`, `H₂ = g(U₂) + ¼{h(U₂), U₁*} + ¼{h(U₂), U₁}`,
/// `H₃ = (i/4){h(U₂), U₁*} − (i/4){h(U₂), U₁}`.
pub fn torus_to_sphere(
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
    fns: &CircleFunctions,
) -> Result<[ComplexMatrix; 3]> {
    require_square(u1)?;
    require_same_shape(u1, u2)?;
    let defect = unitarity_defect(u2);
    if defect > 1e-8 {
        return Err(Error::NotUnitary { residual: defect });
    }
    let [f, g, h] = circle_calculus(u2, fns)?;
    let quarter = c64(0.25, 0.0);
    let a_adj = anticommutator(&h, &u1.adjoint());
    let a = anticommutator(&h, u1);
    let h2 = g + (&a_adj + &a) * quarter;
    let h3 = (a_adj - a) * c64(0.0, 0.25);
    Ok([hermitian_part(&f), hermitian_part(&h2), hermitian_part(&h3)])
}

/// `f(U), g(U), h(U)` for a unitary `U`.
fn circle_calculus(u: &ComplexMatrix, fns: &CircleFunctions) -> Result<[ComplexMatrix; 3]> {
    let re = hermitian_part(u);
    let im = skew_hermitian_part(u);
    match fns {
        CircleFunctions::Piecewise => {
            // sin θ ≥ 0 exactly on [0, π], so h and g are the positive and
            // negative parts of Im U
            let eig = herm_eig(&im, 1e-6)?;
            let h = eig.apply_fn(|l| l.max(0.0));
            let g = eig.apply_fn(|l| (-l).max(0.0));
            Ok([re, g, h])
        }
        CircleFunctions::Custom(_) => {
            let v = common_eigenbasis(&[re, im], 1e-9, &mut rng(0))?;
            let d = mul(&mul_adj(&v, u), &v);
            let n = u.nrows();
            let mut out = [zeros(n), zeros(n), zeros(n)];
            for (k, m) in out.iter_mut().enumerate() {
                let mut scaled = v.clone();
                for j in 0..n {
                    let value = fns.eval(d[(j, j)].arg())[k];
                    for x in scaled.column_mut(j).iter_mut() {
                        *x *= value;
                    }
                }
                *m = mul(&scaled, &v.adjoint());
            }
            Ok(out)
        }
    }
}

/// Polar-corrected lift of a near-unitary pair. Returns the triple, the
/// torus residual of the inputs and their largest unitarity defect.
fn lift_near_unitaries(
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
    fns: &CircleFunctions,
    max_defect: Option<f64>,
) -> Result<([ComplexMatrix; 3], f64, f64)> {
    let torus = torus2_residual(u1, u2)?.delta;
    let defect = unitarity_defect(u1).max(unitarity_defect(u2));
    if let Some(limit) = max_defect {
        if defect > limit {
            return Err(Error::NotUnitary { residual: defect });
        }
    }
    let p1 = polar(u1, DEFAULT_SIGMA_MIN_TOL)?;
    let p2 = polar(u2, DEFAULT_SIGMA_MIN_TOL)?;
    Ok((torus_to_sphere(&p1, &p2, fns)?, torus, defect))
}

/// `Bott(U₁, U₂)`: polar correction, lift to the sphere, signature.
///
/// No sphere-residual gate is applied to the lifted triple; the spectral
/// gap of the Bott matrix is the certificate.
pub fn bott_index_unitaries(
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
    fns: &CircleFunctions,
    gap_tol: f64,
) -> Result<IndexReport> {
    let clock = Stopwatch::start();
    let (h, torus, _) = lift_near_unitaries(u1, u2, fns, Some(MAX_UNITARY_DEFECT))?;
    let mut report = bott_index_with_limit(&h[0], &h[1], &h[2], gap_tol, None)?;
    report.input_residual = torus;
    report.elapsed_seconds = elapsed_since(clock);
    Ok(report)
}

/// `Pf-Bott(U₁, U₂)` for self-dual near-unitaries.
pub fn pf_bott_unitaries(
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
    fns: &CircleFunctions,
    gap_tol: f64,
) -> Result<IndexReport> {
    let clock = Stopwatch::start();
    let u1 = require_self_dual(u1)?;
    let u2 = require_self_dual(u2)?;
    let (h, torus, _) = lift_near_unitaries(&u1, &u2, fns, Some(MAX_UNITARY_DEFECT))?;
    let mut report = pf_bott_index_with_limit(&h[0], &h[1], &h[2], gap_tol, None)?;
    report.input_residual = torus;
    report.elapsed_seconds = elapsed_since(clock);
    Ok(report)
}

/// Index of positions compressed to the range of a projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedReport {
    pub index: IndexReport,
    /// `max_r ‖[P, X̂_r]‖`.
    pub delta: f64,
    /// Two-circle residual of `W* X̂_r W`.
    pub compressed_residual: f64,
    pub rank: usize,
    /// Largest unitarity defect of `X₁ + iX₂` and `X₃ + iX₄` before polar
    /// correction.
    pub unitarity_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionOptions {
    pub gap_tol: f64,
    pub commutator_limit: f64,
    pub seed: u64,
}

impl Default for CompressionOptions {
    fn default() -> Self {
        CompressionOptions {
            gap_tol: crate::matkernel::DEFAULT_GAP_TOL,
            commutator_limit: DEFAULT_COMMUTATOR_LIMIT,
            seed: 0,
        }
    }
}

/// `Bott(P; X̂)` (complex and symmetric classes) or `Pf-Bott(P; X̂)`
/// (self-dual class) with the default commutator limit.
pub fn compressed_index(
    p: &ComplexMatrix,
    xs: &[ComplexMatrix; 4],
    class: SymmetryClass,
    gap_tol: f64,
    seed: u64,
) -> Result<CompressedReport> {
    compressed_index_with(
        p,
        xs,
        class,
        &CompressionOptions {
            gap_tol,
            seed,
            ..Default::default()
        },
    )
}

pub fn compressed_index_with(
    p: &ComplexMatrix,
    xs: &[ComplexMatrix; 4],
    class: SymmetryClass,
    opts: &CompressionOptions,
) -> Result<CompressedReport> {
    let clock = Stopwatch::start();
    let comp = compress_positions(p, xs, class, opts.seed)?;
    if comp.delta >= opts.commutator_limit {
        return Err(Error::CommutatorTooLarge {
            delta: comp.delta,
            limit: opts.commutator_limit,
        });
    }
    let rank = comp.w.ncols();
    let trivial = if class == SymmetryClass::SelfDual {
        1
    } else {
        0
    };
    if rank == 0 {
        return Ok(CompressedReport {
            index: IndexReport {
                value: trivial,
                gap: f64::INFINITY,
                input_residual: comp.residual,
                sphere_residual: 0.0,
                class,
                elapsed_seconds: elapsed_since(clock),
            },
            delta: comp.delta,
            compressed_residual: comp.residual,
            rank,
            unitarity_defect: 0.0,
        });
    }
    let i = c64(0.0, 1.0);
    let x = &comp.compressed;
    let u1 = &x[0] + &x[1] * i;
    let u2 = &x[2] + &x[3] * i;
    // compressed tuples are only 2δ-unitary; polar correction needs just
    // invertibility here
    let (h, _, defect) = if class == SymmetryClass::SelfDual {
        let u1 = require_self_dual(&u1)?;
        let u2 = require_self_dual(&u2)?;
        lift_near_unitaries(&u1, &u2, &CircleFunctions::Piecewise, None)?
    } else {
        lift_near_unitaries(&u1, &u2, &CircleFunctions::Piecewise, None)?
    };
    let mut index = if class == SymmetryClass::SelfDual {
        pf_bott_index_with_limit(&h[0], &h[1], &h[2], opts.gap_tol, None)?
    } else {
        bott_index_with_limit(&h[0], &h[1], &h[2], opts.gap_tol, None)?
    };
    index.class = class;
    index.input_residual = comp.residual;
    index.elapsed_seconds = elapsed_since(clock);
    Ok(CompressedReport {
        index,
        delta: comp.delta,
        compressed_residual: comp.residual,
        rank,
        unitarity_defect: defect,
    })
}

/// An isometry `W` with `WW* = P` adapted to the class: real columns for
/// the symmetric class, and `W = [B, −Z B̄]` (so that
/// `W* = −Z_{N₁} Wᵀ Z_N`) for the self-dual class.
///
/// Columns come from seeded random vectors projected by `P` and accepted by
/// greedy Gram-Schmidt.
pub fn structured_isometry(
    p: &ComplexMatrix,
    class: SymmetryClass,
    seed: u64,
) -> Result<ComplexMatrix> {
    let n = require_square(p)?;
    class.check_size(n)?;
    let rank = p.trace().re.round().max(0.0) as usize;
    let paired = class == SymmetryClass::SelfDual;
    if paired && rank % 2 == 1 {
        return Err(Error::PairingFailure);
    }
    let target = if paired { rank / 2 } else { rank };
    let mut rng = rng(seed);
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(rank);
    let mut partners: Vec<DVector<C64>> = Vec::with_capacity(target);
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < target {
        attempts += 1;
        if attempts > 10 * rank + 20 {
            return Err(Error::PairingFailure);
        }
        let v = DVector::from_vec(random_vector(
            &mut rng,
            n,
            class == SymmetryClass::Symmetric,
        ));
        let mut w = p * v;
        if class == SymmetryClass::Symmetric {
            w = w.map(|z| c64(z.re, 0.0));
        }
        let start = w.norm();
        for _ in 0..2 {
            for c in cols.iter().chain(partners.iter()) {
                let proj = c.dotc(&w);
                w -= c * proj;
            }
        }
        let norm = w.norm();
        if norm < 0.1 * start || norm < 1e-10 {
            continue;
        }
        w /= c64(norm, 0.0);
        if paired {
            partners.push(DVector::from_vec(time_reversal(w.as_slice())));
        }
        cols.push(w);
        accepted += 1;
    }
    cols.extend(partners);
    let mut w = ComplexMatrix::zeros(n, cols.len());
    for (k, c) in cols.iter().enumerate() {
        w.set_column(k, c);
    }
    let range = operator_norm(&(mul(&w, &w.adjoint()) - p));
    if range > 1e-6 || crate::matkernel::isometry_defect(&w) > 1e-10 {
        log::debug!("structured isometry misses the range of P by {range:.3e}");
        return Err(Error::PairingFailure);
    }
    Ok(w)
}

/// `Σ_r H_r ⊗ σ_r` with `σ₁ = [[0,1],[1,0]]`, `σ₂ = [[0,i],[−i,0]]`,
/// `σ₃ = diag(1,−1)` acting on the outer block index; equal to
/// [`bott_matrix`].
pub fn pauli_sum(h: &[ComplexMatrix; 3]) -> ComplexMatrix {
    let n = h[0].nrows();
    let (o, one, i) = (c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 1.0));
    let sigma = [
        [[o, one], [one, o]],
        [[o, i], [-i, o]],
        [[one, o], [o, -one]],
    ];
    let mut out = zeros(2 * n);
    for (hr, s) in h.iter().zip(sigma) {
        for (bi, row) in s.iter().enumerate() {
            for (bj, &coef) in row.iter().enumerate() {
                let mut view = out.view_mut((bi * n, bj * n), (n, n));
                view += hr * coef;
            }
        }
    }
    out
}

/// `diag(I, −I)` of size `2n`.
pub fn trivial_bott_matrix(n: usize) -> ComplexMatrix {
    let mut j = identity(2 * n);
    for k in n..2 * n {
        j[(k, k)] = c64(-1.0, 0.0);
    }
    j
}
