//! Wannier spreads of orthonormal sets against position matrices, the
//! continuity and compression bounds on them, compression of positions to
//! the range of a projection, and localized bases for commuting sets.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::structured_isometry;
use crate::matkernel::{
    c64, common_eigenbasis, commutator, identity, isometry_defect, mul, mul_adj, operator_norm,
    require_same_shape, require_square, ComplexMatrix, C64,
};
use crate::random::rng;
use crate::relations::torus4_residual;
use crate::symmetry::SymmetryClass;

/// Orthonormality slack accepted for a basis.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    /// `σ²_X(b_j)` for each basis vector.
    pub per_vector: Vec<f64>,
    pub total: f64,
    pub maximum: f64,
    /// Number of position matrices.
    pub d: usize,
}

impl SpreadReport {
    pub const CSV_HEADER: &'static str = "basis_index,sigma2,running_total,running_max";

    /// One row per basis vector with running sum and maximum.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut total = 0.0;
        let mut max = 0.0f64;
        self.per_vector
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                total += s;
                max = max.max(s);
                format!("{j},{s:e},{total:e},{max:e}")
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}

fn check_set(xs: &[ComplexMatrix]) -> Result<usize> {
    let n = match xs.first() {
        Some(x) => require_square(x)?,
        None => return Ok(0),
    };
    for x in &xs[1..] {
        require_same_shape(&xs[0], x)?;
    }
    Ok(n)
}

/// `σ²_X(b) = Σ_r ⟨X_r²b, b⟩ − ⟨X_r b, b⟩²` for every column `b` of
/// `basis`, evaluated in the variance form `‖(X_r − μ_r) b‖²`.
pub fn spread(xs: &[ComplexMatrix], basis: &ComplexMatrix) -> Result<SpreadReport> {
    let n = check_set(xs)?;
    if !xs.is_empty() && basis.nrows() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n} rows"),
            found: format!("{} rows", basis.nrows()),
        });
    }
    let residual = isometry_defect(basis);
    if residual > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { residual });
    }
    let images: Vec<ComplexMatrix> = xs.iter().map(|x| mul(x, basis)).collect();
    let per_vector: Vec<f64> = (0..basis.ncols())
        .map(|j| {
            let b = basis.column(j);
            images
                .iter()
                .map(|xb| {
                    let xb = xb.column(j);
                    let mean = b.dotc(&xb).re;
                    (xb - b * c64(mean, 0.0)).norm_squared()
                })
                .sum()
        })
        .collect();
    Ok(SpreadReport {
        total: per_vector.iter().sum(),
        maximum: per_vector.iter().copied().fold(0.0, f64::max),
        per_vector,
        d: xs.len(),
    })
}

/// `‖X‖ = max_r ‖X_r‖`.
pub fn set_norm(xs: &[ComplexMatrix]) -> f64 {
    xs.iter().map(operator_norm).fold(0.0, f64::max)
}

/// `dist(X, Y) = max_r ‖X_r − Y_r‖`.
pub fn set_distance(xs: &[ComplexMatrix], ys: &[ComplexMatrix]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| operator_norm(&(x - y)))
        .fold(0.0, f64::max)
}

fn require_contractions(xs: &[ComplexMatrix]) -> Result<()> {
    let norm = set_norm(xs);
    if norm > 1.0 + 1e-12 {
        return Err(Error::NormTooLarge { norm });
    }
    Ok(())
}

/// Both sides of `μ_X(B) ≤ μ_Y(B) + 4d·dist(X, Y)` for contraction sets.
pub fn spread_continuity_check(
    xs: &[ComplexMatrix],
    ys: &[ComplexMatrix],
    basis: &ComplexMatrix,
) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} matrices", xs.len()),
            found: format!("{} matrices", ys.len()),
        });
    }
    require_contractions(xs)?;
    require_contractions(ys)?;
    let lhs = spread(xs, basis)?.maximum;
    let rhs = spread(ys, basis)?.maximum + 4.0 * xs.len() as f64 * set_distance(xs, ys);
    Ok((lhs, rhs))
}

/// Positions compressed to the range of a projection.
#[derive(Debug, Clone)]
pub struct Compression {
    /// Isometry with `WW* = P`.
    pub w: ComplexMatrix,
    /// `W* X̂_r W`.
    pub compressed: [ComplexMatrix; 4],
    /// `max_r ‖[P, X̂_r]‖`.
    pub delta: f64,
    /// Two-circle residual of the compressed tuple; at most `2δ`.
    pub residual: f64,
    /// The `8dδ` allowance in the spread bound for compressed bases.
    pub spread_budget: f64,
}

/// Compresses an exact two-circle representation `X̂` by `P`.
pub fn compress_positions(
    p: &ComplexMatrix,
    xs: &[ComplexMatrix; 4],
    class: SymmetryClass,
    seed: u64,
) -> Result<Compression> {
    let n = require_square(p)?;
    let proj = operator_norm(&(mul(p, p) - p)).max(operator_norm(&(p - p.adjoint())));
    if proj > 1e-8 {
        return Err(Error::NotProjection { residual: proj });
    }
    for x in xs {
        require_same_shape(p, x)?;
    }
    let exact = torus4_residual([&xs[0], &xs[1], &xs[2], &xs[3]])?.delta;
    if exact > 1e-8 {
        return Err(Error::NotExactRepresentation { delta: exact });
    }
    let delta = xs
        .iter()
        .map(|x| operator_norm(&commutator(p, x)))
        .fold(0.0, f64::max);
    let w = structured_isometry(p, class, seed)?;
    let compressed = [0, 1, 2, 3].map(|r| mul(&mul_adj(&w, &xs[r]), &w));
    let residual = if w.ncols() == 0 {
        0.0
    } else {
        torus4_residual([
            &compressed[0],
            &compressed[1],
            &compressed[2],
            &compressed[3],
        ])?
        .delta
    };
    debug_assert!(n == w.nrows());
    Ok(Compression {
        w,
        compressed,
        delta,
        residual,
        spread_budget: 8.0 * 4.0 * delta,
    })
}

/// Orthonormal common eigenbasis of a commuting family, with its spread.
#[derive(Debug, Clone)]
pub struct CommonBasis {
    pub basis: ComplexMatrix,
    pub spread: SpreadReport,
    /// `maximum spread / tol`, the achieved constant in `μ ≤ c·tol`.
    pub constant: f64,
}

/// Common eigenbasis of Hermitian matrices whose pairwise commutators are
/// at most `tol`.
pub fn eigenbasis_commuting(ys: &[ComplexMatrix], tol: f64, seed: u64) -> Result<CommonBasis> {
    let n = check_set(ys)?;
    let mut worst = 0.0f64;
    for i in 0..ys.len() {
        for j in (i + 1)..ys.len() {
            worst = worst.max(operator_norm(&commutator(&ys[i], &ys[j])));
        }
    }
    if worst > tol {
        return Err(Error::NotCommuting { residual: worst });
    }
    let basis = if ys.is_empty() {
        identity(n)
    } else {
        common_eigenbasis(ys, 1e-9 + tol, &mut rng(seed))?
    };
    let spread = spread(ys, &basis)?;
    let constant = if tol > 0.0 { spread.maximum / tol } else { 0.0 };
    Ok(CommonBasis {
        basis,
        spread,
        constant,
    })
}

/// `Σ_r Σ_{i≠j} |(X_r)_{ij}|²`.
pub fn off_diagonal_mass(xs: &[ComplexMatrix]) -> f64 {
    xs.iter()
        .map(|x| {
            let mut s = 0.0;
            for (k, z) in x.iter().enumerate() {
                if k % (x.nrows() + 1) != 0 {
                    s += z.norm_sqr();
                }
            }
            s
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct JointDiagonalization {
    pub v: ComplexMatrix,
    /// Off-diagonal mass before the first sweep and after each sweep.
    pub off_history: Vec<f64>,
}

/// Jacobi-style joint approximate diagonalization of Hermitian matrices
/// with closed-form complex 2×2 rotations, sweeping pairs in row-major
/// order. Stops after `sweeps` sweeps or when a sweep improves the
/// off-diagonal mass by less than `tol`.
pub fn joint_approx_diag(
    xs: &[ComplexMatrix],
    sweeps: usize,
    tol: f64,
) -> Result<JointDiagonalization> {
    let n = check_set(xs)?;
    let mut a: Vec<ComplexMatrix> = xs.to_vec();
    let mut v = identity(n);
    let mut history = vec![off_diagonal_mass(&a)];
    for _ in 0..sweeps {
        for p in 0..n {
            for q in (p + 1)..n {
                rotate_pair(&mut a, &mut v, p, q);
            }
        }
        let off = off_diagonal_mass(&a);
        let prev = *history.last().expect("history is nonempty");
        history.push(off);
        if prev - off < tol {
            break;
        }
    }
    Ok(JointDiagonalization {
        v,
        off_history: history,
    })
}

fn rotate_pair(a: &mut [ComplexMatrix], v: &mut ComplexMatrix, p: usize, q: usize) {
    let i = c64(0.0, 1.0);
    let mut gram = Matrix3::<f64>::zeros();
    for m in a.iter() {
        let g = [
            m[(p, p)] - m[(q, q)],
            m[(p, q)] + m[(q, p)],
            i * (m[(q, p)] - m[(p, q)]),
        ];
        for r in 0..3 {
            for s in 0..3 {
                gram[(r, s)] += (g[r] * g[s].conj()).re;
            }
        }
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.imax();
    let mut angles = eig.eigenvectors.column(top).into_owned();
    if angles[0] < 0.0 {
        angles = -angles;
    }
    let c = (0.5 + angles[0] / 2.0).sqrt();
    let s: C64 = c64(angles[1], -angles[2]) * (0.5 / c);
    if s.norm() < 1e-15 {
        return;
    }
    // G = [[c, −s̄], [s, c]]; A ← Gᴴ A G on rows/columns p, q, V ← V G
    let cc = c64(c, 0.0);
    for m in a.iter_mut() {
        for k in 0..m.nrows() {
            let (xp, xq) = (m[(k, p)], m[(k, q)]);
            m[(k, p)] = cc * xp + s * xq;
            m[(k, q)] = -s.conj() * xp + cc * xq;
        }
        for k in 0..m.ncols() {
            let (xp, xq) = (m[(p, k)], m[(q, k)]);
            m[(p, k)] = cc * xp + s.conj() * xq;
            m[(q, k)] = -s * xp + cc * xq;
        }
    }
    for k in 0..v.nrows() {
        let (xp, xq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = cc * xp + s * xq;
        v[(k, q)] = -s.conj() * xp + cc * xq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::{diag_real, herm_eig, DEFAULT_TOL};
    use crate::models::{torus_positions, voiculescu, LatticeSpec};
    use crate::random::{random_hermitian, random_unitary};

    #[test]
    fn spread_of_eigenvectors() {
        let x = diag_real(&[0.5, -0.2, 0.1]);
        let rep = spread(std::slice::from_ref(&x), &identity(3)).unwrap();
        assert_eq!(rep.per_vector, vec![0.0, 0.0, 0.0]);
        assert_eq!(rep.d, 1);
        let mut b = ComplexMatrix::zeros(3, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        b[(0, 0)] = c64(s, 0.0);
        b[(1, 0)] = c64(0.0, s);
        let rep = spread(&[x], &b).unwrap();
        // variance of the two-point distribution on {0.5, −0.2}
        assert!((rep.total - 0.1225).abs() < 1e-15);
    }

    #[test]
    fn spread_matches_direct_formula() {
        let mut r = rng(1);
        let xs: Vec<ComplexMatrix> = (0..3).map(|_| random_hermitian(&mut r, 5)).collect();
        let basis = random_unitary(&mut r, 5);
        let rep = spread(&xs, &basis).unwrap();
        for (j, &value) in rep.per_vector.iter().enumerate() {
            let b = basis.column(j);
            let direct: f64 = xs
                .iter()
                .map(|x| {
                    let second = b.dotc(&(x * x * b)).re;
                    let first = b.dotc(&(x * b)).re;
                    second - first * first
                })
                .sum();
            assert!((direct - value).abs() < 1e-12);
            assert!(value >= -1e-12);
        }
        assert!((rep.total - rep.per_vector.iter().sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn spread_rejects_bad_basis() {
        let b = identity(3) * c64(2.0, 0.0);
        assert!(matches!(
            spread(&[identity(3)], &b),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn continuity_holds() {
        let mut r = rng(2);
        let xs: Vec<ComplexMatrix> = (0..4)
            .map(|_| {
                let h = random_hermitian(&mut r, 6);
                let n = operator_norm(&h);
                h * c64(0.9 / n, 0.0)
            })
            .collect();
        let basis = random_unitary(&mut r, 6);
        let (lhs, rhs) = spread_continuity_check(&xs, &xs, &basis).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
        let big = vec![identity(6) * c64(2.0, 0.0)];
        assert!(matches!(
            spread_continuity_check(&big, &big, &basis),
            Err(Error::NormTooLarge { .. })
        ));
    }

    #[test]
    fn compression_by_identity_is_trivial() {
        let spec = LatticeSpec::new(3, 0.0, 0.0, 1).unwrap();
        let xs = torus_positions(&spec);
        let c = compress_positions(&identity(9), &xs, SymmetryClass::Complex, 0).unwrap();
        assert_eq!(c.delta, 0.0);
        assert!(c.residual < 1e-12);
    }

    #[test]
    fn compression_commuting_projection() {
        let spec = LatticeSpec::new(4, 0.0, 0.0, 1).unwrap();
        let xs = torus_positions(&spec);
        let d: Vec<f64> = (0..16)
            .map(|k| if k % 2 == 0 { 1.0 } else { 0.0 })
            .collect();
        let p = diag_real(&d);
        let c = compress_positions(&p, &xs, SymmetryClass::Symmetric, 1).unwrap();
        assert!(c.delta < 1e-15);
        assert!(c.residual < 1e-10);
        for x in &c.compressed {
            assert!(operator_norm(x) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn compression_errors() {
        let spec = LatticeSpec::new(2, 0.0, 0.0, 1).unwrap();
        let xs = torus_positions(&spec);
        let not_p = identity(4) * c64(0.5, 0.0);
        assert!(matches!(
            compress_positions(&not_p, &xs, SymmetryClass::Complex, 0),
            Err(Error::NotProjection { .. })
        ));
        let mut bad = xs.clone();
        bad[0] = identity(4) * c64(0.5, 0.0);
        assert!(matches!(
            compress_positions(&identity(4), &bad, SymmetryClass::Complex, 0),
            Err(Error::NotExactRepresentation { .. })
        ));
    }

    #[test]
    fn eigenbasis_of_commuting_sets() {
        let ys = vec![diag_real(&[1.0, 2.0, 3.0]), diag_real(&[0.0, 0.0, 1.0])];
        let cb = eigenbasis_commuting(&ys, 1e-12, 0).unwrap();
        assert!(cb.spread.maximum <= 1e-10);
        let mut r = rng(3);
        let u = random_unitary(&mut r, 8);
        let ys: Vec<ComplexMatrix> = [
            [1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0],
            [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        ]
        .iter()
        .map(|d| &u * diag_real(d) * u.adjoint())
        .collect();
        let cb = eigenbasis_commuting(&ys, 1e-10, 4).unwrap();
        assert!(cb.spread.maximum <= 1e-10, "{}", cb.spread.maximum);
        let (a, b) = voiculescu(4);
        let noncommuting = vec![
            crate::matkernel::hermitian_part(&a),
            crate::matkernel::hermitian_part(&b),
        ];
        assert!(matches!(
            eigenbasis_commuting(&noncommuting, 1e-6, 0),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn jacobi_on_commuting_and_single() {
        let mut r = rng(5);
        let u = random_unitary(&mut r, 6);
        let xs: Vec<ComplexMatrix> = [
            [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            [0.3, 0.1, -0.2, 0.0, 0.9, 1.1],
        ]
        .iter()
        .map(|d| &u * diag_real(d) * u.adjoint())
        .collect();
        let jd = joint_approx_diag(&xs, 50, 1e-14).unwrap();
        let rotated: Vec<ComplexMatrix> = xs.iter().map(|x| jd.v.adjoint() * x * &jd.v).collect();
        assert!(off_diagonal_mass(&rotated) < 1e-10);
        assert!(isometry_defect(&jd.v) < 1e-12);

        let h = random_hermitian(&mut r, 7);
        let jd = joint_approx_diag(std::slice::from_ref(&h), 50, 1e-15).unwrap();
        let rotated = jd.v.adjoint() * &h * &jd.v;
        let eig = herm_eig(&h, DEFAULT_TOL).unwrap();
        let ref_mass = off_diagonal_mass(&[eig.vectors.adjoint() * &h * &eig.vectors]);
        assert!(off_diagonal_mass(&[rotated]) <= ref_mass + 1e-10);
    }

    #[test]
    fn jacobi_off_mass_is_monotone() {
        let (a, b) = voiculescu(10);
        let xs = vec![
            crate::matkernel::hermitian_part(&a),
            crate::matkernel::skew_hermitian_part(&a),
            crate::matkernel::hermitian_part(&b),
            crate::matkernel::skew_hermitian_part(&b),
        ];
        let jd = joint_approx_diag(&xs, 30, 1e-12).unwrap();
        assert!(jd.off_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(jd.off_history.last().unwrap() < &jd.off_history[0]);
    }

    #[test]
    fn csv_rows() {
        let rep = SpreadReport {
            per_vector: vec![1.0, 3.0, 2.0],
            total: 6.0,
            maximum: 3.0,
            d: 2,
        };
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SpreadReport::CSV_HEADER);
        assert_eq!(lines[3], "2,2e0,6e0,3e0");
    }
}
