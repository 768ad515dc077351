//! The involutions acting on square complex matrices: transpose, the dual
//! `X^♯ = −Z Xᵀ Z`, the coupled dual `♯⊗♯` on `4N` matrices, the unitary
//! conjugation Φ that turns `♯⊗♯` into the transpose, and the quaternion
//! embedding χ.
//!
//! # Block conventions
//!
//! `Z_N = [[0, I], [−I, 0]]` with `N×N` blocks. A `4N` matrix is read by
//! `♯⊗♯` as a 2×2 array of `2N` blocks, the outer index being the `M_2`
//! factor, so `B ⊗ [[0,1],[0,0]]` sits in the upper-right block. For `N = 1`
//! with entries `x_{ij}`:
//!
//! ```text
//! [ x00 x01 | x02 x03 ]            [  x33 -x23 | -x13  x03 ]
//! [ x10 x11 | x12 x13 ]   ♯⊗♯      [ -x32  x22 |  x12 -x02 ]
//! [---------+---------]   ---->    [-----------+-----------]
//! [ x20 x21 | x22 x23 ]            [ -x31  x21 |  x11 -x01 ]
//! [ x30 x31 | x32 x33 ]            [  x30 -x20 | -x10  x00 ]
//! ```

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matkernel::{
    c64, mul, mul_adj, operator_norm, require_same_shape, require_square, zeros, ComplexMatrix, C64,
};

/// Relative threshold below which a matrix counts as τ-fixed.
pub const FIXED_TOL: f64 = 1e-8;

/// Which involution τ a tuple is required to respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryClass {
    /// No τ.
    Complex,
    /// τ = transpose.
    Symmetric,
    /// τ = ♯; even sizes only.
    SelfDual,
}

impl SymmetryClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryClass::Complex => "complex",
            SymmetryClass::Symmetric => "symmetric",
            SymmetryClass::SelfDual => "selfdual",
        }
    }

    /// `X^τ`, or `None` for the complex class.
    pub fn tau(self, x: &ComplexMatrix) -> Result<Option<ComplexMatrix>> {
        match self {
            SymmetryClass::Complex => Ok(None),
            SymmetryClass::Symmetric => Ok(Some(x.transpose())),
            SymmetryClass::SelfDual => dual(x).map(Some),
        }
    }

    pub fn check_size(self, n: usize) -> Result<()> {
        if self == SymmetryClass::SelfDual && n % 2 == 1 {
            return Err(Error::OddDimension { size: n });
        }
        Ok(())
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "complex" => Ok(SymmetryClass::Complex),
            "symmetric" | "real" => Ok(SymmetryClass::Symmetric),
            "selfdual" | "self-dual" => Ok(SymmetryClass::SelfDual),
            other => Err(Error::Parse(format!("unknown symmetry class `{other}`"))),
        }
    }
}

/// `Z_N = [[0, I], [−I, 0]]`, of size `2N`.
pub fn symplectic_form(half: usize) -> ComplexMatrix {
    let mut z = zeros(2 * half);
    for k in 0..half {
        z[(k, half + k)] = c64(1.0, 0.0);
        z[(half + k, k)] = c64(-1.0, 0.0);
    }
    z
}

fn half_size(x: &ComplexMatrix) -> Result<usize> {
    let n = require_square(x)?;
    if n % 2 == 1 {
        return Err(Error::OddDimension { size: n });
    }
    Ok(n / 2)
}

/// `X^♯ = −Z Xᵀ Z`, i.e. `[[A,B],[C,D]] ↦ [[Dᵀ, −Bᵀ], [−Cᵀ, Aᵀ]]`.
pub fn dual(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = half_size(x)?;
    let mut out = zeros(2 * h);
    for i in 0..h {
        for j in 0..h {
            out[(i, j)] = x[(h + j, h + i)];
            out[(i, h + j)] = -x[(j, h + i)];
            out[(h + i, j)] = -x[(h + j, i)];
            out[(h + i, h + j)] = x[(j, i)];
        }
    }
    Ok(out)
}

/// The antiunitary time reversal `ξ ↦ −Z ξ̄` on a vector of even length.
pub fn time_reversal(v: &[C64]) -> Vec<C64> {
    let h = v.len() / 2;
    let mut out = vec![c64(0.0, 0.0); v.len()];
    for k in 0..h {
        out[k] = -v[h + k].conj();
        out[h + k] = v[k].conj();
    }
    out
}

/// `‖X^τ − X‖`; zero for the complex class.
pub fn tau_residual(x: &ComplexMatrix, class: SymmetryClass) -> Result<f64> {
    Ok(match class.tau(x)? {
        None => 0.0,
        Some(t) => operator_norm(&(t - x)),
    })
}

/// `(X + X^τ)/2`.
pub fn symmetrize(x: &ComplexMatrix, class: SymmetryClass) -> Result<ComplexMatrix> {
    Ok(match class.tau(x)? {
        None => x.clone(),
        Some(t) => (x + t) * c64(0.5, 0.0),
    })
}

/// Symmetrizes `x`, logging a warning when it was farther than
/// [`FIXED_TOL`] (relative) from being τ-fixed.
pub fn enforce(x: &ComplexMatrix, class: SymmetryClass) -> Result<ComplexMatrix> {
    let residual = tau_residual(x, class)?;
    if residual > FIXED_TOL * operator_norm(x).max(1.0) {
        log::warn!("input is {residual:.3e} from {class}-symmetric; symmetrizing");
    }
    symmetrize(x, class)
}

pub fn is_fixed(x: &ComplexMatrix, class: SymmetryClass) -> Result<bool> {
    Ok(tau_residual(x, class)? <= FIXED_TOL * operator_norm(x).max(1.0))
}

/// `χ(A + B ĵ) = [[A, B], [−B̄, Ā]]`.
pub fn chi_embed(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = require_square(a)?;
    require_same_shape(a, b)?;
    let mut out = zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = a[(i, j)];
            out[(i, n + j)] = b[(i, j)];
            out[(n + i, j)] = -b[(i, j)].conj();
            out[(n + i, n + j)] = a[(i, j)].conj();
        }
    }
    Ok(out)
}

fn quarter_size(x: &ComplexMatrix) -> Result<usize> {
    let n = require_square(x)?;
    if n % 4 != 0 {
        return Err(Error::BadDimension {
            size: n,
            multiple: 4,
        });
    }
    Ok(n / 4)
}

fn block(x: &ComplexMatrix, r: usize, c: usize, m: usize) -> ComplexMatrix {
    x.view((r * m, c * m), (m, m)).into_owned()
}

/// `[[A,B],[C,D]]^{♯⊗♯} = [[D^♯, −B^♯], [−C^♯, A^♯]]` with `2N` blocks.
pub fn sharp_sharp(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let q = quarter_size(x)?;
    let m = 2 * q;
    let mut out = zeros(2 * m);
    let parts = [
        (0, 0, block(x, 1, 1, m), 1.0),
        (0, 1, block(x, 0, 1, m), -1.0),
        (1, 0, block(x, 1, 0, m), -1.0),
        (1, 1, block(x, 0, 0, m), 1.0),
    ];
    for (r, c, b, sign) in parts {
        let d = dual(&b)? * c64(sign, 0.0);
        out.view_mut((r * m, c * m), (m, m)).copy_from(&d);
    }
    Ok(out)
}

/// The unitary `(I⊗I − i Z_N⊗Z_1)/√2` of size `4N` implementing Φ, with
/// `Z_1 = [[0,1],[−1,0]]` acting on the outer 2×2 block index.
pub fn phi_unitary(quarter: usize) -> ComplexMatrix {
    let m = 2 * quarter;
    let z = symplectic_form(quarter);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = ComplexMatrix::identity(2 * m, 2 * m) * c64(s, 0.0);
    let minus_i = c64(0.0, -s);
    for i in 0..m {
        for j in 0..m {
            u[(i, m + j)] += minus_i * z[(i, j)];
            u[(m + i, j)] -= minus_i * z[(i, j)];
        }
    }
    u
}

/// `Φ(X) = U X U*`; carries `♯⊗♯` to the transpose.
pub fn phi_conjugate(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let u = phi_unitary(quarter_size(x)?);
    Ok(mul(&mul(&u, x), &u.adjoint()))
}

/// `Φ⁻¹(X) = U* X U`.
pub fn phi_inverse(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let u = phi_unitary(quarter_size(x)?);
    Ok(mul(&mul_adj(&u, x), &u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::{diag_real, identity, pfaffian_real_skew, times_i, DEFAULT_TOL};
    use crate::random::{random_hermitian, random_matrix, rng};

    fn pauli_blocks() -> [ComplexMatrix; 3] {
        let mut s1 = zeros(2);
        s1[(0, 1)] = c64(1.0, 0.0);
        s1[(1, 0)] = c64(1.0, 0.0);
        let mut s2 = zeros(2);
        s2[(0, 1)] = c64(0.0, 1.0);
        s2[(1, 0)] = c64(0.0, -1.0);
        [s1, s2, diag_real(&[1.0, -1.0])]
    }

    #[test]
    fn dual_of_identity_and_z() {
        assert_eq!(dual(&identity(4)).unwrap(), identity(4));
        let z = symplectic_form(3);
        assert_eq!(dual(&z).unwrap(), -&z);
    }

    #[test]
    fn dual_matches_defining_formula() {
        let mut r = rng(1);
        let x = random_matrix(&mut r, 6);
        let z = symplectic_form(3);
        let direct = -(&z * x.transpose() * &z);
        assert!(operator_norm(&(dual(&x).unwrap() - direct)) < 1e-14);
    }

    #[test]
    fn pauli_blocks_are_anti_self_dual() {
        for s in pauli_blocks() {
            assert_eq!(dual(&s).unwrap(), -&s);
        }
    }

    #[test]
    fn dual_laws() {
        let mut r = rng(2);
        let x = random_matrix(&mut r, 8);
        let y = random_matrix(&mut r, 8);
        let dx = dual(&x).unwrap();
        assert!(operator_norm(&(dual(&dx).unwrap() - &x)) < 1e-14);
        let lhs = dual(&(&x * &y)).unwrap();
        let rhs = dual(&y).unwrap() * &dx;
        assert!(operator_norm(&(lhs - rhs)) < 1e-12);
        assert!(operator_norm(&(dual(&x.adjoint()).unwrap() - dx.adjoint())) < 1e-14);
        assert!(matches!(
            dual(&identity(3)),
            Err(Error::OddDimension { size: 3 })
        ));
    }

    #[test]
    fn residual_and_symmetrize() {
        let z = symplectic_form(2);
        assert!((tau_residual(&z, SymmetryClass::SelfDual).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(symmetrize(&z, SymmetryClass::SelfDual).unwrap(), zeros(4));
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 5);
        let s = symmetrize(&h, SymmetryClass::Symmetric).unwrap();
        assert!(tau_residual(&s, SymmetryClass::Symmetric).unwrap() < 1e-15);
        // Hermitian + symmetric means real
        assert!(s.iter().all(|z| z.im.abs() < 1e-15));
        let fixed = symmetrize(&s, SymmetryClass::Symmetric).unwrap();
        assert_eq!(fixed, s);
        assert_eq!(tau_residual(&h, SymmetryClass::Complex).unwrap(), 0.0);
    }

    #[test]
    fn chi_embed_blocks() {
        assert_eq!(chi_embed(&identity(3), &zeros(3)).unwrap(), identity(6));
        assert_eq!(
            chi_embed(&zeros(3), &identity(3)).unwrap(),
            symplectic_form(3)
        );
        assert!(chi_embed(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn chi_commutes_with_time_reversal() {
        let mut r = rng(4);
        let a = random_matrix(&mut r, 3);
        let b = random_matrix(&mut r, 3);
        let x = chi_embed(&a, &b).unwrap();
        let z = symplectic_form(3);
        let lhs = x.map(|v| v.conj()) * &z;
        assert!(operator_norm(&(lhs - &z * &x)) < 1e-14);
    }

    #[test]
    fn sharp_sharp_examples() {
        assert_eq!(sharp_sharp(&identity(8)).unwrap(), identity(8));
        let j = diag_real(&[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(sharp_sharp(&j).unwrap(), -j);
        assert!(matches!(
            sharp_sharp(&identity(6)),
            Err(Error::BadDimension { .. })
        ));
    }

    #[test]
    fn sharp_sharp_worked_example() {
        let x = ComplexMatrix::from_fn(4, 4, |i, j| c64((4 * i + j) as f64, 0.0));
        let y = sharp_sharp(&x).unwrap();
        let e = |i: usize, j: usize| x[(i, j)];
        let expect = [
            [e(3, 3), -e(2, 3), -e(1, 3), e(0, 3)],
            [-e(3, 2), e(2, 2), e(1, 2), -e(0, 2)],
            [-e(3, 1), e(2, 1), e(1, 1), -e(0, 1)],
            [e(3, 0), -e(2, 0), -e(1, 0), e(0, 0)],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(y[(i, j)], expect[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn phi_laws() {
        let mut r = rng(5);
        let x = random_matrix(&mut r, 8);
        let y = random_matrix(&mut r, 8);
        let px = phi_conjugate(&x).unwrap();
        let lhs = phi_conjugate(&sharp_sharp(&x).unwrap()).unwrap();
        assert!(operator_norm(&(lhs - px.transpose())) < 1e-13);
        let pxy = phi_conjugate(&(&x * &y)).unwrap();
        assert!(operator_norm(&(pxy - &px * phi_conjugate(&y).unwrap())) < 1e-12);
        assert!(operator_norm(&(phi_inverse(&px).unwrap() - &x)) < 1e-13);
        assert!(operator_norm(&(phi_conjugate(&identity(4)).unwrap() - identity(4))) < 1e-15);
    }

    #[test]
    fn phi_of_trivial_representative_has_unit_pfaffian() {
        for q in 1..=4 {
            let mut d = vec![1.0; 2 * q];
            d.extend(vec![-1.0; 2 * q]);
            let p = phi_conjugate(&diag_real(&d)).unwrap();
            // Φ(J) is purely imaginary; Pf(iR) = (−1)^q Pf(R) on size 4q
            let real = times_i(&p) * c64(-1.0, 0.0);
            let pf = pfaffian_real_skew(&real.map(|z| c64(z.re, 0.0)), DEFAULT_TOL).unwrap();
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            assert!((sign * pf - 1.0).abs() < 1e-12, "q = {q}: {pf}");
        }
    }
}
