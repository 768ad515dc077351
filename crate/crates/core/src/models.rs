//! Example systems: the Voiculescu pair, self-dual doubling, exact position
//! matrices on a discrete torus, and Fermi projections of the Harper
//! (Hofstadter) model.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{
    c64, commutator, herm_eig, operator_norm, require_same_shape, require_square, zeros,
    ComplexMatrix, DEFAULT_TOL,
};

/// Distance from the Fermi level to the spectrum below which there is no
/// usable gap.
pub const FERMI_GAP_TOL: f64 = 1e-6;

/// `A_n` is the cyclic shift `e_k ↦ e_{k+1}` and `B_n = diag(e^{2πik/n})`
/// for `k = 1..n`.
pub fn voiculescu(n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut a = zeros(n);
    let mut b = zeros(n);
    for k in 0..n {
        a[((k + 1) % n, k)] = c64(1.0, 0.0);
        // reduce the angle so the last entry is exactly 1
        let j = (k + 1) % n;
        let (s, c) = (TAU * j as f64 / n as f64).sin_cos();
        b[(k, k)] = c64(c, s);
    }
    (a, b)
}

/// `(diag(U₁, U₁ᵀ), diag(U₂, U₂ᵀ))`, self-dual for the size-matched `Z`.
pub fn selfdual_double(
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    require_square(u1)?;
    require_same_shape(u1, u2)?;
    Ok((block_transpose_pair(u1), block_transpose_pair(u2)))
}

fn block_transpose_pair(u: &ComplexMatrix) -> ComplexMatrix {
    let n = u.nrows();
    let mut v = zeros(2 * n);
    v.view_mut((0, 0), (n, n)).copy_from(u);
    v.view_mut((n, n), (n, n)).copy_from(&u.transpose());
    v
}

/// `L × L` periodic lattice with uniform flux per plaquette.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub side: usize,
    pub flux: f64,
    pub fermi_level: f64,
    /// 1, or 2 for the time-reversal doubled model.
    pub orbitals: usize,
}

impl LatticeSpec {
    pub fn new(side: usize, flux: f64, fermi_level: f64, orbitals: usize) -> Result<Self> {
        let spec = LatticeSpec {
            side,
            flux,
            fermi_level,
            orbitals,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.side < 2 {
            return Err(Error::InvalidSpec(format!("side {} < 2", self.side)));
        }
        if !(0.0..1.0).contains(&self.flux) {
            return Err(Error::InvalidSpec(format!(
                "flux {} outside [0, 1)",
                self.flux
            )));
        }
        if self.orbitals != 1 && self.orbitals != 2 {
            return Err(Error::InvalidSpec(format!(
                "orbitals must be 1 or 2, got {}",
                self.orbitals
            )));
        }
        if !self.fermi_level.is_finite() {
            return Err(Error::InvalidSpec("fermi level is not finite".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.side * self.side
    }

    pub fn dimension(&self) -> usize {
        self.orbitals * self.sites()
    }

    /// Reads `side`/`L`, `flux`, `fermi`/`fermi_level` and `orbitals`
    /// from a parsed key=value map.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        fn get<T: FromStr>(map: &BTreeMap<String, String>, keys: &[&str]) -> Result<Option<T>> {
            for key in keys {
                if let Some(v) = map.get(*key) {
                    return v
                        .parse()
                        .map(Some)
                        .map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`")));
                }
            }
            Ok(None)
        }
        let side =
            get(map, &["side", "L"])?.ok_or_else(|| Error::InvalidSpec("missing `side`".into()))?;
        let flux = get(map, &["flux"])?.unwrap_or(0.0);
        let fermi = get(map, &["fermi_level", "fermi"])?.unwrap_or(0.0);
        let orbitals = get(map, &["orbitals"])?.unwrap_or(1);
        LatticeSpec::new(side, flux, fermi, orbitals)
    }
}

impl FromStr for LatticeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LatticeSpec::from_map(&crate::io::parse_config(s)?)
    }
}

/// Site `(x, y)` is stored at index `x + L·y`.
fn site(side: usize, x: usize, y: usize) -> usize {
    (x % side) + side * (y % side)
}

fn doubled(m: &ComplexMatrix, conj_second: bool) -> ComplexMatrix {
    let n = m.nrows();
    let mut out = zeros(2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(m);
    let second = if conj_second {
        m.map(|z| z.conj())
    } else {
        m.clone()
    };
    out.view_mut((n, n), (n, n)).copy_from(&second);
    out
}

/// `X₁ = cos(2πx/L)`, `X₂ = sin(2πx/L)`, `X₃ = cos(2πy/L)`,
/// `X₄ = sin(2πy/L)`, diagonal over sites; repeated on both orbitals when
/// doubled.
pub fn torus_positions(spec: &LatticeSpec) -> [ComplexMatrix; 4] {
    let l = spec.side;
    let mut xs = [zeros(l * l), zeros(l * l), zeros(l * l), zeros(l * l)];
    for y in 0..l {
        for x in 0..l {
            let k = site(l, x, y);
            let (sx, cx) = (TAU * x as f64 / l as f64).sin_cos();
            let (sy, cy) = (TAU * y as f64 / l as f64).sin_cos();
            for (m, v) in xs.iter_mut().zip([cx, sx, cy, sy]) {
                m[(k, k)] = c64(v, 0.0);
            }
        }
    }
    if spec.orbitals == 2 {
        xs = xs.map(|m| doubled(&m, false));
    }
    xs
}

/// Nearest-neighbour hopping `−1` in the Landau gauge: the hop from
/// `(x, y)` to `(x, y+1)` carries the phase `e^{2πiφx}`. Periodicity in
/// `x` needs `φL` to be an integer.
pub fn harper_hamiltonian(spec: &LatticeSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let l = spec.side;
    let fl = spec.flux * l as f64;
    if (fl - fl.round()).abs() > 1e-9 {
        return Err(Error::InvalidSpec(format!(
            "flux·side = {fl} must be an integer on a periodic lattice"
        )));
    }
    let mut h = zeros(l * l);
    for y in 0..l {
        for x in 0..l {
            let from = site(l, x, y);
            h[(site(l, x + 1, y), from)] += c64(-1.0, 0.0);
            let phase = c64(0.0, TAU * spec.flux * x as f64).exp();
            h[(site(l, x, y + 1), from)] += -phase;
        }
    }
    let h = &h + h.adjoint();
    Ok(if spec.orbitals == 2 {
        doubled(&h, true)
    } else {
        h
    })
}

#[derive(Debug, Clone)]
pub struct HarperModel {
    pub hamiltonian: ComplexMatrix,
    /// Spectral projection onto energies below the Fermi level.
    pub projection: ComplexMatrix,
    /// `‖[P, X̂_r]‖` for the four torus positions.
    pub commutator_norms: [f64; 4],
    /// Distance from the Fermi level to the spectrum.
    pub gap: f64,
    pub rank: usize,
}

pub fn harper_projection(spec: &LatticeSpec) -> Result<HarperModel> {
    let h = harper_hamiltonian(spec)?;
    let eig = herm_eig(&h, DEFAULT_TOL)?;
    let gap = eig
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, l| m.min((l - spec.fermi_level).abs()));
    if gap < FERMI_GAP_TOL {
        return Err(Error::NoGap { distance: gap });
    }
    let rank = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l < spec.fermi_level)
        .count();
    let p = eig.apply_fn(|l| if l < spec.fermi_level { 1.0 } else { 0.0 });
    let xs = torus_positions(spec);
    let commutator_norms = [0, 1, 2, 3].map(|r| operator_norm(&commutator(&p, &xs[r])));
    Ok(HarperModel {
        hamiltonian: h,
        projection: p,
        commutator_norms,
        gap,
        rank,
    })
}

/// Spectral gaps wider than `min_width` as `(below, above)` eigenvalue
/// pairs, lowest first.
pub fn spectral_gaps(h: &ComplexMatrix, min_width: f64) -> Result<Vec<(f64, f64)>> {
    let eig = herm_eig(h, DEFAULT_TOL)?;
    Ok(eig
        .eigenvalues
        .windows(2)
        .filter(|w| w[1] - w[0] > min_width)
        .map(|w| (w[0], w[1]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::{identity, unitarity_defect};
    use crate::relations::torus4_residual;
    use crate::symmetry::{tau_residual, SymmetryClass};

    #[test]
    fn voiculescu_small_cases() {
        let (a, b) = voiculescu(2);
        assert_eq!(a[(0, 1)], c64(1.0, 0.0));
        assert_eq!(a[(1, 0)], c64(1.0, 0.0));
        assert!((b[(0, 0)] - c64(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(b[(1, 1)], c64(1.0, 0.0));
        let (a, b) = voiculescu(4);
        let c = operator_norm(&commutator(&a, &b));
        assert!((c - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(&a * a.transpose(), identity(4));
        assert!(unitarity_defect(&b) < 1e-15);
    }

    #[test]
    fn shift_moves_basis_forward() {
        let (a, _) = voiculescu(5);
        // e_0 ↦ e_1 and the corner sends e_4 ↦ e_0
        assert_eq!(a[(1, 0)], c64(1.0, 0.0));
        assert_eq!(a[(0, 4)], c64(1.0, 0.0));
    }

    #[test]
    fn doubling_is_self_dual() {
        let (a, b) = voiculescu(6);
        let (v1, v2) = selfdual_double(&a, &b).unwrap();
        assert!(tau_residual(&v1, SymmetryClass::SelfDual).unwrap() <= 1e-12);
        assert!(tau_residual(&v2, SymmetryClass::SelfDual).unwrap() <= 1e-12);
        let (c1, c2) = selfdual_double(&a, &a).unwrap();
        assert!(operator_norm(&commutator(&c1, &c2)) == 0.0);
        assert!(selfdual_double(&a, &identity(3)).is_err());
    }

    #[test]
    fn positions_small_lattice() {
        let spec = LatticeSpec::new(2, 0.0, 0.0, 1).unwrap();
        let xs = torus_positions(&spec);
        let d: Vec<f64> = (0..4).map(|k| xs[0][(k, k)].re).collect();
        assert_eq!(d, vec![1.0, -1.0, 1.0, -1.0]);
        let d: Vec<f64> = (0..4).map(|k| xs[2][(k, k)].re).collect();
        assert_eq!(d, vec![1.0, 1.0, -1.0, -1.0]);
        assert!(xs[1].iter().all(|z| z.norm() < 1e-15));
        for l in [3, 5, 8] {
            let xs = torus_positions(&LatticeSpec::new(l, 0.0, 0.0, 1).unwrap());
            let r = torus4_residual([&xs[0], &xs[1], &xs[2], &xs[3]]).unwrap();
            assert!(r.delta <= 1e-15);
        }
        let xs = torus_positions(&LatticeSpec::new(3, 0.0, 0.0, 2).unwrap());
        for x in &xs {
            assert_eq!(x.nrows(), 18);
            assert!(tau_residual(x, SymmetryClass::SelfDual).unwrap() < 1e-15);
        }
    }

    #[test]
    fn spec_validation_and_parsing() {
        assert!(LatticeSpec::new(1, 0.0, 0.0, 1).is_err());
        assert!(LatticeSpec::new(4, 1.0, 0.0, 1).is_err());
        assert!(LatticeSpec::new(4, 0.0, 0.0, 3).is_err());
        let spec: LatticeSpec = "side = 12\nflux = 0.3333333333333333\nfermi = -1.3\n"
            .parse()
            .unwrap();
        assert_eq!(spec.side, 12);
        assert_eq!(spec.orbitals, 1);
        assert!((spec.fermi_level + 1.3).abs() < 1e-15);
        assert!("flux = 0.5".parse::<LatticeSpec>().is_err());
    }

    #[test]
    fn harper_projection_properties() {
        let spec = LatticeSpec::new(12, 1.0 / 3.0, -1.3, 1).unwrap();
        let m = harper_projection(&spec).unwrap();
        let p = &m.projection;
        assert!(operator_norm(&(p * p - p)) <= 1e-12);
        assert!(operator_norm(&(p - p.adjoint())) <= 1e-12);
        assert_eq!(m.rank, 48);
        assert!(m.gap > 0.3);
    }

    #[test]
    fn harper_commutators_shrink_with_size() {
        let norms: Vec<f64> = [6, 12, 24]
            .iter()
            .map(|&l| {
                let spec = LatticeSpec::new(l, 1.0 / 3.0, -1.3, 1).unwrap();
                let m = harper_projection(&spec).unwrap();
                m.commutator_norms.iter().copied().fold(0.0, f64::max)
            })
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    }

    #[test]
    fn harper_doubled_is_self_dual() {
        let spec = LatticeSpec::new(6, 1.0 / 3.0, -1.3, 2).unwrap();
        let m = harper_projection(&spec).unwrap();
        assert!(tau_residual(&m.hamiltonian, SymmetryClass::SelfDual).unwrap() < 1e-12);
        assert!(tau_residual(&m.projection, SymmetryClass::SelfDual).unwrap() < 1e-12);
    }

    #[test]
    fn harper_errors() {
        let spec = LatticeSpec::new(10, 1.0 / 3.0, -1.3, 1).unwrap();
        assert!(matches!(
            harper_projection(&spec),
            Err(Error::InvalidSpec(_))
        ));
        // the flux-free band touches E = 0 at the corners of the zone
        let spec = LatticeSpec::new(4, 0.0, 0.0, 1).unwrap();
        assert!(matches!(harper_projection(&spec), Err(Error::NoGap { .. })));
    }
}
