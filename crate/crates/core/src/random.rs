//! Seeded random matrices for sweeps, self-tests and witness perturbations.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matkernel::{
    c64, from_real, herm_eig, hermitian_part, polar, zeros, ComplexMatrix, C64, DEFAULT_TOL,
};
use crate::symmetry::{self, SymmetryClass};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform on [−1, 1).
pub fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_real(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut impl Rng, n: usize, real: bool) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            c64(re, im)
        })
        .collect()
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    hermitian_part(&random_matrix(rng, n))
}

/// Real symmetric, viewed as a complex Hermitian matrix.
pub fn random_real_symmetric(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = random_real(rng, n);
    from_real(&((&a + a.transpose()) * 0.5))
}

pub fn random_real_skew(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = random_real(rng, n);
    from_real(&((&a - a.transpose()) * 0.5))
}

/// Hermitian and τ-fixed for the given class.
pub fn random_class_hermitian(rng: &mut impl Rng, n: usize, class: SymmetryClass) -> ComplexMatrix {
    let h = random_hermitian(rng, n);
    symmetry::symmetrize(&h, class).expect("class-compatible size")
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    loop {
        if let Ok(u) = polar(&random_matrix(rng, n), 1e-6) {
            return u;
        }
    }
}

pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let u = exp_skew_hermitian(&random_real_skew(rng, n), 2.0);
    u.map(|z| z.re)
}

/// A random element `G` with `G* = −G` and `G^τ = −G` for the supplied
/// involution `tau`; exponentials of these stay in the structured group.
pub fn random_lie_element(
    rng: &mut impl Rng,
    n: usize,
    tau: impl Fn(&ComplexMatrix) -> ComplexMatrix,
) -> ComplexMatrix {
    let m = random_matrix(rng, n);
    let g0 = (&m - m.adjoint()) * c64(0.5, 0.0);
    (&g0 - tau(&g0)) * c64(0.5, 0.0)
}

/// `exp(t·G)` for skew-Hermitian `G`, through the Hermitian matrix `iG`.
pub fn exp_skew_hermitian(g: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = g.nrows();
    if n == 0 {
        return zeros(0);
    }
    let h = g * c64(0.0, 1.0);
    let eig = herm_eig(&hermitian_part(&h), DEFAULT_TOL).expect("hermitian by construction");
    let mut scaled = eig.vectors.clone();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let phase = c64(0.0, -t * l).exp();
        for v in scaled.column_mut(k).iter_mut() {
            *v *= phase;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// Random symplectic unitary: `W^♯ = W* = W⁻¹`.
pub fn random_symplectic_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_lie_element(rng, n, |x| symmetry::dual(x).expect("even size"));
    exp_skew_hermitian(&g, 2.0)
}

/// Random unitary with `W^{♯⊗♯} = W*`.
pub fn random_twisted_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_lie_element(rng, n, |x| symmetry::sharp_sharp(x).expect("size 4N"));
    exp_skew_hermitian(&g, 2.0)
}

/// Hermitian matrix with spectrum bounded by one: `H / ‖H‖`.
pub fn random_contraction(rng: &mut impl Rng, n: usize, class: SymmetryClass) -> ComplexMatrix {
    let h = random_class_hermitian(rng, n, class);
    let norm = crate::matkernel::operator_norm(&h).max(1e-300);
    h * c64(1.0 / norm, 0.0)
}

/// Uniform random unit vector in R³.
pub fn random_sphere_point(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let p = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0f64),
        ];
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if r > 1e-3 && r <= 1.0 {
            return [p[0] / r, p[1] / r, p[2] / r];
        }
    }
}
