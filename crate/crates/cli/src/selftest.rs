//! Oracle suites: each pits a production routine against an independent
//! computation and prints one PASS/FAIL line.

use bott_core::invariants::{bott_index_unitaries, default_circle_functions};
use bott_core::matkernel::{
    c64, checked_svd, diag_real, herm_eig, herm_fn, identity, mul, mul_adj, operator_norm,
    pfaffian_combinatorial, pfaffian_real_skew, polar, DEFAULT_GAP_TOL, DEFAULT_SIGMA_MIN_TOL,
    DEFAULT_TOL,
};
use bott_core::models::voiculescu;
use bott_core::random::{random_hermitian, random_matrix, random_real_skew, rng};

type Suite = fn(u64) -> Result<String, String>;

/// Runs every suite; true when all pass.
pub fn run(seed: u64) -> bool {
    let suites: [(&str, Suite); 4] = [
        ("pfaffian", pfaffian),
        ("polar-svd", polar_svd),
        ("eig-reconstruction", eig_reconstruction),
        ("voiculescu-index", voiculescu_index),
    ];
    let mut ok = true;
    for (name, suite) in suites {
        match suite(seed) {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                ok = false;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    ok
}

/// Elimination Pfaffian against the permutation expansion.
fn pfaffian(seed: u64) -> Result<String, String> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for k in 0..60 {
        let n = 2 * (1 + k % 6);
        let a = random_real_skew(&mut r, n);
        let fast = pfaffian_real_skew(&a, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let slow = pfaffian_combinatorial(&a).map_err(|e| e.to_string())?;
        let rel = (c64(fast, 0.0) - slow).norm() / slow.norm().max(1e-12);
        worst = worst.max(rel);
    }
    verdict(worst, 1e-10, "relative deviation over 60 matrices")
}

/// SVD polar factor against `X (X*X)^{-1/2}` from the eigensolver, plus
/// SVD reconstruction.
fn polar_svd(seed: u64) -> Result<String, String> {
    let mut r = rng(seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for k in 0..30 {
        let n = 2 + k % 12;
        let x = random_matrix(&mut r, n);
        let u = polar(&x, DEFAULT_SIGMA_MIN_TOL).map_err(|e| e.to_string())?;
        let inv_root = herm_fn(&mul_adj(&x, &x), DEFAULT_TOL, |l| 1.0 / l.sqrt())
            .map_err(|e| e.to_string())?;
        worst = worst.max(operator_norm(&(u - mul(&x, &inv_root))));
        let (left, s, right) = checked_svd(&x).map_err(|e| e.to_string())?;
        let back = mul(&mul(&left, &diag_real(&s)), &right);
        worst = worst.max(operator_norm(&(back - &x)) / operator_norm(&x));
    }
    verdict(worst, 1e-8, "max deviation over 30 matrices")
}

/// `V Λ V* = H` and `V*V = I` for random Hermitian matrices.
fn eig_reconstruction(seed: u64) -> Result<String, String> {
    let mut r = rng(seed.wrapping_add(2));
    let mut worst = 0.0f64;
    for k in 0..30 {
        let n = 1 + k % 40;
        let h = random_hermitian(&mut r, n);
        let eig = herm_eig(&h, DEFAULT_TOL).map_err(|e| e.to_string())?;
        worst = worst.max(operator_norm(&(eig.reconstruct() - &h)) / operator_norm(&h).max(1.0));
        worst = worst.max(operator_norm(
            &(mul_adj(&eig.vectors, &eig.vectors) - identity(n)),
        ));
    }
    verdict(worst, 1e-10, "max residual over 30 matrices")
}

/// `Bott(A_n, B_n) = 1` for the cyclic shift and clock pair.
fn voiculescu_index(_seed: u64) -> Result<String, String> {
    let fns = default_circle_functions();
    for n in [8, 16, 32] {
        let (a, b) = voiculescu(n);
        let rep = bott_index_unitaries(&a, &b, &fns, DEFAULT_GAP_TOL).map_err(|e| e.to_string())?;
        if rep.value != 1 {
            return Err(format!("n = {n}: index {}", rep.value));
        }
    }
    Ok("index 1 for n = 8, 16, 32".into())
}

fn verdict(worst: f64, tol: f64, what: &str) -> Result<String, String> {
    let msg = format!("{what} {worst:.2e} (tolerance {tol:.0e})");
    if worst <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}
