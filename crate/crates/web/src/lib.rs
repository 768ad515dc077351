//! Browser bindings: each export returns a JSON string, either a result
//! object or `{"error": name, "message": text}`.

use bott_core::invariants::{
    bott_index_unitaries, bott_matrix, compressed_index, default_circle_functions,
    pf_bott_unitaries, torus_to_sphere,
};
use bott_core::matkernel::{herm_eig, DEFAULT_GAP_TOL, DEFAULT_TOL};
use bott_core::models::{
    harper_projection, selfdual_double, torus_positions, voiculescu, LatticeSpec,
};
use bott_core::{Error, Result, SymmetryClass};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Sizes above this are refused to keep the page responsive.
pub const MAX_SIZE: usize = 256;

fn respond(result: Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.name(), "message": e.to_string() }).to_string(),
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SIZE {
        return Err(Error::InvalidSpec(format!(
            "size {n} outside 1..={MAX_SIZE}"
        )));
    }
    Ok(())
}

/// Bott index of the shift/clock pair of size `n` with the spectrum of
/// its Bott matrix.
#[wasm_bindgen]
pub fn voiculescu_index(n: usize) -> String {
    respond(voiculescu_value(n))
}

fn voiculescu_value(n: usize) -> Result<Value> {
    check_size(n)?;
    let (a, b) = voiculescu(n);
    let fns = default_circle_functions();
    let rep = bott_index_unitaries(&a, &b, &fns, DEFAULT_GAP_TOL)?;
    let [h1, h2, h3] = torus_to_sphere(&a, &b, &fns)?;
    let spectrum = herm_eig(&bott_matrix(&h1, &h2, &h3)?, DEFAULT_TOL)?.eigenvalues;
    Ok(json!({
        "n": n,
        "value": rep.value,
        "gap": rep.gap,
        "residual": rep.input_residual,
        "spectrum": spectrum,
    }))
}

/// Pfaffian-Bott index of the self-dual doubling of the shift/clock pair.
#[wasm_bindgen]
pub fn doubled_pf_bott(n: usize) -> String {
    respond(doubled_value(n))
}

fn doubled_value(n: usize) -> Result<Value> {
    check_size(n)?;
    let (a, b) = voiculescu(n);
    let (a, b) = selfdual_double(&a, &b)?;
    let rep = pf_bott_unitaries(&a, &b, &default_circle_functions(), DEFAULT_GAP_TOL)?;
    Ok(json!({
        "n": n,
        "value": rep.value,
        "gap": rep.gap,
        "residual": rep.input_residual,
    }))
}

/// Compressed index of the Harper model on an `side × side` torus, with
/// the energy spectrum for plotting. `doubled` selects the time-reversal
/// doubled model and the Pfaffian-Bott index.
#[wasm_bindgen]
pub fn harper_index(side: usize, flux: f64, fermi: f64, doubled: bool, seed: u32) -> String {
    respond(harper_value(side, flux, fermi, doubled, seed))
}

fn harper_value(side: usize, flux: f64, fermi: f64, doubled: bool, seed: u32) -> Result<Value> {
    let orbitals = if doubled { 2 } else { 1 };
    check_size(side.saturating_mul(side).saturating_mul(orbitals))?;
    let spec = LatticeSpec::new(side, flux, fermi, orbitals)?;
    let model = harper_projection(&spec)?;
    let energies = herm_eig(&model.hamiltonian, DEFAULT_TOL)?.eigenvalues;
    let class = if doubled {
        SymmetryClass::SelfDual
    } else {
        SymmetryClass::Complex
    };
    let rep = compressed_index(
        &model.projection,
        &torus_positions(&spec),
        class,
        DEFAULT_GAP_TOL,
        u64::from(seed),
    )?;
    Ok(json!({
        "value": rep.index.value,
        "class": class.as_str(),
        "gap": rep.index.gap,
        "delta": rep.delta,
        "rank": rep.rank,
        "fermi_gap": model.gap,
        "energies": energies,
    }))
}
