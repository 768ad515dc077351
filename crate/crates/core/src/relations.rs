//! Residuals for the soft sphere, torus and disk relations: the smallest δ
//! for which a tuple satisfies each relation set, with the per-constraint
//! breakdown.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matkernel::{
    commutator, identity, mul, mul_adj, operator_norm, require_same_shape, require_square,
    ComplexMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Sphere,
    Torus2,
    Torus4,
    Disk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relation: Relation,
    pub delta: f64,
    pub worst_term: String,
    pub per_term: Vec<(String, f64)>,
}

impl RelationReport {
    fn from_terms(relation: Relation, per_term: Vec<(String, f64)>) -> Self {
        let (worst_term, delta) =
            per_term
                .iter()
                .fold((String::new(), 0.0f64), |(name, best), (label, v)| {
                    if *v > best || name.is_empty() {
                        (label.clone(), *v)
                    } else {
                        (name, best)
                    }
                });
        RelationReport {
            relation,
            delta,
            worst_term,
            per_term,
        }
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.per_term
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
    }
}

fn check_tuple(ms: &[&ComplexMatrix]) -> Result<()> {
    require_square(ms[0])?;
    for m in &ms[1..] {
        require_same_shape(ms[0], m)?;
    }
    Ok(())
}

fn hermiticity_terms(ms: &[&ComplexMatrix], labels: &[&str], out: &mut Vec<(String, f64)>) {
    for (m, l) in ms.iter().zip(labels) {
        out.push((format!("herm({l})"), operator_norm(&(*m - m.adjoint()))));
    }
}

fn commutator_terms(ms: &[&ComplexMatrix], labels: &[&str], out: &mut Vec<(String, f64)>) {
    for i in 0..ms.len() {
        for j in (i + 1)..ms.len() {
            out.push((
                format!("[{},{}]", labels[i], labels[j]),
                operator_norm(&commutator(ms[i], ms[j])),
            ));
        }
    }
}

/// Sphere relations: Hermitian, pairwise commuting, `H₁² + H₂² + H₃² = I`.
pub fn sphere_residual(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    h3: &ComplexMatrix,
) -> Result<RelationReport> {
    let ms = [h1, h2, h3];
    let labels = ["H1", "H2", "H3"];
    check_tuple(&ms)?;
    let mut terms = Vec::new();
    hermiticity_terms(&ms, &labels, &mut terms);
    commutator_terms(&ms, &labels, &mut terms);
    let sum = mul(h1, h1) + mul(h2, h2) + mul(h3, h3) - identity(h1.nrows());
    terms.push(("sum_squares".into(), operator_norm(&sum)));
    Ok(RelationReport::from_terms(Relation::Sphere, terms))
}

/// Torus relations on two unitaries: unitarity defects and `‖[U₁,U₂]‖`.
pub fn torus2_residual(u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<RelationReport> {
    let ms = [u1, u2];
    check_tuple(&ms)?;
    let id = identity(u1.nrows());
    let mut terms = Vec::new();
    for (u, l) in ms.iter().zip(["U1", "U2"]) {
        terms.push((
            format!("unitary({l})"),
            operator_norm(&(mul_adj(u, u) - &id)),
        ));
        terms.push((
            format!("co-unitary({l})"),
            operator_norm(&(mul(u, &u.adjoint()) - &id)),
        ));
    }
    terms.push(("[U1,U2]".into(), operator_norm(&commutator(u1, u2))));
    Ok(RelationReport::from_terms(Relation::Torus2, terms))
}

/// Two-circle relations on four Hermitian matrices:
/// `X₁² + X₂² = I`, `X₃² + X₄² = I`, all commuting.
pub fn torus4_residual(xs: [&ComplexMatrix; 4]) -> Result<RelationReport> {
    check_tuple(&xs)?;
    let labels = ["X1", "X2", "X3", "X4"];
    let id = identity(xs[0].nrows());
    let mut terms = Vec::new();
    hermiticity_terms(&xs, &labels, &mut terms);
    commutator_terms(&xs, &labels, &mut terms);
    terms.push((
        "circle(X1,X2)".into(),
        operator_norm(&(mul(xs[0], xs[0]) + mul(xs[1], xs[1]) - &id)),
    ));
    terms.push((
        "circle(X3,X4)".into(),
        operator_norm(&(mul(xs[2], xs[2]) + mul(xs[3], xs[3]) - &id)),
    ));
    Ok(RelationReport::from_terms(Relation::Torus4, terms))
}

/// Disk relations: Hermitian contractions with small commutator.
pub fn disk_residual(x1: &ComplexMatrix, x2: &ComplexMatrix) -> Result<RelationReport> {
    let ms = [x1, x2];
    let labels = ["X1", "X2"];
    check_tuple(&ms)?;
    let mut terms = Vec::new();
    hermiticity_terms(&ms, &labels, &mut terms);
    commutator_terms(&ms, &labels, &mut terms);
    for (m, l) in ms.iter().zip(labels) {
        terms.push((format!("norm({l})"), (operator_norm(m) - 1.0).max(0.0)));
    }
    Ok(RelationReport::from_terms(Relation::Disk, terms))
}
