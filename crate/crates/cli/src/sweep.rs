//! Parameter grids evaluated in a rayon pool, one CSV row per point in
//! grid order.
//!
//! Config keys (lists are comma or space separated):
//!
//! ```text
//! model = voiculescu | harper | noise
//! n     = 4, 8, 16        # voiculescu and noise sizes
//! side  = 9, 12           # harper lattice sides
//! flux  = 0.3333333333333333
//! fermi = -1.3
//! eta   = 1e-1, 1e-2      # noise amplitudes
//! class = complex         # harper: complex or selfdual
//! seed  = 0
//! gap_tol = 1e-6
//! ```
//!
//! A grid with an empty axis has no points and yields only the header.

use std::collections::BTreeMap;
use std::time::Instant;

use bott_core::canonical::commuting_pair_from_sphere;
use bott_core::invariants::{bott_index_unitaries, compressed_index, default_circle_functions};
use bott_core::io::{parse_config, parse_list};
use bott_core::matkernel::{c64, diag_real, from_real, mul, operator_norm, DEFAULT_GAP_TOL};
use bott_core::models::{harper_projection, torus_positions, voiculescu, LatticeSpec};
use bott_core::random::{random_orthogonal, random_real_symmetric, random_sphere_point, rng};
use bott_core::relations::sphere_residual;
use bott_core::{Error, Result, SymmetryClass};
use rayon::prelude::*;

pub const HEADER: &str =
    "model,n,side,flux,fermi,eta,seed,delta,value,gap,pair_residual,seconds,error";

const KEYS: [&str; 9] = [
    "model", "n", "side", "flux", "fermi", "eta", "class", "seed", "gap_tol",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Voiculescu,
    Harper,
    Noise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub model: Model,
    pub n: Vec<usize>,
    pub side: Vec<usize>,
    pub flux: Vec<f64>,
    pub fermi: Vec<f64>,
    pub eta: Vec<f64>,
    pub class: SymmetryClass,
    pub seed: u64,
    pub gap_tol: f64,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_config(text)?;
        if let Some(key) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::InvalidSpec(format!("unknown sweep key `{key}`")));
        }
        let model = match map.get("model").map(String::as_str) {
            Some("voiculescu") => Model::Voiculescu,
            Some("harper") => Model::Harper,
            Some("noise") => Model::Noise,
            Some(other) => return Err(Error::InvalidSpec(format!("unknown model `{other}`"))),
            None => return Err(Error::InvalidSpec("sweep config needs `model`".into())),
        };
        let list = |key: &str| -> Result<Vec<f64>> {
            map.get(key).map_or(Ok(Vec::new()), |v| parse_list(v))
        };
        let sizes = |key: &str| -> Result<Vec<usize>> {
            map.get(key).map_or(Ok(Vec::new()), |v| parse_list(v))
        };
        let class = match map.get("class") {
            Some(c) => c.parse()?,
            None => SymmetryClass::Complex,
        };
        Ok(SweepConfig {
            model,
            n: sizes("n")?,
            side: sizes("side")?,
            flux: list("flux")?,
            fermi: list("fermi")?,
            eta: list("eta")?,
            class,
            seed: scalar(&map, "seed", 0)?,
            gap_tol: scalar(&map, "gap_tol", DEFAULT_GAP_TOL)?,
        })
    }

    fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        match self.model {
            Model::Voiculescu => {
                for &n in &self.n {
                    out.push(Point {
                        n,
                        ..Point::default()
                    });
                }
            }
            Model::Harper => {
                for &side in &self.side {
                    for &flux in &self.flux {
                        for &fermi in &self.fermi {
                            out.push(Point {
                                side: Some(side),
                                flux: Some(flux),
                                fermi: Some(fermi),
                                ..Point::default()
                            });
                        }
                    }
                }
            }
            Model::Noise => {
                for &n in &self.n {
                    for &eta in &self.eta {
                        out.push(Point {
                            n,
                            eta: Some(eta),
                            ..Point::default()
                        });
                    }
                }
            }
        }
        out
    }
}

fn scalar<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T> {
    match map.get(key) {
        Some(v) => v
            .parse()
            .map_err(|_| Error::Parse(format!("bad value for `{key}`: `{v}`"))),
        None => Ok(default),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Point {
    n: usize,
    side: Option<usize>,
    flux: Option<f64>,
    fermi: Option<f64>,
    eta: Option<f64>,
}

#[derive(Debug, Default)]
struct Outcome {
    n: usize,
    delta: Option<f64>,
    value: Option<i64>,
    gap: Option<f64>,
    pair_residual: Option<f64>,
}

/// CSV for every grid point, header first.
pub fn run(config: &SweepConfig) -> String {
    let rows: Vec<String> = config.points().par_iter().map(|p| row(config, p)).collect();
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn row(config: &SweepConfig, p: &Point) -> String {
    let start = Instant::now();
    let result = evaluate(config, p);
    let seconds = start.elapsed().as_secs_f64();
    let (o, error) = match result {
        Ok(o) => (o, String::new()),
        Err(e) => (
            Outcome {
                n: p.n,
                ..Outcome::default()
            },
            e.name().to_string(),
        ),
    };
    let model = match config.model {
        Model::Voiculescu => "voiculescu",
        Model::Harper => "harper",
        Model::Noise => "noise",
    };
    let f = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    format!(
        "{model},{},{},{},{},{},{},{},{},{},{},{seconds:.3},{error}",
        o.n,
        p.side.map(|s| s.to_string()).unwrap_or_default(),
        p.flux.map(|v| v.to_string()).unwrap_or_default(),
        p.fermi.map(|v| v.to_string()).unwrap_or_default(),
        p.eta.map(|v| v.to_string()).unwrap_or_default(),
        config.seed,
        f(o.delta),
        o.value.map(|v| v.to_string()).unwrap_or_default(),
        f(o.gap),
        f(o.pair_residual),
    )
}

fn evaluate(config: &SweepConfig, p: &Point) -> Result<Outcome> {
    match config.model {
        Model::Voiculescu => {
            let (a, b) = voiculescu(p.n);
            let rep = bott_index_unitaries(&a, &b, &default_circle_functions(), config.gap_tol)?;
            Ok(Outcome {
                n: p.n,
                delta: Some(rep.input_residual),
                value: Some(rep.value),
                gap: Some(rep.gap),
                pair_residual: None,
            })
        }
        Model::Harper => {
            let orbitals = match config.class {
                SymmetryClass::SelfDual => 2,
                _ => 1,
            };
            let spec = LatticeSpec::new(
                p.side.expect("harper points carry a side"),
                p.flux.expect("harper points carry a flux"),
                p.fermi.expect("harper points carry a Fermi level"),
                orbitals,
            )?;
            let model = harper_projection(&spec)?;
            let xs = torus_positions(&spec);
            let rep = compressed_index(
                &model.projection,
                &xs,
                config.class,
                config.gap_tol,
                config.seed,
            )?;
            Ok(Outcome {
                n: model.projection.nrows(),
                delta: Some(rep.delta),
                value: Some(rep.index.value),
                gap: Some(rep.index.gap),
                pair_residual: None,
            })
        }
        Model::Noise => {
            let eta = p.eta.expect("noise points carry eta");
            let h = noisy_commuting_triple(p.n, eta, config.seed);
            let delta = sphere_residual(&h[0], &h[1], &h[2])?.delta;
            let pair = commuting_pair_from_sphere(
                &h[0],
                &h[1],
                &h[2],
                SymmetryClass::Symmetric,
                config.seed,
            )?;
            Ok(Outcome {
                n: p.n,
                delta: Some(delta),
                value: None,
                gap: None,
                pair_residual: Some(pair.commutator_residual),
            })
        }
    }
}

/// Commuting real symmetric triple on the sphere, `O diag(p_k) Oᵀ`, plus
/// `η` times fixed unit-norm real symmetric noise. The seed alone fixes
/// the triple and the noise, so rows differing only in `η` share both.
pub fn noisy_commuting_triple(n: usize, eta: f64, seed: u64) -> [bott_core::ComplexMatrix; 3] {
    let mut r = rng(seed);
    let o = from_real(&random_orthogonal(&mut r, n));
    let pts: Vec<[f64; 3]> = (0..n).map(|_| random_sphere_point(&mut r)).collect();
    let noise = [0, 1, 2].map(|_| {
        let e = random_real_symmetric(&mut r, n);
        let norm = operator_norm(&e).max(f64::MIN_POSITIVE);
        &e * c64(1.0 / norm, 0.0)
    });
    [0, 1, 2].map(|k| {
        let d: Vec<f64> = pts.iter().map(|p| p[k]).collect();
        let exact = mul(&mul(&o, &diag_real(&d)), &o.transpose());
        exact + &noise[k] * c64(eta, 0.0)
    })
}
