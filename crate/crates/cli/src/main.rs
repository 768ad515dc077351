//! `bott`: generate matrix tuples, measure relation residuals, compute
//! Bott and Pfaffian-Bott indices, run the canonical-form pipelines and
//! sweep parameter grids.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 bad input, 3 obstruction.

mod selftest;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bott_core::canonical::{
    commuting_pair_from_sphere, k2_quaternion_witness, k2_twisted_witness, WitnessReport,
};
use bott_core::invariants::{
    bott_index_unitaries, bott_index_with_limit, bott_matrix, compressed_index,
    default_circle_functions, pf_bott_index_with_limit, pf_bott_unitaries, torus_to_sphere,
    IndexReport,
};
use bott_core::io::{read_role, require_role, write_role};
use bott_core::matkernel::{herm_eig, mul, ComplexMatrix, DEFAULT_GAP_TOL, DEFAULT_TOL};
use bott_core::models::{
    harper_projection, selfdual_double, torus_positions, voiculescu, LatticeSpec,
};
use bott_core::relations::{sphere_residual, torus2_residual, torus4_residual, RelationReport};
use bott_core::wannier::{compress_positions, joint_approx_diag, spread};
use bott_core::{Error, SymmetryClass};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "bott",
    version,
    about = "Bott-type invariants of almost commuting matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a model tuple to a matrix directory.
    Gen {
        #[command(subcommand)]
        model: GenModel,
    },
    /// Relation residuals of the tuple in a matrix directory.
    Residual(InOpts),
    /// Bott, Pfaffian-Bott or compressed index.
    Index {
        kind: IndexKind,
        #[command(flatten)]
        opts: IndexOpts,
    },
    /// Structured witnesses and commuting-pair extraction.
    Canonical {
        #[command(subcommand)]
        action: CanonicalAction,
    },
    /// Spread report of a localized basis for a compressed position tuple.
    Wannier(IndexOpts),
    /// Run a parameter grid from a `key = value` config and emit CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum GenModel {
    /// Cyclic shift and clock matrix: U1, U2.
    Voiculescu {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Self-dual doubling diag(U, Uᵀ) of the Voiculescu pair: U1, U2.
    Doubled {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Harper model projection and torus positions: P, X1..X4.
    Harper {
        #[arg(long = "L")]
        side: usize,
        #[arg(long)]
        flux: f64,
        #[arg(long, allow_hyphen_values = true)]
        fermi: f64,
        /// `selfdual` doubles the model with its time reverse.
        #[arg(long, default_value = "complex", value_parser = parse_class)]
        class: SymmetryClass,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hermitian triple H1..H3 from a commuting unitary pair U1, U2.
    Lift {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum CanonicalAction {
    /// Structured witness of the polar part of the Bott matrix.
    Witness(IndexOpts),
    /// Commuting pair (U, K) near the sphere triple; written as U1, H3.
    Extract {
        #[command(flatten)]
        opts: IndexOpts,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum IndexKind {
    Bott,
    Pfbott,
    Compressed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct InOpts {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct IndexOpts {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "complex", value_parser = parse_class)]
    class: SymmetryClass,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "gap-tol", default_value_t = DEFAULT_GAP_TOL)]
    gap_tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_class(s: &str) -> Result<SymmetryClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) if e.is_obstruction() => {
            eprintln!("obstruction: {}: {e}", e.name());
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> bott_core::Result<ExitCode> {
    match command {
        Command::Gen { model } => generate(model)?,
        Command::Residual(opts) => residual(&opts)?,
        Command::Index { kind, opts } => index(kind, &opts)?,
        Command::Canonical { action } => canonical(action)?,
        Command::Wannier(opts) => wannier(&opts)?,
        Command::Sweep { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let csv = sweep::run(&sweep::SweepConfig::parse(&text)?);
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Selftest { seed } => {
            return Ok(if selftest::run(seed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn generate(model: GenModel) -> bott_core::Result<()> {
    match model {
        GenModel::Voiculescu { n, out } => {
            require_positive(n)?;
            let (a, b) = voiculescu(n);
            write_role(&out, "U1", &a)?;
            write_role(&out, "U2", &b)?;
        }
        GenModel::Doubled { n, out } => {
            require_positive(n)?;
            let (a, b) = voiculescu(n);
            let (a, b) = selfdual_double(&a, &b)?;
            write_role(&out, "U1", &a)?;
            write_role(&out, "U2", &b)?;
        }
        GenModel::Harper {
            side,
            flux,
            fermi,
            class,
            out,
        } => {
            let orbitals = match class {
                SymmetryClass::Complex => 1,
                SymmetryClass::SelfDual => 2,
                SymmetryClass::Symmetric => {
                    return Err(Error::InvalidSpec(
                        "the Harper model is generated for the complex or selfdual class".into(),
                    ))
                }
            };
            let spec = LatticeSpec::new(side, flux, fermi, orbitals)?;
            let model = harper_projection(&spec)?;
            write_role(&out, "P", &model.projection)?;
            for (r, x) in torus_positions(&spec).iter().enumerate() {
                write_role(&out, &format!("X{}", r + 1), x)?;
            }
            log::info!("rank {} gap {:.3e}", model.rank, model.gap);
        }
        GenModel::Lift { input, out } => {
            let u1 = require_role(&input, "U1")?;
            let u2 = require_role(&input, "U2")?;
            let h = torus_to_sphere(&u1, &u2, &default_circle_functions())?;
            for (r, m) in h.iter().enumerate() {
                write_role(&out, &format!("H{}", r + 1), m)?;
            }
        }
    }
    Ok(())
}

fn require_positive(n: usize) -> bott_core::Result<()> {
    if n == 0 {
        return Err(Error::InvalidSpec("--n must be positive".into()));
    }
    Ok(())
}

/// Tuples a matrix directory can hold, detected from the roles present.
enum Tuple {
    Sphere([ComplexMatrix; 3]),
    Torus(ComplexMatrix, ComplexMatrix),
    Positions(ComplexMatrix, [ComplexMatrix; 4]),
}

fn read_tuple(dir: &Path) -> bott_core::Result<Tuple> {
    if read_role(dir, "H1")?.is_some() {
        return Ok(Tuple::Sphere(read_hs(dir)?));
    }
    if read_role(dir, "P")?.is_some() {
        let (p, xs) = read_positions(dir)?;
        return Ok(Tuple::Positions(p, xs));
    }
    if read_role(dir, "U1")?.is_some() {
        return Ok(Tuple::Torus(
            require_role(dir, "U1")?,
            require_role(dir, "U2")?,
        ));
    }
    Err(Error::InvalidSpec(format!(
        "{} holds no H1..H3, U1/U2 or P/X1..X4 tuple",
        dir.display()
    )))
}

fn read_hs(dir: &Path) -> bott_core::Result<[ComplexMatrix; 3]> {
    Ok([
        require_role(dir, "H1")?,
        require_role(dir, "H2")?,
        require_role(dir, "H3")?,
    ])
}

fn read_positions(dir: &Path) -> bott_core::Result<(ComplexMatrix, [ComplexMatrix; 4])> {
    let p = require_role(dir, "P")?;
    let xs = [
        require_role(dir, "X1")?,
        require_role(dir, "X2")?,
        require_role(dir, "X3")?,
        require_role(dir, "X4")?,
    ];
    Ok((p, xs))
}

fn residual(opts: &InOpts) -> bott_core::Result<()> {
    let report = match read_tuple(&opts.input)? {
        Tuple::Sphere([h1, h2, h3]) => sphere_residual(&h1, &h2, &h3)?,
        Tuple::Torus(u1, u2) => torus2_residual(&u1, &u2)?,
        Tuple::Positions(_, xs) => torus4_residual([&xs[0], &xs[1], &xs[2], &xs[3]])?,
    };
    match opts.format {
        Format::Json => println!("{}", to_json(&report)),
        Format::Csv => print!("{}", relation_csv(&report)),
    }
    Ok(())
}

fn relation_csv(report: &RelationReport) -> String {
    let mut out = String::from("term,residual\n");
    for (term, value) in &report.per_term {
        out.push_str(&format!("{term},{value:e}\n"));
    }
    out
}

/// H triples are evaluated without the sphere-residual gate: the spectral
/// gap of the Bott matrix decides, so closed gaps surface as obstructions.
fn index(kind: IndexKind, opts: &IndexOpts) -> bott_core::Result<()> {
    let fns = default_circle_functions();
    let tuple = read_tuple(&opts.input)?;
    let out =
        match (kind, tuple) {
            (IndexKind::Bott, Tuple::Sphere([h1, h2, h3])) => {
                index_json(&bott_index_with_limit(&h1, &h2, &h3, opts.gap_tol, None)?)
            }
            (IndexKind::Bott, Tuple::Torus(u1, u2)) => {
                index_json(&bott_index_unitaries(&u1, &u2, &fns, opts.gap_tol)?)
            }
            (IndexKind::Pfbott, Tuple::Sphere([h1, h2, h3])) => index_json(
                &pf_bott_index_with_limit(&h1, &h2, &h3, opts.gap_tol, None)?,
            ),
            (IndexKind::Pfbott, Tuple::Torus(u1, u2)) => {
                index_json(&pf_bott_unitaries(&u1, &u2, &fns, opts.gap_tol)?)
            }
            (IndexKind::Compressed, Tuple::Positions(p, xs)) => {
                let rep = compressed_index(&p, &xs, opts.class, opts.gap_tol, opts.seed)?;
                let mut v = index_json(&rep.index);
                v["delta"] = json!(rep.delta);
                v["compressed_residual"] = json!(rep.compressed_residual);
                v["rank"] = json!(rep.rank);
                v["unitarity_defect"] = json!(rep.unitarity_defect);
                v
            }
            (IndexKind::Compressed, _) => {
                return Err(Error::InvalidSpec(
                    "compressed index needs P and X1..X4".into(),
                ))
            }
            (_, Tuple::Positions(..)) => {
                return Err(Error::InvalidSpec(
                    "P/X1..X4 tuples take `index compressed`".into(),
                ))
            }
        };
    emit(&out, opts.format);
    Ok(())
}

fn index_json(rep: &IndexReport) -> Value {
    serde_json::to_value(rep).expect("report serializes")
}

/// JSON object, or a two-line CSV of its scalar fields.
fn emit(v: &Value, format: Format) {
    match format {
        Format::Json => println!("{v}"),
        Format::Csv => {
            let obj = v.as_object().expect("reports are objects");
            let fields: Vec<(&String, &Value)> =
                obj.iter().filter(|(_, x)| !x.is_array()).collect();
            let header: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
            let row: Vec<String> = fields
                .iter()
                .map(|(_, x)| match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            println!("{}\n{}", header.join(","), row.join(","));
        }
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("report serializes")
}

fn sphere_input(dir: &Path) -> bott_core::Result<[ComplexMatrix; 3]> {
    match read_tuple(dir)? {
        Tuple::Sphere(h) => Ok(h),
        Tuple::Torus(u1, u2) => torus_to_sphere(&u1, &u2, &default_circle_functions()),
        Tuple::Positions(..) => Err(Error::InvalidSpec(
            "canonical pipelines take H1..H3 or U1/U2".into(),
        )),
    }
}

fn canonical(action: CanonicalAction) -> bott_core::Result<()> {
    match action {
        CanonicalAction::Witness(opts) => {
            let [h1, h2, h3] = sphere_input(&opts.input)?;
            let eig = herm_eig(&bott_matrix(&h1, &h2, &h3)?, DEFAULT_TOL)?;
            let gap = eig.gap();
            if gap < opts.gap_tol {
                return Err(Error::GapTooSmall { gap });
            }
            let s = eig.apply_fn(f64::signum);
            let report: WitnessReport = match opts.class {
                SymmetryClass::Symmetric => k2_quaternion_witness(&s)?,
                SymmetryClass::SelfDual => k2_twisted_witness(&s)?,
                SymmetryClass::Complex => {
                    return Err(Error::InvalidSpec(
                        "witnesses need --class symmetric or selfdual".into(),
                    ))
                }
            };
            let v = json!({
                "class": opts.class.as_str(),
                "size": report.witness.nrows(),
                "bound": report.bound,
                "certified": report.certified,
                "norm_defect": report.norm_defect,
                "gap": gap,
            });
            emit(&v, opts.format);
        }
        CanonicalAction::Extract { opts, out } => {
            let [h1, h2, h3] = sphere_input(&opts.input)?;
            let pair = commuting_pair_from_sphere(&h1, &h2, &h3, opts.class, opts.seed)?;
            write_role(&out, "U1", &pair.u)?;
            write_role(&out, "H3", &pair.k)?;
            let v = json!({
                "class": opts.class.as_str(),
                "commutator_residual": pair.commutator_residual,
                "symmetry_residual": pair.symmetry_residual,
                "reconstruction_residual": pair.reconstruction_residual,
                "perturbation": pair.perturbation,
            });
            emit(&v, opts.format);
        }
    }
    Ok(())
}

fn wannier(opts: &IndexOpts) -> bott_core::Result<()> {
    let (p, xs) = read_positions(&opts.input)?;
    let comp = compress_positions(&p, &xs, opts.class, opts.seed)?;
    let jd = joint_approx_diag(&comp.compressed, 100, 1e-12)?;
    let basis = mul(&comp.w, &jd.v);
    let report = spread(&xs, &basis)?;
    match opts.format {
        Format::Csv => print!("{}", report.to_csv()),
        Format::Json => {
            let v = json!({
                "rank": comp.w.ncols(),
                "delta": comp.delta,
                "compressed_residual": comp.residual,
                "spread_budget": comp.spread_budget,
                "off_diagonal_mass": jd.off_history.last(),
                "total": report.total,
                "maximum": report.maximum,
                "per_vector": report.per_vector,
            });
            println!("{v}");
        }
    }
    Ok(())
}
