use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use latlab::constructions::{shapira_field, special_field};
use latlab::experiments::{self, ExperimentConfig, ExperimentKind};
use latlab::hecke::{enumerate_neighbors, verify_composition, HeckeType};
use latlab::lattice::{make_point, standard_lattice, LatticeJson};
use latlab::{LatticePoint, Mat};

const EXIT_ASSERTION: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "latlab", version, about = "Lattices, Hecke neighbors and compact diagonal orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hecke neighbors and composition checks
    Hecke {
        #[command(subcommand)]
        command: HeckeCommand,
    },
    /// Number field constructions
    Field {
        #[command(subcommand)]
        command: FieldCommand,
    },
    /// Seeded experiments
    Exp {
        #[arg(value_parser = ["escape", "haar", "approx"])]
        experiment: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum HeckeCommand {
    /// Enumerate the neighbors of a point
    Neighbors {
        #[arg(long)]
        p: u64,
        /// Exponents `k₁ ≤ … ≤ kₙ`, comma separated
        #[arg(long = "type", value_delimiter = ',', required = true)]
        exps: Vec<u32>,
        /// JSON file with `{"basis": rows}` or a serialized lattice point; `ℤⁿ` if absent
        #[arg(long)]
        point: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a two-step composition with the predicted coefficients
    ComposeCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FieldCommand {
    Special {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Shapira {
        #[arg(long = "M")]
        m: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_point(path: &Path, n: usize) -> Result<LatticePoint<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Value = serde_json::from_str(&text)?;
    let x = if let Some(rows) = doc.get("basis") {
        let rows: Vec<Vec<f64>> = serde_json::from_value(rows.clone())?;
        make_point(&Mat::from_rows(&rows))?
    } else {
        let j: LatticeJson = serde_json::from_value(doc)?;
        LatticePoint::from_json(&j)?
    };
    if x.dim() != n {
        bail!("point has dimension {}, type has length {n}", x.dim());
    }
    Ok(x)
}

fn hecke(cmd: HeckeCommand) -> Result<()> {
    match cmd {
        HeckeCommand::Neighbors { p, exps, point, out } => {
            let t = HeckeType::new(p, exps)?;
            let x = match &point {
                Some(path) => load_point(path, t.n())?,
                None => standard_lattice(t.n()),
            };
            let nb = enumerate_neighbors(&x, &t)?;
            let entries: Vec<Value> = nb
                .entries
                .iter()
                .map(|(h, y)| json!({ "H": h.to_rows().iter().map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(), "point": y.to_json() }))
                .collect();
            emit(
                &json!({ "hecke": t, "count": nb.len(), "weight": nb.weight().to_string(), "neighbors": entries }),
                out.as_deref(),
            )
        }
        HeckeCommand::ComposeCheck { n, p, k, l, out } => {
            let report = verify_composition(n, p, k, l)?;
            emit(&serde_json::to_value(&report)?, out.as_deref())
        }
    }
}

fn field(cmd: FieldCommand) -> Result<()> {
    match cmd {
        FieldCommand::Special { p, n, out } => emit(&special_field(p, n)?.to_json(), out.as_deref()),
        FieldCommand::Shapira { m, n, out } => emit(&shapira_field(m, n)?.to_json(), out.as_deref()),
    }
}

fn experiment(name: &str, config: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<ExitCode> {
    let kind: ExperimentKind = name.parse()?;
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut doc: Value = serde_json::from_str(&text)?;
            if let Some(obj) = doc.as_object_mut() {
                obj.entry("experiment").or_insert_with(|| json!(name));
            }
            ExperimentConfig::from_json(&doc.to_string())?
        }
        None => ExperimentConfig::preset(kind),
    };
    if cfg.experiment != kind {
        bail!("config is for experiment {:?}, not {name}", cfg.experiment.name());
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = match experiments::run(&cfg) {
        Ok(r) => r,
        Err(e) if experiments::is_budget_abort(&e) => {
            eprintln!("budget abort: {e}");
            return Ok(ExitCode::from(EXIT_BUDGET));
        }
        Err(e) => return Err(e.into()),
    };
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    for path in report.write(&dir)? {
        eprintln!("wrote {}", path.display());
    }
    for a in &report.assertions {
        eprintln!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_ASSERTION) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Hecke { command } => hecke(command).map(|_| ExitCode::SUCCESS),
        Command::Field { command } => field(command).map(|_| ExitCode::SUCCESS),
        Command::Exp { experiment: name, config, seed, out } => {
            experiment(&name, config.as_deref(), seed, out.as_deref())
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
