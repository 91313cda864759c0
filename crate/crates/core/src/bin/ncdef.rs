use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ncdef::error::{Error, ErrorKind};
use ncdef::massey::{HullOptions, ImmediateMassey, MasseyEngine};
use ncdef::matric::MatricMonomial;
use ncdef::problem::{Problem, ProblemSpec};
use ncdef::report::{self, canonical, Report};
use ncdef::scalar;

#[derive(Parser)]
#[command(name = "ncdef", version, about = "Noncommutative deformation hulls of module families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Ext, the hull and its versal family, and write a report.
    Run {
        #[command(flatten)]
        input: Input,
        /// Write report.json and report.txt into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Print the Ext^1 and Ext^2 dimension tables.
    Ext {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        json: bool,
    },
    /// Immediately defined Massey product for a monomial such as x12*x24.
    Massey {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        monomial: String,
        #[arg(long)]
        json: bool,
    },
    /// Re-check a saved report with the deformation checker.
    Verify {
        report: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Field level difference of two reports.
    Diff {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Input {
    /// A shipped problem: weyl2-simple4 or poly1-point.
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// A problem specification in JSON.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    max_order: Option<usize>,
    #[arg(long)]
    degree_bound: Option<u32>,
}

impl Input {
    fn load(&self) -> Result<Problem> {
        let mut spec = match (&self.preset, &self.spec) {
            (Some(name), None) => ProblemSpec::preset(name)?,
            (None, Some(path)) => ProblemSpec::from_json(&read(path)?)?,
            _ => return Err(Error::Invalid("give exactly one of --preset or --spec".into()).into()),
        };
        if let Some(n) = self.max_order {
            spec.options.hull = HullOptions { max_order: n, ..spec.options.hull };
        }
        if let Some(d) = self.degree_bound {
            spec.options.solver.degree_bound = d;
            spec.options.solver.max_bound = spec.options.solver.max_bound.max(d);
        }
        Ok(Problem::build(spec)?)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
        .map_err(Into::into)
}

fn load_report(path: &Path) -> Result<Report> {
    Ok(Report::from_json(&read(path)?)?)
}

fn exec(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { input, out, json } => {
            let problem = input.load()?;
            let output = report::run(&problem)?;
            let body = output.report.to_canonical_json();
            let text = output.report.to_text();
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                std::fs::write(dir.join("report.json"), &body)?;
                std::fs::write(dir.join("report.txt"), &text)?;
            }
            print!("{}", if json { &body } else { &text });
            Ok(true)
        }
        Command::Ext { input, json } => {
            let problem = input.load()?;
            let ext1 = problem.yoneda.ext_table(1)?;
            let ext2 = problem.yoneda.ext_table(2)?;
            if json {
                print!("{}", canonical(&json!({ "ext1": ext1, "ext2": ext2 })));
            } else {
                print!("{}", report::ext_tables_text(&ext1, &ext2));
            }
            Ok(true)
        }
        Command::Massey { input, monomial, json } => {
            let problem = input.load()?;
            let basis = problem.ext_basis()?;
            let table = basis.generator_table();
            let order = problem.monomial_order(&table)?;
            let engine = MasseyEngine::new(&problem.yoneda, &basis, order, problem.spec.options.hull.clone())?;
            let x = MatricMonomial::parse(&table, &monomial)?;
            let state = engine.init_order2()?;
            let cochains: BTreeMap<usize, _> = x
                .arrows()
                .iter()
                .map(|&id| (id, state.system().get(&MatricMonomial::arrow(&table, id)).expect("arrow cochain").clone()))
                .collect();
            let names: Vec<String> = (0..table.obstructions().len())
                .filter(|&id| {
                    let o = table.obstructions()[id];
                    (o.left, o.right) == x.ty()
                })
                .map(|id| table.obstruction_name(id))
                .collect();
            let value = engine.immediate_massey(&x, &cochains)?;
            let (defined, coefficients, at) = match &value {
                ImmediateMassey::Defined(v) => (true, v.clone(), None),
                ImmediateMassey::Undefined { at, obstruction } => (false, obstruction.clone(), Some(at.format(&table))),
            };
            let coeffs: Vec<String> = coefficients.iter().map(scalar::format).collect();
            if json {
                let v = json!({ "monomial": x.format(&table), "defined": defined, "basis": names, "coefficients": coeffs, "undefined_at": at });
                print!("{}", canonical(&v));
            } else if defined {
                let terms: Vec<String> = names
                    .iter()
                    .zip(&coeffs)
                    .filter(|(_, c)| c.as_str() != "0")
                    .map(|(n, c)| match c.as_str() {
                        "1" => n.clone(),
                        "-1" => format!("-{n}"),
                        _ => format!("{c}*{n}"),
                    })
                    .collect();
                println!("<{}> = {}", x.format(&table), if terms.is_empty() { "0".into() } else { terms.join(" + ") });
            } else {
                println!("<{}> is undefined: obstruction at {} = [{}]", x.format(&table), at.unwrap_or_default(), coeffs.join(", "));
            }
            Ok(true)
        }
        Command::Verify { report: path, json } => {
            let rep = load_report(&path)?;
            let checks = report::verify_report(&rep)?;
            let ok = checks.iter().all(|c| c.ok);
            if json {
                let v: Vec<_> = checks.iter().map(|c| json!({ "check": c.name, "ok": c.ok, "detail": c.detail })).collect();
                print!("{}", canonical(&json!({ "ok": ok, "checks": v })));
            } else {
                for c in &checks {
                    println!("{} {}: {}", if c.ok { "ok  " } else { "FAIL" }, c.name, c.detail);
                }
            }
            if !ok {
                return Err(Error::Invariant("report failed verification".into()).into());
            }
            Ok(true)
        }
        Command::Diff { left, right, json } => {
            let a: serde_json::Value = serde_json::to_value(load_report(&left)?)?;
            let b: serde_json::Value = serde_json::to_value(load_report(&right)?)?;
            let diff = report::diff_reports(&a, &b)?;
            if json {
                print!("{}", canonical(&serde_json::to_value(&diff)?));
            } else if diff.is_empty() {
                println!("reports are identical");
            } else {
                for d in &diff {
                    let show = |v: &Option<serde_json::Value>| v.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "(absent)".into());
                    println!("{}: {} -> {}", d.path, show(&d.left), show(&d.right));
                }
            }
            Ok(diff.is_empty())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>().map(Error::kind) {
        Some(ErrorKind::SolverBound) => 3,
        Some(ErrorKind::Invariant) => 4,
        Some(ErrorKind::Validation) => 2,
        None if err.downcast_ref::<serde_json::Error>().is_some() => 2,
        None => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match exec(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
