//! `smallforms`: command-line front end to the workbench.
//!
//! Exit codes: 0 success, 1 domain error or failed check, 2 usage error.

mod literal;

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use smallforms::criteria::{classify, critical_exponent, CriterionKind, CriterionSeries};
use smallforms::domain::{classify_regime, FormMatrix, ProblemSpec, Variant};
use smallforms::forms::{enumerate_solutions, EngineConfig, HeightWindow, Inequality};
use smallforms::lab::{
    box_count_dimension, load_run, persist_run, zero_one_verdict, BoxCountPlan, ExperimentPlan,
    PlanMode, SlabSelection, DEFAULT_BUDGET,
};
use smallforms::reduction::{decompose, transport_solutions, verify_certificate, LiftCertificate, Membership};
use smallforms::{Error, Scalar};

#[derive(Parser)]
#[command(name = "smallforms", version, about = "Metric Diophantine approximation by small linear forms")]
struct Cli {
    /// Output format; csv is available for enumerate, verify-law and box-dim.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Subcommand)]
enum Command {
    /// Qualitative regime of (m, n, variant).
    Regime {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "absolute")]
        variant: Variant,
    },
    /// Convergence verdict of a criterion series.
    Classify {
        #[arg(long)]
        kind: CriterionKind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        psi: String,
        /// Dimension function: `s`, `power:s` or `powerlog:s,kappa`.
        #[arg(long)]
        f: Option<String>,
    },
    /// Critical exponent s* for psi = c r^-tau.
    Critical {
        #[arg(long, default_value = "thm1")]
        kind: CriterionKind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        psi: String,
    },
    /// All sign-canonical solutions with height in the window.
    Enumerate {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "absolute")]
        variant: Variant,
        /// Rows separated by `;`, entries by `,`; `p/q` entries are exact.
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        psi: String,
        /// `q_min:q_max` or `q_max`.
        #[arg(long)]
        window: HeightWindow,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Use `<=` instead of `<`.
        #[arg(long)]
        non_strict: bool,
    },
    /// Split X into its top block and the reduced matrix.
    Reduce {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        epsilon: Scalar,
        #[arg(long)]
        cap: Scalar,
    },
    /// Lift classical solutions of the reduced problem to certificates for X.
    Lift {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        epsilon: Scalar,
        #[arg(long)]
        cap: Scalar,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        window: HeightWindow,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-check certificates from a file (`-` for stdin).
    VerifyCert { input: String },
    /// Hit fractions over a height schedule against the predicted zero-one law.
    VerifyLaw {
        #[arg(long, required_unless_present = "replay")]
        m: Option<usize>,
        #[arg(long, required_unless_present = "replay")]
        n: Option<usize>,
        #[arg(long, default_value = "absolute")]
        variant: Variant,
        #[arg(long, required_unless_present = "replay")]
        psi: Option<String>,
        /// Comma-separated windows, each `q_min:q_max` or `q_max`.
        #[arg(long, conflicts_with = "window")]
        schedule: Option<String>,
        #[arg(long)]
        window: Option<HeightWindow>,
        #[arg(long, default_value_t = 500)]
        samples: u64,
        #[arg(long, required_unless_present = "replay")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        /// Write the run record here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-run the plan of a stored record and compare numerics.
        #[arg(long, conflicts_with_all = ["m", "n", "psi", "schedule", "window", "seed"])]
        replay: Option<PathBuf>,
    },
    /// Box-counting slope of the approximation slabs.
    BoxDim {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        psi: String,
        /// Comma-separated grid resolutions k (delta = 1/k).
        #[arg(long, default_value = "16,32,64,128,256")]
        schedule: String,
        /// Keep slabs with width in (delta/ratio, delta]; defaults to 2^(tau+1).
        #[arg(long)]
        band_ratio: Option<f64>,
        /// Use all q with |q| <= cap at each resolution instead of a width band.
        #[arg(long, conflicts_with = "band_ratio")]
        height_caps: Option<String>,
        /// Also count the union of slabs.
        #[arg(long)]
        union: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
}

enum Failure {
    Usage(String),
    Domain(Error),
    /// Output already written; the check it reports failed.
    Reported,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn emit<T: Serialize>(format: Format, value: &T) -> Outcome {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    match format {
        Format::Json => write_stdout(&(serde_json::to_string_pretty(&v).expect("serializable") + "\n")),
        Format::Human => {
            let mut out = String::new();
            render_human(&v, 0, &mut out);
            write_stdout(&out);
        }
        Format::Csv => return Err(Failure::Usage("csv output is not available for this subcommand".into())),
    }
    Ok(())
}

/// A closed pipe downstream (`| head`) is not an error.
fn write_stdout(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

/// Indented `key: value` rendering of a JSON value.
fn render_human(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                if x.is_object() || x.is_array() && x.as_array().is_some_and(|a| a.iter().any(|e| e.is_object())) {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render_human(x, depth + 1, out);
                } else {
                    out.push_str(&format!("{pad}{k}: {}\n", scalar_text(x)));
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                out.push_str(&format!("{pad}[{i}]\n"));
                render_human(x, depth + 1, out);
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar_text(other))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn emit_csv(write: impl FnOnce(&mut dyn Write) -> smallforms::Result<()>) -> Outcome {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    write(&mut lock)?;
    Ok(())
}

fn spec_for(m: usize, n: usize, variant: Variant, psi: &str) -> Result<ProblemSpec, Failure> {
    Ok(ProblemSpec::new(m, n, variant, literal::parse_psi(psi)?)?)
}

fn run(cli: Cli) -> Outcome {
    let format = cli.format;
    match cli.command {
        Command::Regime { m, n, variant } => {
            if m == 0 || n == 0 {
                return Err(Error::InvalidProblem("m and n must be at least 1".into()).into());
            }
            let regime = classify_regime(m, n, variant);
            if format == Format::Human {
                write_stdout(&format!("{regime}\n"));
                return Ok(());
            }
            emit(format, &json!({ "m": m, "n": n, "variant": variant, "regime": regime }))
        }
        Command::Classify { kind, m, n, psi, f } => {
            let f = f.as_deref().map(literal::parse_f).transpose()?;
            let series = CriterionSeries::new(kind, m, n, literal::parse_psi(&psi)?, f)?;
            emit(format, &classify(&series)?)
        }
        Command::Critical { kind, m, n, psi } => {
            let psi = literal::parse_psi(&psi)?;
            let p = psi
                .as_power_log()
                .filter(|p| p.kappa() == 0.0)
                .ok_or_else(|| Error::InvalidApproxFunction("critical exponents need psi = c r^-tau".into()))?;
            emit(format, &critical_exponent(kind, m, n, p.tau())?)
        }
        Command::Enumerate { m, n, variant, matrix, psi, window, jobs, non_strict } => {
            let x = FormMatrix::parse(&matrix)?;
            for (flag, given, actual) in [("--m", m, x.m()), ("--n", n, x.n())] {
                if given.is_some_and(|g| g != actual) {
                    return Err(Failure::Usage(format!("{flag} {} conflicts with the {actual} of --matrix", given.unwrap())));
                }
            }
            let spec = spec_for(x.m(), x.n(), variant, &psi)?;
            let config = EngineConfig {
                inequality: if non_strict { Inequality::NonStrict } else { Inequality::Strict },
                jobs,
                ..EngineConfig::default()
            };
            let report = enumerate_solutions(&spec, &x, window, &config)?;
            match format {
                Format::Csv => emit_csv(|w| report.write_shell_csv(w)),
                _ => emit(format, &report),
            }
        }
        Command::Reduce { matrix, epsilon, cap } => {
            let x = FormMatrix::parse(&matrix)?;
            let params = Membership::new(epsilon, cap)?;
            let rx = decompose(x.data(), &params)?;
            emit(
                format,
                &json!({
                    "m": rx.m(),
                    "n": rx.n(),
                    "exact": rx.is_exact(),
                    "membership": params,
                    "det_top": rx.det(),
                    "top": rx.top().to_scalar_rows(),
                    "bottom": rx.bottom().to_scalar_rows(),
                    "hat": rx.hat().to_scalar_rows(),
                    "hat_mod_one": rx.hat_mod_one()?.data().to_scalar_rows(),
                }),
            )
        }
        Command::Lift { matrix, epsilon, cap, psi, window, jobs } => {
            let x = FormMatrix::parse(&matrix)?;
            let rx = decompose(x.data(), &Membership::new(epsilon, cap)?)?;
            let config = EngineConfig { jobs, ..EngineConfig::default() };
            let report = transport_solutions(&rx, &literal::parse_psi(&psi)?, window, &config)?;
            emit(format, &report)
        }
        Command::VerifyCert { input } => verify_certs(format, &input),
        Command::VerifyLaw { m, n, variant, psi, schedule, window, samples, seed, jobs, budget, out, replay } => {
            let record = match replay {
                Some(path) => {
                    let stored = load_run(&path)?;
                    let fresh = zero_one_verdict(&stored.plan, jobs)?;
                    let reproduced = fresh.same_numerics(&stored);
                    match format {
                        Format::Csv => emit_csv(|w| fresh.write_csv(w))?,
                        _ => emit(format, &json!({ "reproduced": reproduced, "record": fresh }))?,
                    }
                    if !reproduced {
                        eprintln!("error: replay differs from the stored record");
                    }
                    return if reproduced { Ok(()) } else { Err(Failure::Reported) };
                }
                None => {
                    let (m, n, psi, seed) = (m.unwrap(), n.unwrap(), psi.unwrap(), seed.unwrap());
                    let windows = match (schedule, window) {
                        (Some(s), _) => s
                            .split(',')
                            .map(|w| w.trim().parse::<HeightWindow>())
                            .collect::<smallforms::Result<Vec<_>>>()?,
                        (None, Some(w)) => vec![w],
                        (None, None) => return Err(Failure::Usage("verify-law needs --schedule or --window".into())),
                    };
                    let spec = spec_for(m, n, variant, &psi)?;
                    let plan = ExperimentPlan::new(spec, seed, windows, samples, PlanMode::MeasureTrend, budget)?;
                    zero_one_verdict(&plan, jobs)?
                }
            };
            if let Some(path) = out {
                persist_run(&record, &path)?;
            }
            match format {
                Format::Csv => emit_csv(|w| record.write_csv(w)),
                _ => emit(format, &record),
            }
        }
        Command::BoxDim { m, n, psi, schedule, band_ratio, height_caps, union, budget } => {
            let list = |s: &str, what: &str| -> Result<Vec<u64>, Failure> {
                s.split(',')
                    .map(|t| t.trim().parse::<u64>().map_err(|_| Failure::Usage(format!("{what}: not an integer: {t:?}"))))
                    .collect()
            };
            let selection = match height_caps {
                Some(c) => SlabSelection::HeightCap { q_max: list(&c, "--height-caps")? },
                None => SlabSelection::WidthBand { ratio: band_ratio },
            };
            let plan = BoxCountPlan { resolutions: list(&schedule, "--schedule")?, selection, union, budget };
            let spec = spec_for(m, n, Variant::Absolute, &psi)?;
            let est = box_count_dimension(&spec, &plan)?;
            match format {
                Format::Csv => emit_csv(|w| est.write_csv(w)),
                _ => emit(format, &est),
            }
        }
    }
}

/// Accepts one certificate, an array of them, or the full output of `lift`.
fn verify_certs(format: Format, input: &str) -> Outcome {
    let text = if input == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(Error::from)?;
        s
    } else {
        std::fs::read_to_string(input).map_err(|e| Error::Io(format!("{input}: {e}")))?
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{input}: {e}")))?;
    let items = match value {
        Value::Array(items) => items,
        Value::Object(mut map) if map.contains_key("certificates") => match map.remove("certificates") {
            Some(Value::Array(items)) => items,
            _ => return Err(Error::Parse("certificates must be an array".into()).into()),
        },
        single => vec![single],
    };
    let mut all_ok = true;
    let results: Vec<Value> = items
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let checked = serde_json::from_value::<LiftCertificate>(item)
                .map_err(|e| Error::Parse(e.to_string()))
                .and_then(|c| verify_certificate(&c));
            match checked {
                Ok(c) => json!({ "index": i, "valid": true, "check": c }),
                Err(e) => {
                    all_ok = false;
                    json!({ "index": i, "valid": false, "error": { "kind": e.kind(), "message": e.to_string() } })
                }
            }
        })
        .collect();
    emit(format, &json!({ "all_valid": all_ok, "results": results }))?;
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Reported)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Reported) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            if format == Format::Json {
                let err = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
                eprintln!("{err}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(1)
        }
    }
}
