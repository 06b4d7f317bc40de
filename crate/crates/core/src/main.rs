use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use ellheights::bounds::{
    lang_constant, small_height_threshold, torsion_bound, verify_hindry_torus, BoundInputs, BoundStatus,
    PaperConstants,
};
use ellheights::harness::{emit_report, parse_curve_file, run_suite, Check, CurveRecord, OutputFormat, RunConfig};
use ellheights::heights::{CurveHeights, HeightConfig};
use ellheights::localdata::global_data_with_bound;
use ellheights::torsion::torsion_subgroup_with_bound;
use ellheights::Error;

#[derive(Parser)]
#[command(name = "ellheights", version, about = "Heights, reduction data and explicit bounds for elliptic curves over Q")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Options {
    /// Slack for real-valued comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Trial-division bound before Pollard rho.
    #[arg(long, global = true, default_value_t = 100_000)]
    factor_bound: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma-separated check names; all checks by default.
    #[arg(long, global = true, value_delimiter = ',')]
    checks: Vec<Check>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal model, local reduction data, Szpiro ratio and torsion.
    Analyze { file: PathBuf },
    /// Canonical heights of the listed points with per-place local heights.
    Heights { file: PathBuf },
    /// Run the inequality suite.
    Verify { file: PathBuf },
    /// Evaluate the bound formulas.
    Bounds {
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        log_norm_delta: Option<f64>,
    },
    /// Sample the Néron function near the origin of a complex torus.
    TorusCheck {
        /// `RE,IM` of tau.
        #[arg(long, value_parser = parse_tau, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

fn parse_tau(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or("expected RE,IM")?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{e}"))?;
    if im.is_nan() || im <= 0.0 {
        return Err("imaginary part must be positive".into());
    }
    Ok(Complex64::new(re, im))
}

enum Failure {
    /// Some check failed.
    Check,
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let status = run(&cli, &mut out);
    if let Err(e) = write_output(cli.opts.out.as_deref(), &out) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn run_config(opts: &Options) -> Result<RunConfig, Failure> {
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(Failure::Input("--tol must be nonnegative".into()));
    }
    if opts.parallel == 0 {
        return Err(Failure::Input("--parallel must be at least 1".into()));
    }
    let checks: BTreeSet<Check> = if opts.checks.is_empty() {
        Check::ALL.into_iter().collect()
    } else {
        opts.checks.iter().copied().collect()
    };
    Ok(RunConfig {
        tolerance: opts.tol,
        factor_bound: opts.factor_bound,
        seed: opts.seed,
        checks,
        parallelism: opts.parallel,
        output_format: match opts.format {
            Format::Json => OutputFormat::Json,
            Format::Tsv => OutputFormat::Tsv,
        },
        ..RunConfig::default()
    })
}

fn run(cli: &Cli, out: &mut String) -> Result<(), Failure> {
    let config = run_config(&cli.opts)?;
    match &cli.command {
        Command::Verify { file } => {
            let records = parse_curve_file(file)?;
            let result = run_suite(&records, &config)?;
            out.push_str(&emit_report(&result, config.output_format));
            if result.summary.fail > 0 {
                return Err(Failure::Check);
            }
            Ok(())
        }
        Command::Analyze { file } => {
            let records = parse_curve_file(file)?;
            let rows: Vec<Value> = records.iter().map(|r| analyze(r, &config)).collect();
            emit_rows(out, &rows, config.output_format, &ANALYZE_COLUMNS);
            errors_to_status(&rows)
        }
        Command::Heights { file } => {
            let records = parse_curve_file(file)?;
            let rows: Vec<Value> = records.iter().flat_map(|r| heights(r, &config)).collect();
            emit_rows(out, &rows, config.output_format, &HEIGHT_COLUMNS);
            errors_to_status(&rows)
        }
        Command::Bounds {
            d,
            sigma,
            log_norm_delta,
        } => {
            let k = PaperConstants::default();
            let inputs = BoundInputs::new(*d, *sigma, log_norm_delta.unwrap_or(0.0))?;
            let lang = lang_constant(&inputs, &k);
            let mut row = json!({
                "d": d,
                "sigma": sigma,
                "torsion_bound": torsion_bound(&inputs, &k),
                "lang_constant": lang,
            });
            if let Some(l) = log_norm_delta {
                row["log_norm_delta"] = json!(l);
                row["height_lower_bound"] = json!(lang * l);
                row["small_height_threshold"] = json!(small_height_threshold(&inputs, &k));
            }
            let columns: &[&str] = if log_norm_delta.is_some() {
                &BOUNDS_COLUMNS
            } else {
                &BOUNDS_COLUMNS[..4]
            };
            emit_rows(out, &[row], config.output_format, columns);
            Ok(())
        }
        Command::TorusCheck { tau, samples } => {
            let r = verify_hindry_torus(
                *tau,
                *samples,
                config.seed,
                config.tolerance,
                &PaperConstants::default(),
                &HeightConfig::default(),
            )?;
            let row = serde_json::to_value(&r).expect("report serializes");
            emit_rows(out, &[row], config.output_format, &TORUS_COLUMNS);
            if r.status == BoundStatus::Fail {
                return Err(Failure::Check);
            }
            Ok(())
        }
    }
}

const ANALYZE_COLUMNS: [&str; 9] = [
    "label",
    "minimal",
    "conductor",
    "minimal_discriminant",
    "sigma",
    "torsion_order",
    "torsion_structure",
    "locals",
    "error",
];
const HEIGHT_COLUMNS: [&str; 8] = ["label", "point", "place", "lambda", "r", "i", "j", "error"];
const BOUNDS_COLUMNS: [&str; 7] = [
    "d",
    "sigma",
    "torsion_bound",
    "lang_constant",
    "log_norm_delta",
    "height_lower_bound",
    "small_height_threshold",
];
const TORUS_COLUMNS: [&str; 7] = ["check", "place", "lhs", "rhs", "margin", "status", "context"];

fn errors_to_status(rows: &[Value]) -> Result<(), Failure> {
    let errors: Vec<String> = rows
        .iter()
        .filter_map(|r| r.get("error").and_then(Value::as_str).map(str::to_string))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Input(errors.join("; ")))
    }
}

fn emit_rows(out: &mut String, rows: &[Value], format: OutputFormat, columns: &[&str]) {
    match format {
        OutputFormat::Json => {
            for r in rows {
                out.push_str(&r.to_string());
                out.push('\n');
            }
        }
        OutputFormat::Tsv => {
            out.push_str(&columns.join("\t"));
            out.push('\n');
            for r in rows {
                let cells: Vec<String> = columns
                    .iter()
                    .map(|c| match r.get(*c) {
                        None | Some(Value::Null) => String::new(),
                        Some(Value::String(s)) => s.clone(),
                        Some(Value::Array(items)) => items
                            .iter()
                            .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
                            .collect::<Vec<_>>()
                            .join(" "),
                        Some(v) => v.to_string(),
                    })
                    .collect();
                out.push_str(&cells.join("\t"));
                out.push('\n');
            }
        }
    }
}

fn analyze(record: &CurveRecord, config: &RunConfig) -> Value {
    let fail = |e: Error| json!({"label": record.label, "error": e.to_string()});
    let data = match global_data_with_bound(&record.model, config.factor_bound) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let torsion = match torsion_subgroup_with_bound(&data.minimal, config.factor_bound) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let locals: Vec<String> = data
        .locals
        .iter()
        .map(|l| {
            format!(
                "p={} {} {} delta={} eta={} m={} c={}",
                l.p, l.kodaira, l.reduction, l.delta, l.eta, l.m, l.c
            )
        })
        .collect();
    json!({
        "label": record.label,
        "minimal": data.minimal.to_string(),
        "conductor": data.conductor().to_string(),
        "minimal_discriminant": data.minimal_discriminant().to_string(),
        "sigma": data.sigma,
        "torsion_order": torsion.order,
        "torsion_structure": torsion.structure.to_string(),
        "torsion_points": torsion.points.iter().map(|p| data.transform.pull_point(p).to_string()).collect::<Vec<_>>(),
        "locals": locals,
    })
}

fn heights(record: &CurveRecord, config: &RunConfig) -> Vec<Value> {
    let fail = |point: String, e: Error| vec![json!({"label": record.label, "point": point, "error": e.to_string()})];
    let h = match CurveHeights::with_factor_bound(&record.model, HeightConfig::default(), config.factor_bound) {
        Ok(h) => h,
        Err(e) => return fail(String::new(), e),
    };
    let mut rows = Vec::new();
    for p in &record.points {
        let point = p.to_string();
        let (total, places) = match h.canonical_height(p).and_then(|t| Ok((t, h.breakdown(p)?))) {
            Ok(v) => v,
            Err(e) => {
                rows.extend(fail(point, e));
                continue;
            }
        };
        for b in places {
            rows.push(json!({
                "label": record.label,
                "point": point,
                "place": b.place.to_string(),
                "lambda": b.lambda,
                "r": b.r_value.map(|r| r.to_string()),
                "i": b.i_part,
                "j": b.j_part,
            }));
        }
        rows.push(json!({"label": record.label, "point": point, "place": "total", "lambda": total}));
    }
    rows
}
