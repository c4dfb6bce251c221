use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cantor_cusp::exponents::{self, derive};
use cantor_cusp::geometry::{intervals_through, DEFAULT_DEPTH};
use cantor_cusp::grid::{self, BoundingBox, DomainSide, GridFunction};
use cantor_cusp::integrals::{jacobian_integral, Side};
use cantor_cusp::verify::{self, VerifyConfig, DEFAULT_SEED};
use cantor_cusp::witness::{self, SeriesReport, WitnessParams, WitnessSide};
use cantor_cusp::{reflect, reflect_jet, CuspProfile, PlanePoint};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod error;

use error::CliError;

type CliResult<T> = std::result::Result<T, CliError>;

const THREADS_VAR: &str = "CANTOR_CUSP_THREADS";
/// Largest generation `geometry` will enumerate.
const MAX_LISTED_GENERATION: u32 = 24;

#[derive(Parser)]
#[command(
    name = "cantor-cusp",
    version,
    about = "Cantor cusp domains: geometry, reflection, exponent thresholds and sharpness witnesses"
)]
struct Cli {
    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessSideArg {
    Upper,
    Lower,
}

impl From<WitnessSideArg> for WitnessSide {
    fn from(s: WitnessSideArg) -> Self {
        match s {
            WitnessSideArg::Upper => WitnessSide::Upper,
            WitnessSideArg::Lower => WitnessSide::Lower,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the removed intervals of generations 1 to DEPTH with exact endpoints.
    Geometry {
        #[arg(long)]
        depth: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Evaluate psi and its derivative at x1 values (one per line, or --x).
    Psi {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u32,
        /// CSV file of x1 values; standard input when neither this nor --x is given.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long = "x", allow_negative_numbers = true)]
        xs: Vec<f64>,
    },
    /// Reflect the points of a CSV file with columns x1,x2.
    Reflect {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u32,
        #[arg(long)]
        points: PathBuf,
    },
    /// Exponent thresholds for one p or a grid lo:hi:step of p values.
    Thresholds {
        #[arg(long)]
        alpha: f64,
        #[arg(long, conflicts_with = "p_grid", required_unless_present = "p_grid")]
        p: Option<f64>,
        #[arg(long)]
        p_grid: Option<String>,
        /// Also report kappa and the series ratio at this q (rows with q >= p get NA).
        #[arg(long)]
        q: Option<f64>,
    },
    /// Majorant series of the Jacobian-quotient integral over one side.
    JacobianIntegral {
        #[arg(long)]
        alpha: f64,
        /// Outer exponent; `inf` is accepted.
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long, default_value_t = 200)]
        generations: u32,
        /// `csv` writes the partial-sum trace.
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Extend a sampled grid function across the graph and report norms.
    Extend {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        input: PathBuf,
        /// Norm window x0:x1:y0:y1; the whole grid when omitted.
        #[arg(long)]
        window: Option<String>,
        /// Where to write the extended grid as JSON.
        #[arg(long)]
        grid_output: Option<PathBuf>,
    },
    /// Witness norm series, or the divergence series at --q.
    Sharpness {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, value_enum, default_value = "upper")]
        side: WitnessSideArg,
        #[arg(long, default_value_t = 60)]
        generations: u32,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// `csv` writes the term and partial-sum trace.
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Sample a witness on a grid, as JSON.
    WitnessGrid {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "upper")]
        side: WitnessSideArg,
        #[arg(long, default_value_t = 8)]
        generations: u32,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// x0:x1:y0:y1
        #[arg(long, default_value = "0:1:-0.5:0.5")]
        bbox: String,
        #[arg(long, default_value_t = 1.0 / 256.0)]
        h: f64,
    },
    /// Run the verification checks and print a JSON report.
    VerifyAll {
        /// Exponent used by the reflection checks.
        #[arg(long, default_value_t = 0.7)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Run only these checks (1 to 9).
        #[arg(long = "check")]
        checks: Vec<u32>,
    },
}

/// `{:.16e}`: 17 significant digits, identical on every run.
fn num(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), num)
}

fn sink(output: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::io(path, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().from_writer(out)
}

/// Rows of floats from a headerless or headed CSV; a first row that does not
/// parse is taken as a header.
fn read_rows(source: &str, columns: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) if values.len() == columns => rows.push(values),
            Err(_) if line == 0 => continue,
            _ => {
                return Err(CliError::Input(format!(
                    "line {}: expected {columns} numeric column(s), got {:?}",
                    line + 1,
                    record.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok(rows)
}

fn read_text(path: Option<&Path>) -> CliResult<String> {
    let mut text = String::new();
    match path {
        Some(p) => {
            File::open(p)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|e| CliError::io(p, e))?;
        }
        None => {
            io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

/// Parses `a:b:c:d` into four floats.
fn parse_box(spec: &str) -> CliResult<BoundingBox> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("bad box {spec:?}, expected x0:x1:y0:y1")))?;
    match parts[..] {
        [x0, x1, y0, y1] => Ok(BoundingBox::new(x0, x1, y0, y1)?),
        _ => Err(CliError::Input(format!(
            "bad box {spec:?}, expected x0:x1:y0:y1"
        ))),
    }
}

/// Parses `lo:hi:step` into the points `lo + i step <= hi`.
fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Input(format!("bad grid {spec:?}, expected lo:hi:step"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi >= lo) {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    if count > 10_000_000 {
        return Err(CliError::Input(format!(
            "grid {spec:?} has too many points"
        )));
    }
    Ok((0..=count).map(|i| lo + i as f64 * step).collect())
}

fn geometry(depth: u32, format: Format, out: &mut dyn Write) -> CliResult<()> {
    if depth == 0 || depth > MAX_LISTED_GENERATION {
        return Err(CliError::Input(format!(
            "depth must lie in 1..={MAX_LISTED_GENERATION}, got {depth}"
        )));
    }
    #[derive(Serialize)]
    struct Row {
        n: u32,
        k: u128,
        a_num: i128,
        b_num: i128,
        level: u32,
    }
    let rows = intervals_through(depth)?.map(|i| {
        let n = i.generation();
        Ok(Row {
            n,
            k: i.index(),
            a_num: i.left().numerator_at(n)?,
            b_num: i.right().numerator_at(n)?,
            level: n,
        })
    });
    match format {
        Format::Csv => {
            let mut w = csv_writer(out);
            for row in rows {
                w.serialize(row?)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<Row> = rows.collect::<cantor_cusp::Result<_>>()?;
            write_json(out, &rows)?;
        }
    }
    Ok(())
}

fn psi(alpha: f64, depth: u32, xs: Vec<f64>, out: &mut dyn Write) -> CliResult<()> {
    let profile = CuspProfile::with_depth(alpha, depth)?;
    let mut w = csv_writer(out);
    w.write_record(["x1", "psi_lo", "psi_hi", "derivative_or_NA"])?;
    for x in xs {
        let value = profile.psi(x);
        w.write_record([
            num(x),
            num(value.lo),
            num(value.hi),
            opt(profile.psi_derivative(x)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn reflect_points(alpha: f64, depth: u32, points: &Path, out: &mut dyn Write) -> CliResult<()> {
    let profile = CuspProfile::with_depth(alpha, depth)?;
    let rows = read_rows(&read_text(Some(points))?, 2)?;
    let mut w = csv_writer(out);
    w.write_record(["x1", "x2", "rx1", "rx2", "zone", "jacobian"])?;
    for row in rows {
        let p = PlanePoint::new(row[0], row[1]);
        let zone = match cantor_cusp::reflection::zone(&profile, p) {
            Ok(z) => z.to_string(),
            Err(e) => e.kind().to_string(),
        };
        let (rx1, rx2) = match reflect(&profile, p) {
            Ok(r) => (num(r.x1), num(r.x2)),
            Err(_) => ("NA".into(), "NA".into()),
        };
        let jacobian = reflect_jet(&profile, p)
            .map(|j| num(j.jacobian_abs))
            .unwrap_or_else(|_| "NA".into());
        w.write_record([num(p.x1), num(p.x2), rx1, rx2, zone, jacobian])?;
    }
    w.flush()?;
    Ok(())
}

fn thresholds(alpha: f64, ps: Vec<f64>, q: Option<f64>, out: &mut dyn Write) -> CliResult<()> {
    use rayon::prelude::*;
    let rows: Vec<Vec<String>> = ps
        .par_iter()
        .map(|&p| -> CliResult<Vec<String>> {
            let q = q.filter(|&q| q < p);
            let d = derive(alpha, p, q)?;
            Ok(vec![
                num(alpha),
                num(p),
                opt(d.p_lower),
                num(d.q_upper),
                d.admissible.to_string(),
                num(d.alpha_p),
                num(d.beta_default),
                opt(q),
                opt(d.kappa),
                opt(d.series_ratio),
            ])
        })
        .collect::<CliResult<_>>()?;
    let mut w = csv_writer(out);
    w.write_record([
        "alpha",
        "p",
        "p_lower",
        "q_upper",
        "admissible",
        "alpha_p",
        "beta_default",
        "q",
        "kappa",
        "series_ratio_at_q",
    ])?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_trace(
    out: &mut dyn Write,
    generations: &[u32],
    terms: &[f64],
    partial_sums: &[f64],
) -> CliResult<()> {
    let mut w = csv_writer(out);
    w.write_record(["n", "term", "partial_sum"])?;
    for ((n, t), s) in generations.iter().zip(terms).zip(partial_sums) {
        w.write_record([n.to_string(), num(*t), num(*s)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ExtendReport {
    source: grid::NormReport,
    extended: grid::NormReport,
    ratio: f64,
}

fn extend(
    alpha: f64,
    p: f64,
    q: f64,
    input: &Path,
    window: Option<String>,
    grid_output: Option<PathBuf>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let g: GridFunction = serde_json::from_str(&read_text(Some(input))?)?;
    if g.alpha != alpha {
        return Err(CliError::Input(format!(
            "grid was sampled at alpha = {}, not {alpha}",
            g.alpha
        )));
    }
    let profile = CuspProfile::new(alpha)?;
    let window = match window {
        Some(spec) => parse_box(&spec)?,
        None => g.bbox,
    };
    let extended = grid::extend(&profile, &g)?;
    let source = grid::sobolev_norm(&g, p, window)?;
    let extended_norm = grid::sobolev_norm(&extended, q, window)?;
    if let Some(path) = grid_output {
        let mut f = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
        serde_json::to_writer(&mut f, &extended)?;
        f.flush()?;
    }
    write_json(
        out,
        &ExtendReport {
            ratio: extended_norm.sobolev_norm / source.sobolev_norm,
            source,
            extended: extended_norm,
        },
    )
}

fn witness_params(
    alpha: f64,
    p: f64,
    side: WitnessSideArg,
    generations: u32,
    beta: Option<f64>,
) -> CliResult<WitnessParams> {
    let params = WitnessParams::new(alpha, p, side.into(), generations)?;
    Ok(match beta {
        Some(b) => params.with_beta(b)?,
        None => params,
    })
}

fn sharpness(
    params: WitnessParams,
    q: Option<f64>,
    format: Format,
    out: &mut dyn Write,
) -> CliResult<()> {
    match (q, format) {
        (Some(q), Format::Json) => write_json(out, &witness::divergence_witness(&params, q)?),
        (Some(q), Format::Csv) => {
            let r: SeriesReport = witness::divergence_witness(&params, q)?;
            write_trace(out, &r.generations, &r.terms, &r.partial_sums)
        }
        (None, Format::Json) => write_json(out, &witness::witness_sobolev_norm(&params)),
        (None, Format::Csv) => {
            let r = witness::witness_sobolev_norm(&params);
            let mut w = csv_writer(out);
            w.write_record(["series", "n", "term", "partial_sum"])?;
            for (name, s) in [("value", &r.value), ("gradient", &r.gradient)] {
                for ((n, t), ps) in s.generations.iter().zip(&s.terms).zip(&s.partial_sums) {
                    w.write_record([name.to_string(), n.to_string(), num(*t), num(*ps)])?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn witness_grid(params: WitnessParams, bbox: &str, h: f64, out: &mut dyn Write) -> CliResult<()> {
    let profile = CuspProfile::new(params.alpha)?;
    let side = match params.side {
        WitnessSide::Upper => DomainSide::Upper,
        WitnessSide::Lower => DomainSide::Lower,
    };
    let g = grid::sample(
        &profile,
        |x| witness::eval_witness(&params, x),
        parse_box(bbox)?,
        h,
        side,
    )?;
    serde_json::to_writer(&mut *out, &g)?;
    writeln!(out)?;
    Ok(())
}

/// Runs the command; `Ok(false)` means it ran but some check failed.
fn run(cli: Cli) -> CliResult<bool> {
    let mut out = sink(&cli.output)?;
    let out: &mut dyn Write = &mut out;
    match cli.command {
        Command::Geometry { depth, format } => geometry(depth, format, out)?,
        Command::Psi {
            alpha,
            depth,
            input,
            xs,
        } => {
            let xs = if xs.is_empty() || input.is_some() {
                let mut all: Vec<f64> = read_rows(&read_text(input.as_deref())?, 1)?
                    .into_iter()
                    .map(|r| r[0])
                    .collect();
                all.extend(xs);
                all
            } else {
                xs
            };
            psi(alpha, depth, xs, out)?
        }
        Command::Reflect {
            alpha,
            depth,
            points,
        } => reflect_points(alpha, depth, &points, out)?,
        Command::Thresholds {
            alpha,
            p,
            p_grid,
            q,
        } => {
            let ps = match (p, p_grid) {
                (Some(p), _) => vec![p],
                (None, Some(spec)) => parse_grid(&spec)?,
                (None, None) => unreachable!("clap requires one of --p and --p-grid"),
            };
            thresholds(alpha, ps, q, out)?
        }
        Command::JacobianIntegral {
            alpha,
            p,
            q,
            side,
            generations,
            format,
        } => {
            let side = match side {
                SideArg::Plus => Side::Plus,
                SideArg::Minus => Side::Minus,
            };
            let report = jacobian_integral(side, alpha, p, q, generations)?;
            match format {
                Format::Json => write_json(out, &report)?,
                Format::Csv => {
                    let ns: Vec<u32> = (1..=generations).collect();
                    let terms: Vec<f64> = report.log_terms.iter().map(|l| l.exp()).collect();
                    write_trace(out, &ns, &terms, &report.partial_sums)?
                }
            }
        }
        Command::Extend {
            alpha,
            p,
            q,
            input,
            window,
            grid_output,
        } => extend(alpha, p, q, &input, window, grid_output, out)?,
        Command::Sharpness {
            alpha,
            p,
            q,
            side,
            generations,
            beta,
            format,
        } => sharpness(
            witness_params(alpha, p, side, generations, beta)?,
            q,
            format,
            out,
        )?,
        Command::WitnessGrid {
            alpha,
            p,
            side,
            generations,
            beta,
            bbox,
            h,
        } => witness_grid(
            witness_params(alpha, p, side, generations, beta)?,
            &bbox,
            h,
            out,
        )?,
        Command::VerifyAll {
            alpha,
            seed,
            checks,
        } => {
            exponents::alpha_p(alpha, 2.0)?;
            let config = VerifyConfig { alpha, seed };
            let report = if checks.is_empty() {
                verify::verify_all(&config)?
            } else {
                let results = checks
                    .iter()
                    .map(|&id| verify::run_check(id, &config))
                    .collect::<cantor_cusp::Result<Vec<_>>>()?;
                verify::VerifyReport {
                    config,
                    passed: results.iter().all(|c| c.passed),
                    checks: results,
                }
            };
            write_json(out, &report)?;
            out.flush()?;
            return Ok(report.passed);
        }
    }
    out.flush()?;
    Ok(true)
}

fn configure_threads() -> CliResult<()> {
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let threads: usize = value.parse().map_err(|_| {
            CliError::Input(format!(
                "{THREADS_VAR} must be a thread count, got {value:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let message = message.strip_prefix("error: ").unwrap_or(&message);
            CliError::Usage(message.to_string()).report();
            return ExitCode::from(2);
        }
    };
    let outcome = configure_threads().and_then(|()| run(cli));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            e.report();
            ExitCode::from(2)
        }
    }
}
