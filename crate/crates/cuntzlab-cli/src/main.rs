//! `cuntzlab` — batch driver for the classification laboratory.
//!
//! Single-shot subcommands (`dcu`, `dw`, `du`, `cover`, `lift`, `exactlift`)
//! read the JSON wire formats and print a JSON result; `gen` writes seeded
//! instance files; `run`/`verify` execute a named suite, `run` additionally
//! writing CSV rows and a JSON summary. The exit code is nonzero exactly
//! when an assertion-class check fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use cuntzlab::gen::{gen_measure, gen_normal, gen_region, trial_seed, Shape};
use cuntzlab::schema::{LiftDoc, MatrixDoc, MorphismDoc, RegionDoc};
use cuntzlab::suite::{run_suite, run_trial, Row, SuiteName, ALL_SUITES};
use cuntzlab::{build_cover, d_cu, d_u_bracket, d_w, exact_lift_traced, lift};

#[derive(Parser)]
#[command(name = "cuntzlab", version, about = "Cuntz-semigroup classification laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write seeded random instance files (region, morphism, matrix JSON)
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// disk | segment | annulus
        #[arg(long, default_value = "disk")]
        shape: String,
        /// target grid size
        #[arg(long, default_value_t = 300)]
        grid: usize,
        /// matrix dimension / total mass
        #[arg(long, default_value_t = 16)]
        n: u32,
        /// atom budget per morphism
        #[arg(long, default_value_t = 8)]
        atoms: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// d_Cu between two morphisms over a region
    Dcu {
        region: PathBuf,
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// d_W between two normal matrices with spectra on a region
    Dw {
        region: PathBuf,
        x: PathBuf,
        y: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certified two-sided d_U bracket between two normal matrices
    Du {
        x: PathBuf,
        y: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an almost δ-cover for a morphism and report its certificates
    Cover {
        region: PathBuf,
        morphism: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-dimensional lift with the certified 6δ bound
    Lift {
        region: PathBuf,
        morphism: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact lift: limit of the aligned Cauchy sequence of realizations
    Exactlift {
        region: PathBuf,
        morphism: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a suite and report pass counts without writing files
    Verify {
        /// lift-bound | metric-axioms | oracle-equivalence | marriage |
        /// du-bracket | exact-lift | convergence | all
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        /// re-run a single row (id like "marriage-0002" or a bare index)
        #[arg(long)]
        replay: Option<String>,
    },
    /// Run a suite and write CSV rows plus a JSON summary
    Run {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        /// output directory (default: $CUNTZLAB_OUT or ./cuntzlab-out)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        replay: Option<String>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Gen { seed, trials, shape, grid, n, atoms, out } => {
            gen_cmd(seed, trials, &shape, grid, n, atoms, out)
        }
        Cmd::Dcu { region, a, b, out } => dcu_cmd(&region, &a, &b, out),
        Cmd::Dw { region, x, y, out } => dw_cmd(&region, &x, &y, out),
        Cmd::Du { x, y, out } => du_cmd(&x, &y, out),
        Cmd::Cover { region, morphism, delta, out } => cover_cmd(&region, &morphism, delta, out),
        Cmd::Lift { region, morphism, delta, out } => lift_cmd(&region, &morphism, delta, out),
        Cmd::Exactlift { region, morphism, out } => exactlift_cmd(&region, &morphism, out),
        Cmd::Verify { suite, seed, trials, replay } => {
            suite_cmd(&suite, seed, trials, None, replay, false)
        }
        Cmd::Run { suite, seed, trials, out, replay } => {
            suite_cmd(&suite, seed, trials, Some(out_dir(out)), replay, true)
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("CUNTZLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cuntzlab-out"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Print a line, tolerating a closed pipe (e.g. piping into `head`).
fn print_line(text: &str) -> Result<()> {
    use std::io::Write as _;
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn emit(value: &serde_json::Value, out: Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    if let Some(path) = out {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    print_line(&text)
}

/// JSON-safe real: ∞ becomes the string "inf".
fn real(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

fn gen_cmd(
    seed: u64,
    trials: usize,
    shape: &str,
    grid: usize,
    n: u32,
    atoms: usize,
    out: Option<PathBuf>,
) -> Result<()> {
    let shape = Shape::from_str(shape)?;
    let dir = out_dir(out);
    fs::create_dir_all(&dir)?;
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
        let region = gen_region(&mut rng, shape, grid);
        let alpha = gen_measure(&mut rng, &region, atoms.max(1), n);
        let x = gen_normal(&mut rng, &region, n as usize);
        let write = |name: String, value: serde_json::Value| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, serde_json::to_string_pretty(&value)?)
                .with_context(|| format!("writing {}", path.display()))?;
            Ok(())
        };
        write(
            format!("region_{i:03}.json"),
            serde_json::to_value(RegionDoc::from_region(&region))?,
        )?;
        write(
            format!("morphism_{i:03}.json"),
            serde_json::to_value(MorphismDoc::from_measure(&alpha))?,
        )?;
        write(
            format!("matrix_{i:03}.json"),
            serde_json::to_value(MatrixDoc::from_matrix(x.mat()))?,
        )?;
    }
    print_line(&format!("wrote {trials} instance triples to {}", dir.display()))?;
    Ok(())
}

fn dcu_cmd(region: &Path, a: &Path, b: &Path, out: Option<PathBuf>) -> Result<()> {
    let region = read_json::<RegionDoc>(region)?.into_region()?;
    let alpha = read_json::<MorphismDoc>(a)?.into_measure(&region)?;
    let beta = read_json::<MorphismDoc>(b)?.into_measure(&region)?;
    let result = d_cu(&alpha, &beta)?;
    emit(
        &json!({
            "value": real(result.value),
            "pairing": result.pairing,
            "certificate": result.certificate,
        }),
        out,
    )
}

fn dw_cmd(region: &Path, x: &Path, y: &Path, out: Option<PathBuf>) -> Result<()> {
    let region = read_json::<RegionDoc>(region)?.into_region()?;
    let x = read_json::<MatrixDoc>(x)?.into_normal()?;
    let y = read_json::<MatrixDoc>(y)?.into_normal()?;
    let value = d_w(&x, &y, &region)?;
    emit(&json!({ "value": real(value) }), out)
}

fn du_cmd(x: &Path, y: &Path, out: Option<PathBuf>) -> Result<()> {
    let x = read_json::<MatrixDoc>(x)?.into_normal()?;
    let y = read_json::<MatrixDoc>(y)?.into_normal()?;
    let bracket = d_u_bracket(&x, &y)?;
    emit(
        &json!({
            "lower": bracket.lower,
            "upper": bracket.upper,
            "witness_error": bracket.witness_error,
            "witness": serde_json::to_value(MatrixDoc::from_matrix(&bracket.witness))?,
        }),
        out,
    )
}

fn cover_cmd(region: &Path, morphism: &Path, delta: f64, out: Option<PathBuf>) -> Result<()> {
    let region = read_json::<RegionDoc>(region)?.into_region()?;
    let alpha = read_json::<MorphismDoc>(morphism)?.into_measure(&region)?;
    let cover = build_cover(&alpha, delta)?;
    let sets: Vec<serde_json::Value> = cover
        .sets()
        .iter()
        .zip(cover.set_rings())
        .map(|(set, &k)| {
            let (c, s, eps) = cover.rings()[k];
            json!({
                "ring_center": [c.re, c.im],
                "s": s,
                "eps": eps,
                "grid_members": set.members().len(),
            })
        })
        .collect();
    let c = cover.certificates();
    emit(
        &json!({
            "delta": cover.delta(),
            "eta": cover.eta(),
            "gap_lower": real(cover.gap_lower()),
            "sets": sets,
            "certificates": {
                "density": c.density,
                "diameter": c.diameter,
                "separation": c.separation,
                "residual": c.residual,
            },
        }),
        out,
    )
}

fn lift_cmd(region: &Path, morphism: &Path, delta: f64, out: Option<PathBuf>) -> Result<()> {
    let region = read_json::<RegionDoc>(region)?.into_region()?;
    let alpha = read_json::<MorphismDoc>(morphism)?.into_measure(&region)?;
    let outcome = lift(&alpha, delta)?;
    emit(&serde_json::to_value(LiftDoc::from_outcome(&outcome))?, out)
}

fn exactlift_cmd(region: &Path, morphism: &Path, out: Option<PathBuf>) -> Result<()> {
    let region = read_json::<RegionDoc>(region)?.into_region()?;
    let alpha = read_json::<MorphismDoc>(morphism)?.into_measure(&region)?;
    let trace = exact_lift_traced(&alpha)?;
    emit(
        &json!({
            "matrix": serde_json::to_value(MatrixDoc::from_matrix(trace.matrix.mat()))?,
            "deltas": trace.deltas,
            "lift_bounds": trace.lift_bounds,
            "step_distances": trace.step_distances,
            "final_dcu": trace.final_dcu,
            "covers_certified": trace.covers_certified,
        }),
        out,
    )
}

fn parse_suites(name: &str) -> Result<Vec<SuiteName>> {
    if name == "all" {
        Ok(ALL_SUITES.to_vec())
    } else {
        Ok(vec![SuiteName::from_str(name)?])
    }
}

fn row_json(row: &Row) -> serde_json::Value {
    json!({
        "id": row.id,
        "seed": row.seed,
        "summary": row.summary,
        "measured": row.measured,
        "pass": row.pass,
        "detail": row.detail,
        "covers_certified": row.covers.0,
        "covers_total": row.covers.1,
    })
}

fn suite_cmd(
    name: &str,
    seed: u64,
    trials: Option<usize>,
    out: Option<PathBuf>,
    replay: Option<String>,
    write_files: bool,
) -> Result<()> {
    let suites = parse_suites(name)?;

    if let Some(id) = replay {
        if suites.len() != 1 {
            bail!("--replay needs a single suite");
        }
        let suite = suites[0];
        let index: usize = id
            .rsplit('-')
            .next()
            .and_then(|tail| tail.parse().ok())
            .with_context(|| format!("cannot parse a trial index from {id:?}"))?;
        let row = run_trial(suite, seed, index);
        print_line(&serde_json::to_string_pretty(&row_json(&row))?)?;
        if !row.pass {
            std::process::exit(1);
        }
        return Ok(());
    }

    let mut any_failure = false;
    for suite in suites {
        let n = trials.unwrap_or_else(|| suite.default_trials());
        let report = run_suite(suite, seed, n);
        let (cover_pass, cover_total) = report.cover_counts();
        let summary = json!({
            "suite": suite.name(),
            "seed": seed,
            "trials": n,
            "passes": report.passes(),
            "failures": report.failures(),
            "failed_ids": report
                .rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| r.id.clone())
                .collect::<Vec<_>>(),
            "covers": { "certified": cover_pass, "evaluated": cover_total },
        });
        if write_files {
            let dir = out.clone().expect("run always has an output directory");
            fs::create_dir_all(&dir)?;
            let csv_path = dir.join(format!("{}.csv", suite.name()));
            let mut w = csv::Writer::from_path(&csv_path)
                .with_context(|| format!("writing {}", csv_path.display()))?;
            w.write_record([
                "id", "seed", "summary", "measured", "pass", "detail", "covers_certified",
                "covers_total",
            ])?;
            for row in &report.rows {
                w.write_record(&[
                    row.id.clone(),
                    row.seed.to_string(),
                    row.summary.clone(),
                    row.measured.clone(),
                    (if row.pass { "pass" } else { "fail" }).to_string(),
                    row.detail.clone(),
                    row.covers.0.to_string(),
                    row.covers.1.to_string(),
                ])?;
            }
            w.flush()?;
            let json_path = dir.join(format!("{}.json", suite.name()));
            fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;
        }
        print_line(&serde_json::to_string(&summary)?)?;
        if !report.all_pass() || cover_pass != cover_total {
            any_failure = true;
        }
    }
    if any_failure {
        std::process::exit(1);
    }
    Ok(())
}
