use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use lpp_core::bound::{bound_on_simplex_grid, evaluate_bound};
use lpp_core::lattice::{
    count_paths, entropy_count_bound, enumerate_paths_capped, rationalize, LatticePoint,
    DEFAULT_ENUMERATION_CAP,
};
use lpp_core::ldp::RateFunction;
use lpp_core::lpp::{box_cells, DEFAULT_CELL_CAP};
use lpp_core::montecarlo::{
    compare_bound_to_simulation_with, estimate_growth_rate_with, growth_field, schedule_converged,
    tail_probability_experiment_with, Estimate, McOptions,
};
use lpp_core::{BoundReport, ProbabilityVector};
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{float, float_list, int_list, Report};

/// Failure modes of a command, mapped onto exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(ConfigError),
    /// Exit code 1.
    Runtime(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<lpp_core::Error> for CliError {
    fn from(e: lpp_core::Error) -> Self {
        use lpp_core::Error::*;
        match e {
            Internal(_) | MgfDomain { .. } => CliError::Runtime(e.into()),
            _ => CliError::Config(ConfigError(e.to_string())),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CmdResult<T> = Result<T, CliError>;

/// A command's report plus an optional failure to raise after the report
/// has been written.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self {
            report,
            failure: None,
        }
    }
}

fn dist_json(c: &Common) -> Value {
    c.dist
        .map(|d| serde_json::to_value(d).expect("serializable"))
        .unwrap_or(Value::Null)
}

fn positive(field: &str, v: usize) -> ConfigResult<usize> {
    if v < 1 {
        return config_err(format!("invalid value for `{field}`: must be ≥ 1"));
    }
    Ok(v)
}

// ---------------------------------------------------------------- bound

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Direction x (comma-separated, non-negative); prints one bound
    #[arg(long)]
    pub direction: Option<String>,
    /// Simplex dimension for a grid surface (2 or 3)
    #[arg(long)]
    pub d: Option<usize>,
    /// Grid resolution: points k/resolution
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Add an entropy column in bits
    #[arg(long)]
    pub entropy_bits: bool,
}

fn bound_row(r: &BoundReport, single: bool, bits: bool) -> Vec<String> {
    let mut row = Vec::new();
    if single {
        row.push(float_list(&r.direction));
    }
    row.extend(r.p.iter().map(|&v| float(v)));
    if single {
        row.push(float(r.scale));
    }
    row.push(float(r.entropy_nats));
    if bits {
        row.push(float(r.entropy_nats / std::f64::consts::LN_2));
    }
    row.push(float(r.bound_on_g));
    row.push(r.degenerate.to_string());
    row
}

pub fn cmd_bound(args: &BoundArgs) -> CmdResult<(Common, Outcome)> {
    let file = load_file(&args.common)?;
    let common = Common::merge(&args.common, &file)?;
    let dist = common.require_dist()?;
    let direction = pick(args.direction.as_deref(), &file.direction, |s| {
        parse_f64_list("direction", s)
    })?;
    let d = args.d.or(file.d);
    let resolution = args.resolution.or(file.resolution);
    let bits = args.entropy_bits || file.entropy_bits.unwrap_or(false);

    let (reports, single) = match (&direction, d, resolution) {
        (Some(x), None, None) => {
            check_direction("direction", x)?;
            (vec![evaluate_bound(&dist, x)?], true)
        }
        (None, Some(d), Some(res)) => {
            if !(2..=3).contains(&d) {
                return Err(
                    ConfigError(format!("invalid value for `d`: must be 2 or 3, got {d}")).into(),
                );
            }
            if res < 2 {
                return Err(ConfigError(format!(
                    "invalid value for `resolution`: must be ≥ 2, got {res}"
                ))
                .into());
            }
            (bound_on_simplex_grid(&dist, d, res)?, false)
        }
        (Some(_), _, _) => {
            return Err(ConfigError(
                "give either `direction` or `d` with `resolution`, not both".into(),
            )
            .into())
        }
        _ => {
            return Err(ConfigError(
                "missing `direction` (or `d` and `resolution` for a grid surface)".into(),
            )
            .into())
        }
    };

    let config = json!({
        "dist": dist_json(&common),
        "direction": direction,
        "d": d,
        "resolution": resolution,
        "entropy_bits": bits,
    });
    let mut report = Report::new("bound", config);
    let dim = reports[0].p.len();
    if single {
        report.header.push("direction".into());
    }
    report.header.extend((1..=dim).map(|i| format!("p_{i}")));
    if single {
        report.header.push("scale".into());
    }
    report.header.push("entropy_nats".into());
    if bits {
        report.header.push("entropy_bits".into());
    }
    report
        .header
        .extend(["bound".to_string(), "degenerate".to_string()]);
    for r in &reports {
        report.rows.push(bound_row(r, single, bits));
        report.json_rows.push(json!({
            "direction": r.direction,
            "p": r.p,
            "scale": r.scale,
            "entropy_nats": r.entropy_nats,
            "bound": r.bound_on_g,
            "degenerate": r.degenerate,
        }));
    }
    Ok((common, report.into()))
}

// ------------------------------------------------------------- simulate

/// Header shared by the `simulate`, `tail` and `compare` tables.
pub const RESULTS_HEADER: [&str; 8] = [
    "kind",
    "n_or_l",
    "direction",
    "estimate_or_prob",
    "stderr_or_ci",
    "bound",
    "seed",
    "replicates",
];

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Direction x (comma-separated, non-negative)
    #[arg(long)]
    pub direction: Option<String>,
    /// Strictly increasing scales n (default 50,100,200,400)
    #[arg(long)]
    pub n_schedule: Option<String>,
    /// Replicates per scale (default 100)
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Largest weight field, in sites (default 2e8)
    #[arg(long)]
    pub cell_cap: Option<u128>,
    /// Write the first replicate's weight field at the first scale as CSV
    #[arg(long)]
    pub dump_field: Option<PathBuf>,
}

const DUMP_FIELD_MAX_CELLS: u128 = 1_000_000;

pub fn cmd_simulate(args: &SimulateArgs) -> CmdResult<(Common, Outcome)> {
    let file = load_file(&args.common)?;
    let common = Common::merge(&args.common, &file)?;
    let dist = common.require_dist()?;
    let seed = common.require_seed()?;
    let direction = pick(args.direction.as_deref(), &file.direction, |s| {
        parse_f64_list("direction", s)
    })?
    .ok_or_else(|| ConfigError("missing `direction`".into()))?;
    check_direction("direction", &direction)?;
    let schedule = pick(args.n_schedule.as_deref(), &file.n_schedule, |s| {
        parse_u64_list("n-schedule", s)
    })?
    .unwrap_or_else(|| vec![50, 100, 200, 400]);
    if schedule.is_empty() || schedule[0] < 1 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError(
            "invalid value for `n-schedule`: must be strictly increasing with every n ≥ 1".into(),
        )
        .into());
    }
    let replicates = positive(
        "replicates",
        args.replicates.or(file.replicates).unwrap_or(100),
    )?;
    let cell_cap = args.cell_cap.or(file.cell_cap).unwrap_or(DEFAULT_CELL_CAP);
    let opts = McOptions { cell_cap };
    for &n in &schedule {
        let target = LatticePoint::floor_scaled(&direction, n)?;
        let cells = box_cells(&target, u128::MAX)? as u128;
        if cells > cell_cap {
            return Err(ConfigError(format!(
                "invalid value for `n-schedule`: n = {n} needs {cells} lattice sites, above `cell-cap` = {cell_cap}"
            ))
            .into());
        }
    }
    let dump_field = args.dump_field.clone().or_else(|| file.dump_field.clone());

    let bound = evaluate_bound(&dist, &direction)?;
    let mut estimates: Vec<Estimate> = Vec::new();
    for &n in &schedule {
        let start = Instant::now();
        let mut est = estimate_growth_rate_with(&dist, &direction, &[n], replicates, seed, &opts)?;
        eprintln!("# n={n} wall_time_s={:.3}", start.elapsed().as_secs_f64());
        estimates.append(&mut est);
    }
    if !schedule_converged(&estimates) {
        eprintln!("warning: last two estimates differ by more than 2 pooled standard errors; g is not converged");
    }
    if let Some(path) = &dump_field {
        let field = growth_field(&dist, &direction, schedule[0], 0, seed, &opts)?;
        if field.values().len() as u128 > DUMP_FIELD_MAX_CELLS {
            return Err(ConfigError(format!(
                "invalid value for `dump-field`: field at n = {} has {} sites, more than {DUMP_FIELD_MAX_CELLS}",
                schedule[0],
                field.values().len()
            ))
            .into());
        }
        field.write_csv(BufWriter::new(File::create(path)?))?;
    }

    let config = json!({
        "dist": dist_json(&common),
        "seed": seed,
        "direction": direction,
        "n_schedule": schedule,
        "replicates": replicates,
        "cell_cap": cell_cap.to_string(),
    });
    let mut report = Report::new("simulate", config);
    report.header = RESULTS_HEADER.iter().map(|s| s.to_string()).collect();
    for e in &estimates {
        report.rows.push(vec![
            "growth".into(),
            e.n.to_string(),
            float_list(&direction),
            float(e.value),
            float(e.stderr),
            float(bound.bound_on_g),
            seed.to_string(),
            e.replicates.to_string(),
        ]);
        report.json_rows.push(json!({
            "kind": "growth",
            "n": e.n,
            "direction": direction,
            "target": e.target,
            "estimate": e.value,
            "stderr": e.stderr,
            "bound": bound.bound_on_g,
            "seed": seed,
            "replicates": e.replicates,
        }));
    }
    Ok((common, report.into()))
}

// ----------------------------------------------------------------- tail

#[derive(Debug, Clone, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Probability vector p (comma-separated, sums to 1)
    #[arg(long)]
    pub p: Option<String>,
    /// Threshold α on T(l p)/l
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Values of l, each a multiple of the rationalization scale m
    #[arg(long)]
    pub l_schedule: Option<String>,
    /// Replicates per l (default 10000)
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Largest denominator m tried when rationalizing p (default 1000)
    #[arg(long)]
    pub max_denominator: Option<u64>,
    #[arg(long)]
    pub cell_cap: Option<u128>,
}

pub fn cmd_tail(args: &TailArgs) -> CmdResult<(Common, Outcome)> {
    let file = load_file(&args.common)?;
    let common = Common::merge(&args.common, &file)?;
    let dist = common.require_dist()?;
    let seed = common.require_seed()?;
    let p_raw = pick(args.p.as_deref(), &file.p, |s| parse_f64_list("p", s))?
        .ok_or_else(|| ConfigError("missing `p`".into()))?;
    let p = ProbabilityVector::new(p_raw.clone())
        .map_err(|e| ConfigError(format!("invalid value for `p`: {e}")))?;
    let alpha = args
        .alpha
        .or(file.alpha)
        .ok_or_else(|| ConfigError("missing `alpha`".into()))?;
    if !alpha.is_finite() {
        return Err(ConfigError(format!(
            "invalid value for `alpha`: must be finite, got {alpha}"
        ))
        .into());
    }
    let l_schedule = pick(args.l_schedule.as_deref(), &file.l_schedule, |s| {
        parse_u64_list("l-schedule", s)
    })?
    .ok_or_else(|| ConfigError("missing `l-schedule`".into()))?;
    if l_schedule.is_empty() {
        return Err(ConfigError("invalid value for `l-schedule`: empty".into()).into());
    }
    let replicates = positive(
        "replicates",
        args.replicates.or(file.replicates).unwrap_or(10_000),
    )?;
    let max_den = args
        .max_denominator
        .or(file.max_denominator)
        .unwrap_or(1000);
    if max_den < 1 {
        return Err(ConfigError("invalid value for `max-denominator`: must be ≥ 1".into()).into());
    }
    let cell_cap = args.cell_cap.or(file.cell_cap).unwrap_or(DEFAULT_CELL_CAP);
    let rational = rationalize(&p, max_den)?;
    if let Some(&l) = l_schedule.iter().find(|&&l| l == 0 || l % rational.m != 0) {
        return Err(ConfigError(format!(
            "invalid value for `l-schedule`: l = {l} is not a positive multiple of the required m = {} (p ≈ x/m with x = {})",
            rational.m, rational.x
        ))
        .into());
    }

    let rate = RateFunction::new(dist);
    let p_hat = rational.rational_p();
    let entropy = p_hat.entropy();
    let threshold = rate.inverse_plus(entropy)?.theta;
    if alpha <= dist.mean() {
        eprintln!(
            "warning: alpha = {alpha} is not above the mean {}; no decay is predicted (chernoff bound = 1)",
            dist.mean()
        );
    } else if alpha <= threshold {
        eprintln!("warning: alpha = {alpha} is not above the bound I₊⁻¹(H(p)) = {threshold}; no decay is predicted");
    }

    let results = tail_probability_experiment_with(
        &dist,
        &rational,
        alpha,
        &l_schedule,
        replicates,
        seed,
        &McOptions { cell_cap },
    )?;
    if results.iter().any(|r| r.degenerate_ci) {
        eprintln!("warning: a single replicate gives the degenerate interval [0, 1]");
    }

    let config = json!({
        "dist": dist_json(&common),
        "seed": seed,
        "p": p_raw,
        "alpha": alpha,
        "l_schedule": l_schedule,
        "replicates": replicates,
        "max_denominator": max_den,
        "cell_cap": cell_cap.to_string(),
    });
    let mut report = Report::new("tail", config);
    report.comments.push(format!(
        "m={} x={} rationalization_error={} entropy_nats={} threshold={}",
        rational.m,
        int_list(rational.x.coords()),
        float(rational.error),
        float(entropy),
        float(threshold)
    ));
    report.header = RESULTS_HEADER.iter().map(|s| s.to_string()).collect();
    for r in &results {
        report.rows.push(vec![
            "tail".into(),
            r.l.to_string(),
            float_list(p_hat.as_slice()),
            float(r.empirical_prob),
            format!("{};{}", float(r.ci_low), float(r.ci_high)),
            float(r.chernoff_bound),
            seed.to_string(),
            r.replicates.to_string(),
        ]);
        report.json_rows.push(json!({
            "kind": "tail",
            "l": r.l,
            "direction": p_hat.as_slice(),
            "alpha": r.alpha,
            "exceedances": r.exceedances,
            "prob": r.empirical_prob,
            "ci_low": r.ci_low,
            "ci_high": r.ci_high,
            "bound": r.chernoff_bound,
            "degenerate_ci": r.degenerate_ci,
            "above_threshold": r.above_threshold,
            "seed": seed,
            "replicates": r.replicates,
        }));
    }
    report.json_extra.push((
        "rationalization".into(),
        json!({
            "m": rational.m,
            "x": rational.x.coords(),
            "error": rational.error,
            "entropy_nats": entropy,
            "threshold": threshold,
        }),
    ));
    Ok((common, report.into()))
}

// -------------------------------------------------------------- compare

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directions separated by `;`, entries by `,` (e.g. `1,0;3,1;1,1`)
    #[arg(long)]
    pub directions: Option<String>,
    /// Scale n (default 500)
    #[arg(long)]
    pub n: Option<u64>,
    /// Replicates per direction (default 100)
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub cell_cap: Option<u128>,
}

pub fn cmd_compare(args: &CompareArgs) -> CmdResult<(Common, Outcome)> {
    let file = load_file(&args.common)?;
    let common = Common::merge(&args.common, &file)?;
    let dist = common.require_dist()?;
    let seed = common.require_seed()?;
    let directions = pick(args.directions.as_deref(), &file.directions, |s| {
        parse_direction_list("directions", s)
    })?
    .ok_or_else(|| ConfigError("missing `directions`".into()))?;
    if directions.is_empty() {
        return Err(ConfigError("invalid value for `directions`: empty".into()).into());
    }
    for x in &directions {
        check_direction("directions", x)?;
    }
    let n = args.n.or(file.n).unwrap_or(500);
    if n < 1 {
        return Err(ConfigError("invalid value for `n`: must be ≥ 1".into()).into());
    }
    let replicates = positive(
        "replicates",
        args.replicates.or(file.replicates).unwrap_or(100),
    )?;
    let cell_cap = args.cell_cap.or(file.cell_cap).unwrap_or(DEFAULT_CELL_CAP);
    for x in &directions {
        let cells = box_cells(&LatticePoint::floor_scaled(x, n)?, u128::MAX)? as u128;
        if cells > cell_cap {
            return Err(ConfigError(format!(
                "invalid value for `n`: direction {} at n = {n} needs {cells} lattice sites, above `cell-cap` = {cell_cap}",
                float_list(x)
            ))
            .into());
        }
    }

    let rows = compare_bound_to_simulation_with(
        &dist,
        &directions,
        n,
        replicates,
        seed,
        &McOptions { cell_cap },
    )?;
    for r in &rows {
        if r.gap < -2.0 * r.estimate.stderr {
            eprintln!(
                "warning: estimate {} exceeds the bound {} at direction {} by more than 2 standard errors",
                r.estimate.value,
                r.bound.bound_on_g,
                float_list(&r.direction)
            );
        }
    }

    let config = json!({
        "dist": dist_json(&common),
        "seed": seed,
        "directions": directions,
        "n": n,
        "replicates": replicates,
        "cell_cap": cell_cap.to_string(),
    });
    let mut report = Report::new("compare", config);
    report.header = RESULTS_HEADER.iter().map(|s| s.to_string()).collect();
    report.header.push("gap".into());
    for r in &rows {
        report.rows.push(vec![
            "compare".into(),
            n.to_string(),
            float_list(&r.direction),
            float(r.estimate.value),
            float(r.estimate.stderr),
            float(r.bound.bound_on_g),
            seed.to_string(),
            replicates.to_string(),
            float(r.gap),
        ]);
        report.json_rows.push(json!({
            "kind": "compare",
            "n": n,
            "direction": r.direction,
            "estimate": r.estimate.value,
            "stderr": r.estimate.stderr,
            "bound": r.bound.bound_on_g,
            "degenerate": r.bound.degenerate,
            "gap": r.gap,
            "seed": seed,
            "replicates": replicates,
        }));
    }
    Ok((common, report.into()))
}

// ---------------------------------------------------------------- paths

#[derive(Debug, Clone, Args)]
pub struct PathsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Target lattice point z (comma-separated non-negative integers)
    #[arg(long)]
    pub z: Option<String>,
    /// List every path (axes numbered from 1)
    #[arg(long)]
    pub list: bool,
    /// Largest ‖z‖₁ allowed for --list (default 16)
    #[arg(long)]
    pub cap: Option<u64>,
}

pub fn cmd_paths(args: &PathsArgs) -> CmdResult<(Common, Outcome)> {
    let file = load_file(&args.common)?;
    let common = Common::merge(&args.common, &file)?;
    let z: Vec<usize> = match args.z.as_deref() {
        Some(s) => parse_u64_list("z", s)?
            .into_iter()
            .map(|v| v as usize)
            .collect(),
        None => file
            .z
            .clone()
            .ok_or_else(|| ConfigError("missing `z`".into()))?,
    };
    let z = LatticePoint::new(z).map_err(|e| ConfigError(format!("invalid value for `z`: {e}")))?;
    if z.total_steps() == 0 {
        return Err(ConfigError("invalid value for `z`: needs at least one step".into()).into());
    }
    let list = args.list || file.list.unwrap_or(false);
    let cap = args.cap.or(file.cap).unwrap_or(DEFAULT_ENUMERATION_CAP);

    let count = count_paths(&z);
    let bound = entropy_count_bound(&z)?;
    let mut failure = None;
    let listing = if list {
        match enumerate_paths_capped(&z, cap) {
            Ok(paths) => Some(paths),
            Err(e) => {
                failure = Some(CliError::Config(ConfigError(format!(
                    "invalid value for `z` with --list: {e}; raise --cap to enumerate"
                ))));
                None
            }
        }
    } else {
        None
    };

    let config = json!({ "z": z.coords(), "list": list, "cap": cap });
    let mut report = Report::new("paths", config);
    report.json_extra.extend([
        ("z".to_string(), json!(z.coords())),
        ("total_steps".to_string(), json!(z.total_steps())),
        ("count".to_string(), json!(count.to_string())),
        ("entropy_bound".to_string(), json!(bound)),
    ]);
    match &listing {
        Some(paths) => {
            report.comments.push(format!(
                "z={} total_steps={} count={} entropy_bound={}",
                int_list(z.coords()),
                z.total_steps(),
                count,
                float(bound)
            ));
            report.header = vec!["path_index".into(), "steps".into()];
            for (i, p) in paths.iter().enumerate() {
                let axes: Vec<usize> = p.steps.iter().map(|a| a + 1).collect();
                report.rows.push(vec![
                    i.to_string(),
                    axes.iter()
                        .map(|a| a.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                ]);
                report.json_rows.push(json!(axes));
            }
        }
        None => {
            report.header = vec![
                "z".into(),
                "total_steps".into(),
                "count".into(),
                "entropy_bound".into(),
            ];
            report.rows.push(vec![
                int_list(z.coords()),
                z.total_steps().to_string(),
                count.to_string(),
                float(bound),
            ]);
        }
    }
    Ok((common, Outcome { report, failure }))
}
