//! Command-line configuration, artifact writers and the self-validation suite.
//!
//! Rate syntax: `const:<a>`, `sin:<a>,<w>` (a·sin(wt)), `dcos:<a>,<b>,<w>`
//! (a·e^{-bt}·cos(wt)) and `table:<path>` (two-column `t,gamma` CSV).

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::channels::{integrator_deviation, ChannelModel, LorentzianBath, RateFunction, RateTable};
use crate::error::Error;
use crate::witness::{
    analytic_verdict, measure_with_threshold, mutual_info_witness, sample_trajectory, LossDrop, NonMarkovReport,
    Trajectory, Verdict, DEFAULT_POINTS, DEFAULT_THRESHOLD,
};

pub const CSV_HEADER: [&str; 7] = ["t", "L_Q", "S_e", "I_c", "I_mutual", "N_Q", "dLQ_dt"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("{error} (analytic verdict: {analytic})")]
    Unphysical { error: Error, analytic: Verdict },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Channel and grid flags shared by `run` and `measure`.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Channel family: dephasing, amplitude-damping or pauli.
    #[arg(long)]
    pub model: String,

    /// Decay rate of the dephasing channel.
    #[arg(long, allow_hyphen_values = true)]
    pub rate: Option<String>,

    /// The three Pauli rates (x, y, z), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub rates: Option<String>,

    /// Spectral width of the Lorentzian bath.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Coupling strength of the Lorentzian bath.
    #[arg(long)]
    pub gamma0: Option<f64>,

    /// End of the time window [default: 20 / max rate].
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,

    /// Number of grid points.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub steps: usize,

    /// dL_Q/dt below minus this value counts as a decrease.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub channel: ChannelModel,
    /// Model parameters as given, echoed into the report.
    pub params: Value,
    pub t_max: f64,
    pub steps: usize,
    pub deriv_threshold: f64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &ModelArgs) -> CliResult<Self> {
        let (channel, params) = match args.model.as_str() {
            "dephasing" => {
                let spec = args
                    .rate
                    .as_deref()
                    .ok_or_else(|| usage("--model dephasing needs --rate"))?;
                (ChannelModel::Dephasing(parse_rate(spec)?), json!({ "rate": spec }))
            }
            "pauli" => {
                let spec = args.rates.as_deref().ok_or_else(|| usage("--model pauli needs --rates"))?;
                let specs = split_rate_list(spec)?;
                let [a, b, c] = specs
                    .iter()
                    .map(|s| parse_rate(s))
                    .collect::<CliResult<Vec<_>>>()?
                    .try_into()
                    .map_err(|v: Vec<_>| usage(format!("--rates needs exactly 3 rates, got {}", v.len())))?;
                (ChannelModel::Pauli([a, b, c]), json!({ "rates": specs }))
            }
            "amplitude-damping" => {
                let lambda = args.lambda.ok_or_else(|| usage("--model amplitude-damping needs --lambda"))?;
                let gamma0 = args.gamma0.ok_or_else(|| usage("--model amplitude-damping needs --gamma0"))?;
                (
                    ChannelModel::AmplitudeDamping(LorentzianBath::new(lambda, gamma0)?),
                    json!({ "lambda": lambda, "gamma0": gamma0 }),
                )
            }
            other => {
                return Err(usage(format!(
                    "unknown model '{other}' (expected dephasing, amplitude-damping or pauli)"
                )))
            }
        };
        let t_max = args.t_max.unwrap_or_else(|| channel.default_t_max());
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(usage(format!("--t-max must be > 0, got {t_max}")));
        }
        if args.steps < 3 {
            return Err(usage(format!("--steps must be at least 3, got {}", args.steps)));
        }
        if args.threshold.is_nan() || args.threshold <= 0.0 {
            return Err(usage(format!("--threshold must be > 0, got {}", args.threshold)));
        }
        Ok(Self {
            channel,
            params,
            t_max,
            steps: args.steps,
            deriv_threshold: args.threshold,
            out: None,
            report: None,
        })
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_rate(spec: &str) -> CliResult<RateFunction> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("rate '{spec}' must look like kind:args")))?;
    if kind == "table" {
        return Ok(RateFunction::Tabulated(RateTable::from_csv(Path::new(args))?));
    }
    let nums = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("rate '{spec}': {e}")))?;
    if nums.iter().any(|x| !x.is_finite()) {
        return Err(usage(format!("rate '{spec}' has non-finite parameters")));
    }
    match (kind, nums.as_slice()) {
        ("const", [a]) => Ok(RateFunction::constant(*a)),
        ("sin", [a, w]) => Ok(RateFunction::sinusoid(*a, *w)),
        ("dcos", [a, b, w]) => Ok(RateFunction::damped_cosine(*a, *b, *w)),
        ("const" | "sin" | "dcos", _) => Err(usage(format!("rate '{spec}' has the wrong number of parameters"))),
        _ => Err(usage(format!("unknown rate kind '{kind}' (expected const, sin, dcos or table)"))),
    }
}

/// Splits `const:1,sin:1,2,const:0` into one spec per rate: a token with a
/// `kind:` prefix starts a new spec, bare numbers extend the current one.
pub fn split_rate_list(list: &str) -> CliResult<Vec<String>> {
    let mut specs: Vec<String> = Vec::new();
    for token in list.split(',').map(str::trim) {
        if token.contains(':') {
            specs.push(token.to_string());
        } else if let Some(last) = specs.last_mut() {
            last.push(',');
            last.push_str(token);
        } else {
            return Err(usage(format!("rate list '{list}' must start with kind:args")));
        }
    }
    Ok(specs)
}

/// Trajectory and report of one configuration.
pub fn run(config: &RunConfig) -> CliResult<(Trajectory, NonMarkovReport)> {
    let traj = match sample_trajectory(&config.channel, config.t_max, config.steps) {
        Ok(traj) => traj,
        Err(error @ Error::Unphysical { .. }) => {
            let analytic = analytic_verdict(&config.channel, config.t_max)?;
            return Err(CliError::Unphysical { error, analytic });
        }
        Err(e) => return Err(e.into()),
    };
    let report = measure_with_threshold(&traj, config.deriv_threshold)?;
    Ok((traj, report))
}

/// The machine-readable report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub model: String,
    pub params: Value,
    pub t_max: f64,
    pub steps: usize,
    pub measure: f64,
    pub magnitude: f64,
    pub markovian: bool,
    pub analytic_verdict: String,
    pub intervals: Vec<LossDrop>,
}

impl JsonReport {
    pub fn new(config: &RunConfig, report: &NonMarkovReport) -> Self {
        Self {
            model: config.channel.family_name().to_string(),
            params: config.params.clone(),
            t_max: config.t_max,
            steps: config.steps,
            measure: report.measure,
            magnitude: report.magnitude,
            markovian: report.is_markovian(),
            analytic_verdict: report.analytic_verdict.as_str().to_string(),
            intervals: report.intervals.clone(),
        }
    }
}

/// Checks that `value` has exactly the report's keys with the documented types.
pub fn check_report_schema(value: &Value) -> std::result::Result<(), String> {
    let obj = value.as_object().ok_or("report is not an object")?;
    let expect = |key: &str, ok: fn(&Value) -> bool| -> std::result::Result<(), String> {
        match obj.get(key) {
            Some(v) if ok(v) => Ok(()),
            Some(v) => Err(format!("'{key}' has the wrong type: {v}")),
            None => Err(format!("missing '{key}'")),
        }
    };
    expect("model", Value::is_string)?;
    expect("params", Value::is_object)?;
    expect("t_max", Value::is_number)?;
    expect("steps", Value::is_u64)?;
    expect("measure", Value::is_number)?;
    expect("magnitude", Value::is_number)?;
    expect("markovian", Value::is_boolean)?;
    expect("analytic_verdict", Value::is_string)?;
    expect("intervals", Value::is_array)?;
    if obj.len() != 9 {
        return Err(format!("expected 9 keys, found {}", obj.len()));
    }
    for iv in obj["intervals"].as_array().expect("checked") {
        let iv = iv.as_object().ok_or("interval is not an object")?;
        for key in ["start", "end", "drop"] {
            if !iv.get(key).is_some_and(Value::is_number) {
                return Err(format!("interval lacks numeric '{key}'"));
            }
        }
        if iv.len() != 3 {
            return Err("interval has extra keys".into());
        }
    }
    Ok(())
}

/// Scientific notation with 12 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_csv<W: Write>(traj: &Trajectory, writer: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for (s, d) in traj.snapshots.iter().zip(&traj.derivative) {
        let row = [s.t, s.quantum_loss, s.s_exchange, s.coherent_info, s.mutual_info, s.quantum_noise, *d];
        w.write_record(row.iter().map(|&x| format_value(x)))?;
    }
    w.flush().map_err(|source| CliError::Io { path: PathBuf::from("<csv>"), source })?;
    Ok(())
}

/// Parses a trajectory CSV back into rows of the seven columns.
pub fn read_csv<R: Read>(reader: R) -> CliResult<Vec<[f64; 7]>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(usage(format!("unexpected CSV header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let mut row = [0.0; 7];
            for (slot, field) in row.iter_mut().zip(rec.iter()) {
                *slot = field.parse().map_err(|e| usage(format!("bad CSV value '{field}': {e}")))?;
            }
            if rec.len() != 7 {
                return Err(usage(format!("CSV row has {} fields", rec.len())));
            }
            Ok(row)
        })
        .collect()
}

fn create(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub const DEFAULT_CSV_PATH: &str = "trajectory.csv";
pub const DEFAULT_REPORT_PATH: &str = "report.json";

/// `run`: writes the trajectory CSV and the JSON report, returning the report.
pub fn cmd_run(config: &RunConfig) -> CliResult<JsonReport> {
    let (traj, report) = run(config)?;
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_CSV_PATH));
    let report_path = config.report.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_REPORT_PATH));
    write_csv(&traj, create(&out)?)?;
    let json = JsonReport::new(config, &report);
    let mut w = create(&report_path)?;
    serde_json::to_writer_pretty(&mut w, &json)?;
    writeln!(w).map_err(|source| CliError::Io { path: report_path.clone(), source })?;
    Ok(json)
}

/// `measure`: the JSON report only.
pub fn cmd_measure(config: &RunConfig) -> CliResult<JsonReport> {
    let (_, report) = run(config)?;
    Ok(JsonReport::new(config, &report))
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

/// A named channel with the window it is checked on.
#[derive(Debug, Clone)]
pub struct ValidationCase {
    pub name: &'static str,
    pub channel: ChannelModel,
    pub t_max: f64,
    pub points: usize,
}

/// Channels whose analytic and numeric verdicts are compared.
pub fn validation_cases() -> Vec<ValidationCase> {
    use std::f64::consts::PI;
    let bath = |l, g| ChannelModel::AmplitudeDamping(LorentzianBath::new(l, g).expect("valid bath"));
    let pauli = |a: RateFunction, b: RateFunction, c: RateFunction| ChannelModel::Pauli([a, b, c]);
    vec![
        ValidationCase {
            name: "dephasing const:1",
            channel: ChannelModel::Dephasing(RateFunction::constant(1.0)),
            t_max: 20.0,
            points: 2001,
        },
        ValidationCase {
            name: "dephasing sin:1,1",
            channel: ChannelModel::Dephasing(RateFunction::sinusoid(1.0, 1.0)),
            t_max: 4.0 * PI,
            points: 4001,
        },
        ValidationCase { name: "amplitude damping 4,1", channel: bath(4.0, 1.0), t_max: 20.0, points: 2001 },
        ValidationCase { name: "amplitude damping 0.2,2", channel: bath(0.2, 2.0), t_max: 30.0, points: 3001 },
        ValidationCase {
            name: "pauli const:1,1,1",
            channel: pauli(RateFunction::constant(1.0), RateFunction::constant(1.0), RateFunction::constant(1.0)),
            t_max: 5.0,
            points: 1001,
        },
        ValidationCase {
            name: "pauli const:1,1 sin:3,1",
            channel: pauli(RateFunction::constant(1.0), RateFunction::constant(1.0), RateFunction::sinusoid(3.0, 1.0)),
            t_max: 4.0 * PI,
            points: 4001,
        },
    ]
}

/// Runs the oracle cross-checks; `step` is the integrator step for the
/// closed-form comparison.
pub fn cmd_validate(step: f64) -> Vec<CheckResult> {
    let mut checks = Vec::new();

    // Closed form against the master-equation integrator, 20 times each.
    let oracle_cases = [
        ("dephasing sin:1,1", ChannelModel::Dephasing(RateFunction::sinusoid(1.0, 1.0))),
        ("amplitude damping 4,1", ChannelModel::AmplitudeDamping(LorentzianBath { lambda: 4.0, gamma0: 1.0 })),
        (
            "pauli const:1 const:0.5 dcos:0.8,0.1,1",
            ChannelModel::Pauli([
                RateFunction::constant(1.0),
                RateFunction::constant(0.5),
                RateFunction::damped_cosine(0.8, 0.1, 1.0),
            ]),
        ),
    ];
    let times: Vec<f64> = (1..=20).map(|k| 0.2 * k as f64).collect();
    for (name, channel) in &oracle_cases {
        let label = format!("integrator vs closed form: {name}");
        checks.push(match integrator_deviation(channel, &times, step) {
            Ok(dev) => CheckResult::new(label, dev <= 1e-6, format!("max deviation {dev:.3e} (tol 1e-6)")),
            Err(e) => CheckResult::failed(label, e),
        });
    }

    for case in validation_cases() {
        let traj = match sample_trajectory(&case.channel, case.t_max, case.points) {
            Ok(t) => t,
            Err(e) => {
                checks.push(CheckResult::failed(format!("trajectory: {}", case.name), e));
                continue;
            }
        };
        checks.extend(trajectory_checks(case.name, &traj));

        let label = format!("verdict agreement: {}", case.name);
        checks.push(match measure_with_threshold(&traj, DEFAULT_THRESHOLD) {
            Ok(r) => CheckResult::new(
                label,
                r.analytic_verdict == r.numeric_verdict,
                format!("analytic {}, numeric {}, measure {:.6}", r.analytic_verdict, r.numeric_verdict, r.measure),
            ),
            Err(e) => CheckResult::failed(label, e),
        });
    }

    // Rates (1, 1, -1.5) violate positivity; the pipeline must refuse them.
    let label = "pauli const:1,1,-1.5 rejected as non-positive";
    let bad = ChannelModel::Pauli([RateFunction::constant(1.0), RateFunction::constant(1.0), RateFunction::constant(-1.5)]);
    let analytic = analytic_verdict(&bad, 5.0);
    checks.push(match (sample_trajectory(&bad, 5.0, 1001), analytic) {
        (Err(Error::Unphysical { t, min_eigenvalue }), Ok(Verdict::NonMarkovian)) => CheckResult::new(
            label,
            true,
            format!("min eigenvalue {min_eigenvalue:.3e} at t = {t:.3e}; analytic verdict non-markovian"),
        ),
        (other, analytic) => CheckResult::new(
            label,
            false,
            format!("unexpected outcome: trajectory ok = {}, analytic {analytic:?}", other.is_ok()),
        ),
    });
    checks
}

/// Duality, conservation and bound checks on one trajectory.
pub fn trajectory_checks(name: &str, traj: &Trajectory) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let d_loss = &traj.derivative;
    let d_info = traj.mutual_info_derivative();
    let n = traj.len();
    let worst_duality = (1..n - 1)
        .map(|k| (d_info[k] + d_loss[k]).abs() / d_loss[k].abs().max(1.0))
        .fold(0.0, f64::max);
    out.push(CheckResult::new(
        format!("dI/dt = -dL_Q/dt: {name}"),
        worst_duality <= 1e-7,
        format!("max scaled residual {worst_duality:.3e} (tol 1e-7)"),
    ));

    let worst_conservation = traj
        .snapshots
        .iter()
        .map(|s| (s.mutual_info + s.quantum_loss - 2.0).abs())
        .fold(0.0, f64::max);
    out.push(CheckResult::new(
        format!("I + L_Q = 2: {name}"),
        worst_conservation <= 1e-9,
        format!("max deviation {worst_conservation:.3e} (tol 1e-9)"),
    ));

    let worst_bound = traj
        .snapshots
        .iter()
        .map(|s| {
            let loss_upper = 2.0 * s.s_exchange.min(1.0);
            let info_upper = 2.0 * s.s_system.min(s.s_ancilla);
            [
                -s.quantum_loss,
                s.quantum_loss - loss_upper,
                -s.mutual_info,
                s.mutual_info - info_upper,
            ]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(CheckResult::new(
        format!("loss and mutual-information bounds: {name}"),
        worst_bound <= 1e-9,
        format!("worst violation {worst_bound:.3e} (tol 1e-9)"),
    ));

    let check_witness = || -> crate::Result<bool> {
        let a = crate::witness::detect_intervals(traj, DEFAULT_THRESHOLD)?;
        let b = mutual_info_witness(traj, DEFAULT_THRESHOLD)?;
        Ok(a.len() == b.len()
            && a.iter().zip(&b).all(|(x, y)| (x.start - y.start).abs() <= 1e-3 && (x.end - y.end).abs() <= 1e-3))
    };
    let label = format!("loss and mutual-information witnesses agree: {name}");
    out.push(match check_witness() {
        Ok(ok) => CheckResult::new(label, ok, "endpoint tol 1e-3"),
        Err(e) => CheckResult::failed(label, e),
    });
    out
}
