use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use lre_core::experiments::{error_curve, thread_scaling, time_scaling, write_csv, TimingReport};
use lre_core::metrics::{copies_per_projector, predicted_hs_for, predicted_infidelity_for};
use lre_core::reconstruct::MAX_DENSE_PIPELINE_QUBITS;
use lre_core::state_file::{read_state, write_state, STATE_MAGIC};
use lre_core::{
    exact_counts, sample_counts, ErrorReport, LreError, MeasurementRecord, QubitCount,
    Reconstructor, StateDescriptor, StateKind, TrueState,
};
use serde::Serialize;

use crate::args::*;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<LreError> for CliError {
    fn from(e: LreError) -> Self {
        Self {
            code: if e.is_io() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        LreError::from(e).into()
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_at(path: &Path) -> impl FnOnce(LreError) -> CliError + '_ {
    move |e| {
        let mut err = CliError::from(e);
        if err.code == 3 {
            err.message = format!("{}: {}", path.display(), err.message);
        }
        err
    }
}

fn qubits(n: u32) -> CliResult<QubitCount> {
    Ok(QubitCount::new(n)?)
}

fn true_state(desc: &str, n: QubitCount) -> CliResult<TrueState> {
    Ok(TrueState::prepare(StateDescriptor::parse(desc, n)?)?)
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value).map_err(LreError::from)?;
    writeln!(out)?;
    Ok(())
}

fn dense_guard(n: QubitCount) -> CliResult {
    if n.get() > MAX_DENSE_PIPELINE_QUBITS {
        let d = n.dim() as u128;
        let bytes = d * d * 16;
        return Err(CliError::invalid(format!(
            "n = {} needs a dense {d} x {d} complex matrix ({:.1} GB per copy); \
             reconstruction is limited to n <= {MAX_DENSE_PIPELINE_QUBITS}",
            n.get(),
            bytes as f64 / 1e9
        )));
    }
    Ok(())
}

fn distinct(a: &Path, b: &Path) -> CliResult {
    if a == b {
        return Err(CliError::invalid(format!(
            "input and output are the same path `{}`",
            a.display()
        )));
    }
    Ok(())
}

/// CSV goes to `out` (with the summary on stdout) or to stdout (with the
/// summary on stderr).
fn emit_table<T: Serialize, S: Serialize>(
    rows: &[T],
    out: Option<&PathBuf>,
    summary: Option<&S>,
) -> CliResult {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_at(path)(e.into()))?;
            write_csv(rows, BufWriter::new(file)).map_err(io_at(path))?;
            if let Some(s) = summary {
                print_json(s)?;
            }
        }
        None => {
            write_csv(rows, std::io::stdout().lock())?;
            if let Some(s) = summary {
                let line = serde_json::to_string(s).map_err(LreError::from)?;
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Eval(a) => eval(a),
        Command::Predict(a) => predict(a),
        Command::BenchTime(a) => bench_time(a),
        Command::BenchThreads(a) => bench_threads(a),
        Command::BenchError(a) => bench_error(a),
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    settings: usize,
    shots: u64,
    bytes: u64,
}

fn simulate(a: SimulateArgs) -> CliResult {
    let n = qubits(a.n)?;
    if a.shots == 0 {
        return Err(CliError::invalid("shots must be >= 1"));
    }
    let state = true_state(&a.state, n)?;
    let record = if a.exact {
        exact_counts(&state, a.shots)?
    } else {
        let pool = rayon_pool(a.threads.0)?;
        pool.install(|| sample_counts(&state, a.shots, a.seed))?
    };
    record.write(&a.out).map_err(io_at(&a.out))?;
    let bytes = std::fs::metadata(&a.out)?.len();
    print_json(&SimulateSummary {
        settings: n.num_settings(),
        shots: a.shots,
        bytes,
    })
}

fn rayon_pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::invalid(format!("cannot start {threads} worker threads: {e}")))
}

fn reconstruct(a: ReconstructArgs) -> CliResult {
    distinct(&a.input, &a.out)?;
    let (n, _) = MeasurementRecord::read_header(&a.input).map_err(io_at(&a.input))?;
    dense_guard(n)?;
    let record = MeasurementRecord::read(&a.input).map_err(io_at(&a.input))?;
    let recon = Reconstructor::new(a.exec.threads.0, a.exec.kernel)?;
    let out = recon.reconstruct(&record)?;
    write_state(&out.rho, &a.out).map_err(io_at(&a.out))?;
    print_json(&TimingReport::new(
        &out.timings,
        recon.threads(),
        recon.kernel(),
    ))
}

fn is_state_file(path: &Path) -> CliResult<bool> {
    let mut magic = [0u8; 4];
    let mut f = File::open(path).map_err(|e| io_at(path)(e.into()))?;
    let mut got = 0;
    while got < 4 {
        let k = f.read(&mut magic[got..])?;
        if k == 0 {
            break;
        }
        got += k;
    }
    Ok(got == 4 && &magic == STATE_MAGIC)
}

fn check_n(given: Option<u32>, found: QubitCount, what: &str) -> CliResult {
    match given {
        Some(n) if n != found.get() => Err(CliError::invalid(format!(
            "mismatched n: --n {n} but {what} has n = {}",
            found.get()
        ))),
        _ => Ok(()),
    }
}

fn eval(a: EvalArgs) -> CliResult {
    if let Some(grid) = &a.grid {
        let n = match (&a.input, a.n) {
            (_, Some(n)) => qubits(n)?,
            (Some(path), None) if is_state_file(path)? => read_state(path)
                .map_err(io_at(path))?
                .qubits()
                .ok_or_else(|| CliError::invalid("state file dimension is not 2^n"))?,
            (Some(path), None) => MeasurementRecord::read_header(path).map_err(io_at(path))?.0,
            (None, None) => return Err(CliError::invalid("--grid needs --n or --in")),
        };
        let run = BenchErrorArgs {
            n: n.get(),
            state: a.state,
            grid: grid.clone(),
            trials: a.trials,
            seed: a.seed,
            out: a.out,
            exec: a.exec,
        };
        return bench_error(run);
    }
    let path = a
        .input
        .as_ref()
        .ok_or_else(|| CliError::invalid("eval needs --in (or --grid)"))?;
    let report = if is_state_file(path)? {
        let estimate = read_state(path).map_err(io_at(path))?;
        let n = estimate
            .qubits()
            .ok_or_else(|| CliError::invalid("state file dimension is not 2^n"))?;
        check_n(a.n, n, "the state file")?;
        let shots = a
            .shots
            .ok_or_else(|| CliError::invalid("--shots is required with a state file input"))?;
        let truth = true_state(&a.state, n)?;
        let rho = truth.density_matrix()?;
        ErrorReport::from_estimate(&truth, &rho, &estimate, shots)?
    } else {
        let (n, _) = MeasurementRecord::read_header(path).map_err(io_at(path))?;
        check_n(a.n, n, "the record")?;
        dense_guard(n)?;
        let record = MeasurementRecord::read(path).map_err(io_at(path))?;
        let truth = true_state(&a.state, n)?;
        let recon = Reconstructor::new(a.exec.threads.0, a.exec.kernel)?;
        let out = recon.reconstruct(&record)?;
        ErrorReport::from_reconstruction(&truth, &out, record.shots())?
    };
    print_json(&report)
}

#[derive(Serialize)]
struct Prediction {
    n: u32,
    state: String,
    shots_per_setting: u64,
    n0: f64,
    predicted_hs: Option<f64>,
    predicted_infidelity: Option<f64>,
}

fn predict(a: PredictArgs) -> CliResult {
    let n = qubits(a.n)?;
    if a.shots == 0 {
        return Err(CliError::invalid("shots must be >= 1"));
    }
    let truth = true_state(&a.state, n)?;
    let n0 = copies_per_projector(n, a.shots);
    print_json(&Prediction {
        n: a.n,
        state: truth.descriptor().label(),
        shots_per_setting: a.shots,
        n0,
        predicted_hs: predicted_hs_for(&truth, n0)?,
        predicted_infidelity: predicted_infidelity_for(&truth, n0),
    })
}

#[derive(Serialize)]
struct TimeSummary {
    t1_log_slope: f64,
    t1_growth: f64,
    t2_growth: f64,
    t3_growth: f64,
}

fn bench_time(a: BenchTimeArgs) -> CliResult {
    if a.n_min > a.n_max {
        return Err(CliError::invalid("--n-min must not exceed --n-max"));
    }
    qubits(a.n_min)?;
    dense_guard(qubits(a.n_max)?)?;
    let kind: StateKind = a.state.parse()?;
    if matches!(kind, StateKind::ProductZ(_)) {
        return Err(CliError::invalid(
            "bench-time needs an n-independent state (maxmixed, ghz, random:<seed>)",
        ));
    }
    let ns: Vec<u32> = (a.n_min..=a.n_max).collect();
    if ns.len() < 2 {
        return Err(CliError::invalid(
            "bench-time needs at least two values of n",
        ));
    }
    let recon = Reconstructor::new(a.exec.threads.0, a.exec.kernel)?;
    let scaling = time_scaling(&ns, kind, &recon)?;
    let summary = TimeSummary {
        t1_log_slope: scaling.t1_growth.ln(),
        t1_growth: scaling.t1_growth,
        t2_growth: scaling.t2_growth,
        t3_growth: scaling.t3_growth,
    };
    emit_table(&scaling.rows, a.out.as_ref(), Some(&summary))
}

fn default_thread_list() -> Vec<usize> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut list: Vec<usize> = (0..)
        .map(|k| 1usize << k)
        .take_while(|&k| k <= cores)
        .collect();
    if *list.last().unwrap() != cores {
        list.push(cores);
    }
    list
}

#[derive(Serialize)]
struct ThreadSummary {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    max_deviation: f64,
}

fn bench_threads(a: BenchThreadsArgs) -> CliResult {
    let n = qubits(a.n)?;
    let list = a.thread_list.unwrap_or_else(default_thread_list);
    if list.contains(&0) {
        return Err(CliError::invalid("thread counts must be >= 1"));
    }
    let state = true_state(&a.state, n)?;
    let out = thread_scaling(&state, &list, a.kernel)?;
    let summary = ThreadSummary {
        slope: out.fit.slope,
        intercept: out.fit.intercept,
        r_squared: out.fit.r_squared,
        max_deviation: out.max_deviation,
    };
    emit_table(&out.rows, a.out.as_ref(), Some(&summary))
}

fn bench_error(a: BenchErrorArgs) -> CliResult {
    let n = qubits(a.n)?;
    dense_guard(n)?;
    if a.grid.is_empty() {
        return Err(CliError::invalid("empty --grid"));
    }
    let state = true_state(&a.state, n)?;
    let recon = Reconstructor::new(a.exec.threads.0, a.exec.kernel)?;
    let rows = error_curve(&state, &a.grid, a.trials, a.seed, &recon)?;
    emit_table::<_, ()>(&rows, a.out.as_ref(), None)
}
