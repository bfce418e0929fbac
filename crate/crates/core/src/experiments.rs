//! Benchmark and error-curve drivers shared by the CLI and the test suites.
//!
//! Timings use the monotonic clock; each measurement discards one warm-up run
//! and reports the median of three.

use std::io::{Read, Write};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LreError, Result};
use crate::metrics::{
    copies_per_projector, fidelity, hs_squared_distance, predicted_hs_for,
    predicted_infidelity_for, shots_per_setting,
};
use crate::pauli::QubitCount;
use crate::reconstruct::{Kernel, Reconstructor, StepTimings};
use crate::simulator::{sample_counts, trial_seed, StateDescriptor, TrueState};

pub const TIMED_REPEATS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Per-qubit growth factor `exp(slope)` of `ln t` against `n`.
pub fn growth_factor(ns: &[u32], seconds: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = seconds.iter().map(|t| t.max(1e-12).ln()).collect();
    fit_line(&xs, &ys).slope.exp()
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

/// Median per-step timings of `repeats` runs after one discarded warm-up.
pub fn timed_reconstruction(
    recon: &Reconstructor,
    state: &TrueState,
    repeats: usize,
) -> Result<StepTimings> {
    recon.reconstruct(state)?;
    let mut runs = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        runs.push(recon.reconstruct(state)?.timings);
    }
    Ok(StepTimings {
        step1: median(runs.iter().map(|t| t.step1).collect()),
        step2: median(runs.iter().map(|t| t.step2).collect()),
        step3: median(runs.iter().map(|t| t.step3).collect()),
        total: median(runs.iter().map(|t| t.total).collect()),
    })
}

/// Timing summary of one reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub t_step1_s: f64,
    pub t_step2_s: f64,
    pub t_step3_s: f64,
    pub t_total_s: f64,
    pub threads: usize,
    pub kernel: Kernel,
}

impl TimingReport {
    pub fn new(t: &StepTimings, threads: usize, kernel: Kernel) -> Self {
        Self {
            t_step1_s: t.step1.as_secs_f64(),
            t_step2_s: t.step2.as_secs_f64(),
            t_step3_s: t.step3.as_secs_f64(),
            t_total_s: t.total.as_secs_f64(),
            threads,
            kernel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub n: u32,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub total: f64,
    pub kernel: Kernel,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeScaling {
    pub rows: Vec<TimeRow>,
    pub t1_growth: f64,
    pub t2_growth: f64,
    pub t3_growth: f64,
}

/// Per-step reconstruction time of the exact-probability record of `state`
/// (no record files involved) for each `n`.
pub fn time_scaling(
    ns: &[u32],
    kind: crate::simulator::StateKind,
    recon: &Reconstructor,
) -> Result<TimeScaling> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let state = TrueState::prepare(StateDescriptor::new(kind, QubitCount::new(n)?)?)?;
        let t = timed_reconstruction(recon, &state, TIMED_REPEATS)?;
        rows.push(TimeRow {
            n,
            t1: t.step1.as_secs_f64(),
            t2: t.step2.as_secs_f64(),
            t3: t.step3.as_secs_f64(),
            total: t.total.as_secs_f64(),
            kernel: recon.kernel(),
            threads: recon.threads(),
        });
    }
    let col = |f: fn(&TimeRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(TimeScaling {
        t1_growth: growth_factor(ns, &col(|r| r.t1)),
        t2_growth: growth_factor(ns, &col(|r| r.t2)),
        t3_growth: growth_factor(ns, &col(|r| r.t3)),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadRow {
    pub threads: usize,
    pub t1_s: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadScaling {
    pub rows: Vec<ThreadRow>,
    /// Fit of `speed` against `threads`.
    pub fit: LineFit,
    /// Largest entrywise difference of the step (1) output from the first
    /// worker count.
    pub max_deviation: f64,
}

/// Step (1) time against worker count on the exact record of `state`.
pub fn thread_scaling(
    state: &TrueState,
    thread_counts: &[usize],
    kernel: Kernel,
) -> Result<ThreadScaling> {
    if thread_counts.is_empty() {
        return Err(LreError::InvalidArgument("empty thread list".into()));
    }
    let mut rows = Vec::new();
    let mut reference: Option<Vec<f64>> = None;
    let mut max_deviation = 0f64;
    for &threads in thread_counts {
        let recon = Reconstructor::new(threads, kernel)?;
        let theta = recon.step_one(state)?;
        let mut times = Vec::with_capacity(TIMED_REPEATS);
        for _ in 0..TIMED_REPEATS {
            let start = std::time::Instant::now();
            let again = recon.step_one(state)?;
            times.push(start.elapsed());
            if again != theta {
                return Err(LreError::InvalidArgument(format!(
                    "step one not reproducible at {threads} threads"
                )));
            }
        }
        match &reference {
            None => reference = Some(theta.values().to_vec()),
            Some(r) => {
                for (a, b) in r.iter().zip(theta.values()) {
                    max_deviation = max_deviation.max((a - b).abs());
                }
            }
        }
        let t1 = median(times).as_secs_f64();
        rows.push(ThreadRow {
            threads,
            t1_s: t1,
            speed: 1.0 / t1,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.threads as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.speed).collect();
    let fit = if rows.len() >= 2 {
        fit_line(&xs, &ys)
    } else {
        LineFit {
            slope: 0.0,
            intercept: ys[0],
            r_squared: 1.0,
        }
    };
    Ok(ThreadScaling {
        rows,
        fit,
        max_deviation,
    })
}

/// One point of the error-versus-`N0` curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    #[serde(rename = "N0")]
    pub n0: u64,
    pub mean_hs_mu: f64,
    pub mean_hs_rho: f64,
    pub mean_infidelity: f64,
    pub pred_hs: Option<f64>,
    pub pred_infid: Option<f64>,
}

/// Monte-Carlo estimation error for each `N0` (copies per projector) in
/// `grid`, averaged over `trials` seeded records.
pub fn error_curve(
    state: &TrueState,
    grid: &[u64],
    trials: u64,
    seed: u64,
    recon: &Reconstructor,
) -> Result<Vec<ErrorRow>> {
    if trials == 0 {
        return Err(LreError::InvalidArgument("trials must be >= 1".into()));
    }
    let n = state.qubits();
    let truth = state.density_matrix()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &n0 in grid {
        if n0 == 0 {
            return Err(LreError::InvalidArgument("N0 must be >= 1".into()));
        }
        let shots = shots_per_setting(n, n0);
        let point_seed = trial_seed(seed, n0);
        let (mut mu_sum, mut rho_sum, mut inf_sum) = (0.0, 0.0, 0.0);
        for t in 0..trials {
            let record = sample_counts(state, shots, trial_seed(point_seed, t))?;
            let out = recon.reconstruct(&record)?;
            mu_sum += hs_squared_distance(&out.mu, &truth)?;
            rho_sum += hs_squared_distance(&out.rho, &truth)?;
            inf_sum += 1.0 - fidelity(&truth, &out.rho)?;
        }
        let k = trials as f64;
        let copies = copies_per_projector(n, shots);
        rows.push(ErrorRow {
            n0,
            mean_hs_mu: mu_sum / k,
            mean_hs_rho: rho_sum / k,
            mean_infidelity: inf_sum / k,
            pred_hs: predicted_hs_for(state, copies)?,
            pred_infid: predicted_infidelity_for(state, copies),
        });
    }
    Ok(rows)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(LreError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::StateKind;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys);
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let g = growth_factor(&[3, 4, 5], &[1.0, 12.0, 144.0]);
        assert!((g - 12.0).abs() < 1e-9);
    }

    #[test]
    fn csv_headers_are_stable() {
        let rows = vec![ErrorRow {
            n0: 16,
            mean_hs_mu: 0.1,
            mean_hs_rho: 0.05,
            mean_infidelity: 0.2,
            pred_hs: Some(0.11),
            pred_infid: None,
        }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("N0,mean_hs_mu,mean_hs_rho,mean_infidelity,pred_hs,pred_infid\n"));
        let back: Vec<ErrorRow> = read_csv(&buf[..]).unwrap();
        assert_eq!(back, rows);

        let t = vec![TimeRow {
            n: 3,
            t1: 1.0,
            t2: 2.0,
            t3: 3.0,
            total: 6.0,
            kernel: Kernel::PaperDirect,
            threads: 2,
        }];
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(
            text.starts_with("n,t1,t2,t3,total,kernel,threads\n3,1.0,2.0,3.0,6.0,paper-direct,2")
        );
        assert_eq!(read_csv::<TimeRow, _>(&buf[..]).unwrap(), t);
    }

    #[test]
    fn small_error_curve() {
        let st = TrueState::prepare(
            StateDescriptor::new(StateKind::MaximallyMixed, QubitCount::new(2).unwrap()).unwrap(),
        )
        .unwrap();
        let recon = Reconstructor::new(1, Kernel::Fast).unwrap();
        let rows = error_curve(&st, &[16, 64], 20, 5, &recon).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].mean_hs_mu < rows[0].mean_hs_mu);
        for r in &rows {
            assert!(r.mean_hs_rho <= r.mean_hs_mu + 1e-12);
        }
        let again = error_curve(&st, &[16, 64], 20, 5, &recon).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn thread_scaling_reports_rows() {
        let st = TrueState::prepare(
            StateDescriptor::new(StateKind::Ghz, QubitCount::new(4).unwrap()).unwrap(),
        )
        .unwrap();
        let out = thread_scaling(&st, &[1, 2], Kernel::Fast).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert!(out.max_deviation < 1e-12);
        assert!(out.rows.iter().all(|r| r.speed > 0.0));
    }
}
