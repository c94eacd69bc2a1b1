//! Monte Carlo convergence sweeps on the circle heat model.

use std::collections::BTreeMap;

use mcwave_core::frame::circle_rho_norm_sq;
use mcwave_core::model::{
    self, approximation_error, effective_rank, estimation_error, fit_rate, h_error,
    make_source_signal, tau_schedule_besov, tau_schedule_sobolev, theoretical_slope_h,
    theoretical_slope_rho, AnalyticModel, RateFit,
};
use mcwave_core::spaces::{SignalTag, SpectralSignal};
use mcwave_core::{build_frame, EmpiricalFrame, FilterFamily, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Route, Schedule, SignalKind};
use crate::error::{AppError, AppResult};

/// Smoothness exponent `p` of the rate theorem for the circle model.
pub const RATE_P: f64 = 1.0;
/// Slack in the per-trial error-splitting check.
pub const SPLIT_SLACK: f64 = 1e-9;
/// Stream reserved for drawing `h` when no coefficients are configured.
const H_STREAM: u64 = u64::MAX;

/// One `(N, trial)` cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct TrialRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub tau: u32,
    pub err_h: f64,
    pub err_rho: f64,
    pub eff_rank: f64,
    /// ChaCha stream id the sample was drawn from.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub tau: u32,
    pub median_h: f64,
    pub lo_h: f64,
    pub hi_h: f64,
    pub median_rho: f64,
    pub lo_rho: f64,
    pub hi_rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub summary: Vec<SummaryRow>,
    /// Lower and upper quantile levels of the reported band.
    pub band: (f64, f64),
    pub fit_h: RateFit,
    pub fit_rho: RateFit,
}

/// Facts about a run that are not part of the rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub version: String,
    pub seed: u64,
    pub filter: String,
    pub route: String,
    pub alpha: f64,
    pub qualification: f64,
    pub theoretical_slope_h: f64,
    pub theoretical_slope_rho: f64,
    pub fitted_slope_h: f64,
    pub fitted_slope_rho: f64,
    /// Trials that needed a second draw, as `N:trial`.
    pub resampled: Vec<String>,
    /// Per `N`: smallest `J(drop threshold)` over trials, reported for dyadic runs.
    pub scale_cap: BTreeMap<String, u32>,
    /// Per `N`: smallest `J(λ̂_min)` over trials, reported for dyadic runs.
    pub parseval_scale: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<TrialRow>,
    pub result: RateResult,
    pub metadata: RunMetadata,
}

/// Everything a trial needs that does not depend on the sample.
pub struct Setup {
    pub model: AnalyticModel,
    pub family: FilterFamily,
    pub route: Route,
    /// Source signal, absent for kernel-section runs.
    pub source: Option<SpectralSignal>,
    pub kind: SignalKind,
    pub schedule: Schedule,
    pub fixed_tau: Option<u32>,
    pub alpha: f64,
    pub besov_s: f64,
    pub seed: u64,
    pub drop: Option<f64>,
}

impl Setup {
    pub fn from_config(cfg: &ExperimentConfig) -> AppResult<Self> {
        let model = cfg.model()?;
        let family = cfg.family()?;
        let source = match cfg.signal.kind {
            SignalKind::Source => {
                let h = match &cfg.signal.h {
                    Some(h) => h.clone(),
                    None => random_h(&model, cfg.signal.h_seed.unwrap_or(cfg.sweep.seed)),
                };
                Some(make_source_signal(&model, cfg.signal.alpha, &h)?.signal)
            }
            SignalKind::Section => None,
        };
        Ok(Self {
            model,
            family,
            route: cfg.sweep.route,
            source,
            kind: cfg.signal.kind,
            schedule: cfg.sweep.schedule,
            fixed_tau: cfg.sweep.tau,
            alpha: cfg.signal.alpha,
            besov_s: cfg.besov_s(),
            seed: cfg.sweep.seed,
            drop: cfg.filter.drop_threshold,
        })
    }

    /// `β = min(α, ν)`.
    pub fn beta(&self) -> f64 {
        self.alpha.min(self.family.qualification())
    }

    /// Resolution prescribed by the schedule, before any dyadic cap.
    pub fn scheduled_tau(&self, n: usize) -> u32 {
        match self.schedule {
            Schedule::Sobolev => tau_schedule_sobolev(n, self.beta(), RATE_P),
            Schedule::Besov => tau_schedule_besov(n, self.besov_s),
            Schedule::Fixed => self.fixed_tau.unwrap_or(0),
        }
    }

    pub fn theoretical_slopes(&self) -> (f64, f64) {
        match self.schedule {
            Schedule::Besov => {
                let s = self.besov_s;
                let h = -s / (2.0 * s + 2.0);
                (h, -(s + 0.5) / (2.0 * s + 3.0))
            }
            _ => {
                let nu = self.family.qualification();
                (
                    theoretical_slope_h(self.alpha, nu, RATE_P),
                    theoretical_slope_rho(self.alpha, nu, RATE_P),
                )
            }
        }
    }

    fn use_features(&self) -> bool {
        !matches!(self.route, Route::Dense)
    }

    fn build(&self, pts: &mcwave_core::PointSet) -> mcwave_core::Result<EmpiricalFrame> {
        let kernel = self.model.kernel();
        if self.use_features() {
            EmpiricalFrame::from_features(&kernel, pts, self.family, self.drop)
        } else {
            build_frame(&kernel, pts, self.family, self.drop)
        }
    }
}

/// Standard normal `h` from the reserved stream of `seed`.
pub fn random_h(model: &AnalyticModel, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(H_STREAM);
    (0..model.dim())
        .map(|_| rng.sample(StandardNormal))
        .collect()
}

/// Stream id of an `(N, trial, attempt)` cell; independent of grid order.
pub fn stream_id(n: usize, trial: usize, attempt: u64) -> u64 {
    ((n as u64) << 32) | ((trial as u64) << 1) | attempt
}

/// Population coordinates of the kernel section `K(·, x)`: `√λ_i u_i(x)`.
pub fn section_signal(model: &AnalyticModel, x: f64) -> AppResult<SpectralSignal> {
    let coeffs = (0..model.dim())
        .map(|i| model.eigenvalue(i).sqrt() * model.eigenfunction(i, x))
        .collect();
    Ok(SpectralSignal::new(
        model.eigenvalues(),
        coeffs,
        SignalTag::Population,
    )?)
}

/// Errors and diagnostics of a single reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialErrors {
    pub tau: u32,
    pub err_h: f64,
    pub err_rho: f64,
    pub approx: f64,
    pub estimation: f64,
    pub eff_rank: f64,
    pub scale_cap: u32,
    pub parseval_scale: u32,
}

/// Reconstructs `f` from its samples at `angles` and measures the error.
pub fn evaluate(
    setup: &Setup,
    f: &SpectralSignal,
    angles: Vec<f64>,
    tau: u32,
) -> AppResult<TrialErrors> {
    let model = &setup.model;
    let pts = mcwave_core::PointSet::circle(angles)?;
    let y: Vec<f64> = pts
        .iter()
        .map(|p| match p {
            Point::Circle(a) => model.eval(f.coeffs(), a),
            _ => unreachable!("circle point set"),
        })
        .collect();
    let frame = setup.build(&pts)?;
    let tau = if setup.family.localized() {
        tau.min(frame.scale_cap())
    } else {
        tau
    };
    let fhat = frame.reconstruct(&y, tau)?.feature_coordinates()?;
    let err_h = h_error(f, &fhat)?;
    let diff: Vec<f64> = f.coeffs().iter().zip(&fhat).map(|(a, b)| a - b).collect();
    let m = model.truncation;
    let err_rho = circle_rho_norm_sq(|x| model.eval(&diff, x), 4 * m, m)?.sqrt();
    let approx = approximation_error(f, &setup.family, tau);
    let estimation = estimation_error(f, &setup.family, tau, &fhat)?;
    if !(err_h <= approx + estimation + SPLIT_SLACK) {
        return Err(AppError::CheckFailed(format!(
            "error splitting violated: {err_h} > {approx} + {estimation}"
        )));
    }
    Ok(TrialErrors {
        tau,
        err_h,
        err_rho,
        approx,
        estimation,
        eff_rank: effective_rank(frame.retained_values())?,
        scale_cap: frame.scale_cap(),
        parseval_scale: frame.parseval_scale(),
    })
}

fn run_attempt(
    setup: &Setup,
    n: usize,
    trial: usize,
    attempt: u64,
) -> AppResult<(TrialRow, TrialErrors)> {
    let stream = stream_id(n, trial, attempt);
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    rng.set_stream(stream);
    let unit: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let pts = setup.model.points_from_uniform(&unit)?;
    let angles = match &pts {
        mcwave_core::PointSet::Circle(a) => a.clone(),
        _ => unreachable!("circle point set"),
    };
    let f = match &setup.source {
        Some(f) => f.clone(),
        None => section_signal(&setup.model, angles[0])?,
    };
    let e = evaluate(setup, &f, angles, setup.scheduled_tau(n))?;
    Ok((
        TrialRow {
            n,
            trial,
            tau: e.tau,
            err_h: e.err_h,
            err_rho: e.err_rho,
            eff_rank: e.eff_rank,
            seed: stream,
        },
        e,
    ))
}

fn recoverable(e: &AppError) -> bool {
    matches!(e, AppError::Numerical(_) | AppError::CheckFailed(_))
}

struct Cell {
    row: TrialRow,
    errors: TrialErrors,
    resampled: bool,
}

fn run_cell(setup: &Setup, n: usize, trial: usize) -> AppResult<Cell> {
    match run_attempt(setup, n, trial, 0) {
        Ok((row, errors)) => Ok(Cell {
            row,
            errors,
            resampled: false,
        }),
        Err(e) if recoverable(&e) => {
            let (row, errors) = run_attempt(setup, n, trial, 1).map_err(|e2| {
                AppError::CheckFailed(format!(
                    "N = {n}, trial {trial} failed twice: {e}; then {e2}"
                ))
            })?;
            Ok(Cell {
                row,
                errors,
                resampled: true,
            })
        }
        Err(e) => Err(e),
    }
}

/// Runs the sweep, fits rates and collects metadata. Rows are ordered by
/// `(N, trial)` whatever the thread count.
pub fn run_convergence(cfg: &ExperimentConfig) -> AppResult<RunOutput> {
    cfg.validate()?;
    let setup = Setup::from_config(cfg)?;
    let cells: Vec<(usize, usize)> = cfg
        .sweep
        .n
        .iter()
        .flat_map(|&n| (0..cfg.sweep.trials).map(move |t| (n, t)))
        .collect();
    let work = || -> AppResult<Vec<Cell>> {
        cells
            .par_iter()
            .map(|&(n, t)| run_cell(&setup, n, t))
            .collect()
    };
    let done = if cfg.sweep.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.sweep.threads)
            .build()
            .map_err(|e| AppError::Config(format!("thread pool: {e}")))?
            .install(work)?
    } else {
        work()?
    };

    let rows: Vec<TrialRow> = done.iter().map(|c| c.row).collect();
    let (slope_h, slope_rho) = setup.theoretical_slopes();
    let result = summarize(&rows, cfg.sweep.confidence, slope_h, slope_rho)?;

    let mut scale_cap = BTreeMap::new();
    let mut parseval_scale = BTreeMap::new();
    if setup.family.localized() {
        for c in &done {
            let key = c.row.n.to_string();
            let e = scale_cap.entry(key.clone()).or_insert(u32::MAX);
            *e = (*e).min(c.errors.scale_cap);
            let e = parseval_scale.entry(key).or_insert(u32::MAX);
            *e = (*e).min(c.errors.parseval_scale);
        }
    }
    let metadata = RunMetadata {
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.sweep.seed,
        filter: setup.family.name(),
        route: if setup.use_features() {
            "features"
        } else {
            "dense"
        }
        .into(),
        alpha: cfg.signal.alpha,
        qualification: setup.family.qualification(),
        theoretical_slope_h: slope_h,
        theoretical_slope_rho: slope_rho,
        fitted_slope_h: result.fit_h.slope,
        fitted_slope_rho: result.fit_rho.slope,
        resampled: done
            .iter()
            .filter(|c| c.resampled)
            .map(|c| format!("{}:{}", c.row.n, c.row.trial))
            .collect(),
        scale_cap,
        parseval_scale,
    };
    Ok(RunOutput {
        rows,
        result,
        metadata,
    })
}

/// Per-`N` medians and quantile band, plus log–log fits on the medians.
pub fn summarize(
    rows: &[TrialRow],
    confidence: f64,
    slope_h: f64,
    slope_rho: f64,
) -> AppResult<RateResult> {
    let lo = (1.0 - confidence) / 2.0;
    let hi = 1.0 - lo;
    let mut by_n: BTreeMap<usize, Vec<&TrialRow>> = BTreeMap::new();
    for r in rows {
        by_n.entry(r.n).or_default().push(r);
    }
    let summary: Vec<SummaryRow> = by_n
        .iter()
        .map(|(&n, rs)| {
            let h: Vec<f64> = rs.iter().map(|r| r.err_h).collect();
            let p: Vec<f64> = rs.iter().map(|r| r.err_rho).collect();
            SummaryRow {
                n,
                tau: rs[0].tau,
                median_h: model::median(&h),
                lo_h: model::quantile(&h, lo),
                hi_h: model::quantile(&h, hi),
                median_rho: model::median(&p),
                lo_rho: model::quantile(&p, lo),
                hi_rho: model::quantile(&p, hi),
            }
        })
        .collect();
    let pts_h: Vec<(f64, f64)> = summary.iter().map(|s| (s.n as f64, s.median_h)).collect();
    let pts_rho: Vec<(f64, f64)> = summary.iter().map(|s| (s.n as f64, s.median_rho)).collect();
    Ok(RateResult {
        fit_h: fit_rate(&pts_h, slope_h).map_err(AppError::Numerical)?,
        fit_rho: fit_rate(&pts_rho, slope_rho).map_err(AppError::Numerical)?,
        summary,
        band: (lo, hi),
    })
}

/// Population-only errors: the `4M` quadrature nodes serve as samples, so the
/// empirical covariance equals `T` and only the approximation error remains.
pub fn population_errors(cfg: &ExperimentConfig, taus: &[u32]) -> AppResult<Vec<TrialErrors>> {
    cfg.validate()?;
    let setup = Setup::from_config(cfg)?;
    let f = match &setup.source {
        Some(f) => f.clone(),
        None => section_signal(&setup.model, 0.0)?,
    };
    let angles = match setup.model.quadrature_points() {
        mcwave_core::PointSet::Circle(a) => a,
        _ => unreachable!("circle point set"),
    };
    taus.iter()
        .map(|&t| evaluate(&setup, &f, angles.clone(), t))
        .collect()
}
