//! Driver for the iteration `x^(n) = Q_{beta^(n)}(x^(n-1))`.
//!
//! The true distance to the intersection is not computable in general, so
//! the run monitors `max_i d(x, C_i)` as the feasibility surrogate and,
//! when a certified intersection point is supplied, the distance to it.
//! Every iterate is at least as close to each intersection point as its
//! predecessor, so the reference distance must come out nonincreasing.
//!
//! A single run is strictly sequential; independent runs are value-semantic
//! and may execute concurrently.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, Point, SetSpec};
use crate::operator::{self, BetaVector};
use crate::schedule::Schedule;

/// Everything a run needs: the instance, the schedule and stopping rules.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub sets: Vec<SetSpec>,
    pub schedule: Schedule,
    pub x0: Point,
    pub max_iter: usize,
    /// Stop as feasible once `max_i d(x, C_i)` drops to this value.
    pub tol_feas: f64,
    /// Stop as stalled once a step moves less than this (checked after
    /// feasibility, so a stall is only reported for infeasible iterates).
    pub tol_step: f64,
    /// A known intersection point for monitoring, if available.
    pub reference_point: Option<Point>,
    /// Keep every `trace_stride`-th row (first and last always kept).
    pub trace_stride: usize,
}

impl RunConfig {
    pub fn new(sets: Vec<SetSpec>, schedule: Schedule, x0: Point) -> RunConfig {
        RunConfig {
            sets,
            schedule,
            x0,
            max_iter: 100_000,
            tol_feas: 1e-9,
            tol_step: 0.0,
            reference_point: None,
            trace_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.x0.dim();
        geometry::check_family(&self.sets, dim)?;
        self.schedule.validate()?;
        if let Some(n) = self.schedule.num_sets() {
            if n != self.sets.len() {
                return Err(Error::InvalidConfig(format!(
                    "schedule drives {n} sets but {} were given",
                    self.sets.len()
                )));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.tol_feas > 0.0) {
            return Err(Error::InvalidConfig("tol_feas must be positive".into()));
        }
        if !(self.tol_step >= 0.0) {
            return Err(Error::InvalidConfig("tol_step must be nonnegative".into()));
        }
        if self.trace_stride == 0 {
            return Err(Error::InvalidConfig("trace_stride must be at least 1".into()));
        }
        if let Some(c) = &self.reference_point {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.dim(),
                });
            }
            for (i, set) in self.sets.iter().enumerate() {
                if !set.contains(c, 1e-9)? {
                    return Err(Error::InvalidConfig(format!(
                        "reference point lies outside set {}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub n: usize,
    /// Distances `d(x^(n), C_i)`.
    pub dists: Vec<f64>,
    pub max_dist: f64,
    /// `|x^(n) - x^(n-1)|`; zero on the initial row.
    pub step_norm: f64,
    /// Weight sum of the step taken into this row.
    pub s: f64,
    /// Minimal `nu_i` over the step's active indices.
    pub nu_min_active: f64,
    /// Running sum of `nu_min_active`.
    pub cum_nu: f64,
    /// Running sum of the per-step minimal `mu_i` over active indices.
    pub cum_mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_to_ref: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Feasible,
    StepStalled,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub final_point: Point,
    /// Number of operator applications performed.
    pub iterations: usize,
    pub status: RunStatus,
    pub trace: Vec<TraceRow>,
}

/// Incremental driver exposing one operator application at a time.
pub struct Solver<'a> {
    cfg: &'a RunConfig,
    x: Point,
    next_n: usize,
    cum_nu: f64,
    cum_mu: f64,
}

impl<'a> Solver<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Solver<'a>> {
        cfg.validate()?;
        Ok(Solver {
            x: cfg.x0.clone(),
            next_n: cfg.schedule.first_index(),
            cfg,
            cum_nu: 0.0,
            cum_mu: 0.0,
        })
    }

    pub fn current(&self) -> &Point {
        &self.x
    }

    /// Row describing the starting point, before any step.
    pub fn initial_row(&self) -> Result<TraceRow> {
        self.row(0.0, BetaRowStats::default())
    }

    fn row(&self, step_norm: f64, stats: BetaRowStats) -> Result<TraceRow> {
        let dists = geometry::distances(&self.cfg.sets, &self.x)?;
        let max_dist = dists.iter().cloned().fold(0.0, f64::max);
        Ok(TraceRow {
            n: self.next_n - 1,
            dists,
            max_dist,
            step_norm,
            s: stats.s,
            nu_min_active: stats.nu_min,
            cum_nu: self.cum_nu,
            cum_mu: self.cum_mu,
            dist_to_ref: self
                .cfg
                .reference_point
                .as_ref()
                .map(|c| self.x.dist(c)),
        })
    }

    /// Apply the scheduled operator once and report the new iterate.
    pub fn step(&mut self) -> Result<TraceRow> {
        let n = self.next_n;
        let beta = self.cfg.schedule.beta_at(n)?;
        let next = operator::apply_q(&beta, &self.cfg.sets, &self.x)?;
        let step_norm = next.dist(&self.x);
        let stats = BetaRowStats::from(&beta);
        self.cum_nu += stats.nu_min;
        self.cum_mu += stats.mu_min;
        self.x = next;
        self.next_n = n + 1;
        self.row(step_norm, stats)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct BetaRowStats {
    s: f64,
    nu_min: f64,
    mu_min: f64,
}

impl From<&BetaVector> for BetaRowStats {
    fn from(beta: &BetaVector) -> Self {
        let row = operator::coefficients(beta);
        BetaRowStats {
            s: row.s,
            nu_min: row.nu_min_active(beta),
            mu_min: row.mu_min_active(beta),
        }
    }
}

/// Iterate until feasible, stalled, or the iteration budget is spent.
///
/// Stopping checks run in that order, so the strongest conclusion wins.
pub fn run(cfg: &RunConfig) -> Result<RunResult> {
    let mut solver = Solver::new(cfg)?;
    let mut trace = vec![solver.initial_row()?];

    if trace[0].max_dist <= cfg.tol_feas {
        return Ok(RunResult {
            final_point: solver.x,
            iterations: 0,
            status: RunStatus::Feasible,
            trace,
        });
    }

    let mut status = RunStatus::MaxIter;
    let mut iterations = 0;
    for k in 0..cfg.max_iter {
        let row = solver.step()?;
        iterations = k + 1;
        let done = row.max_dist <= cfg.tol_feas || row.step_norm <= cfg.tol_step;
        if row.max_dist <= cfg.tol_feas {
            status = RunStatus::Feasible;
        } else if row.step_norm <= cfg.tol_step {
            status = RunStatus::StepStalled;
        }
        if done || k % cfg.trace_stride == 0 || k + 1 == cfg.max_iter {
            trace.push(row);
        }
        if done {
            break;
        }
    }

    Ok(RunResult {
        final_point: solver.x,
        iterations,
        status,
        trace,
    })
}
