//! Iteration schedules: weight sequences with control subsets and the
//! series bookkeeping that decides whether an iteration converges.
//!
//! A schedule emits for each iteration index `n` a weight vector `beta^(n)`
//! together with a control set `J^(n)`, a subset of the active indices
//! whose coefficients carry the convergence argument. Three built-in
//! families reproduce closed-form sequences that exercise the interesting
//! regimes (weight sums approaching 2, off-control coefficients decaying
//! at different rates); arbitrary sequences can be tabulated.
//!
//! Built-in closed forms (`m` a counter per period; see `first_index` for
//! where each family starts):
//!
//! - `paper_n2` (N = 2): `beta^(n) = (1/n, 2 - 2/n)`, control = active.
//! - `paper_perturb3` (N = 3): `beta^(2m) = (1/m^2, 1/m, 2 - 2/m)` with
//!   control `{2,3}`, `beta^(2m+1) = (1/m, 1/m^2, 2 - 2/m)` with control
//!   `{1,3}`; starts at `n = 2`.
//! - `paper_intermittent3` (N = 3): rows cycle `(1, 1/m, 1/m^2)`,
//!   `(1/m, 1, 1/m^2)`, `(1/m^2, 1/m, 1)` with controls `{1}`, `{2}`,
//!   `{3}`; starts at `n = 6` (`m = 2`) so that every weight sum stays
//!   at most 1.75.
//!
//! Block partitions group iterations so that the control sets of each
//! window jointly cover all indices; per-block minima of the descent
//! coefficients are the summands whose divergence certifies convergence.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{self, BetaVector};

/// One tabulated row: weights plus an optional control set (1-based
/// indices). A missing control set defaults to the active indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub beta: BetaVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<BTreeSet<usize>>,
}

fn default_start() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ScheduleKind {
    Constant {
        beta: BetaVector,
    },
    Cyclic {
        weight: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Tabulated {
        rows: Vec<ScheduleRow>,
        #[serde(default = "default_start")]
        start: usize,
    },
    PaperN2,
    PaperPerturb3,
    PaperIntermittent3,
    /// Wrapper that zeroes every off-control weight of the inner schedule.
    Restricted {
        inner: Box<Schedule>,
    },
}

/// Whether a series is known in closed form to diverge or converge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    Diverges,
    Converges,
    Unknown,
}

/// Closed-form knowledge about the schedule's series; finite-horizon
/// partial sums cannot decide divergence, so built-ins carry this flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AnalyticSummary {
    /// Sum over blocks of the minimal `nu` over active indices.
    pub nu_blocks: SeriesVerdict,
    /// Sum over blocks of the minimal `nu` over control indices.
    pub nu_control_blocks: SeriesVerdict,
    /// Sum over blocks of the minimal weight over control indices.
    pub beta_control_blocks: SeriesVerdict,
    /// Sum over iterations of the minimal `mu` over active indices.
    pub mu_min: SeriesVerdict,
    /// Total off-control weight mass.
    pub off_control_tail: SeriesVerdict,
}

/// A generator of `(beta^(n), J^(n))` pairs over iteration indices.
///
/// Schedules are immutable; `beta_at`/`j_at` are pure and safe to call
/// concurrently. The JSON encoding is tagged by `kind`, e.g.
/// `{"kind":"paper_n2"}` or `{"kind":"constant","beta":[0.5,0.5]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    kind: ScheduleKind,
}

impl Schedule {
    pub fn constant(beta: BetaVector) -> Schedule {
        Schedule {
            kind: ScheduleKind::Constant { beta },
        }
    }

    /// Cyclic single-set activation with the given weight over `n` sets.
    pub fn cyclic(weight: f64, n: usize) -> Result<Schedule> {
        let s = Schedule {
            kind: ScheduleKind::Cyclic {
                weight,
                n: Some(n),
            },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn tabulated(rows: Vec<ScheduleRow>) -> Result<Schedule> {
        Schedule::tabulated_from(rows, 1)
    }

    /// Tabulated rows covering indices `start, start+1, ...`.
    pub fn tabulated_from(rows: Vec<ScheduleRow>, start: usize) -> Result<Schedule> {
        let s = Schedule {
            kind: ScheduleKind::Tabulated { rows, start },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn paper_n2() -> Schedule {
        Schedule {
            kind: ScheduleKind::PaperN2,
        }
    }

    pub fn paper_perturb3() -> Schedule {
        Schedule {
            kind: ScheduleKind::PaperPerturb3,
        }
    }

    pub fn paper_intermittent3() -> Schedule {
        Schedule {
            kind: ScheduleKind::PaperIntermittent3,
        }
    }

    /// Check structural invariants (row lengths, control indices in range).
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ScheduleKind::Constant { .. } => Ok(()),
            ScheduleKind::Cyclic { weight, n } => {
                if !(0.0..=2.0).contains(weight) {
                    return Err(Error::InvalidConfig(format!(
                        "cyclic weight {weight} outside [0, 2]"
                    )));
                }
                if n == &Some(0) {
                    return Err(Error::InvalidConfig("cyclic over zero sets".into()));
                }
                Ok(())
            }
            ScheduleKind::Tabulated { rows, start } => {
                if rows.is_empty() {
                    return Err(Error::InvalidConfig("tabulated schedule is empty".into()));
                }
                if *start == 0 {
                    return Err(Error::InvalidConfig(
                        "tabulated start index must be at least 1".into(),
                    ));
                }
                let n = rows[0].beta.len();
                for (k, row) in rows.iter().enumerate() {
                    if row.beta.len() != n {
                        return Err(Error::InvalidConfig(format!(
                            "tabulated row {k} has {} weights, expected {n}",
                            row.beta.len()
                        )));
                    }
                    if let Some(j) = &row.j {
                        if let Some(&bad) = j.iter().find(|&&i| i == 0 || i > n) {
                            return Err(Error::InvalidConfig(format!(
                                "tabulated row {k} names control index {bad} outside 1..={n}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            ScheduleKind::PaperN2
            | ScheduleKind::PaperPerturb3
            | ScheduleKind::PaperIntermittent3 => Ok(()),
            ScheduleKind::Restricted { inner } => inner.validate(),
        }
    }

    /// Number of sets the schedule drives, when it is self-describing.
    pub fn num_sets(&self) -> Option<usize> {
        match &self.kind {
            ScheduleKind::Constant { beta } => Some(beta.len()),
            ScheduleKind::Cyclic { n, .. } => *n,
            ScheduleKind::Tabulated { rows, .. } => rows.first().map(|r| r.beta.len()),
            ScheduleKind::PaperN2 => Some(2),
            ScheduleKind::PaperPerturb3 | ScheduleKind::PaperIntermittent3 => Some(3),
            ScheduleKind::Restricted { inner } => inner.num_sets(),
        }
    }

    /// Fill in the set count for kinds that cannot carry it themselves.
    pub fn resolve_num_sets(&mut self, sets: usize) {
        if let ScheduleKind::Cyclic { n, .. } = &mut self.kind {
            if n.is_none() {
                *n = Some(sets);
            }
        }
    }

    /// First iteration index the schedule is defined for.
    pub fn first_index(&self) -> usize {
        match &self.kind {
            ScheduleKind::Tabulated { start, .. } => *start,
            ScheduleKind::PaperPerturb3 => 2,
            ScheduleKind::PaperIntermittent3 => 6,
            ScheduleKind::Restricted { inner } => inner.first_index(),
            _ => 1,
        }
    }

    /// Last defined index for finite schedules, `None` when unbounded.
    pub fn last_index(&self) -> Option<usize> {
        match &self.kind {
            ScheduleKind::Tabulated { rows, start } => Some(start + rows.len() - 1),
            ScheduleKind::Restricted { inner } => inner.last_index(),
            _ => None,
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n < self.first_index() {
            return Err(Error::ScheduleIndex {
                index: n,
                reason: format!("schedule starts at {}", self.first_index()),
            });
        }
        if let Some(last) = self.last_index() {
            if n > last {
                return Err(Error::ScheduleIndex {
                    index: n,
                    reason: format!("tabulated horizon ends at {last}"),
                });
            }
        }
        Ok(())
    }

    /// The weight vector `beta^(n)`, `n >= first_index()`.
    pub fn beta_at(&self, n: usize) -> Result<BetaVector> {
        self.check_index(n)?;
        let beta = match &self.kind {
            ScheduleKind::Constant { beta } => beta.clone(),
            ScheduleKind::Cyclic { weight, n: sets } => {
                let sets = sets.ok_or_else(|| {
                    Error::InvalidConfig("cyclic schedule has no set count".into())
                })?;
                let mut w = vec![0.0; sets];
                w[(n - 1) % sets] = *weight;
                BetaVector::new(w)?
            }
            ScheduleKind::Tabulated { rows, start } => rows[n - start].beta.clone(),
            ScheduleKind::PaperN2 => {
                let t = n as f64;
                BetaVector::new(vec![1.0 / t, 2.0 - 2.0 / t])?
            }
            ScheduleKind::PaperPerturb3 => {
                if n % 2 == 0 {
                    let m = (n / 2) as f64;
                    BetaVector::new(vec![1.0 / (m * m), 1.0 / m, 2.0 - 2.0 / m])?
                } else {
                    let m = ((n - 1) / 2) as f64;
                    BetaVector::new(vec![1.0 / m, 1.0 / (m * m), 2.0 - 2.0 / m])?
                }
            }
            ScheduleKind::PaperIntermittent3 => {
                let (m, row) = (n / 3, n % 3);
                match row {
                    0 => {
                        let m = m as f64;
                        BetaVector::new(vec![1.0, 1.0 / m, 1.0 / (m * m)])?
                    }
                    1 => {
                        let m = ((n - 1) / 3) as f64;
                        BetaVector::new(vec![1.0 / m, 1.0, 1.0 / (m * m)])?
                    }
                    _ => {
                        let m = ((n - 2) / 3) as f64;
                        BetaVector::new(vec![1.0 / (m * m), 1.0 / m, 1.0])?
                    }
                }
            }
            ScheduleKind::Restricted { inner } => {
                let beta = inner.beta_at(n)?;
                let j = inner.j_at(n)?;
                let masked = beta
                    .weights()
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| if j.contains(&(i + 1)) { w } else { 0.0 })
                    .collect();
                BetaVector::new(masked)?
            }
        };
        Ok(beta)
    }

    /// The control set `J^(n)` (1-based), always a subset of the active
    /// indices of `beta^(n)`.
    pub fn j_at(&self, n: usize) -> Result<BTreeSet<usize>> {
        let active = operator::active_indices(&self.beta_at(n)?);
        let rule: Option<BTreeSet<usize>> = match &self.kind {
            ScheduleKind::Tabulated { rows, start } => rows[n - start].j.clone(),
            ScheduleKind::PaperPerturb3 => Some(if n % 2 == 0 {
                BTreeSet::from([2, 3])
            } else {
                BTreeSet::from([1, 3])
            }),
            ScheduleKind::PaperIntermittent3 => Some(BTreeSet::from([n % 3 + 1])),
            ScheduleKind::Restricted { inner } => Some(inner.j_at(n)?),
            _ => None,
        };
        Ok(match rule {
            Some(j) => j.intersection(&active).copied().collect(),
            None => active,
        })
    }

    /// Natural block length for schedules with periodic control coverage.
    pub fn intrinsic_block_len(&self) -> Option<usize> {
        match &self.kind {
            ScheduleKind::PaperN2 => Some(1),
            ScheduleKind::PaperPerturb3 => Some(2),
            ScheduleKind::PaperIntermittent3 => Some(3),
            ScheduleKind::Cyclic { n, .. } => *n,
            ScheduleKind::Constant { beta } => {
                if beta.weights().iter().all(|&w| w > 0.0) {
                    Some(1)
                } else {
                    None
                }
            }
            ScheduleKind::Restricted { inner } => inner.intrinsic_block_len(),
            ScheduleKind::Tabulated { .. } => None,
        }
    }

    /// Closed-form series verdicts, when known.
    pub fn analytic(&self) -> Option<AnalyticSummary> {
        use SeriesVerdict::*;
        match &self.kind {
            ScheduleKind::PaperN2 => Some(AnalyticSummary {
                nu_blocks: Diverges,
                nu_control_blocks: Diverges,
                beta_control_blocks: Diverges,
                mu_min: Converges,
                off_control_tail: Converges,
            }),
            ScheduleKind::PaperPerturb3 => Some(AnalyticSummary {
                nu_blocks: Converges,
                nu_control_blocks: Diverges,
                beta_control_blocks: Diverges,
                mu_min: Converges,
                off_control_tail: Converges,
            }),
            ScheduleKind::PaperIntermittent3 => Some(AnalyticSummary {
                nu_blocks: Converges,
                nu_control_blocks: Diverges,
                beta_control_blocks: Diverges,
                mu_min: Converges,
                off_control_tail: Diverges,
            }),
            ScheduleKind::Constant { beta } => {
                let s = beta.sum();
                let active = beta.weights().iter().any(|&w| w > 0.0);
                let nu = if active && s < 2.0 { Diverges } else { Converges };
                Some(AnalyticSummary {
                    nu_blocks: nu,
                    nu_control_blocks: nu,
                    beta_control_blocks: if active { Diverges } else { Converges },
                    mu_min: nu,
                    off_control_tail: Converges,
                })
            }
            ScheduleKind::Cyclic { weight, .. } => {
                let nu = if *weight > 0.0 && *weight < 2.0 {
                    Diverges
                } else {
                    Converges
                };
                Some(AnalyticSummary {
                    nu_blocks: nu,
                    nu_control_blocks: nu,
                    beta_control_blocks: if *weight > 0.0 { Diverges } else { Converges },
                    mu_min: nu,
                    off_control_tail: Converges,
                })
            }
            ScheduleKind::Restricted { inner } => inner.analytic().map(|a| AnalyticSummary {
                nu_blocks: a.nu_control_blocks,
                nu_control_blocks: a.nu_control_blocks,
                beta_control_blocks: a.beta_control_blocks,
                mu_min: Unknown,
                off_control_tail: Converges,
            }),
            ScheduleKind::Tabulated { .. } => None,
        }
    }

    /// Schedule emitting the same weights with every off-control weight
    /// zeroed. Weight sums can only shrink, so membership in the
    /// admissible set is preserved and every `nu_i` with `i` in the
    /// control set can only grow.
    pub fn restrict_to_control(&self) -> Schedule {
        Schedule {
            kind: ScheduleKind::Restricted {
                inner: Box::new(self.clone()),
            },
        }
    }
}

/// Iteration-index boundaries `n_1 < n_2 < ...`; block `k` is the window
/// `{n : n_{k-1} < n <= n_k}` with `n_0` the base (one below the first
/// schedule index).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockPartition {
    pub base: usize,
    pub boundaries: Vec<usize>,
}

impl BlockPartition {
    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    /// Inclusive window of block `k` (0-based).
    pub fn window(&self, k: usize) -> (usize, usize) {
        let lo = if k == 0 {
            self.base
        } else {
            self.boundaries[k - 1]
        };
        (lo + 1, self.boundaries[k])
    }
}

/// Smallest boundaries such that the control sets of every window jointly
/// cover all indices. A trailing window that never completes is dropped;
/// a schedule that cannot cover yields an empty partition.
pub fn greedy_blocks(sched: &Schedule, horizon: usize) -> Result<BlockPartition> {
    let n_sets = sched
        .num_sets()
        .ok_or_else(|| Error::InvalidConfig("schedule has no set count".into()))?;
    let first = sched.first_index();
    let mut boundaries = Vec::new();
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for n in first..=horizon.min(sched.last_index().unwrap_or(horizon)) {
        covered.extend(sched.j_at(n)?);
        if covered.len() == n_sets {
            boundaries.push(n);
            covered.clear();
        }
    }
    Ok(BlockPartition {
        base: first - 1,
        boundaries,
    })
}

/// Fixed-length blocks of `p` iterations from the schedule's first index;
/// a trailing partial block is dropped.
pub fn fixed_blocks(sched: &Schedule, p: usize, horizon: usize) -> Result<BlockPartition> {
    if p == 0 {
        return Err(Error::InvalidConfig("block length must be positive".into()));
    }
    let base = sched.first_index() - 1;
    let boundaries = (1..)
        .map(|k| base + k * p)
        .take_while(|&b| b <= horizon)
        .collect();
    Ok(BlockPartition { base, boundaries })
}

/// Intrinsic fixed-length blocks when the schedule has them, greedy
/// coverage blocks otherwise.
pub fn natural_blocks(sched: &Schedule, horizon: usize) -> Result<BlockPartition> {
    match sched.intrinsic_block_len() {
        Some(p) => fixed_blocks(sched, p, horizon),
        None => greedy_blocks(sched, horizon),
    }
}

/// Per-block minima feeding the convergence series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockStat {
    /// Boundary `n_k` closing the block.
    pub end: usize,
    /// Minimal `nu_i^(n)` over active indices in the window.
    pub nu_active: f64,
    /// Minimal `nu_i^(n)` over control indices in the window.
    pub nu_control: f64,
    /// Minimal `beta_i^(n)` over control indices in the window
    /// (the intermittent-control variant of the block coefficient).
    pub beta_control: f64,
}

/// Direct summation of every series the convergence statements refer to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesReport {
    pub horizon: usize,
    pub first_index: usize,
    pub boundaries: Vec<usize>,
    pub blocks: Vec<BlockStat>,
    /// Sum over blocks of `nu_active`.
    pub sum_nu_blocks: f64,
    /// Sum over blocks of `nu_control`.
    pub sum_nu_control_blocks: f64,
    /// Sum over blocks of `beta_control`.
    pub sum_beta_control_blocks: f64,
    /// Sum over iterations of the minimal `mu_i` over active indices.
    pub sum_mu_min: f64,
    /// Total off-control weight mass over the horizon.
    pub off_control_tail: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticSummary>,
}

/// Populate a [`SeriesReport`] by direct summation up to `horizon`.
///
/// Per-iteration sums run over the whole horizon; per-block minima only
/// over the complete blocks of the partition.
pub fn series_report(
    sched: &Schedule,
    blocks: &BlockPartition,
    horizon: usize,
) -> Result<SeriesReport> {
    let first = sched.first_index();
    if horizon < first {
        return Err(Error::InvalidConfig(format!(
            "horizon {horizon} precedes the schedule start {first}"
        )));
    }
    let last = horizon.min(sched.last_index().unwrap_or(horizon));

    let mut sum_mu_min = 0.0;
    let mut off_control_tail = 0.0;
    let mut stats: Vec<BlockStat> = Vec::new();
    let mut boundaries = Vec::new();

    // Per-block accumulators over the current window.
    let mut block_iter = blocks
        .boundaries
        .iter()
        .copied()
        .filter(|&b| b <= last)
        .peekable();
    let mut cur = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for n in first..=last {
        let beta = sched.beta_at(n)?;
        let j = sched.j_at(n)?;
        let row = operator::coefficients(&beta);
        sum_mu_min += row.mu_min_active(&beta);
        for (i, &w) in beta.weights().iter().enumerate() {
            if w > 0.0 && !j.contains(&(i + 1)) {
                off_control_tail += w;
            }
        }
        for (i, &w) in beta.weights().iter().enumerate() {
            if w > 0.0 {
                cur.0 = cur.0.min(row.nu[i]);
            }
            if j.contains(&(i + 1)) {
                cur.1 = cur.1.min(row.nu[i]);
                cur.2 = cur.2.min(w);
            }
        }
        if block_iter.peek() == Some(&n) {
            block_iter.next();
            boundaries.push(n);
            let fin = |v: f64| if v.is_finite() { v } else { 0.0 };
            stats.push(BlockStat {
                end: n,
                nu_active: fin(cur.0),
                nu_control: fin(cur.1),
                beta_control: fin(cur.2),
            });
            cur = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        }
    }

    Ok(SeriesReport {
        horizon,
        first_index: first,
        boundaries,
        sum_nu_blocks: stats.iter().map(|b| b.nu_active).sum(),
        sum_nu_control_blocks: stats.iter().map(|b| b.nu_control).sum(),
        sum_beta_control_blocks: stats.iter().map(|b| b.beta_control).sum(),
        blocks: stats,
        sum_mu_min,
        off_control_tail,
        analytic: sched.analytic(),
    })
}

/// A weight zeroed by [`nullify_offcontrol`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroedSlot {
    pub n: usize,
    /// 1-based set index.
    pub index: usize,
    pub value: f64,
    /// Pass (1-based) during which the weight was zeroed.
    pub pass: usize,
}

/// Result of the off-control nullification transform.
#[derive(Clone, Debug)]
pub struct NullifyOutcome {
    /// Transformed schedule, tabulated over the requested horizon.
    pub schedule: Schedule,
    /// Total mass of zeroed weights.
    pub nullified_mass: f64,
    /// Number of committed passes.
    pub passes: usize,
    pub zeroed: Vec<ZeroedSlot>,
}

/// Zero off-control weights that realize per-block minima, in passes, so
/// that the remaining block-minimum series is carried by larger weights.
///
/// Blocks have fixed length `p` from the schedule's first index (a trailing
/// partial block is skipped). Each pass zeroes, per block, the first
/// active weight attaining the block minimum at an off-control slot. A
/// pass is committed only while pass masses do not increase: a jump in
/// pass mass marks the point where the remaining minima belong to the
/// non-summable part that must be kept. At most `p * N` passes run.
///
/// Requires every weight sum over the horizon to stay strictly below 2.
pub fn nullify_offcontrol(sched: &Schedule, p: usize, horizon: usize) -> Result<NullifyOutcome> {
    if p == 0 {
        return Err(Error::InvalidConfig("block length must be positive".into()));
    }
    let first = sched.first_index();
    if horizon < first {
        return Err(Error::InvalidConfig(format!(
            "horizon {horizon} precedes the schedule start {first}"
        )));
    }
    let n_sets = sched
        .num_sets()
        .ok_or_else(|| Error::InvalidConfig("schedule has no set count".into()))?;

    let mut weights: Vec<Vec<f64>> = Vec::new();
    let mut controls: Vec<BTreeSet<usize>> = Vec::new();
    for n in first..=horizon {
        let beta = sched.beta_at(n)?;
        if beta.sum() >= 2.0 {
            return Err(Error::InvalidConfig(format!(
                "weight sum at n = {n} is {}, not bounded away from 2",
                beta.sum()
            )));
        }
        controls.push(sched.j_at(n)?);
        weights.push(beta.weights().to_vec());
    }

    let rows = weights.len();
    let full_blocks = rows / p;
    let mut zeroed = Vec::new();
    let mut nullified_mass = 0.0;
    let mut prev_pass_mass = f64::INFINITY;
    let mut passes = 0usize;

    for pass in 1..=p * n_sets {
        // Candidate per block: first off-control slot attaining the block
        // minimum over active weights.
        let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
        for k in 0..full_blocks {
            let lo = k * p;
            let hi = lo + p;
            let mut min = f64::INFINITY;
            for r in lo..hi {
                for &w in weights[r].iter().filter(|&&w| w > 0.0) {
                    min = min.min(w);
                }
            }
            if !min.is_finite() {
                continue;
            }
            'slot: for r in lo..hi {
                for (i, &w) in weights[r].iter().enumerate() {
                    if w > 0.0 && w == min && !controls[r].contains(&(i + 1)) {
                        candidates.push((r, i, w));
                        break 'slot;
                    }
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let pass_mass: f64 = candidates.iter().map(|(_, _, w)| w).sum();
        if pass_mass > prev_pass_mass + 1e-9 {
            break;
        }
        for (r, i, w) in candidates {
            weights[r][i] = 0.0;
            zeroed.push(ZeroedSlot {
                n: first + r,
                index: i + 1,
                value: w,
                pass,
            });
        }
        nullified_mass += pass_mass;
        prev_pass_mass = pass_mass;
        passes = pass;
    }

    let rows: Vec<ScheduleRow> = weights
        .into_iter()
        .zip(controls)
        .map(|(w, j)| {
            Ok(ScheduleRow {
                beta: BetaVector::new(w)?,
                j: Some(j),
            })
        })
        .collect::<Result<_>>()?;
    Ok(NullifyOutcome {
        schedule: Schedule::tabulated_from(rows, first)?,
        nullified_mass,
        passes,
        zeroed,
    })
}
