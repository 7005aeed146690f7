//! Randomized verification sweeps over every inequality family.
//!
//! Each trial draws a random instance containing its anchor point, a
//! random weight vector and convex combination, and evaluates every
//! inequality check at a random query point. The report keeps the worst
//! slack per family; anything below `-1e-10` (or any NaN) is a failure.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    eq3_slack, firm_nonexpansive_gap, perturb_step_gap, proof_kappa, prop1_slack, thm1_slack,
    thm1_slack_scaled,
};
use crate::diagnostics::random_feasible_instance;
use crate::geometry::Point;
use crate::operator::BetaVector;

/// Slack floor below which a sweep counts as a violation.
pub const SLACK_FLOOR: f64 = -1e-10;

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub trials: usize,
    pub seed: u64,
}

/// Worst-case slack for one inequality family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyStat {
    pub name: &'static str,
    pub evaluations: usize,
    pub min_slack: f64,
    /// Trials skipped because the bound degenerated.
    pub vacuous: usize,
    pub nan: usize,
}

impl FamilyStat {
    fn new(name: &'static str) -> FamilyStat {
        FamilyStat {
            name,
            evaluations: 0,
            min_slack: f64::INFINITY,
            vacuous: 0,
            nan: 0,
        }
    }

    fn record(&mut self, slack: f64) {
        self.evaluations += 1;
        if slack.is_nan() {
            self.nan += 1;
        } else if slack.is_finite() {
            self.min_slack = self.min_slack.min(slack);
        } else {
            self.vacuous += 1;
        }
    }

    pub fn passes(&self) -> bool {
        self.nan == 0 && (self.evaluations == self.vacuous || self.min_slack >= SLACK_FLOOR)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub trials: usize,
    pub seed: u64,
    pub families: Vec<FamilyStat>,
}

impl SweepReport {
    pub fn all_pass(&self) -> bool {
        self.families.iter().all(|f| f.passes())
    }
}

fn random_beta(rng: &mut ChaCha8Rng, n: usize) -> BetaVector {
    if rng.gen_bool(0.02) {
        return BetaVector::new(vec![0.0; n]).unwrap();
    }
    let mut raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    for w in raw.iter_mut() {
        if rng.gen_bool(0.2) {
            *w = 0.0;
        }
    }
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        return BetaVector::new(raw).unwrap();
    }
    // Occasionally sit exactly on the boundary sum.
    let target = if rng.gen_bool(0.05) {
        2.0
    } else {
        rng.gen_range(0.0..2.0)
    };
    BetaVector::new(raw.into_iter().map(|w| w * target / total).collect()).unwrap()
}

fn random_kappa(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut raw: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-3..1.0)).collect();
    for k in raw.iter_mut() {
        if rng.gen_bool(0.1) {
            *k = 0.0;
        }
    }
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        raw[0] = 1.0;
        return raw;
    }
    raw.iter().map(|k| k / total).collect()
}

fn random_point_in_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Point {
    let coords: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Point::new(coords).unwrap().scale(radius * rng.gen_range(0.0..1.0))
}

/// Run every family for `trials` seeded trials.
pub fn run_sweeps(opts: SweepOptions) -> SweepReport {
    run_sweeps_with_nu_scale(opts, 1.0)
}

/// Sweep driver with an adjustable coefficient scale; scales other than 1
/// deliberately corrupt the per-index bound and exist so tests can prove
/// the sweep notices.
pub(crate) fn run_sweeps_with_nu_scale(opts: SweepOptions, nu_scale: f64) -> SweepReport {
    let dims = [1usize, 2, 3, 5];
    let mut prop1 = FamilyStat::new("prop1");
    let mut thm1 = FamilyStat::new("thm1");
    let mut eq3 = FamilyStat::new("eq3");
    let mut perturb = FamilyStat::new("perturb_step_gap");
    let mut firm = FamilyStat::new("firm_nonexpansive");
    let mut substitution = FamilyStat::new("thm1_substitution");

    for trial in 0..opts.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(trial as u64));
        let d = dims[rng.gen_range(0..dims.len())];
        let n = rng.gen_range(1..=5);
        let anchor = random_point_in_ball(&mut rng, d, 2.0);
        let sets = random_feasible_instance(
            opts.seed.wrapping_mul(31).wrapping_add(trial as u64),
            d,
            n,
            &anchor,
        );
        let x = random_point_in_ball(&mut rng, d, 10.0);
        let beta = random_beta(&mut rng, n);
        let kappa = random_kappa(&mut rng, n);

        let r = prop1_slack(&sets, &beta, &kappa, &x, &anchor).unwrap();
        prop1.record(r.slack);

        let active: BTreeSet<usize> = crate::operator::active_indices(&beta);
        let index_set: BTreeSet<usize> = if active.is_empty() || rng.gen_bool(0.3) {
            (1..=n).collect()
        } else {
            active
        };
        let r = thm1_slack_scaled(&sets, &beta, &index_set, &x, &anchor, nu_scale).unwrap();
        thm1.record(r.slack);

        if beta.sum() > 0.0 {
            let r = eq3_slack(&sets, &beta, &x, &anchor).unwrap();
            eq3.record(r.eq3.slack);
        }

        let beta_tilde = random_beta(&mut rng, n);
        let r = perturb_step_gap(&sets, &beta, &beta_tilde, &x).unwrap();
        perturb.record(r.slack);

        let y = random_point_in_ball(&mut rng, d, 10.0);
        for set in &sets {
            firm.record(firm_nonexpansive_gap(set, &x, &y).unwrap());
        }

        // The split bound at the proof's kappa must be at least as strong
        // as the per-index bound.
        let i = rng.gen_range(1..=n);
        let kappa_i = proof_kappa(&beta, i);
        let split = prop1_slack(&sets, &beta, &kappa_i, &x, &anchor).unwrap();
        let per_index = thm1_slack(&sets, &beta, &BTreeSet::from([i]), &x, &anchor).unwrap();
        if split.vacuous {
            substitution.record(f64::INFINITY);
        } else {
            substitution.record(per_index.slack - split.slack);
        }
    }

    SweepReport {
        trials: opts.trials,
        seed: opts.seed,
        families: vec![prop1, thm1, eq3, perturb, firm, substitution],
    }
}
