//! Numerical verification of the descent inequalities, an independent
//! brute-force projection oracle, and random feasible-instance generation.
//!
//! Each inequality check returns a [`SlackReport`] oriented so that a
//! nonnegative slack means the inequality holds. The checks evaluate both
//! sides directly from projections and inner products; nothing is shared
//! with the derivations they are meant to confirm.

mod instance;
mod oracle;
mod sweep;

pub use instance::{feasible_point, random_feasible_instance};
pub use oracle::brute_force_project;
pub use sweep::{run_sweeps, FamilyStat, SweepOptions, SweepReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, SetSpec};
use crate::operator::{self, BetaVector};

/// Tolerance on `sum kappa_j = 1`.
pub const KAPPA_SUM_TOL: f64 = 1e-12;

/// Two sides of an inequality and their difference.
///
/// `slack = rhs - lhs`, so the inequality `lhs <= rhs` holds exactly when
/// the slack is nonnegative. A vacuous bound (right side degenerates to
/// plus infinity) is flagged and carries an infinite slack.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlackReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub vacuous: bool,
}

impl SlackReport {
    fn new(lhs: f64, rhs: f64) -> SlackReport {
        SlackReport {
            lhs,
            rhs,
            slack: rhs - lhs,
            vacuous: false,
        }
    }

    fn vacuous(lhs: f64) -> SlackReport {
        SlackReport {
            lhs,
            rhs: f64::INFINITY,
            slack: f64::INFINITY,
            vacuous: true,
        }
    }
}

fn check_kappa(kappa: &[f64], n: usize) -> Result<()> {
    if kappa.len() != n {
        return Err(Error::InvalidKappa(format!(
            "{} entries for {} sets",
            kappa.len(),
            n
        )));
    }
    if kappa.iter().any(|k| !k.is_finite() || *k < 0.0) {
        return Err(Error::InvalidKappa("entries must be nonnegative".into()));
    }
    let sum: f64 = kappa.iter().sum();
    if (sum - 1.0).abs() > KAPPA_SUM_TOL {
        return Err(Error::InvalidKappa(format!(
            "entries sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Squared-norm descent bound for one operator application, split by an
/// arbitrary convex combination `kappa`:
///
/// ```text
/// |Q x - c|^2  <=  |x - c|^2 - sum_j (2 - beta_j/kappa_j) beta_j |x - P_j x|^2
/// ```
///
/// The ratio `beta_j/kappa_j` is read as 0 whenever `beta_j = 0`; for
/// `beta_j > 0` with `kappa_j = 0` it is infinite and the bound vacuous.
/// Requires `c` to lie in every set.
pub fn prop1_slack(
    sets: &[SetSpec],
    beta: &BetaVector,
    kappa: &[f64],
    x: &Point,
    c: &Point,
) -> Result<SlackReport> {
    check_kappa(kappa, beta.len())?;
    let qx = operator::apply_q(beta, sets, x)?;
    let lhs = sq(qx.dist(c));
    let mut subtracted = 0.0;
    for (j, set) in sets.iter().enumerate() {
        let b = beta.get(j);
        if b == 0.0 {
            continue;
        }
        if kappa[j] == 0.0 {
            return Ok(SlackReport::vacuous(lhs));
        }
        let res_sq = sq(x.dist(&set.project(x)?));
        subtracted += (2.0 - b / kappa[j]) * b * res_sq;
    }
    Ok(SlackReport::new(lhs, sq(x.dist(c)) - subtracted))
}

/// The per-index descent bound over an index set `I` (1-based):
///
/// ```text
/// |Q x - c|^2  <=  |x - c|^2 - min_{i in I} nu_i * max_{i in I} d^2(x, C_i)
/// ```
pub fn thm1_slack(
    sets: &[SetSpec],
    beta: &BetaVector,
    index_set: &std::collections::BTreeSet<usize>,
    x: &Point,
    c: &Point,
) -> Result<SlackReport> {
    thm1_slack_scaled(sets, beta, index_set, x, c, 1.0)
}

pub(crate) fn thm1_slack_scaled(
    sets: &[SetSpec],
    beta: &BetaVector,
    index_set: &std::collections::BTreeSet<usize>,
    x: &Point,
    c: &Point,
    nu_scale: f64,
) -> Result<SlackReport> {
    if index_set.is_empty() {
        return Err(Error::InvalidConfig("index set is empty".into()));
    }
    if let Some(&bad) = index_set.iter().find(|&&i| i == 0 || i > beta.len()) {
        return Err(Error::InvalidConfig(format!(
            "index {bad} outside 1..={}",
            beta.len()
        )));
    }
    let row = operator::coefficients(beta);
    let nu_min = index_set
        .iter()
        .map(|&i| row.nu[i - 1] * nu_scale)
        .fold(f64::INFINITY, f64::min);
    let mut dmax_sq: f64 = 0.0;
    for &i in index_set {
        dmax_sq = dmax_sq.max(sq(sets[i - 1].distance(x)?));
    }
    let qx = operator::apply_q(beta, sets, x)?;
    Ok(SlackReport::new(
        sq(qx.dist(c)),
        sq(x.dist(c)) - nu_min * dmax_sq,
    ))
}

/// The `kappa` choice that reduces the split bound to the per-index bound
/// for index `i` (1-based): `kappa_j = beta_j / 2` off `i`, remainder on `i`.
pub fn proof_kappa(beta: &BetaVector, i: usize) -> Vec<f64> {
    let mut kappa: Vec<f64> = beta.weights().iter().map(|b| b / 2.0).collect();
    let off: f64 = kappa.iter().sum::<f64>() - kappa[i - 1];
    kappa[i - 1] = 1.0 - off;
    kappa
}

/// The classical descent bound together with its cross-check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Eq3Report {
    /// Slack of `|Qx - c|^2 <= |x - c|^2 - (2 - s) sum_j beta_j |x - P_j x|^2`.
    pub eq3: SlackReport,
    /// The split bound at `kappa_j = beta_j / s`; must agree with `eq3`.
    pub prop1_at_proportional_kappa: SlackReport,
}

/// Classical (weight-proportional) descent bound, cross-checked against
/// the split bound at `kappa_j = beta_j / s`. Requires `s > 0`.
pub fn eq3_slack(
    sets: &[SetSpec],
    beta: &BetaVector,
    x: &Point,
    c: &Point,
) -> Result<Eq3Report> {
    let s = beta.sum();
    if s <= 0.0 {
        return Err(Error::InvalidWeights(
            "total weight must be positive".into(),
        ));
    }
    let qx = operator::apply_q(beta, sets, x)?;
    let mut subtracted = 0.0;
    for (j, set) in sets.iter().enumerate() {
        let b = beta.get(j);
        if b == 0.0 {
            continue;
        }
        subtracted += b * sq(x.dist(&set.project(x)?));
    }
    let eq3 = SlackReport::new(sq(qx.dist(c)), sq(x.dist(c)) - (2.0 - s) * subtracted);
    let kappa: Vec<f64> = beta.weights().iter().map(|b| b / s).collect();
    let cross = prop1_slack(sets, beta, &kappa, x, c)?;
    Ok(Eq3Report {
        eq3,
        prop1_at_proportional_kappa: cross,
    })
}

/// Computable half of the perturbation step bound: applying two weight
/// vectors to the same point moves the results apart by at most
/// `sum_j |beta_j - beta'_j| d(y, C_j)`.
pub fn perturb_step_gap(
    sets: &[SetSpec],
    beta: &BetaVector,
    beta_tilde: &BetaVector,
    y: &Point,
) -> Result<SlackReport> {
    if beta.len() != beta_tilde.len() {
        return Err(Error::InvalidConfig(format!(
            "weight lengths differ: {} vs {}",
            beta.len(),
            beta_tilde.len()
        )));
    }
    let qy = operator::apply_q(beta, sets, y)?;
    let qty = operator::apply_q(beta_tilde, sets, y)?;
    let mut bound = 0.0;
    for (j, set) in sets.iter().enumerate() {
        let db = (beta.get(j) - beta_tilde.get(j)).abs();
        if db > 0.0 {
            bound += db * set.distance(y)?;
        }
    }
    Ok(SlackReport::new(qy.dist(&qty), bound))
}

/// Firm nonexpansiveness gap `<Px - Py, x - y> - |Px - Py|^2`; nonnegative
/// up to rounding for every projection.
pub fn firm_nonexpansive_gap(set: &SetSpec, x: &Point, y: &Point) -> Result<f64> {
    let px = set.project(x)?;
    let py = set.project(y)?;
    let diff = px.sub(&py);
    Ok(diff.dot(&x.sub(y)) - diff.dot(&diff))
}

fn sq(v: f64) -> f64 {
    v * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn beta(w: &[f64]) -> BetaVector {
        BetaVector::new(w.to_vec()).unwrap()
    }

    /// Two copies of the ray `{t <= 0}` on the line.
    fn line_pair() -> Vec<SetSpec> {
        let h = SetSpec::HalfSpace {
            a: pt(&[1.0]),
            b: 0.0,
        };
        vec![h.clone(), h]
    }

    #[test]
    fn prop1_is_tight_on_the_line_pair() {
        let r = prop1_slack(
            &line_pair(),
            &beta(&[0.5, 0.5]),
            &[0.5, 0.5],
            &pt(&[1.0]),
            &pt(&[0.0]),
        )
        .unwrap();
        assert!(!r.vacuous);
        assert!(r.slack.abs() < 1e-14, "slack = {}", r.slack);
    }

    #[test]
    fn prop1_zero_weights_give_zero_slack() {
        let r = prop1_slack(
            &line_pair(),
            &beta(&[0.0, 0.0]),
            &[0.5, 0.5],
            &pt(&[1.0]),
            &pt(&[0.0]),
        )
        .unwrap();
        assert_eq!(r.slack, 0.0);
    }

    #[test]
    fn prop1_flags_vacuous_bounds() {
        let r = prop1_slack(
            &line_pair(),
            &beta(&[0.5, 0.0]),
            &[0.0, 1.0],
            &pt(&[1.0]),
            &pt(&[0.0]),
        )
        .unwrap();
        assert!(r.vacuous);
        assert_eq!(r.slack, f64::INFINITY);
    }

    #[test]
    fn prop1_rejects_bad_kappa() {
        let r = prop1_slack(
            &line_pair(),
            &beta(&[0.5, 0.5]),
            &[0.5, 0.6],
            &pt(&[1.0]),
            &pt(&[0.0]),
        );
        assert!(matches!(r, Err(Error::InvalidKappa(_))));
    }

    #[test]
    fn thm1_slack_on_the_line_pair() {
        let r = thm1_slack(
            &line_pair(),
            &beta(&[0.5, 0.5]),
            &BTreeSet::from([1, 2]),
            &pt(&[1.0]),
            &pt(&[0.0]),
        )
        .unwrap();
        assert!((r.slack - 1.0 / 3.0).abs() < 1e-14, "slack = {}", r.slack);
    }

    #[test]
    fn thm1_slack_zero_at_fixed_point() {
        let r = thm1_slack(
            &line_pair(),
            &beta(&[0.5, 0.5]),
            &BTreeSet::from([1, 2]),
            &pt(&[0.0]),
            &pt(&[0.0]),
        )
        .unwrap();
        assert_eq!(r.slack, 0.0);
    }

    #[test]
    fn thm1_rejects_empty_index_set() {
        let r = thm1_slack(
            &line_pair(),
            &beta(&[0.5, 0.5]),
            &BTreeSet::new(),
            &pt(&[1.0]),
            &pt(&[0.0]),
        );
        assert!(r.is_err());
    }

    #[test]
    fn eq3_agrees_with_proportional_kappa() {
        let r = eq3_slack(
            &line_pair(),
            &beta(&[0.5, 0.5]),
            &pt(&[1.0]),
            &pt(&[0.0]),
        )
        .unwrap();
        assert!(r.eq3.slack.abs() < 1e-14);
        assert!((r.eq3.slack - r.prop1_at_proportional_kappa.slack).abs() < 1e-12);
    }

    #[test]
    fn eq3_at_boundary_sum_is_a_pure_reflection() {
        let r = eq3_slack(
            &line_pair(),
            &beta(&[1.0, 1.0]),
            &pt(&[1.0]),
            &pt(&[0.0]),
        )
        .unwrap();
        // Subtracted term vanishes and |Qx| = |x|.
        assert!(r.eq3.slack.abs() < 1e-14);
    }

    #[test]
    fn eq3_rejects_zero_total_weight() {
        let r = eq3_slack(&line_pair(), &beta(&[0.0, 0.0]), &pt(&[1.0]), &pt(&[0.0]));
        assert!(r.is_err());
    }

    #[test]
    fn perturb_gap_is_tight_on_the_line_pair() {
        let r = perturb_step_gap(
            &line_pair(),
            &beta(&[0.5, 0.5]),
            &beta(&[0.5, 0.3]),
            &pt(&[1.0]),
        )
        .unwrap();
        assert!((r.lhs - 0.2).abs() < 1e-15);
        assert!((r.rhs - 0.2).abs() < 1e-15);
        assert!(r.slack.abs() < 1e-15);
    }

    #[test]
    fn perturb_gap_zero_for_equal_weights() {
        let r = perturb_step_gap(
            &line_pair(),
            &beta(&[0.7, 0.2]),
            &beta(&[0.7, 0.2]),
            &pt(&[3.0]),
        )
        .unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.slack, 0.0);
    }

    #[test]
    fn firm_gap_examples() {
        let ball = SetSpec::Ball {
            center: pt(&[0.0, 0.0]),
            radius: 1.0,
        };
        let g = firm_nonexpansive_gap(&ball, &pt(&[3.0, 0.0]), &pt(&[0.0, 3.0])).unwrap();
        assert!((g - 4.0).abs() < 1e-14);
        let g = firm_nonexpansive_gap(&ball, &pt(&[2.0, 2.0]), &pt(&[2.0, 2.0])).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn proof_kappa_reduces_to_per_index_bound() {
        let sets = line_pair();
        let b = beta(&[0.6, 0.9]);
        let x = pt(&[2.0]);
        let c = pt(&[-1.0]);
        for i in 1..=2 {
            let kappa = proof_kappa(&b, i);
            assert!((kappa.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let split = prop1_slack(&sets, &b, &kappa, &x, &c).unwrap();
            let per_index = thm1_slack(&sets, &b, &BTreeSet::from([i]), &x, &c).unwrap();
            assert!(
                split.slack <= per_index.slack + 1e-10,
                "i = {i}: {} vs {}",
                split.slack,
                per_index.slack
            );
        }
    }
}
