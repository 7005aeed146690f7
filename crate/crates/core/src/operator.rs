//! The relaxed-averaged projection operator and its convergence coefficients.
//!
//! For weights `beta = (beta_1, ..., beta_N)` with `beta_i >= 0` and
//! `sum beta_i <= 2`, the operator applied to a family `C_1, ..., C_N` is
//!
//! ```text
//! Q_beta(x) = x - sum_j beta_j (x - P_{C_j}(x))
//! ```
//!
//! which is the weighted average of relaxed projections
//! `(1 - alpha_j) I + alpha_j P_{C_j}` with `beta_j = lambda_j alpha_j`.
//! One application costs one projection per set.
//!
//! Two per-index coefficients govern the descent of `|x - c|^2` for any
//! `c` in the intersection (`s = sum beta_k`):
//!
//! ```text
//! nu_i = 2 beta_i (2 - s) / (beta_i + 2 - s)      mu_i = 2 beta_i (2 - s)
//! ```
//!
//! `nu_i` comes out of a sharper splitting and is the quantity whose
//! divergence across iterations drives convergence; `mu_i` is the classical
//! coefficient kept for comparison. Note `nu_i <= mu_i` holds exactly when
//! `beta_i + 2 - s >= 1` and can fail otherwise.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, SetSpec};

/// Slack allowed on the weight-sum bound `sum beta_i <= 2`.
pub const BETA_SUM_TOL: f64 = 1e-12;

/// Nonnegative relaxation weights with total at most 2.
///
/// Construction validates eagerly; a rejected vector would otherwise produce
/// an expansive operator and silent divergence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BetaVector(Vec<f64>);

impl BetaVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("weight list is empty".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight {i} is {w}; weights must be finite and nonnegative"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum > 2.0 + BETA_SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, exceeding the admissible total 2"
            )));
        }
        Ok(BetaVector(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Total weight `s = sum beta_k`.
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl TryFrom<Vec<f64>> for BetaVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        BetaVector::new(v)
    }
}

impl From<BetaVector> for Vec<f64> {
    fn from(b: BetaVector) -> Vec<f64> {
        b.0
    }
}

/// Relaxation parameters `alpha_i` in `[0,2]` and average weights
/// `lambda_i` on the simplex with `lambda_i alpha_i = beta_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaLambda {
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// Per-index descent coefficients for one weight vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientRow {
    /// Total weight `s = sum beta_k`.
    pub s: f64,
    /// Sharp coefficients `nu_i`; zero for inactive indices and at `s = 2`.
    pub nu: Vec<f64>,
    /// Classical coefficients `mu_i = 2 beta_i (2 - s)`.
    pub mu: Vec<f64>,
}

impl CoefficientRow {
    /// Smallest `nu_i` over active indices; 0 when no index is active.
    pub fn nu_min_active(&self, beta: &BetaVector) -> f64 {
        min_over_active(beta, &self.nu)
    }

    /// Smallest `mu_i` over active indices; 0 when no index is active.
    pub fn mu_min_active(&self, beta: &BetaVector) -> f64 {
        min_over_active(beta, &self.mu)
    }
}

fn min_over_active(beta: &BetaVector, values: &[f64]) -> f64 {
    let m = beta
        .weights()
        .iter()
        .zip(values)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    if m.is_finite() {
        m
    } else {
        0.0
    }
}

/// One application of the weighted average of relaxed projections.
pub fn apply_q(beta: &BetaVector, sets: &[SetSpec], x: &Point) -> Result<Point> {
    if sets.len() != beta.len() {
        return Err(Error::InvalidConfig(format!(
            "{} weights for {} sets",
            beta.len(),
            sets.len()
        )));
    }
    let mut out = x.clone();
    for (w, set) in beta.weights().iter().zip(sets) {
        if *w == 0.0 {
            continue;
        }
        let p = set.project(x)?;
        out = out.sub(&x.sub(&p).scale(*w));
    }
    Ok(out)
}

/// Descent coefficients `s`, `nu_i`, `mu_i` for a weight vector.
///
/// `nu_i` is defined as 0 for inactive indices; at the boundary `s = 2`
/// both coefficient families vanish.
pub fn coefficients(beta: &BetaVector) -> CoefficientRow {
    let s = beta.sum();
    let slack = (2.0 - s).max(0.0);
    let nu = beta
        .weights()
        .iter()
        .map(|&b| nu_single(b, slack))
        .collect();
    let mu = beta.weights().iter().map(|&b| 2.0 * b * slack).collect();
    CoefficientRow { s, nu, mu }
}

/// `nu` for a single weight given the slack `2 - s` (clamped at 0).
pub(crate) fn nu_single(beta_i: f64, slack: f64) -> f64 {
    if beta_i <= 0.0 {
        return 0.0;
    }
    2.0 * beta_i * slack / (beta_i + slack)
}

/// Indices `i` (1-based) with `beta_i > 0`.
pub fn active_indices(beta: &BetaVector) -> BTreeSet<usize> {
    beta.weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Split weights into relaxation parameters and average weights.
///
/// With `s = sum beta_k > 0` this uses `alpha_i = s`, `lambda_i = beta_i / s`;
/// the all-zero vector maps to `alpha_i = 0`, `lambda_i = 1/N`.
pub fn decompose(beta: &BetaVector) -> AlphaLambda {
    let s = beta.sum();
    let n = beta.len();
    if s > 0.0 {
        AlphaLambda {
            alphas: vec![s; n],
            lambdas: beta.weights().iter().map(|b| b / s).collect(),
        }
    } else {
        AlphaLambda {
            alphas: vec![0.0; n],
            lambdas: vec![1.0 / n as f64; n],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn beta(w: &[f64]) -> BetaVector {
        BetaVector::new(w.to_vec()).unwrap()
    }

    fn two_halfspaces() -> Vec<SetSpec> {
        vec![
            SetSpec::HalfSpace {
                a: pt(&[1.0, 0.0]),
                b: 0.0,
            },
            SetSpec::HalfSpace {
                a: pt(&[0.0, 1.0]),
                b: 0.0,
            },
        ]
    }

    #[test]
    fn beta_vector_rejects_bad_weights() {
        assert!(BetaVector::new(vec![-0.1, 0.5]).is_err());
        assert!(BetaVector::new(vec![1.5, 0.6]).is_err());
        assert!(BetaVector::new(vec![f64::NAN]).is_err());
        assert!(BetaVector::new(vec![]).is_err());
        assert!(BetaVector::new(vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn apply_q_is_identity_for_zero_weights() {
        let x = pt(&[2.0, 2.0]);
        let q = apply_q(&beta(&[0.0, 0.0]), &two_halfspaces(), &x).unwrap();
        assert_eq!(q, x);
    }

    #[test]
    fn apply_q_halves_the_corner() {
        let q = apply_q(&beta(&[0.5, 0.5]), &two_halfspaces(), &pt(&[2.0, 2.0])).unwrap();
        assert_eq!(q, pt(&[1.0, 1.0]));
    }

    #[test]
    fn apply_q_with_unit_weights_lands_in_intersection() {
        let q = apply_q(&beta(&[1.0, 1.0]), &two_halfspaces(), &pt(&[2.0, 2.0])).unwrap();
        assert_eq!(q, pt(&[0.0, 0.0]));
    }

    #[test]
    fn apply_q_rejects_length_mismatch() {
        let r = apply_q(&beta(&[0.5]), &two_halfspaces(), &pt(&[1.0, 1.0]));
        assert!(r.is_err());
    }

    #[test]
    fn coefficients_match_hand_evaluation() {
        let row = coefficients(&beta(&[0.5, 1.0]));
        assert!((row.s - 1.5).abs() < 1e-15);
        assert!((row.nu[0] - 0.5).abs() < 1e-15);
        assert!((row.nu[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((row.mu[0] - 0.5).abs() < 1e-15);
        assert!((row.mu[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coefficients_vanish_at_boundary_sum() {
        let row = coefficients(&beta(&[1.0, 1.0]));
        assert_eq!(row.s, 2.0);
        assert_eq!(row.nu, vec![0.0, 0.0]);
        assert_eq!(row.mu, vec![0.0, 0.0]);
    }

    #[test]
    fn coefficients_closed_form_along_harmonic_weights() {
        // beta = (1/n, 2 - 2/n) gives nu_1 = 1/n and mu_1 = 2/n^2 exactly.
        for n in 1..50u32 {
            let b1 = 1.0 / n as f64;
            let row = coefficients(&beta(&[b1, 2.0 - 2.0 / n as f64]));
            assert!((row.nu[0] - b1).abs() < 1e-14, "n = {n}");
            assert!((row.mu[0] - 2.0 / (n as f64 * n as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn nu_can_exceed_mu_when_denominator_below_one() {
        // beta_1 + 2 - s = 0.15 < 1 here, so the usual ordering flips.
        let row = coefficients(&beta(&[0.1, 1.85]));
        assert!(row.nu[0] > row.mu[0]);
        // On the tame side the ordering holds.
        let row = coefficients(&beta(&[0.5, 1.0]));
        for i in 0..2 {
            assert!(row.nu[i] <= row.mu[i] + 1e-15);
        }
    }

    #[test]
    fn ordering_holds_whenever_condition_met() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=5);
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let target = rng.gen_range(0.0..2.0);
            let b = beta(
                &raw.iter()
                    .map(|r| if total > 0.0 { r * target / total } else { 0.0 })
                    .collect::<Vec<_>>(),
            );
            let row = coefficients(&b);
            for i in 0..n {
                if b.get(i) + 2.0 - row.s >= 1.0 {
                    assert!(row.nu[i] <= row.mu[i] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn active_indices_examples() {
        assert_eq!(
            active_indices(&beta(&[1.0, 0.0])),
            BTreeSet::from([1usize])
        );
        assert!(active_indices(&beta(&[0.0, 0.0])).is_empty());
        assert_eq!(
            active_indices(&beta(&[0.25, 1.5])),
            BTreeSet::from([1usize, 2])
        );
    }

    #[test]
    fn decompose_reconstructs_weights() {
        let b = beta(&[0.5, 1.0]);
        let al = decompose(&b);
        assert_eq!(al.alphas, vec![1.5, 1.5]);
        assert!((al.lambdas[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((al.lambdas[1] - 2.0 / 3.0).abs() < 1e-15);
        let lsum: f64 = al.lambdas.iter().sum();
        assert!((lsum - 1.0).abs() < 1e-12);
        for i in 0..2 {
            assert!((al.lambdas[i] * al.alphas[i] - b.get(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_zero_vector_spreads_lambdas() {
        let al = decompose(&beta(&[0.0, 0.0]));
        assert_eq!(al.alphas, vec![0.0, 0.0]);
        assert_eq!(al.lambdas, vec![0.5, 0.5]);
    }

    #[test]
    fn decompose_full_relaxation() {
        let al = decompose(&beta(&[2.0, 0.0]));
        assert_eq!(al.alphas, vec![2.0, 2.0]);
        assert_eq!(al.lambdas, vec![1.0, 0.0]);
    }

    #[test]
    fn operator_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sets = two_halfspaces();
        for _ in 0..500 {
            let raw: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let target = rng.gen_range(0.0..=2.0);
            let b = beta(
                &raw.iter()
                    .map(|r| r * target / total.max(1e-12))
                    .collect::<Vec<_>>(),
            );
            let x = pt(&[rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]);
            let y = pt(&[rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]);
            let qx = apply_q(&b, &sets, &x).unwrap();
            let qy = apply_q(&b, &sets, &y).unwrap();
            assert!(qx.dist(&qy) <= x.dist(&y) + 1e-10);
        }
    }

    #[test]
    fn intersection_points_are_fixed() {
        let sets = two_halfspaces();
        let c = pt(&[-1.0, -2.0]);
        let q = apply_q(&beta(&[0.7, 1.1]), &sets, &c).unwrap();
        assert!(q.dist(&c) <= 1e-12);
    }
}
