//! Closed convex sets in `R^d` with exact projections.
//!
//! Every supported set has a closed-form projector, a membership test and a
//! distance function. Supported variants:
//!
//! - half-space `{x : <a,x> <= b}`
//! - hyperplane `{x : <a,x> = b}`
//! - Euclidean ball `{x : |x - c| <= r}`
//! - axis-aligned box `{x : lo <= x <= hi}` (componentwise)
//! - probability simplex `{x : x_i >= 0, sum x_i = 1}`
//!
//! All values are plain `f64`; membership uses an absolute per-constraint
//! tolerance. Types are immutable and all operations are pure functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute membership tolerance used for projector self-checks.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A vector in `R^d`, `d >= 1`, with finite components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("dimension must be at least 1".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite component {c}")));
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Euclidean distance to `other`.
    pub fn dist(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn scale(&self, t: f64) -> Point {
        Point(self.0.iter().map(|a| a * t).collect())
    }

    fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Description of a closed convex set with a closed-form projector.
///
/// The JSON encoding is tagged by `type`, e.g.
/// `{"type":"halfspace","a":[1.0,0.0],"b":0.0}` or `{"type":"simplex"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SetSpec {
    HalfSpace { a: Point, b: f64 },
    Hyperplane { a: Point, b: f64 },
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    Simplex,
}

impl SetSpec {
    /// Check the structural invariants of the variant payload.
    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::HalfSpace { a, b } | SetSpec::Hyperplane { a, b } => {
                if a.norm() == 0.0 {
                    return Err(Error::InvalidSet("normal vector must be nonzero".into()));
                }
                if !b.is_finite() {
                    return Err(Error::InvalidSet("offset must be finite".into()));
                }
            }
            SetSpec::Ball { radius, .. } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidSet(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
            }
            SetSpec::Box { lo, hi } => {
                if lo.dim() != hi.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: lo.dim(),
                        got: hi.dim(),
                    });
                }
                for i in 0..lo.dim() {
                    if lo[i] > hi[i] {
                        return Err(Error::InvalidSet(format!(
                            "box bounds crossed in coordinate {i}: {} > {}",
                            lo[i], hi[i]
                        )));
                    }
                }
            }
            SetSpec::Simplex => {}
        }
        Ok(())
    }

    /// Ambient dimension, or `None` for variants valid in any dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            SetSpec::HalfSpace { a, .. } | SetSpec::Hyperplane { a, .. } => Some(a.dim()),
            SetSpec::Ball { center, .. } => Some(center.dim()),
            SetSpec::Box { lo, .. } => Some(lo.dim()),
            SetSpec::Simplex => None,
        }
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if let Some(d) = self.dim() {
            x.check_dim(d)?;
        }
        Ok(())
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        let p = match self {
            SetSpec::HalfSpace { a, b } => {
                let viol = a.dot(x) - b;
                if viol <= 0.0 {
                    x.clone()
                } else {
                    x.sub(&a.scale(viol / a.dot(a)))
                }
            }
            SetSpec::Hyperplane { a, b } => x.sub(&a.scale((a.dot(x) - b) / a.dot(a))),
            SetSpec::Ball { center, radius } => {
                let rel = x.sub(center);
                let n = rel.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    center.add(&rel.scale(radius / n))
                }
            }
            SetSpec::Box { lo, hi } => Point(
                (0..lo.dim())
                    .map(|i| x[i].clamp(lo[i], hi[i]))
                    .collect(),
            ),
            SetSpec::Simplex => project_simplex(x),
        };
        Ok(p)
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Point) -> Result<f64> {
        Ok(x.dist(&self.project(x)?))
    }

    /// Whether every defining constraint holds within the absolute slack `tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        self.check_point(x)?;
        let ok = match self {
            SetSpec::HalfSpace { a, b } => a.dot(x) - b <= tol,
            SetSpec::Hyperplane { a, b } => (a.dot(x) - b).abs() <= tol,
            SetSpec::Ball { center, radius } => x.dist(center) - radius <= tol,
            SetSpec::Box { lo, hi } => (0..lo.dim())
                .all(|i| x[i] >= lo[i] - tol && x[i] <= hi[i] + tol),
            SetSpec::Simplex => {
                let sum: f64 = x.as_slice().iter().sum();
                x.as_slice().iter().all(|&c| c >= -tol) && (sum - 1.0).abs() <= tol
            }
        };
        Ok(ok)
    }
}

/// Projection onto the probability simplex by sorting and thresholding.
///
/// Ties in the sort are harmless; the projection is unique.
fn project_simplex(x: &Point) -> Point {
    let mut sorted: Vec<f64> = x.as_slice().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        acc += u;
        let t = (acc - 1.0) / (j as f64 + 1.0);
        if u - t > 0.0 {
            theta = t;
        }
    }
    Point(
        x.as_slice()
            .iter()
            .map(|&c| (c - theta).max(0.0))
            .collect(),
    )
}

/// Validate that every set in the family is well formed and lives in `R^dim`.
pub fn check_family(sets: &[SetSpec], dim: usize) -> Result<()> {
    if sets.is_empty() {
        return Err(Error::InvalidConfig("family of sets is empty".into()));
    }
    for set in sets {
        set.validate()?;
        if let Some(d) = set.dim() {
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: d,
                });
            }
        }
    }
    Ok(())
}

/// Distances from `x` to every set of the family.
pub fn distances(sets: &[SetSpec], x: &Point) -> Result<Vec<f64>> {
    sets.iter().map(|s| s.distance(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn halfspace(a: &[f64], b: f64) -> SetSpec {
        SetSpec::HalfSpace { a: pt(a), b }
    }

    #[test]
    fn project_halfspace_interior_point_is_fixed() {
        let s = halfspace(&[1.0, 0.0], 0.0);
        let x = pt(&[-1.0, 5.0]);
        assert_eq!(s.project(&x).unwrap(), x);
    }

    #[test]
    fn project_ball_is_radial() {
        let s = SetSpec::Ball {
            center: pt(&[0.0, 0.0]),
            radius: 1.0,
        };
        let p = s.project(&pt(&[3.0, 4.0])).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15);
        assert!((p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn project_simplex_shifts_mass() {
        let p = SetSpec::Simplex.project(&pt(&[0.3, 0.2])).unwrap();
        assert!((p[0] - 0.55).abs() < 1e-15);
        assert!((p[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn project_simplex_clips_negative_coordinates() {
        let p = SetSpec::Simplex.project(&pt(&[1.5, -2.0, 0.1])).unwrap();
        let sum: f64 = p.as_slice().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p.as_slice().iter().all(|&c| c >= 0.0));
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn distance_halfspace_matches_formula() {
        let s = halfspace(&[1.0, 0.0], 0.0);
        assert_eq!(s.distance(&pt(&[2.0, 3.0])).unwrap(), 2.0);
    }

    #[test]
    fn distance_is_zero_inside() {
        let b = SetSpec::Box {
            lo: pt(&[0.0, 0.0]),
            hi: pt(&[1.0, 1.0]),
        };
        assert_eq!(b.distance(&pt(&[0.5, 0.5])).unwrap(), 0.0);
    }

    #[test]
    fn distance_ball_outside() {
        let s = SetSpec::Ball {
            center: pt(&[0.0, 0.0]),
            radius: 1.0,
        };
        assert!((s.distance(&pt(&[3.0, 4.0])).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn contains_respects_tolerance() {
        let b = SetSpec::Box {
            lo: pt(&[0.0, 0.0]),
            hi: pt(&[1.0, 1.0]),
        };
        assert!(b.contains(&pt(&[0.5, 0.5]), 0.0).unwrap());
        let h = SetSpec::Hyperplane {
            a: pt(&[1.0, 0.0]),
            b: 0.0,
        };
        assert!(h.contains(&pt(&[1e-13, 1.0]), 1e-12).unwrap());
        let hs = halfspace(&[1.0, 0.0], 0.0);
        assert!(!hs.contains(&pt(&[0.1, 0.0]), 1e-12).unwrap());
    }

    #[test]
    fn degenerate_box_clamps_to_point() {
        let b = SetSpec::Box {
            lo: pt(&[1.0, 0.0]),
            hi: pt(&[1.0, 2.0]),
        };
        let p = b.project(&pt(&[5.0, -3.0])).unwrap();
        assert_eq!(p, pt(&[1.0, 0.0]));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = halfspace(&[1.0, 0.0], 0.0);
        assert!(matches!(
            s.project(&pt(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn crossed_box_bounds_rejected() {
        let b = SetSpec::Box {
            lo: pt(&[1.0]),
            hi: pt(&[0.0]),
        };
        assert!(b.validate().is_err());
    }

    fn random_set(rng: &mut ChaCha8Rng, d: usize) -> SetSpec {
        match rng.gen_range(0..5) {
            0 => {
                let a = pt(&(0..d).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
                if a.norm() == 0.0 {
                    return random_set(rng, d);
                }
                SetSpec::HalfSpace {
                    a,
                    b: rng.gen_range(-3.0..3.0),
                }
            }
            1 => {
                let a = pt(&(0..d)
                    .map(|_| rng.gen_range(0.1..2.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 })
                    .collect::<Vec<_>>());
                SetSpec::Hyperplane {
                    a,
                    b: rng.gen_range(-3.0..3.0),
                }
            }
            2 => SetSpec::Ball {
                center: pt(&(0..d).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>()),
                radius: rng.gen_range(0.2..3.0),
            },
            3 => {
                let lo: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..0.0)).collect();
                let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..3.0)).collect();
                SetSpec::Box {
                    lo: pt(&lo),
                    hi: pt(&hi),
                }
            }
            _ => SetSpec::Simplex,
        }
    }

    fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Point {
        pt(&(0..d).map(|_| rng.gen_range(-5.0..5.0)).collect::<Vec<_>>())
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let d = rng.gen_range(1..=4);
            let s = random_set(&mut rng, d);
            let x = random_point(&mut rng, d);
            let p1 = s.project(&x).unwrap();
            let p2 = s.project(&p1).unwrap();
            assert!(p1.dist(&p2) <= 1e-12, "{s:?} at {x:?}");
        }
    }

    #[test]
    fn projection_lands_in_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let d = rng.gen_range(1..=4);
            let s = random_set(&mut rng, d);
            let x = random_point(&mut rng, d);
            let p = s.project(&x).unwrap();
            assert!(s.contains(&p, 1e-12).unwrap(), "{s:?} proj {p:?}");
        }
    }

    #[test]
    fn projection_is_firmly_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let d = rng.gen_range(1..=4);
            let s = random_set(&mut rng, d);
            let x = random_point(&mut rng, d);
            let y = random_point(&mut rng, d);
            let px = s.project(&x).unwrap();
            let py = s.project(&y).unwrap();
            let diff = px.sub(&py);
            let cross = diff.dot(&x.sub(&y));
            assert!(diff.dot(&diff) <= cross + 1e-10, "{s:?}");
        }
    }

    #[test]
    fn variational_inequality_holds_for_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..300 {
            let d = rng.gen_range(1..=4);
            let s = random_set(&mut rng, d);
            let x = random_point(&mut rng, d);
            let px = s.project(&x).unwrap();
            // Sample a member via a second projection; lands in the set.
            let z = s.project(&random_point(&mut rng, d)).unwrap();
            let lhs = z.sub(&px).dot(&x.sub(&px));
            assert!(lhs <= 1e-10, "{s:?}: <z - Px, x - Px> = {lhs}");
        }
    }

    #[test]
    fn setspec_json_round_trip() {
        let sets = vec![
            halfspace(&[1.0, 0.0], 0.5),
            SetSpec::Hyperplane {
                a: pt(&[0.0, 2.0]),
                b: 1.0,
            },
            SetSpec::Ball {
                center: pt(&[1.0, -1.0]),
                radius: 2.0,
            },
            SetSpec::Box {
                lo: pt(&[0.0, 0.0]),
                hi: pt(&[1.0, 1.0]),
            },
            SetSpec::Simplex,
        ];
        for s in sets {
            let json = serde_json::to_string(&s).unwrap();
            let back: SetSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(s, back);
        }
        let parsed: SetSpec =
            serde_json::from_str(r#"{"type":"halfspace","a":[1.0,0.0],"b":0.0}"#).unwrap();
        assert_eq!(parsed, halfspace(&[1.0, 0.0], 0.0));
        let parsed: SetSpec = serde_json::from_str(r#"{"type":"simplex"}"#).unwrap();
        assert_eq!(parsed, SetSpec::Simplex);
    }
}
