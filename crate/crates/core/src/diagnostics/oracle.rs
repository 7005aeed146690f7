//! Membership-only projection oracle.
//!
//! Finds the nearest feasible point using nothing but the defining
//! constraints of the set: rays from the query point are probed for their
//! first feasible parameter (a one-dimensional bisection, valid because
//! the constraint violation is convex along any line), and the ray
//! direction is then optimized over the sphere. The hit distance is
//! quasiconvex in the direction — its sublevel sets are the directions
//! hitting the intersection of the set with a ball around the query,
//! which is convex — so a coarse angular scan followed by golden-section
//! refinement finds the minimizer.
//!
//! The oracle shares no code with the closed-form projectors; it is the
//! independent side of every projector equivalence check.

use crate::error::{Error, Result};
use crate::geometry::{Point, SetSpec};

/// Largest amount by which `p` violates any defining constraint of the
/// set, scaled so that the value is comparable to a Euclidean distance;
/// nonpositive exactly on the set. Convex along every line.
fn violation(set: &SetSpec, p: &Point) -> f64 {
    match set {
        SetSpec::HalfSpace { a, b } => (a.dot(p) - b) / a.norm(),
        SetSpec::Hyperplane { a, b } => (a.dot(p) - b).abs() / a.norm(),
        SetSpec::Ball { center, radius } => p.dist(center) - radius,
        SetSpec::Box { lo, hi } => (0..lo.dim())
            .map(|i| (lo[i] - p[i]).max(p[i] - hi[i]))
            .fold(f64::NEG_INFINITY, f64::max),
        SetSpec::Simplex => {
            let d = p.dim() as f64;
            let neg = p
                .as_slice()
                .iter()
                .map(|&c| -c)
                .fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = p.as_slice().iter().sum();
            neg.max((sum - 1.0).abs() / d.sqrt())
        }
    }
}

/// Rough radius of the region the set occupies around the origin.
fn extent(set: &SetSpec) -> f64 {
    match set {
        SetSpec::HalfSpace { a, b } | SetSpec::Hyperplane { a, b } => b.abs() / a.norm(),
        SetSpec::Ball { center, radius } => center.norm() + radius,
        SetSpec::Box { lo, hi } => lo.norm().max(hi.norm()),
        SetSpec::Simplex => 1.0,
    }
}

struct RayProbe {
    /// First parameter with nonpositive violation, if the ray hits.
    hit: Option<f64>,
    /// Smallest violation seen along the ray.
    min_violation: f64,
    /// Parameter of the smallest violation (the hit parameter if any).
    t_best: f64,
}

/// Probe the ray `x + t u`, `t` in `[0, t_max]`.
fn probe_ray(set: &SetSpec, x: &Point, u: &Point, t_max: f64, t_tol: f64) -> RayProbe {
    let eval = |t: f64| violation(set, &x.add(&u.scale(t)));
    // Ternary search for the violation minimum (convex along the ray).
    let (mut lo, mut hi) = (0.0f64, t_max);
    while hi - lo > t_tol {
        let third = (hi - lo) / 3.0;
        if eval(lo + third) <= eval(hi - third) {
            hi -= third;
        } else {
            lo += third;
        }
    }
    let t_min = 0.5 * (lo + hi);
    let v_min = eval(t_min);
    // The violation slope along a unit ray is at most 1, so a true hit can
    // only be measured above zero by the remaining bracket width.
    let near = (hi - lo) + 1e-9 * (1.0 + t_max);
    if v_min > near {
        return RayProbe {
            hit: None,
            min_violation: v_min,
            t_best: t_min,
        };
    }
    if v_min > 0.0 {
        // Grazing contact: the minimum is the closest approach.
        return RayProbe {
            hit: Some(t_min),
            min_violation: v_min,
            t_best: t_min,
        };
    }
    // First crossing into the feasible interval.
    let (mut a, mut b) = (0.0f64, t_min);
    if eval(a) <= 0.0 {
        b = a;
    } else {
        while b - a > t_tol {
            let m = 0.5 * (a + b);
            if eval(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
    }
    RayProbe {
        hit: Some(b),
        min_violation: v_min,
        t_best: b,
    }
}

/// Ray objective for the direction search: hit distance when the ray
/// hits, a large constant plus the closest-approach violation otherwise.
fn ray_objective(set: &SetSpec, x: &Point, u: &Point, t_max: f64, t_tol: f64) -> f64 {
    let probe = probe_ray(set, x, u, t_max, t_tol);
    match probe.hit {
        Some(t) => t,
        None => 4.0 * t_max + probe.min_violation,
    }
}

fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn unit(coords: Vec<f64>) -> Point {
    let p = Point::new(coords).unwrap();
    p.scale(1.0 / p.norm())
}

/// Nearest feasible point found by direction search with per-ray
/// bisection, accurate to roughly `resolution * sqrt(d)`. Supports
/// dimensions 1 through 3.
pub fn brute_force_project(set: &SetSpec, x: &Point, resolution: f64) -> Result<Point> {
    set.validate()?;
    if let Some(d) = set.dim() {
        if d != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.dim(),
            });
        }
    }
    let d = x.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!(
            "brute-force projection supports dimension <= 3, got {d}"
        )));
    }
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    if violation(set, x) <= 0.0 {
        return Ok(x.clone());
    }

    let t_max = 2.0 * (x.norm() + extent(set)) + 1.0;
    // Comparisons near the optimal direction differ at second order in the
    // angle, so per-ray precision must sit well below the target.
    let t_tol = (resolution * resolution / (2.0 * (t_max + 1.0))).max(1e-13 * (1.0 + t_max));
    let coarse_tol = (1e-5 * (1.0 + t_max)).max(t_tol);

    match d {
        1 => {
            let mut best: Option<(f64, Point)> = None;
            for dir in [-1.0, 1.0] {
                let u = Point::new(vec![dir]).unwrap();
                if let RayProbe { hit: Some(t), .. } = probe_ray(set, x, &u, t_max, t_tol) {
                    if best.as_ref().map_or(true, |(bt, _)| t < *bt) {
                        best = Some((t, x.add(&u.scale(t))));
                    }
                }
            }
            best.map(|(_, p)| p).ok_or_else(|| {
                Error::Unsupported("no feasible point within the search region".into())
            })
        }
        2 => {
            let samples = 720usize;
            let step = std::f64::consts::TAU / samples as f64;
            let mut best = (f64::INFINITY, 0.0f64);
            for k in 0..samples {
                let theta = k as f64 * step;
                let u = unit(vec![theta.cos(), theta.sin()]);
                let val = ray_objective(set, x, &u, t_max, coarse_tol);
                if val < best.0 {
                    best = (val, theta);
                }
            }
            // The coarse values are only accurate to the coarse tolerance;
            // near the optimum the hit distance is quadratically flat, so
            // the coarse argmin can sit anywhere in a basin of width
            // sqrt(noise / distance). Bracket accordingly.
            let basin = if best.0 < 4.0 * t_max {
                (2.0 * (2.0 * coarse_tol) / best.0.max(1e-9)).sqrt()
            } else {
                0.0
            };
            let half_bracket = basin + 2.0 * step;
            let angle_tol = (resolution / (t_max + 1.0)).max(1e-12);
            let theta = golden_min(
                |th| {
                    let u = unit(vec![th.cos(), th.sin()]);
                    ray_objective(set, x, &u, t_max, t_tol)
                },
                best.1 - half_bracket,
                best.1 + half_bracket,
                angle_tol,
            );
            let u = unit(vec![theta.cos(), theta.sin()]);
            let probe = probe_ray(set, x, &u, t_max, t_tol);
            Ok(x.add(&u.scale(probe.t_best)))
        }
        _ => {
            // Coarse scan over a Fibonacci sphere, then a shrinking local
            // grid in a tangent frame around the best direction.
            let samples = 4000usize;
            let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            let mut best = (f64::INFINITY, Point::new(vec![0.0, 0.0, 1.0]).unwrap());
            for k in 0..samples {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / samples as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden_angle * k as f64;
                let u = unit(vec![r * phi.cos(), r * phi.sin(), z]);
                let val = ray_objective(set, x, &u, t_max, coarse_tol);
                if val < best.0 {
                    best = (val, u);
                }
            }
            let mut center = best.1;
            let (e1, e2) = tangent_frame(&center);
            let (mut ca, mut cb) = (0.0f64, 0.0f64);
            let mut span = 0.1f64;
            let span_floor = (resolution / (t_max + 1.0)).max(1e-12);
            while span > span_floor {
                let mut local = (f64::INFINITY, ca, cb);
                for i in 0..9 {
                    for j in 0..9 {
                        let a = ca + span * (i as f64 / 4.0 - 1.0);
                        let b = cb + span * (j as f64 / 4.0 - 1.0);
                        let u = offset_dir(&center, &e1, &e2, a, b);
                        let val = ray_objective(set, x, &u, t_max, t_tol);
                        if val < local.0 {
                            local = (val, a, b);
                        }
                    }
                }
                ca = local.1;
                cb = local.2;
                span *= 0.35;
            }
            center = offset_dir(&center, &e1, &e2, ca, cb);
            let probe = probe_ray(set, x, &center, t_max, t_tol);
            Ok(x.add(&center.scale(probe.t_best)))
        }
    }
}

fn tangent_frame(u: &Point) -> (Point, Point) {
    let pick = if u[0].abs() < 0.9 {
        vec![1.0, 0.0, 0.0]
    } else {
        vec![0.0, 1.0, 0.0]
    };
    let p = Point::new(pick).unwrap();
    // e1 = normalize(p - <p,u> u), e2 = u x e1
    let e1 = unit(p.sub(&u.scale(p.dot(u))).as_slice().to_vec());
    let e2 = Point::new(vec![
        u[1] * e1[2] - u[2] * e1[1],
        u[2] * e1[0] - u[0] * e1[2],
        u[0] * e1[1] - u[1] * e1[0],
    ])
    .unwrap();
    (e1, e2)
}

fn offset_dir(u: &Point, e1: &Point, e2: &Point, a: f64, b: f64) -> Point {
    unit(u.add(&e1.scale(a)).add(&e2.scale(b)).as_slice().to_vec())
}
