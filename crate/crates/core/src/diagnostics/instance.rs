//! Seeded random instances whose intersection provably contains a given
//! anchor point.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point, SetSpec};

fn random_direction(rng: &mut impl Rng, d: usize) -> Point {
    loop {
        let coords: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = Point::new(coords).unwrap();
        if p.norm() > 1e-2 {
            return p;
        }
    }
}

/// `n` sets in `R^d`, mixed over all applicable variants, each containing
/// `anchor` by construction. Deterministic per seed.
pub fn random_feasible_instance(seed: u64, d: usize, n: usize, anchor: &Point) -> Vec<SetSpec> {
    assert!(d >= 1 && n >= 1 && anchor.dim() == d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let simplex_ok = SetSpec::Simplex.contains(anchor, 1e-9).unwrap();
    let variants = if simplex_ok { 5 } else { 4 };
    (0..n)
        .map(|_| {
            let set = match rng.gen_range(0..variants) {
                0 => {
                    let a = random_direction(&mut rng, d);
                    // Margin occasionally zero: anchor on the boundary.
                    let margin = if rng.gen_bool(0.15) {
                        0.0
                    } else {
                        rng.gen_range(0.05..1.5)
                    };
                    SetSpec::HalfSpace {
                        b: a.dot(anchor) + margin,
                        a,
                    }
                }
                1 => {
                    let a = random_direction(&mut rng, d);
                    SetSpec::Hyperplane {
                        b: a.dot(anchor),
                        a,
                    }
                }
                2 => {
                    let offset = random_direction(&mut rng, d).scale(rng.gen_range(0.0..1.5));
                    let center = anchor.add(&offset);
                    SetSpec::Ball {
                        radius: offset.norm() + rng.gen_range(0.05..2.0),
                        center,
                    }
                }
                3 => {
                    let lo: Vec<f64> = (0..d)
                        .map(|i| anchor[i] - rng.gen_range(0.0..2.0))
                        .collect();
                    let hi: Vec<f64> = (0..d)
                        .map(|i| anchor[i] + rng.gen_range(0.0..2.0))
                        .collect();
                    SetSpec::Box {
                        lo: Point::new(lo).unwrap(),
                        hi: Point::new(hi).unwrap(),
                    }
                }
                _ => SetSpec::Simplex,
            };
            debug_assert!(set.contains(anchor, 1e-9).unwrap());
            set
        })
        .collect()
}

/// A point of the set, sampled by per-variant construction rather than by
/// projection.
pub fn feasible_point(set: &SetSpec, rng: &mut StdRng, dim: usize) -> Point {
    match set {
        SetSpec::HalfSpace { a, b } => {
            let base = a.scale(b / a.dot(a));
            let v = random_direction(rng, dim).scale(rng.gen_range(0.0..3.0));
            let tangent = v.sub(&a.scale(v.dot(a) / a.dot(a)));
            base.add(&tangent)
                .sub(&a.scale(rng.gen_range(0.0..2.0) / a.norm()))
        }
        SetSpec::Hyperplane { a, b } => {
            let base = a.scale(b / a.dot(a));
            let v = random_direction(rng, dim).scale(rng.gen_range(0.0..3.0));
            base.add(&v.sub(&a.scale(v.dot(a) / a.dot(a))))
        }
        SetSpec::Ball { center, radius } => {
            let dir = random_direction(rng, dim);
            let dir = dir.scale(1.0 / dir.norm());
            center.add(&dir.scale(rng.gen_range(0.0..1.0) * radius))
        }
        SetSpec::Box { lo, hi } => Point::new(
            (0..dim)
                .map(|i| lo[i] + rng.gen_range(0.0..=1.0) * (hi[i] - lo[i]))
                .collect(),
        )
        .unwrap(),
            SetSpec::Simplex => {
            let g: Vec<f64> = (0..dim).map(|_| -rng.gen_range(1e-6..1.0f64).ln()).collect();
            let total: f64 = g.iter().sum();
            Point::new(g.into_iter().map(|v| v / total).collect()).unwrap()
        }
    }
}
