use serde::{Deserialize, Serialize};

use super::cover::{boundary_scale, is_ok};
use super::{CubeCover, DyadicCube};
use crate::geometry::{Aabb, Domain, Primitive, Relation};
use crate::Result;

/// Quasi-random points used by the coverage check.
const COVERAGE_POINTS: usize = 100_000;
/// Extra points placed on the boundary when it can be parametrized.
const BOUNDARY_POINTS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: u8,
    pub pass: bool,
    pub detail: String,
    /// A point of the domain left uncovered (condition 1).
    pub witness_point: Option<Vec<f64>>,
    /// An offending cube (conditions 2 and 3).
    pub witness_cube: Option<DyadicCube>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleCount {
    pub level: i32,
    pub count: usize,
    /// `6^d H_{d-1}(∂Ω) κ^{-1} δ^{1-d}`.
    pub bound_rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub conditions: Vec<ConditionCheck>,
    pub scales: Vec<ScaleCount>,
    pub kappa: f64,
    pub boundary_area: f64,
    pub disjoint: bool,
    pub maximal: bool,
}

impl CoverReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass) && self.disjoint && self.maximal
    }
}

/// Radical-inverse (Halton) sequence in the given prime base.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton_in_box(b: &Aabb, n: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    (1..=n as u64).map(move |i| {
        (0..b.dim()).map(|k| b.lo[k] + radical_inverse(i, PRIMES[k % PRIMES.len()]) * (b.hi[k] - b.lo[k])).collect()
    })
}

fn boundary_points(p: &Primitive, n: usize) -> Vec<Vec<f64>> {
    if let Primitive::Ball { center, radius } = p {
        if center.len() == 2 {
            return (0..n)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / n as f64;
                    vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect();
        }
    }
    match p.boundary_segments() {
        Ok(segs) => {
            let per = (n / segs.len().max(1)).max(2);
            segs.iter().flat_map(|s| (0..=per).map(move |j| s.point_at(j as f64 / per as f64).to_vec())).collect()
        }
        Err(_) => Vec::new(),
    }
}

/// Checks the four cover conditions, disjointness and maximality.
///
/// Condition 1 is a falsifier: every quasi-random point of `Ω`, and every
/// sampled boundary point, must lie in some member cube.
pub fn verify_cover(domain: &Domain, cover: &CubeCover) -> Result<CoverReport> {
    let d = cover.dim;
    let normalized = cover.normalized(domain)?.primitive();
    let h = domain.boundary_area()?;
    let (kappa, _) = domain.kappa()?;
    let scale = boundary_scale(domain)?;
    let eta = cover.eta;
    let boxes: Vec<Aabb> = cover.cubes.iter().map(DyadicCube::aabb).collect();

    let covered = |x: &[f64]| boxes.iter().any(|b| b.contains(x));
    let bbox = normalized.bbox();
    let uncovered = halton_in_box(&bbox, COVERAGE_POINTS)
        .chain(boundary_points(&normalized, BOUNDARY_POINTS))
        .find(|x| normalized.contains(x) && !covered(x));
    let c1 = ConditionCheck {
        condition: 1,
        pass: uncovered.is_none(),
        detail: match &uncovered {
            None => "no uncovered sample point".into(),
            Some(x) => format!("point {x:?} (normalized frame) lies in the domain but in no cube"),
        },
        witness_point: uncovered.map(|x| x.iter().zip(&cover.translation).map(|(v, t)| v - t).collect()),
        witness_cube: None,
    };

    let bad2 = cover.cubes.iter().find(|q| q.side() >= 2.0 * eta && normalized.relation(&q.aabb()) != Relation::Subset);
    let c2 = ConditionCheck {
        condition: 2,
        pass: bad2.is_none(),
        detail: match bad2 {
            None => "every cube with side >= 2 eta lies in the domain".into(),
            Some(q) => format!("cube {q:?} has side >= 2 eta but is not contained in the domain"),
        },
        witness_point: None,
        witness_cube: bad2.cloned(),
    };

    let bad3 = cover.cubes.iter().find(|q| !(eta <= q.side() && q.side() <= scale));
    let c3 = ConditionCheck {
        condition: 3,
        pass: bad3.is_none(),
        detail: match bad3 {
            None => format!("all sides within [{eta}, {scale}]"),
            Some(q) => format!("cube {q:?} has side {} outside [{eta}, {scale}]", q.side()),
        },
        witness_point: None,
        witness_cube: bad3.cloned(),
    };

    let six_d = 6f64.powi(d as i32);
    let scales: Vec<ScaleCount> = cover
        .per_scale
        .iter()
        .rev()
        .map(|(&level, &count)| {
            let delta = 2f64.powi(level);
            let bound_rhs = six_d * h / kappa * delta.powi(1 - d as i32);
            ScaleCount { level, count, bound_rhs, pass: (count as f64) <= bound_rhs }
        })
        .collect();
    let bad4 = scales.iter().find(|s| !s.pass || 2f64.powi(s.level) < eta);
    let c4 = ConditionCheck {
        condition: 4,
        pass: bad4.is_none(),
        detail: match bad4 {
            None => format!("per-scale counts within 6^d H/kappa delta^(1-d) over {} scales", scales.len()),
            Some(s) => format!("level {}: {} cubes > bound {}", s.level, s.count, s.bound_rhs),
        },
        witness_point: None,
        witness_cube: None,
    };

    let disjoint =
        cover.cubes.iter().enumerate().all(|(i, p)| cover.cubes[i + 1..].iter().all(|q| !p.interiors_overlap(q)));
    let maximal = cover.cubes.iter().all(|q| {
        q.level >= cover.root.level || {
            let parent = q.parent();
            !is_ok(normalized.relation(&parent.aabb()), parent.side(), eta)
        }
    });

    Ok(CoverReport { conditions: vec![c1, c2, c3, c4], scales, kappa, boundary_area: h, disjoint, maximal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::build_cover;

    #[test]
    fn disk_cover_passes_with_explicit_constant() {
        let disk = Domain::ball(vec![0.0, 0.0], 200.0).unwrap();
        let cover = build_cover(&disk, 16.0).unwrap();
        let report = verify_cover(&disk, &cover).unwrap();
        assert!(report.all_pass(), "{report:#?}");
        assert_eq!(report.kappa, 1.0);
        for s in &report.scales {
            let delta = 2f64.powi(s.level);
            assert!(s.count as f64 <= 36.0 * report.boundary_area * delta.powi(-1));
        }
    }

    #[test]
    fn deleted_cube_breaks_coverage() {
        let disk = Domain::ball(vec![5.0, 5.0], 100.0).unwrap();
        let mut cover = build_cover(&disk, 8.0).unwrap();
        cover.cubes.remove(0);
        let report = verify_cover(&disk, &cover).unwrap();
        let c1 = &report.conditions[0];
        assert!(!c1.pass);
        let w = c1.witness_point.as_ref().unwrap();
        assert!(disk.contains(w));
    }

    #[test]
    fn straddling_large_cube_breaks_condition_two() {
        let disk = Domain::ball(vec![0.0, 0.0], 100.0).unwrap();
        let mut cover = build_cover(&disk, 8.0).unwrap();
        let normalized = cover.normalized(&disk).unwrap();
        // Replace every member inside a straddling level-5 (4 eta) cube by it.
        let big = (0..8)
            .flat_map(|x| (0..8).map(move |y| DyadicCube::new(5, vec![x, y])))
            .find(|q| normalized.cube_relation(q).unwrap() == Relation::Straddles)
            .unwrap();
        cover.cubes.retain(|q| !big.contains_cube(q));
        cover.cubes.push(big.clone());
        let report = verify_cover(&disk, &cover).unwrap();
        assert!(!report.conditions[1].pass);
        assert_eq!(report.conditions[1].witness_cube.as_ref(), Some(&big));
    }

    #[test]
    fn square_covers_pass() {
        let sq = Domain::cube(vec![0.0, 0.0], 300.0).unwrap();
        for eta in [16.0, 32.0] {
            let cover = build_cover(&sq, eta).unwrap();
            assert!(verify_cover(&sq, &cover).unwrap().all_pass());
        }
    }

    #[test]
    fn halton_is_in_unit_interval() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }
}
