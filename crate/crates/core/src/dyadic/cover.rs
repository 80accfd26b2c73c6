use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DyadicCube;
use crate::geometry::{Domain, Primitive, Relation};
use crate::{Error, Result};

/// A family `W(η)` of dyadic cubes with pairwise disjoint interiors.
///
/// Cubes live in the normalized frame where the domain's bounding box starts
/// at the origin; `translation` maps the original domain into that frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeCover {
    pub dim: usize,
    pub cubes: Vec<DyadicCube>,
    pub eta: f64,
    pub root: DyadicCube,
    pub translation: Vec<f64>,
    pub per_scale: BTreeMap<i32, usize>,
}

impl CubeCover {
    pub(crate) fn from_cubes(
        dim: usize,
        mut cubes: Vec<DyadicCube>,
        eta: f64,
        root: DyadicCube,
        translation: Vec<f64>,
    ) -> Self {
        cubes.sort();
        let mut per_scale = BTreeMap::new();
        for q in &cubes {
            *per_scale.entry(q.level).or_insert(0) += 1;
        }
        Self { dim, cubes, eta, root, translation, per_scale }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Total volume of the member cubes.
    pub fn volume(&self) -> f64 {
        self.cubes.iter().map(DyadicCube::volume).sum()
    }

    /// Level of `η` (η = 2^k).
    pub fn eta_level(&self) -> i32 {
        self.eta.log2().round() as i32
    }

    /// The normalized-frame domain that was covered.
    pub fn normalized(&self, domain: &Domain) -> Result<Domain> {
        domain.translate(self.translation.clone())
    }

    /// Pretty JSON export: `{cubes: [{level, corner, side}], eta, translation, root}`.
    pub fn to_json(&self) -> serde_json::Value {
        let cube = |q: &DyadicCube| serde_json::json!({ "level": q.level, "corner": q.corner, "side": q.side() });
        serde_json::json!({
            "cubes": self.cubes.iter().map(cube).collect::<Vec<_>>(),
            "eta": self.eta,
            "translation": self.translation,
            "root": cube(&self.root),
        })
    }
}

pub(crate) fn power_of_two_level(x: f64) -> Option<i32> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    let k = x.log2().round() as i32;
    (2f64.powi(k) == x).then_some(k)
}

/// `H_{d-1}(∂Ω)^{1/(d-1)}`.
pub(crate) fn boundary_scale(domain: &Domain) -> Result<f64> {
    let d = domain.dim();
    if d < 2 {
        return Err(Error::Unsupported("dyadic covers need d >= 2".into()));
    }
    Ok(domain.boundary_area()?.powf(1.0 / (d as f64 - 1.0)))
}

/// Is the cube OK: rule (a) small and meeting the closed domain, or rule (b)
/// contained in it.
pub(crate) fn is_ok(rel: Relation, side: f64, eta: f64) -> bool {
    rel == Relation::Subset || (side < 2.0 * eta && rel != Relation::Disjoint)
}

fn recurse(p: &Primitive, q: DyadicCube, eta: f64) -> Vec<DyadicCube> {
    let rel = p.relation(&q.aabb());
    if rel == Relation::Disjoint {
        return Vec::new();
    }
    if is_ok(rel, q.side(), eta) {
        return vec![q];
    }
    q.children().into_par_iter().flat_map_iter(|c| recurse(p, c, eta)).collect()
}

/// Builds `W(η)`: the maximal OK dyadic cubes inside the root cube `Q^0`.
///
/// `η` must be a power of two with `η <= H_{d-1}(∂Ω)^{1/(d-1)} / 2`. The
/// domain is first translated so that its bounding box starts at the origin;
/// `Q^0 = [0, 2^m]^d` with the smallest `m` such that `2^m` exceeds both the
/// bounding-box extent and `2η`.
pub fn build_cover(domain: &Domain, eta: f64) -> Result<CubeCover> {
    let eta_level =
        power_of_two_level(eta).ok_or_else(|| Error::OutOfRange(format!("eta must be a power of two, got {eta}")))?;
    let scale = boundary_scale(domain)?;
    if eta > scale / 2.0 {
        return Err(Error::OutOfRange(format!(
            "eta = {eta} exceeds H_(d-1)(boundary)^(1/(d-1)) / 2 = {}",
            scale / 2.0
        )));
    }
    let bbox = domain.bbox();
    let translation: Vec<f64> = bbox.lo.iter().map(|l| -l).collect();
    let normalized = domain.translate(translation.clone())?;
    let extent = bbox.extent();
    let mut m = eta_level + 1;
    while !(2f64.powi(m) > extent && 2f64.powi(m) > 2.0 * eta) {
        m += 1;
    }
    let d = domain.dim();
    let root = DyadicCube::new(m, vec![0; d]);
    let cubes = recurse(&normalized.primitive(), root.clone(), eta);
    Ok(CubeCover::from_cubes(d, cubes, eta, root, translation))
}

/// `W_-`: members with sidelength at least `2η`.
pub fn inner_cover(cover: &CubeCover) -> CubeCover {
    let cubes = cover.cubes.iter().filter(|q| q.side() >= 2.0 * cover.eta).cloned().collect();
    CubeCover::from_cubes(cover.dim, cubes, cover.eta, cover.root.clone(), cover.translation.clone())
}

fn union_in_original_frame(cover: &CubeCover, cubes: Vec<DyadicCube>) -> Result<Domain> {
    let back: Vec<f64> = cover.translation.iter().map(|t| -t).collect();
    Domain::dyadic_union(cover.dim, cubes)?.translate(back)
}

/// `(F_-, F_+)` in the original frame. `F_-` is `None` when no member reaches `2η`.
pub fn approx_domains(cover: &CubeCover) -> Result<(Option<Domain>, Domain)> {
    let inner = inner_cover(cover);
    let inner = if inner.is_empty() { None } else { Some(union_in_original_frame(cover, inner.cubes)?) };
    let outer = union_in_original_frame(cover, cover.cubes.clone())?;
    Ok((inner, outer))
}

/// `⌊log2(H_{d-1}(∂Ω)^{1/(d-1)})⌋`, computed exactly at powers of two.
pub fn kmax(domain: &Domain) -> Result<i32> {
    kmax_for_boundary(domain.boundary_area()?, domain.dim())
}

/// [`kmax`] from a boundary measure `h` in dimension `d`.
pub fn kmax_for_boundary(h: f64, d: usize) -> Result<i32> {
    if d < 2 {
        return Err(Error::Unsupported("kmax needs d >= 2".into()));
    }
    if !(h.is_finite() && h >= 1.0) {
        return Err(Error::OutOfRange(format!("kmax needs H_(d-1)(boundary) >= 1, got {h}")));
    }
    let e = d as i32 - 1;
    let mut k = (h.log2() / e as f64).floor() as i32;
    while 2f64.powi((k + 1) * e) <= h {
        k += 1;
    }
    while 2f64.powi(k * e) > h {
        k -= 1;
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn is_ok_cube(p: &Primitive, q: &DyadicCube, eta: f64) -> bool {
        is_ok(p.relation(&q.aabb()), q.side(), eta)
    }

    /// Enumerates every dyadic cube inside the root down to level log2(η) and
    /// keeps those that are OK with no OK ancestor.
    fn brute_force(domain: &Domain, eta: f64, root_level: i32) -> BTreeSet<DyadicCube> {
        let p = domain.primitive();
        let d = domain.dim();
        let eta_level = power_of_two_level(eta).unwrap();
        let mut out = BTreeSet::new();
        for level in (eta_level - 1..=root_level).rev() {
            let n = 1i64 << (root_level - level);
            let total = (n as usize).pow(d as u32);
            for idx in 0..total {
                let mut rem = idx;
                let corner: Vec<i64> = (0..d)
                    .map(|_| {
                        let c = (rem % n as usize) as i64;
                        rem /= n as usize;
                        c
                    })
                    .collect();
                let q = DyadicCube::new(level, corner);
                if !is_ok_cube(&p, &q, eta) {
                    continue;
                }
                let mut anc = q.clone();
                let mut maximal = true;
                while anc.level < root_level {
                    anc = anc.parent();
                    if is_ok_cube(&p, &anc, eta) {
                        maximal = false;
                        break;
                    }
                }
                if maximal {
                    out.insert(q);
                }
            }
        }
        out
    }

    #[test]
    fn square_of_side_32_at_eta_16() {
        let sq = Domain::unit_cube(2, 32.0).unwrap();
        let cover = build_cover(&sq, 16.0).unwrap();
        assert_eq!(cover.root, DyadicCube::new(6, vec![0, 0]));
        let expected = brute_force(&sq, 16.0, 6);
        let got: BTreeSet<_> = cover.cubes.iter().cloned().collect();
        assert_eq!(got, expected);
        assert_eq!(cover.cubes[0], DyadicCube::new(5, vec![0, 0]));
        assert_eq!(cover.len(), 6);
        assert_eq!(cover.per_scale.get(&4), Some(&5));
        let inner = inner_cover(&cover);
        assert_eq!(inner.cubes, vec![DyadicCube::new(5, vec![0, 0])]);
    }

    #[test]
    fn matches_brute_force_on_small_disks() {
        for (r, eta) in [(5.0, 1.0), (9.0, 2.0), (3.3, 0.5)] {
            let disk = Domain::ball(vec![0.3, -1.1], r).unwrap();
            let cover = build_cover(&disk, eta).unwrap();
            let normalized = cover.normalized(&disk).unwrap();
            let expected = brute_force(&normalized, eta, cover.root.level);
            let got: BTreeSet<_> = cover.cubes.iter().cloned().collect();
            assert_eq!(got, expected, "r = {r}, eta = {eta}");
        }
    }

    #[test]
    fn inner_cover_is_subset_of_domain() {
        let disk = Domain::ball(vec![0.0, 0.0], 40.0).unwrap();
        let cover = build_cover(&disk, 8.0).unwrap();
        let inner = inner_cover(&cover);
        assert!(!inner.is_empty());
        let normalized = cover.normalized(&disk).unwrap();
        for q in &inner.cubes {
            assert!(cover.cubes.contains(q));
            assert_eq!(normalized.cube_relation(q).unwrap(), Relation::Subset);
        }
        // A cover whose cubes all sit at scale η has no inner part.
        let small = Domain::ball(vec![0.0, 0.0], 3.0).unwrap();
        let c = build_cover(&small, 1.0).unwrap();
        if c.cubes.iter().all(|q| q.side() == 1.0) {
            assert!(inner_cover(&c).is_empty());
        }
        let thin = Domain::unit_cube(2, 4.0).unwrap();
        let c = build_cover(&thin, 8.0).unwrap();
        assert!(c.cubes.iter().all(|q| q.side() == 8.0));
        assert!(inner_cover(&c).is_empty());
        assert!(approx_domains(&c).unwrap().0.is_none());
    }

    #[test]
    fn approximations_sandwich_the_domain() {
        let disk = Domain::ball(vec![1.0, 2.0], 60.0).unwrap();
        let cover = build_cover(&disk, 16.0).unwrap();
        let (inner, outer) = approx_domains(&cover).unwrap();
        let inner = inner.unwrap();
        let n_eta = cover.per_scale[&cover.eta_level()] as f64;
        assert_eq!(outer.volume() - inner.volume(), n_eta * 16.0 * 16.0);
        let mut state = 12345u64;
        let bbox = outer.bbox();
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..2)
                .map(|i| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let u = (state >> 11) as f64 / (1u64 << 53) as f64;
                    bbox.lo[i] + u * (bbox.hi[i] - bbox.lo[i])
                })
                .collect();
            if inner.contains(&x) {
                assert!(disk.contains(&x));
            }
            if disk.contains(&x) {
                assert!(outer.contains(&x));
            }
        }
    }

    #[test]
    fn scaling_covariance() {
        let disk = Domain::ball(vec![0.0, 0.0], 50.0).unwrap();
        let a = build_cover(&disk, 8.0).unwrap();
        let b = build_cover(&disk.dilate(2.0).unwrap(), 16.0).unwrap();
        let doubled: Vec<_> = a.cubes.iter().map(DyadicCube::dilated_by_two).collect();
        assert_eq!(b.cubes, doubled);
        assert_eq!(b.root, a.root.dilated_by_two());
    }

    #[test]
    fn eta_validation() {
        let sq = Domain::unit_cube(2, 32.0).unwrap();
        assert!(build_cover(&sq, 12.0).is_err());
        assert!(build_cover(&sq, 128.0).is_err());
        assert!(build_cover(&sq, 64.0).is_ok());
        assert!(build_cover(&Domain::interval(0.0, 1.0).unwrap(), 0.5).is_err());
    }

    #[test]
    fn kmax_values() {
        for d in 2..=6 {
            assert_eq!(kmax_for_boundary(32f64.powi(d as i32 - 1), d).unwrap(), 5);
            assert_eq!(kmax_for_boundary(32f64.powi(d as i32 - 1) * 0.999, d).unwrap(), 4);
        }
        assert_eq!(kmax_for_boundary(100.0, 2).unwrap(), 6);
        assert_eq!(kmax(&Domain::unit_cube(2, 8.0).unwrap()).unwrap(), 5);
        assert_eq!(kmax(&Domain::unit_cube(2, 25.0).unwrap()).unwrap(), 6);
        assert!(kmax(&Domain::unit_cube(2, 0.1).unwrap()).is_err());
        assert!(kmax_for_boundary(2.0, 1).is_err());
    }

    #[test]
    fn cover_scales_stay_below_kmax() {
        let disk = Domain::ball(vec![0.0, 0.0], 200.0).unwrap();
        let cover = build_cover(&disk, 16.0).unwrap();
        let k = kmax(&disk).unwrap();
        assert_eq!(k, 10);
        assert!(cover.per_scale.keys().all(|&l| (4..=k).contains(&l)));
    }
}
