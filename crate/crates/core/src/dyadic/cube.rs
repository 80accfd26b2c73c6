use serde::{Deserialize, Serialize};

use crate::geometry::Aabb;

/// Dyadic cube `2^level * (corner + [0,1]^d)`.
///
/// All coordinates are exact integers at the cube's own level, so nesting and
/// overlap tests never touch floating point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub corner: Vec<i64>,
}

impl DyadicCube {
    pub fn new(level: i32, corner: Vec<i64>) -> Self {
        assert!(!corner.is_empty(), "dyadic cube needs dimension >= 1");
        Self { level, corner }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    /// Sidelength `2^level`, exact in `f64` for every representable level.
    pub fn side(&self) -> f64 {
        2f64.powi(self.level)
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.dim() as i32)
    }

    pub fn aabb(&self) -> Aabb {
        let s = self.side();
        let lo: Vec<f64> = self.corner.iter().map(|&c| c as f64 * s).collect();
        let hi = lo.iter().map(|l| l + s).collect();
        Aabb::new(lo, hi)
    }

    /// The `2^d` children in lexicographic corner order.
    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                let corner = (0..d).map(|i| 2 * self.corner[i] + ((mask >> (d - 1 - i)) & 1) as i64).collect();
                DyadicCube::new(self.level - 1, corner)
            })
            .collect()
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube::new(self.level + 1, self.corner.iter().map(|c| c.div_euclid(2)).collect())
    }

    /// Integer bounds `[lo, hi]` of the cube at a finer (or equal) level.
    pub(crate) fn bounds_at(&self, level: i32) -> Vec<(i128, i128)> {
        assert!(level <= self.level);
        let f = 1i128 << (self.level - level);
        self.corner.iter().map(|&c| (c as i128 * f, (c as i128 + 1) * f)).collect()
    }

    /// True when `other` is contained in `self` (closed containment).
    pub fn contains_cube(&self, other: &DyadicCube) -> bool {
        if other.level > self.level || other.dim() != self.dim() {
            return false;
        }
        let shift = self.level - other.level;
        other.corner.iter().zip(&self.corner).all(|(&c, &p)| (c >> shift) == p)
    }

    /// Exact test for overlapping interiors.
    pub fn interiors_overlap(&self, other: &DyadicCube) -> bool {
        let m = self.level.min(other.level);
        self.bounds_at(m).iter().zip(other.bounds_at(m)).all(|(&(a0, a1), (b0, b1))| a0 < b1 && b0 < a1)
    }

    /// Concentric scaling of the cube by 2 in space: same corner, level + 1.
    pub fn dilated_by_two(&self) -> DyadicCube {
        DyadicCube::new(self.level + 1, self.corner.clone())
    }
}

impl PartialOrd for DyadicCube {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Level descending, then corner lexicographic.
impl Ord for DyadicCube {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.level.cmp(&self.level).then_with(|| self.corner.cmp(&other.corner))
    }
}
