//! Exposed-face bookkeeping for finite unions of dyadic cubes.
//!
//! Work is done on integer coordinates at the finest level present, so the
//! results are exact.

use crate::dyadic::DyadicCube;

/// Closed segment in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }

    pub fn point_at(&self, t: f64) -> [f64; 2] {
        [self.a[0] + t * (self.b[0] - self.a[0]), self.a[1] + t * (self.b[1] - self.a[1])]
    }
}

type Bounds = Vec<(i128, i128)>;

fn integer_bounds(cubes: &[DyadicCube]) -> (i32, Vec<Bounds>) {
    let fine = cubes.iter().map(|q| q.level).min().unwrap_or(0);
    (fine, cubes.iter().map(|q| q.bounds_at(fine)).collect())
}

/// For face `axis`/`upper` of cube `i`, the cross-sections (all axes but
/// `axis`) of cubes sitting flush against it on the other side.
fn face_neighbours<'a>(
    bounds: &'a [Bounds],
    i: usize,
    axis: usize,
    upper: bool,
) -> impl Iterator<Item = &'a Bounds> + 'a {
    let me = &bounds[i];
    let plane = if upper { me[axis].1 } else { me[axis].0 };
    bounds.iter().enumerate().filter_map(move |(j, other)| {
        if j == i {
            return None;
        }
        let touches = if upper { other[axis].0 == plane } else { other[axis].1 == plane };
        let overlaps = (0..me.len()).filter(|&k| k != axis).all(|k| me[k].0 < other[k].1 && other[k].0 < me[k].1);
        (touches && overlaps).then_some(other)
    })
}

/// `H_{d-1}` of the union's boundary in units where the level-0 cube has side 1.
pub(crate) fn exposed_face_area(cubes: &[DyadicCube]) -> f64 {
    let (fine, bounds) = integer_bounds(cubes);
    let d = bounds.first().map_or(0, Vec::len);
    let mut total: i128 = 0;
    for i in 0..bounds.len() {
        for axis in 0..d {
            for upper in [false, true] {
                let cross = |b: &Bounds| -> i128 {
                    (0..d)
                        .filter(|&k| k != axis)
                        .map(|k| b[k].1.min(bounds[i][k].1) - b[k].0.max(bounds[i][k].0))
                        .product()
                };
                let area = cross(&bounds[i]);
                let hidden: i128 = face_neighbours(&bounds, i, axis, upper).map(cross).sum();
                total += area - hidden;
            }
        }
    }
    total as f64 * 2f64.powi(fine * (d as i32 - 1))
}

/// `H_0` of the boundary of a union of intervals.
pub(crate) fn exposed_point_count(cubes: &[DyadicCube]) -> usize {
    let (_, bounds) = integer_bounds(cubes);
    (0..bounds.len())
        .map(|i| [false, true].into_iter().filter(|&u| face_neighbours(&bounds, i, 0, u).next().is_none()).count())
        .sum()
}

/// Exposed boundary pieces of a planar union, in the union's own frame.
pub(crate) fn exposed_segments(cubes: &[DyadicCube]) -> Vec<Segment> {
    let (fine, bounds) = integer_bounds(cubes);
    let unit = 2f64.powi(fine);
    let mut out = Vec::new();
    for i in 0..bounds.len() {
        for axis in 0..2 {
            let other_axis = 1 - axis;
            for upper in [false, true] {
                let plane = if upper { bounds[i][axis].1 } else { bounds[i][axis].0 };
                let (lo, hi) = bounds[i][other_axis];
                let mut covered: Vec<(i128, i128)> = face_neighbours(&bounds, i, axis, upper)
                    .map(|b| (b[other_axis].0.max(lo), b[other_axis].1.min(hi)))
                    .collect();
                covered.sort();
                let mut cursor = lo;
                let mut push = |s: i128, e: i128| {
                    if e > s {
                        let mut a = [0.0; 2];
                        let mut b = [0.0; 2];
                        a[axis] = plane as f64 * unit;
                        b[axis] = plane as f64 * unit;
                        a[other_axis] = s as f64 * unit;
                        b[other_axis] = e as f64 * unit;
                        out.push(Segment { a, b });
                    }
                };
                for (s, e) in covered {
                    push(cursor, s);
                    cursor = cursor.max(e);
                }
                push(cursor, hi);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Refines every cube to the finest level and counts unit faces whose
    /// neighbour cell is absent.
    fn brute_force(cubes: &[DyadicCube]) -> (f64, f64) {
        let fine = cubes.iter().map(|q| q.level).min().unwrap();
        let d = cubes[0].dim();
        let mut cells: HashSet<Vec<i128>> = HashSet::new();
        for q in cubes {
            let b = q.bounds_at(fine);
            let mut idx: Vec<i128> = b.iter().map(|r| r.0).collect();
            loop {
                cells.insert(idx.clone());
                let mut k = 0;
                loop {
                    if k == d {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < b[k].1 {
                        break;
                    }
                    idx[k] = b[k].0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        let mut faces = 0usize;
        for c in &cells {
            for axis in 0..d {
                for step in [-1i128, 1] {
                    let mut n = c.clone();
                    n[axis] += step;
                    if !cells.contains(&n) {
                        faces += 1;
                    }
                }
            }
        }
        let h = 2f64.powi(fine);
        (cells.len() as f64 * h.powi(d as i32), faces as f64 * h.powi(d as i32 - 1))
    }

    fn sample_unions() -> Vec<Vec<DyadicCube>> {
        vec![
            vec![DyadicCube::new(0, vec![0, 0]), DyadicCube::new(0, vec![1, 0])],
            vec![
                DyadicCube::new(2, vec![0, 0]),
                DyadicCube::new(0, vec![4, 1]),
                DyadicCube::new(1, vec![2, 2]),
                DyadicCube::new(-1, vec![-1, 3]),
                DyadicCube::new(1, vec![-3, -3]),
            ],
            vec![
                DyadicCube::new(1, vec![0, 0, 0]),
                DyadicCube::new(0, vec![2, 0, 1]),
                DyadicCube::new(0, vec![2, 1, 1]),
                DyadicCube::new(-1, vec![0, 0, 4]),
            ],
        ]
    }

    #[test]
    fn exposed_faces_match_grid_counting() {
        for cubes in sample_unions() {
            let (vol, area) = brute_force(&cubes);
            let my_vol: f64 = cubes.iter().map(DyadicCube::volume).sum();
            assert_eq!(my_vol, vol);
            assert_eq!(exposed_face_area(&cubes), area);
            if cubes[0].dim() == 2 {
                let seg: f64 = exposed_segments(&cubes).iter().map(Segment::length).sum();
                assert_eq!(seg, area);
            }
        }
    }

    #[test]
    fn two_adjacent_unit_squares() {
        let cubes = vec![DyadicCube::new(0, vec![0, 0]), DyadicCube::new(0, vec![1, 0])];
        assert_eq!(exposed_face_area(&cubes), 6.0);
        assert_eq!(exposed_segments(&cubes).len(), 6);
    }

    #[test]
    fn intervals_count_endpoints() {
        let joined = vec![DyadicCube::new(0, vec![0]), DyadicCube::new(0, vec![1])];
        let apart = vec![DyadicCube::new(0, vec![0]), DyadicCube::new(0, vec![2])];
        assert_eq!(exposed_point_count(&joined), 2);
        assert_eq!(exposed_point_count(&apart), 4);
    }
}
