//! Gauss–Legendre rules and composite quadratures on spatial domains.

use std::f64::consts::PI;

use crate::geometry::{Aabb, Primitive, Relation};

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule on
/// `[-1, 1]`, by Newton iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                dp = legendre_with_derivative(n, z).1;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Points (flat, row per node) and non-negative weights in dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn empty(dim: usize) -> Self {
        Self { dim, points: Vec::new(), weights: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Tensor Gauss rule with `n` nodes per coordinate on a box, nodes in
    /// lexicographic order (last coordinate fastest).
    pub fn tensor(b: &Aabb, n: usize) -> Self {
        let mut q = Self::empty(b.dim());
        q.push_tensor(b, &gauss_legendre(n), &|_| true);
        q
    }

    /// Tensor rule of the given order in each box.
    pub fn on_boxes(boxes: &[Aabb], order: usize) -> Self {
        let dim = boxes.first().map_or(1, Aabb::dim);
        let rule = gauss_legendre(order);
        let mut q = Self::empty(dim);
        for b in boxes {
            q.push_tensor(b, &rule, &|_| true);
        }
        q
    }

    /// Uniform grid of `cells` cells per coordinate over the bounding box:
    /// full rules on cells inside the domain, rules of order
    /// `max(1, ceil(order / 2^level))` on the children of straddling cells
    /// down to `depth` levels, and indicator-masked rules at the last level.
    pub fn cell_grid(domain: &Primitive, cells: usize, order: usize, depth: usize) -> Self {
        let bbox = domain.bbox();
        let d = bbox.dim();
        let side: Vec<f64> = (0..d).map(|i| (bbox.hi[i] - bbox.lo[i]) / cells as f64).collect();
        let rules: Vec<_> = (0..=depth).map(|l| gauss_legendre(order.div_ceil(1 << l).max(1))).collect();
        let mut q = Self::empty(d);
        let mut idx = vec![0usize; d];
        loop {
            let lo: Vec<f64> = (0..d).map(|i| bbox.lo[i] + idx[i] as f64 * side[i]).collect();
            let hi: Vec<f64> = (0..d).map(|i| lo[i] + side[i]).collect();
            q.push_cell(domain, &Aabb::new(lo, hi), &rules, 0);
            // Odometer over cell indices, last coordinate fastest.
            let mut k = d;
            loop {
                if k == 0 {
                    return q;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < cells {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn push_cell(&mut self, domain: &Primitive, cell: &Aabb, rules: &[(Vec<f64>, Vec<f64>)], level: usize) {
        match domain.relation(cell) {
            Relation::Disjoint => {}
            Relation::Subset => self.push_tensor(cell, &rules[level], &|_| true),
            Relation::Straddles if level + 1 == rules.len() => {
                self.push_tensor(cell, &rules[level], &|x| domain.contains(x))
            }
            Relation::Straddles => {
                let d = cell.dim();
                for mask in 0..1usize << d {
                    let mut lo = cell.lo.clone();
                    let mut hi = cell.hi.clone();
                    for i in 0..d {
                        let mid = 0.5 * (cell.lo[i] + cell.hi[i]);
                        if mask >> (d - 1 - i) & 1 == 1 {
                            lo[i] = mid;
                        } else {
                            hi[i] = mid;
                        }
                    }
                    self.push_cell(domain, &Aabb::new(lo, hi), rules, level + 1);
                }
            }
        }
    }

    fn push_tensor(&mut self, b: &Aabb, rule: &(Vec<f64>, Vec<f64>), keep: &dyn Fn(&[f64]) -> bool) {
        let d = b.dim();
        let n = rule.0.len();
        let half: Vec<f64> = (0..d).map(|i| 0.5 * (b.hi[i] - b.lo[i])).collect();
        let mid: Vec<f64> = (0..d).map(|i| 0.5 * (b.hi[i] + b.lo[i])).collect();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        'outer: loop {
            let mut w = 1.0;
            for i in 0..d {
                x[i] = mid[i] + half[i] * rule.0[idx[i]];
                w *= half[i] * rule.1[idx[i]];
            }
            if keep(&x) {
                self.points.extend_from_slice(&x);
                self.weights.push(w);
            }
            let mut k = d;
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// Same nodes with weights multiplied by the indicator of `domain`.
    pub fn masked(&self, domain: &Primitive) -> Self {
        let weights =
            (0..self.len()).map(|i| if domain.contains(self.point(i)) { self.weights[i] } else { 0.0 }).collect();
        Self { dim: self.dim, points: self.points.clone(), weights }
    }
}
