//! Eigenvalues of dense real symmetric matrices: Householder reduction to
//! tridiagonal form followed by implicit QL with Wilkinson-type shifts.
//!
//! Single-threaded and branch-for-branch deterministic, so identical input
//! gives bit-identical output regardless of the surrounding thread pool.

use crate::{Error, Result};

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS: usize = 60;

/// Eigenvalues (unsorted) of the symmetric `n × n` row-major matrix `a`.
/// Only the lower triangle is read; `a` is used as workspace.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix buffer does not match dimension");
    if n == 0 {
        return Ok(Vec::new());
    }
    let frobenius = lower_frobenius(&a, n);
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tridiagonal_ql(&mut d, &mut e).map_err(|(index, iterations)| Error::NoConvergence {
        index,
        iterations,
        frobenius,
        offdiag: e.iter().map(|x| x * x).sum::<f64>().sqrt(),
    })?;
    Ok(d)
}

fn lower_frobenius(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..i {
            s += 2.0 * a[i * n + j] * a[i * n + j];
        }
        s += a[i * n + i] * a[i * n + i];
    }
    s.sqrt()
}

/// Householder reduction working on the lower triangle. Returns the diagonal
/// and the subdiagonal (`e[i]` couples rows `i-1` and `i`; `e[0] = 0`).
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut p = vec![0.0; n];
    for i in (1..n).rev() {
        // Row i, columns 0..i, is the vector to annihilate below the subdiagonal.
        let row = &mut a[i * n..i * n + i];
        if i == 1 {
            e[i] = row[0];
            continue;
        }
        let scale: f64 = row.iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            e[i] = 0.0;
            continue;
        }
        let mut h = 0.0;
        for x in row.iter_mut() {
            *x /= scale;
            h += *x * *x;
        }
        let f = row[i - 1];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        row[i - 1] = f - g;
        u[..i].copy_from_slice(row);

        // p = A u / h over the leading i × i block, reading only the lower
        // triangle: row j contributes to p_j (dot) and to p_k, k < j (axpy).
        p[..i].fill(0.0);
        for j in 0..i {
            let rj = &a[j * n..j * n + j + 1];
            let uj = u[j];
            let mut acc = 0.0;
            for k in 0..j {
                acc += rj[k] * u[k];
                p[k] += rj[k] * uj;
            }
            p[j] += acc + rj[j] * uj;
        }
        let mut f = 0.0;
        for j in 0..i {
            p[j] /= h;
            f += p[j] * u[j];
        }
        let hh = f / (h + h);
        for j in 0..i {
            p[j] -= hh * u[j];
        }
        // A -= u qᵀ + q uᵀ on the lower triangle.
        for j in 0..i {
            let (uj, qj) = (u[j], p[j]);
            let rj = &mut a[j * n..j * n + j + 1];
            for k in 0..=j {
                rj[k] -= uj * p[k] + qj * u[k];
            }
        }
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    (d, e)
}

/// Implicit QL on a symmetric tridiagonal matrix; on failure returns the
/// eigenvalue index and the sweep count reached.
///
/// An off-diagonal entry is negligible when it is small relative to its
/// neighbouring diagonal entries or below `ε ‖T‖_∞`. The absolute floor
/// matters for blocks made entirely of rounding noise (numerically null
/// clusters), where the relative test alone never fires; dropping such an
/// entry is within the backward error of the Householder stage.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> std::result::Result<(), (usize, usize)> {
    let n = d.len();
    let norm =
        (0..n).map(|i| d[i].abs() + e[i].abs() + if i + 1 < n { e[i + 1].abs() } else { 0.0 }).fold(0.0, f64::max);
    let floor = f64::EPSILON * norm;
    e.rotate_left(1);
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err((l, iter));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn diagonal_and_two_by_two() {
        let ev = sorted(symmetric_eigenvalues(vec![0.9, 0.0, 0.0, 0.1], 2).unwrap());
        assert_eq!(ev, vec![0.9, 0.1]);
        let ev = sorted(symmetric_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2).unwrap());
        assert!((ev[0] - 3.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
        assert_eq!(symmetric_eigenvalues(vec![4.0], 1).unwrap(), vec![4.0]);
    }

    #[test]
    fn matches_nalgebra_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3, 10, 57, 160] {
            let a = random_symmetric(n, &mut rng);
            let ours = sorted(symmetric_eigenvalues(a.clone(), n).unwrap());
            let theirs = sorted(DMatrix::from_row_slice(n, n, &a).symmetric_eigenvalues().iter().copied().collect());
            for (x, y) in ours.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-11 * n as f64, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn reads_only_the_lower_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20;
        let a = random_symmetric(n, &mut rng);
        let mut garbage = a.clone();
        for i in 0..n {
            for j in i + 1..n {
                garbage[i * n + j] = 1e6;
            }
        }
        assert_eq!(symmetric_eigenvalues(a, n).unwrap(), symmetric_eigenvalues(garbage, n).unwrap());
    }

    #[test]
    fn handles_degenerate_and_graded_spectra() {
        // Rank-one projection plus repeated eigenvalues.
        let n = 30;
        let v: Vec<f64> = (0..n).map(|i| 1.0 / (n as f64).sqrt() * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let a: Vec<f64> = (0..n * n).map(|k| v[k / n] * v[k % n]).collect();
        let ev = sorted(symmetric_eigenvalues(a, n).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!(ev[1..].iter().all(|x| x.abs() < 1e-14));
        // Hilbert matrix: strongly graded eigenvalues.
        let n = 12;
        let h: Vec<f64> = (0..n * n).map(|k| 1.0 / ((k / n + k % n + 1) as f64)).collect();
        let ours = sorted(symmetric_eigenvalues(h.clone(), n).unwrap());
        let theirs = sorted(DMatrix::from_row_slice(n, n, &h).symmetric_eigenvalues().iter().copied().collect());
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn converges_with_numerically_null_clusters() {
        // Sinc Gram matrix with ~half its spectrum at rounding level.
        let n = 400;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let w = 400.0;
        let a: Vec<f64> = (0..n * n)
            .map(|k| {
                let z = x[k / n] - x[k % n];
                let k = if z == 0.0 { w / std::f64::consts::PI } else { (w * z).sin() / (std::f64::consts::PI * z) };
                k / n as f64
            })
            .collect();
        let ours = sorted(symmetric_eigenvalues(a.clone(), n).unwrap());
        let theirs = sorted(DMatrix::from_row_slice(n, n, &a).symmetric_eigenvalues().iter().copied().collect());
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_symmetric(80, &mut rng);
        let x = symmetric_eigenvalues(a.clone(), 80).unwrap();
        let y = symmetric_eigenvalues(a, 80).unwrap();
        assert_eq!(
            x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            y.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
