//! Randomized check of `‖A + B‖_p^p ≤ ‖A‖_p^p + ‖B‖_p^p` for `0 < p ≤ 1`
//! on positive semidefinite matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::operator::{schatten_values, symmetric_eigenvalues};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityTrial {
    pub trial: usize,
    pub n: usize,
    pub p: f64,
    /// `‖A + B‖_p^p`.
    pub lhs: f64,
    /// `‖A‖_p^p + ‖B‖_p^p`.
    pub rhs: f64,
}

impl SubadditivityTrial {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `G Gᵀ / k` for a random `n × k` Gaussian-like `G` with random rank `k`.
fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = rng.random_range(1..=n);
    let g: Vec<f64> = (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..k).map(|l| g[i * k + l] * g[j * k + l]).sum::<f64>() / k as f64;
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    a
}

fn pth_power(a: Vec<f64>, n: usize, p: f64) -> Result<f64> {
    let ev: Vec<f64> = symmetric_eigenvalues(a, n)?.into_iter().map(|x| x.max(0.0)).collect();
    Ok(schatten_values(&ev, p)?.powf(p))
}

/// `trials` random pairs with sizes in `2..=max_n`, each tested at every `p`.
pub fn schatten_subadditivity(seed: u64, trials: usize, max_n: usize, ps: &[f64]) -> Result<Vec<SubadditivityTrial>> {
    if max_n < 2 {
        return Err(Error::OutOfRange(format!("matrix size bound must be at least 2 (got {max_n})")));
    }
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::OutOfRange(format!("p must lie in (0, 1] (got {p})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials * ps.len());
    for trial in 0..trials {
        let n = rng.random_range(2..=max_n);
        let a = random_psd(n, &mut rng);
        let b = random_psd(n, &mut rng);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        for &p in ps {
            let lhs = pth_power(sum.clone(), n, p)?;
            let rhs = pth_power(a.clone(), n, p)? + pth_power(b.clone(), n, p)?;
            out.push(SubadditivityTrial { trial, n, p, lhs, rhs });
        }
    }
    Ok(out)
}
