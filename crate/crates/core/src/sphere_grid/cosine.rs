//! Cosine collocation on colatitude for rotationally symmetric fields on S^n.
//!
//! Nodes θ_j = π (j + 1/2) / M; basis cos(kθ), k < M. Odd k are odd under
//! θ ↦ π − θ, even k are even, and every basis function has zero slope at
//! both poles.

use super::legendre::integrate_interval;
use super::Jet;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct CosBasis {
    pub(crate) count: usize,
    pub(crate) dim: usize,
    pub(crate) theta: Vec<f64>,
    pub(crate) cos_t: Vec<f64>,
    pub(crate) sin_t: Vec<f64>,
    // [j * count + k]
    cos_k: Vec<f64>,
    sin_k: Vec<f64>,
}

/// Area of the unit sphere S^d embedded in R^{d+1}.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 1.0) * sphere_area(d - 2),
    }
}

impl CosBasis {
    pub fn new(dim: usize, count: usize) -> Self {
        let mut theta = vec![0.0; count];
        let mut cos_t = vec![0.0; count];
        let mut sin_t = vec![0.0; count];
        for j in 0..count.div_ceil(2) {
            let t = PI * (j as f64 + 0.5) / count as f64;
            theta[j] = t;
            cos_t[j] = t.cos();
            sin_t[j] = t.sin();
            let r = count - 1 - j;
            theta[r] = PI - t;
            cos_t[r] = -cos_t[j];
            sin_t[r] = sin_t[j];
        }
        if count % 2 == 1 {
            let mid = count / 2;
            theta[mid] = 0.5 * PI;
            cos_t[mid] = 0.0;
            sin_t[mid] = 1.0;
        }
        let mut cos_k = Vec::with_capacity(count * count);
        let mut sin_k = Vec::with_capacity(count * count);
        for j in 0..count {
            // kθ_j = π k (2j + 1) / (2M); reduce the integer numerator mod 4M
            for k in 0..count {
                let num = (k * (2 * j + 1)) % (4 * count);
                let ang = PI * num as f64 / (2.0 * count as f64);
                cos_k.push(ang.cos());
                sin_k.push(ang.sin());
            }
        }
        Self {
            count,
            dim,
            theta,
            cos_t,
            sin_t,
            cos_k,
            sin_k,
        }
    }

    /// Interpolatory weights: exact for every cos(kθ), k < M, against the
    /// measure |S^{n-1}| sin^{n-1}θ dθ.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.count;
        let p = self.dim as i32 - 1;
        let rule = m + self.dim + 64;
        let moments: Vec<f64> = (0..m)
            .map(|k| {
                if k % 2 == 1 {
                    0.0
                } else {
                    integrate_interval(0.0, PI, rule, |t| t.sin().powi(p) * (k as f64 * t).cos())
                }
            })
            .collect();
        let area = sphere_area(self.dim - 1);
        (0..m)
            .map(|j| {
                let s = crate::exec::compensated_sum((0..m).map(|k| {
                    let eps = if k == 0 { 1.0 } else { 2.0 };
                    moments[k] * eps / m as f64 * self.cos_k[j * m + k]
                }));
                area * s
            })
            .collect()
    }

    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let m = self.count;
        (0..m)
            .map(|k| {
                let eps = if k == 0 { 1.0 } else { 2.0 };
                let s: f64 = (0..m).map(|j| values[j] * self.cos_k[j * m + k]).sum();
                s * eps / m as f64
            })
            .collect()
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let m = self.count;
        (0..m)
            .map(|j| (0..m).map(|k| coeffs[k] * self.cos_k[j * m + k]).sum())
            .collect()
    }

    /// Axisymmetric jet: grad1 = φ', h11 = φ'' (radial), h22 = cot θ φ'
    /// (tangential, multiplicity n − 1).
    pub fn jet(&self, coeffs: &[f64]) -> Jet {
        let m = self.count;
        let nm1 = self.dim as f64 - 1.0;
        let mut jet = Jet::with_capacity(m);
        for j in 0..m {
            let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
            for k in 0..m {
                let c = coeffs[k];
                let kf = k as f64;
                v += c * self.cos_k[j * m + k];
                d -= kf * c * self.sin_k[j * m + k];
                dd -= kf * kf * c * self.cos_k[j * m + k];
            }
            let tang = self.cos_t[j] / self.sin_t[j] * d;
            jet.value.push(v);
            jet.grad1.push(d);
            jet.grad2.push(0.0);
            jet.h11.push(dd);
            jet.h12.push(0.0);
            jet.h22.push(tang);
            jet.laplacian.push(dd + nm1 * tang);
        }
        jet
    }

    pub fn evaluate_at(&self, coeffs: &[f64], theta: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (k as f64 * theta).cos())
            .sum()
    }

    pub fn transfer(&self, coeffs: &[f64], target: &CosBasis) -> Vec<f64> {
        let mut out = vec![0.0; target.count];
        let k = self.count.min(target.count);
        out[..k].copy_from_slice(&coeffs[..k]);
        out
    }
}
