//! Gauss–Legendre rules and orthonormal associated Legendre functions.

use std::f64::consts::PI;

/// Gauss–Legendre nodes (descending, so node 0 is nearest x = 1) and
/// weights on [-1, 1]. Nodes are mirrored exactly: `x[N-1-i] == -x[i]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; count];
    let mut w = vec![0.0; count];
    let half = count.div_ceil(2);
    for i in 0..half {
        let mut z = (PI * (i as f64 + 0.75) / (count as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = z;
        w[i] = weight;
        x[count - 1 - i] = -z;
        w[count - 1 - i] = weight;
    }
    if count % 2 == 1 {
        x[count / 2] = 0.0;
    }
    (x, w)
}

/// P_N(z) and P_N'(z) by the three-term recurrence.
fn legendre_with_derivative(degree: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if degree == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=degree {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let n = degree as f64;
    let dp = n * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Integrate `f` over [a, b] with an `count`-point Gauss–Legendre rule.
pub fn integrate_interval<F: Fn(f64) -> f64>(a: f64, b: f64, count: usize, f: F) -> f64 {
    let (x, w) = gauss_legendre(count);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    crate::exec::compensated_sum(x.iter().zip(&w).map(|(&xi, &wi)| wi * f(mid + half * xi))) * half
}

/// Flat index of (l, m) in a triangular table with `0 <= m <= l <= lmax`,
/// ordered by m then l.
#[inline]
pub fn tri_index(lmax: usize, l: usize, m: usize) -> usize {
    // rows m' < m hold (lmax + 1 - m') entries each
    m * (lmax + 1) - m * m.saturating_sub(1) / 2 + (l - m)
}

/// Number of (l, m) pairs with 0 <= m <= l <= lmax.
pub fn tri_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Orthonormal associated Legendre functions at one colatitude: `p` holds
/// P̃_l^m(cos θ) with ∫_{-1}^{1} (P̃_l^m)^2 dx = 1 and `dp` holds dP̃_l^m/dθ.
/// θ must be strictly inside (0, π).
pub fn normalized_alf(lmax: usize, cos_t: f64, sin_t: f64) -> (Vec<f64>, Vec<f64>) {
    let len = tri_len(lmax);
    let mut p = vec![0.0; len];
    let mut dp = vec![0.0; len];
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t;
        }
        let base = tri_index(lmax, m, m);
        p[base] = pmm;
        if m < lmax {
            p[base + 1] = (2.0 * m as f64 + 3.0).sqrt() * cos_t * pmm;
        }
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let idx = base + (l - m);
            p[idx] = a * (cos_t * p[idx - 1] - b * p[idx - 2]);
        }
        for l in m..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let idx = base + (l - m);
            let prev = if l > m {
                ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt() * p[idx - 1]
            } else {
                0.0
            };
            dp[idx] = (lf * cos_t * p[idx] - prev) / sin_t;
        }
    }
    (p, dp)
}
