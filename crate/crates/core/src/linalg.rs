//! Restarted GMRES with right preconditioning.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Target ‖b − Ax‖₂ / ‖b‖₂.
    pub rel_tol: f64,
    /// Accept the iterate when the target is missed but this level is reached.
    pub accept_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 60,
            max_iterations: 600,
            rel_tol: 1e-13,
            accept_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves A M⁻¹ y = b and returns x = M⁻¹ y with a zero initial guess.
pub fn gmres<A, P>(apply: A, precond: P, b: &[f64], opts: &GmresOptions) -> Result<(Vec<f64>, GmresOutcome)>
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let dim = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; dim];
    if bnorm == 0.0 {
        return Ok((
            x,
            GmresOutcome {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let m = opts.restart.max(1).min(dim.max(1));
    let mut total = 0;
    let mut r = b.to_vec();
    let mut rel = 1.0;
    while total < opts.max_iterations {
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= opts.rel_tol {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && total < opts.max_iterations {
            let mut w = apply(&precond(&basis[k]));
            // modified Gram–Schmidt with one reorthogonalization pass
            for _ in 0..2 {
                for (j, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    h[j][k] += c;
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = if d == 0.0 { 1.0 } else { h[k][k] / d };
            sn[k] = if d == 0.0 { 0.0 } else { h[k + 1][k] / d };
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            rel = g[k].abs() / bnorm;
            if rel <= opts.rel_tol || wn <= 1e-300 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut z = vec![0.0; dim];
        for (yi, v) in y.iter().zip(&basis) {
            for (zi, vi) in z.iter_mut().zip(v) {
                *zi += yi * vi;
            }
        }
        for (xi, zi) in x.iter_mut().zip(precond(&z)) {
            *xi += zi;
        }
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rel = norm(&r) / bnorm;
        if rel <= opts.rel_tol {
            break;
        }
    }
    if !(rel <= opts.accept_tol) {
        return Err(Error::LinearStagnation {
            iterations: total,
            relative: rel,
        });
    }
    Ok((
        x,
        GmresOutcome {
            iterations: total,
            relative_residual: rel,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = (4.0 + i as f64) * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= 0.5 * x[i + 1];
                }
                v
            })
            .collect()
    }

    #[test]
    fn solves_nonsymmetric_system() {
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let (x, out) = gmres(tridiag, |v| v.to_vec(), &b, &GmresOptions::default()).unwrap();
        let r: f64 = tridiag(&x).iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(r < 1e-12, "{r} {out:?}");
    }

    #[test]
    fn diagonal_preconditioner_accelerates() {
        let b: Vec<f64> = (0..200).map(|i| 1.0 + (i % 7) as f64).collect();
        let opts = GmresOptions {
            restart: 10,
            ..Default::default()
        };
        let (_, plain) = gmres(tridiag, |v| v.to_vec(), &b, &opts).unwrap();
        let jacobi = |v: &[f64]| v.iter().enumerate().map(|(i, x)| x / (4.0 + i as f64)).collect();
        let (x, pre) = gmres(tridiag, jacobi, &b, &opts).unwrap();
        assert!(pre.iterations < plain.iterations);
        let r: f64 = tridiag(&x).iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(r < 1e-10);
    }

    #[test]
    fn zero_rhs_and_stagnation() {
        let (x, out) = gmres(tridiag, |v| v.to_vec(), &[0.0; 5], &GmresOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
        // singular operator with b outside the range
        let sing = |v: &[f64]| vec![v[0], 0.0];
        let opts = GmresOptions {
            max_iterations: 10,
            ..Default::default()
        };
        assert!(matches!(
            gmres(sing, |v| v.to_vec(), &[1.0, 1.0], &opts),
            Err(Error::LinearStagnation { .. })
        ));
    }
}
