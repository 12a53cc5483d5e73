//! Real spherical-harmonic transforms on a Gauss–Legendre × equiangular grid.
//!
//! Coefficient layout (length (L+1)^2): the cosine block `a_lm` for all
//! 0 <= m <= l <= L in [`tri_index`] order, followed by the sine block
//! `b_lm` for m >= 1. A field is
//! `Σ_{l,m} P̃_l^m(cos θ) (a_lm cos mλ + b_lm sin mλ)`.

use super::legendre::{gauss_legendre, normalized_alf, tri_index, tri_len};
use super::Jet;
use crate::exec::Exec;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct ShBasis {
    pub(crate) lmax: usize,
    pub(crate) nlat: usize,
    pub(crate) nlon: usize,
    pub(crate) cos_t: Vec<f64>,
    pub(crate) sin_t: Vec<f64>,
    pub(crate) gauss_w: Vec<f64>,
    pub(crate) lambda: Vec<f64>,
    // [i * tri_len + tri_index]
    p: Vec<f64>,
    dp: Vec<f64>,
    // [j * (lmax + 1) + m]
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
}

impl ShBasis {
    pub fn new(lmax: usize) -> Self {
        let nlat = lmax + 1;
        let nlon = 2 * lmax + 2;
        let (x, gauss_w) = gauss_legendre(nlat);
        let sin_t: Vec<f64> = x.iter().map(|&c| ((1.0 - c) * (1.0 + c)).sqrt()).collect();
        let tl = tri_len(lmax);
        let north = nlat.div_ceil(2);
        let mut p = Vec::with_capacity(north * tl);
        let mut dp = Vec::with_capacity(north * tl);
        for i in 0..north {
            let (pi, dpi) = normalized_alf(lmax, x[i], sin_t[i]);
            p.extend(pi);
            dp.extend(dpi);
        }
        let lambda: Vec<f64> = (0..nlon).map(|j| 2.0 * PI * j as f64 / nlon as f64).collect();
        let half = nlon / 2;
        let mut cos_m = Vec::with_capacity(nlon * (lmax + 1));
        let mut sin_m = Vec::with_capacity(nlon * (lmax + 1));
        for j in 0..half {
            for m in 0..=lmax {
                let k = (m * j) % nlon;
                let ang = 2.0 * PI * k as f64 / nlon as f64;
                cos_m.push(ang.cos());
                sin_m.push(ang.sin());
            }
        }
        // cos m(λ + π) = (−1)^m cos mλ, bit for bit
        for j in 0..half * (lmax + 1) {
            let sign = if (j % (lmax + 1)) % 2 == 0 { 1.0 } else { -1.0 };
            cos_m.push(sign * cos_m[j]);
            sin_m.push(sign * sin_m[j]);
        }
        Self {
            lmax,
            nlat,
            nlon,
            cos_t: x,
            sin_t,
            gauss_w,
            lambda,
            p,
            dp,
            cos_m,
            sin_m,
        }
    }

    /// Northern rings; ring `nlat - 1 - i` mirrors ring `i`.
    fn north(&self) -> usize {
        self.nlat.div_ceil(2)
    }

    /// The mirror ring of northern ring `i`, if distinct.
    fn mirror(&self, i: usize) -> Option<usize> {
        let k = self.nlat - 1 - i;
        (k != i).then_some(k)
    }

    pub fn coeff_len(&self) -> usize {
        (self.lmax + 1) * (self.lmax + 1)
    }

    /// (l, m, is_sine) for a flat coefficient index.
    pub fn index_info(&self, idx: usize) -> (usize, usize, bool) {
        let tl = tri_len(self.lmax);
        let (flat, sine) = if idx < tl {
            (idx, false)
        } else {
            (idx - tl + self.lmax + 1, true)
        };
        // invert tri_index
        let mut m = 0;
        let mut start = 0;
        loop {
            let row = self.lmax + 1 - m;
            if flat < start + row {
                return (m + flat - start, m, sine);
            }
            start += row;
            m += 1;
        }
    }

    #[inline]
    fn cos_index(&self, l: usize, m: usize) -> usize {
        tri_index(self.lmax, l, m)
    }

    #[inline]
    fn sin_index(&self, l: usize, m: usize) -> usize {
        debug_assert!(m >= 1);
        tri_len(self.lmax) + tri_index(self.lmax, l, m) - (self.lmax + 1)
    }

    /// Coefficient index of the cosine (`sine == false`) or sine harmonic.
    pub fn index(&self, l: usize, m: usize, sine: bool) -> usize {
        if sine {
            self.sin_index(l, m)
        } else {
            self.cos_index(l, m)
        }
    }

    /// Longitudinal DFT of ring `i`, folded over the half circles with
    /// cos m(λ + π) = (−1)^m cos mλ.
    fn ring_dft(&self, values: &[f64], i: usize) -> (Vec<f64>, Vec<f64>) {
        let (lmax, nlon) = (self.lmax, self.nlon);
        let half = nlon / 2;
        let row = &values[i * nlon..(i + 1) * nlon];
        let mut c = vec![0.0; lmax + 1];
        let mut s = vec![0.0; lmax + 1];
        for k in 0..half {
            let (sum, diff) = (row[k] + row[k + half], row[k] - row[k + half]);
            let base = k * (lmax + 1);
            for m in 0..=lmax {
                let v = if m % 2 == 0 { sum } else { diff };
                c[m] += v * self.cos_m[base + m];
                s[m] += v * self.sin_m[base + m];
            }
        }
        let inv = 1.0 / nlon as f64;
        c[0] *= inv;
        s[0] = 0.0;
        for m in 1..=lmax {
            c[m] *= 2.0 * inv;
            s[m] *= 2.0 * inv;
        }
        (c, s)
    }

    /// Forward transform. Rings are folded in mirror pairs so that data
    /// which is exactly even produces exactly zero odd-degree coefficients.
    pub fn analyze(&self, values: &[f64], exec: Exec) -> Vec<f64> {
        let lmax = self.lmax;
        let tl = tri_len(lmax);
        // for even data the mirror DFT is (−1)^m times the northern one, bit for bit
        let rings: Vec<[Vec<f64>; 4]> = exec.map(self.north(), |i| {
            let (c, s) = self.ring_dft(values, i);
            let (cm, sm) = match self.mirror(i) {
                Some(k) => self.ring_dft(values, k),
                None => (vec![0.0; lmax + 1], vec![0.0; lmax + 1]),
            };
            [c, s, cm, sm]
        });
        let mut out = vec![0.0; self.coeff_len()];
        for m in 0..=lmax {
            for l in m..=lmax {
                let t = tri_index(lmax, l, m);
                let sign = if (l + m) % 2 == 0 { 1.0 } else { -1.0 };
                let mut ca = 0.0;
                let mut sa = 0.0;
                for (i, [c, s, cm, sm]) in rings.iter().enumerate() {
                    let wp = self.gauss_w[i] * self.p[i * tl + t];
                    if self.mirror(i).is_some() {
                        ca += wp * (c[m] + sign * cm[m]);
                        sa += wp * (s[m] + sign * sm[m]);
                    } else {
                        ca += wp * c[m];
                        sa += wp * s[m];
                    }
                }
                out[self.cos_index(l, m)] = ca;
                if m > 0 {
                    out[self.sin_index(l, m)] = sa;
                }
            }
        }
        out
    }

    /// Parity-split Legendre sums for northern ring `i`: for each m,
    /// `[even, odd]` parts (by l + m) of C, dC, S, dS.
    fn legendre_sums(&self, coeffs: &[f64], i: usize, derivs: bool) -> Vec<[[f64; 4]; 2]> {
        let lmax = self.lmax;
        let tl = tri_len(lmax);
        let mut acc = vec![[[0.0f64; 4]; 2]; lmax + 1];
        for m in 0..=lmax {
            let a = &mut acc[m];
            for l in m..=lmax {
                let t = tri_index(lmax, l, m);
                let par = (l + m) % 2;
                let pv = self.p[i * tl + t];
                let ca = coeffs[self.cos_index(l, m)];
                a[par][0] += ca * pv;
                if derivs {
                    a[par][1] += ca * self.dp[i * tl + t];
                }
                if m > 0 {
                    let sa = coeffs[self.sin_index(l, m)];
                    a[par][2] += sa * pv;
                    if derivs {
                        a[par][3] += sa * self.dp[i * tl + t];
                    }
                }
            }
        }
        acc
    }

    /// Combine parity parts for the northern ring (`south == false`) or its
    /// mirror: values flip with (−1)^{l+m}, θ-derivatives with −(−1)^{l+m}.
    fn fold(acc: &[[[f64; 4]; 2]], south: bool) -> Vec<[f64; 4]> {
        acc.iter()
            .map(|[e, o]| {
                if south {
                    [e[0] - o[0], o[1] - e[1], e[2] - o[2], o[3] - e[3]]
                } else {
                    [e[0] + o[0], e[1] + o[1], e[2] + o[2], e[3] + o[3]]
                }
            })
            .collect()
    }

    fn for_ring_pairs<T: Send, F>(&self, exec: Exec, f: F) -> Vec<T>
    where
        F: Fn(usize, bool) -> T + Sync + Send,
    {
        // ring order: northern rings ascending then mirrors ascending
        let north = self.north();
        let pairs: Vec<(T, Option<T>)> = exec.map(north, |i| {
            let n = f(i, false);
            let s = self.mirror(i).map(|_| f(i, true));
            (n, s)
        });
        let mut norths = Vec::with_capacity(self.nlat);
        let mut souths = Vec::with_capacity(north);
        for (n, s) in pairs {
            norths.push(n);
            if let Some(s) = s {
                souths.push(s);
            }
        }
        souths.reverse();
        norths.extend(souths);
        norths
    }

    pub fn synthesize(&self, coeffs: &[f64], exec: Exec) -> Vec<f64> {
        let lmax = self.lmax;
        let nlon = self.nlon;
        let rings = self.for_ring_pairs(exec, |i, south| {
            let acc = Self::fold(&self.legendre_sums(coeffs, i, false), south);
            (0..nlon)
                .map(|j| {
                    let base = j * (lmax + 1);
                    (0..=lmax)
                        .map(|m| acc[m][0] * self.cos_m[base + m] + acc[m][2] * self.sin_m[base + m])
                        .sum::<f64>()
                })
                .collect::<Vec<f64>>()
        });
        rings.concat()
    }

    /// Values and covariant first/second derivatives in the frame (e_θ, e_λ).
    /// θθ-derivatives come from the associated Legendre equation.
    pub fn jet(&self, coeffs: &[f64], exec: Exec) -> Jet {
        let lmax = self.lmax;
        let nlon = self.nlon;
        let rings = self.for_ring_pairs(exec, |i, south| {
            let acc = Self::fold(&self.legendre_sums(coeffs, i, true), south);
            // −l(l+1)-weighted sums need their own parity split
            let lap_acc = {
                let tl = tri_len(lmax);
                let mut la = vec![[[0.0f64; 2]; 2]; lmax + 1];
                for m in 0..=lmax {
                    for l in m..=lmax {
                        let t = tri_index(lmax, l, m);
                        let par = (l + m) % 2;
                        let w = -((l * (l + 1)) as f64) * self.p[i * tl + t];
                        la[m][par][0] += coeffs[self.cos_index(l, m)] * w;
                        if m > 0 {
                            la[m][par][1] += coeffs[self.sin_index(l, m)] * w;
                        }
                    }
                }
                la.iter()
                    .map(|[e, o]| {
                        if south {
                            [e[0] - o[0], e[1] - o[1]]
                        } else {
                            [e[0] + o[0], e[1] + o[1]]
                        }
                    })
                    .collect::<Vec<_>>()
            };
            let ring = if south { self.nlat - 1 - i } else { i };
            let st = self.sin_t[ring];
            let ct = self.cos_t[ring];
            let cot = ct / st;
            let mut out: [Vec<f64>; 7] = Default::default();
            for v in out.iter_mut() {
                v.reserve(nlon);
            }
            for j in 0..nlon {
                let base = j * (lmax + 1);
                let (mut v, mut vt, mut vtt, mut vl, mut vll, mut vtl, mut lap) =
                    (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                for m in 0..=lmax {
                    let cm = self.cos_m[base + m];
                    let sm = self.sin_m[base + m];
                    let [c0, c1, s0, s1] = acc[m];
                    let [lc, ls] = lap_acc[m];
                    let mf = m as f64;
                    let m2 = mf * mf / (st * st);
                    let ddc = -cot * c1 + lc + m2 * c0;
                    let dds = -cot * s1 + ls + m2 * s0;
                    v += c0 * cm + s0 * sm;
                    vt += c1 * cm + s1 * sm;
                    vtt += ddc * cm + dds * sm;
                    vl += mf * (s0 * cm - c0 * sm);
                    vtl += mf * (s1 * cm - c1 * sm);
                    vll += -mf * mf * (c0 * cm + s0 * sm);
                    lap += lc * cm + ls * sm;
                }
                out[0].push(v);
                out[1].push(vt);
                out[2].push(vl / st);
                out[3].push(vtt);
                out[4].push(vtl / st - ct * vl / (st * st));
                out[5].push(vll / (st * st) + cot * vt);
                out[6].push(lap);
            }
            out
        });
        let mut jet = Jet::with_capacity(self.nlat * nlon);
        for r in rings {
            let [v, g1, g2, h11, h12, h22, lap] = r;
            jet.value.extend(v);
            jet.grad1.extend(g1);
            jet.grad2.extend(g2);
            jet.h11.extend(h11);
            jet.h12.extend(h12);
            jet.h22.extend(h22);
            jet.laplacian.extend(lap);
        }
        jet
    }

    /// Evaluate the band-limited field at an arbitrary direction.
    pub fn evaluate_at(&self, coeffs: &[f64], theta: f64, lambda: f64) -> f64 {
        let (ct, st) = (theta.cos(), theta.sin().max(1e-300));
        let (p, _) = normalized_alf(self.lmax, ct, st);
        let mut v = 0.0;
        for m in 0..=self.lmax {
            let (cm, sm) = ((m as f64 * lambda).cos(), (m as f64 * lambda).sin());
            for l in m..=self.lmax {
                let pv = p[tri_index(self.lmax, l, m)];
                v += coeffs[self.cos_index(l, m)] * pv * cm;
                if m > 0 {
                    v += coeffs[self.sin_index(l, m)] * pv * sm;
                }
            }
        }
        v
    }

    /// Map coefficients to another degree by truncation or zero padding.
    pub fn transfer(&self, coeffs: &[f64], target: &ShBasis) -> Vec<f64> {
        let mut out = vec![0.0; target.coeff_len()];
        let lmax = self.lmax.min(target.lmax);
        for m in 0..=lmax {
            for l in m..=lmax {
                out[target.cos_index(l, m)] = coeffs[self.cos_index(l, m)];
                if m > 0 {
                    out[target.sin_index(l, m)] = coeffs[self.sin_index(l, m)];
                }
            }
        }
        out
    }
}
