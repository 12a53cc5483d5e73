//! Elementary symmetric functions σ_k of symmetric matrices and their
//! derivatives with respect to the matrix entries.

use crate::error::{Error, Result};

/// Symmetric m×m matrix; only the upper triangle is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            upper: vec![0.0; order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut a = Self::zeros(order);
        for i in 0..order {
            a.set(i, i, 1.0);
        }
        a
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut a = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            a.set(i, i, v);
        }
        a
    }

    /// Upper triangle in row-major order: (0,0), (0,1), ..., (1,1), ...
    pub fn from_upper(order: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != order * (order + 1) / 2 {
            return Err(Error::LengthMismatch {
                got: upper.len(),
                expected: order * (order + 1) / 2,
            });
        }
        Ok(Self {
            order,
            upper: upper.to_vec(),
        })
    }

    /// Symmetrizes `(A + Aᵀ)/2` of a dense row-major matrix.
    pub fn from_dense(order: usize, dense: &[f64]) -> Self {
        let mut a = Self::zeros(order);
        for i in 0..order {
            for j in i..order {
                a.set(i, j, 0.5 * (dense[i * order + j] + dense[j * order + i]));
            }
        }
        a
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.order - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.upper[s] = v;
    }

    pub fn dense(&self) -> Vec<f64> {
        let m = self.order;
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                d[i * m + j] = self.get(i, j);
            }
        }
        d
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.order;
        let mat = nalgebra::DMatrix::from_fn(m, m, |i, j| self.get(i, j));
        let mut ev: Vec<f64> = mat.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// QᵀAQ for a dense row-major Q.
    pub fn congruence(&self, q: &[f64]) -> SymMatrix {
        let m = self.order;
        let a = self.dense();
        let aq = matmul(&a, q, m);
        let mut qt = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                qt[i * m + j] = q[j * m + i];
            }
        }
        SymMatrix::from_dense(m, &matmul(&qt, &aq, m))
    }
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            for j in 0..m {
                c[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    c
}

/// All σ_0..σ_m of A by the Faddeev–LeVerrier recurrence on the
/// characteristic polynomial det(tI − A) = Σ (−1)^k σ_k t^{m−k}.
pub fn sigma_all(a: &SymMatrix) -> Vec<f64> {
    let m = a.order();
    let ad = a.dense();
    let mut sig = vec![0.0; m + 1];
    sig[0] = 1.0;
    // M_k = A M_{k−1} + c_{k−1} I, c_k = −tr(A M_k)/k, σ_k = (−1)^k c_k
    let mut mk = vec![0.0; m * m];
    let mut c_prev = 1.0;
    for k in 1..=m {
        let mut next = matmul(&ad, &mk, m);
        for i in 0..m {
            next[i * m + i] += c_prev;
        }
        let amk = matmul(&ad, &next, m);
        let tr: f64 = (0..m).map(|i| amk[i * m + i]).sum();
        let ck = -tr / k as f64;
        sig[k] = if k % 2 == 0 { ck } else { -ck };
        mk = next;
        c_prev = ck;
    }
    sig
}

pub fn sigma_k(a: &SymMatrix, k: usize) -> Result<f64> {
    if k > a.order() {
        return Err(Error::OutOfRange { k, max: a.order() });
    }
    if k == 0 {
        return Ok(1.0);
    }
    Ok(sigma_all(a)[k])
}

/// ∂σ_k/∂A_{αβ}, treating every entry as independent:
/// Σ_{j<k} (−1)^j σ_{k−1−j}(A) A^j.
pub fn sigma_k_gradient(a: &SymMatrix, k: usize) -> Result<SymMatrix> {
    let m = a.order();
    if k == 0 || k > m {
        return Err(Error::OutOfRange { k, max: m });
    }
    let sig = sigma_all(a);
    let ad = a.dense();
    let mut power = vec![0.0; m * m];
    for i in 0..m {
        power[i * m + i] = 1.0;
    }
    let mut acc = vec![0.0; m * m];
    for j in 0..k {
        let coef = if j % 2 == 0 { 1.0 } else { -1.0 } * sig[k - 1 - j];
        for (x, p) in acc.iter_mut().zip(&power) {
            *x += coef * p;
        }
        power = matmul(&ad, &power, m);
    }
    Ok(SymMatrix::from_dense(m, &acc))
}

/// Generalized Kronecker symbol δ(I; J): the sign of the permutation taking
/// J to I, or 0 when I has repeats or is not a permutation of J.
pub fn kronecker_delta(upper: &[usize], lower: &[usize]) -> i32 {
    if upper.len() != lower.len() {
        return 0;
    }
    let len = upper.len();
    for a in 0..len {
        for b in (a + 1)..len {
            if upper[a] == upper[b] {
                return 0;
            }
        }
    }
    let mut perm = Vec::with_capacity(len);
    for &u in upper {
        match lower.iter().position(|&l| l == u) {
            Some(p) => perm.push(p),
            None => return 0,
        }
    }
    // parity by cycle decomposition
    let mut seen = vec![false; len];
    let mut sign = 1;
    for s in 0..len {
        if seen[s] {
            continue;
        }
        let mut c = s;
        let mut cycle = 0;
        while !seen[c] {
            seen[c] = true;
            c = perm[c];
            cycle += 1;
        }
        if cycle % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Dense fourth-order tensor of second derivatives ∂²σ_k/∂A_{αβ}∂A_{μν},
/// from the generalized Kronecker-symbol expansion.
#[derive(Debug, Clone)]
pub struct SigmaSecondDerivative {
    order: usize,
    data: Vec<f64>,
}

impl SigmaSecondDerivative {
    pub fn get(&self, alpha: usize, beta: usize, mu: usize, nu: usize) -> f64 {
        let m = self.order;
        self.data[((alpha * m + beta) * m + mu) * m + nu]
    }
}

/// Supported for matrices of order m <= 3 and 2 <= k <= m.
pub fn sigma_k_second_derivative(a: &SymMatrix, k: usize) -> Result<SigmaSecondDerivative> {
    let m = a.order();
    if m > 3 {
        return Err(Error::Format(format!(
            "second derivatives of sigma_k are implemented for order <= 3 (got {m})"
        )));
    }
    if k < 2 || k > m {
        return Err(Error::OutOfRange { k, max: m });
    }
    let r = k - 2;
    let fact: f64 = (1..=r).map(|v| v as f64).product();
    let tuples = index_tuples(m, r);
    let mut data = vec![0.0; m * m * m * m];
    for alpha in 0..m {
        for beta in 0..m {
            for mu in 0..m {
                for nu in 0..m {
                    let mut s = 0.0;
                    for is in &tuples {
                        for js in &tuples {
                            let mut upper = vec![alpha, mu];
                            upper.extend(is);
                            let mut lower = vec![beta, nu];
                            lower.extend(js);
                            let d = kronecker_delta(&upper, &lower);
                            if d != 0 {
                                let prod: f64 = is.iter().zip(js).map(|(&i, &j)| a.get(i, j)).product();
                                s += d as f64 * prod;
                            }
                        }
                    }
                    data[((alpha * m + beta) * m + mu) * m + nu] = s / fact;
                }
            }
        }
    }
    Ok(SigmaSecondDerivative { order: m, data })
}

fn index_tuples(m: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..m).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// σ_k of a vector by the product-expansion recurrence.
pub fn sigma_of_values(lambda: &[f64], k: usize) -> f64 {
    if k > lambda.len() {
        return 0.0;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &l in lambda {
        for j in (1..=k).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e[k]
}

/// λ ∈ Γ_k ⇔ σ_i(λ) > 0 for 1 <= i <= k.
pub fn garding_cone_member(lambda: &[f64], k: usize) -> bool {
    (1..=k).all(|i| sigma_of_values(lambda, i) > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn subset_sigma(ev: &[f64], k: usize) -> f64 {
        let m = ev.len();
        (0u32..(1 << m))
            .filter(|s| s.count_ones() as usize == k)
            .map(|s| (0..m).filter(|i| s & (1 << i) != 0).map(|i| ev[i]).product::<f64>())
            .sum()
    }

    fn sym_from(order: usize, vals: &[f64]) -> SymMatrix {
        SymMatrix::from_upper(order, &vals[..order * (order + 1) / 2]).unwrap()
    }

    #[test]
    fn storage_slots_are_distinct() {
        for m in 1..6 {
            let mut a = SymMatrix::zeros(m);
            let mut v = 1.0;
            for i in 0..m {
                for j in i..m {
                    a.set(i, j, v);
                    v += 1.0;
                }
            }
            let mut v = 1.0;
            for i in 0..m {
                for j in i..m {
                    assert_eq!(a.get(i, j), v);
                    assert_eq!(a.get(j, i), v);
                    v += 1.0;
                }
            }
        }
    }

    #[test]
    fn diag_examples() {
        let a = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(sigma_k(&a, 1).unwrap(), 6.0);
        // pairs: 1·2 + 1·3 + 2·3
        assert_eq!(sigma_k(&a, 2).unwrap(), 11.0);
        assert_eq!(sigma_k(&a, 3).unwrap(), 6.0);
        assert_eq!(sigma_k(&a, 0).unwrap(), 1.0);
        assert!(matches!(sigma_k(&a, 4), Err(Error::OutOfRange { .. })));
        let g = sigma_k_gradient(&a, 2).unwrap();
        assert_eq!(g.get(0, 0), 5.0);
        assert_eq!(g.get(1, 1), 4.0);
        assert_eq!(g.get(0, 1), 0.0);
        assert!(sigma_k_gradient(&a, 0).is_err());
    }

    #[test]
    fn gradient_k1_is_identity() {
        let a = sym_from(3, &[0.3, -1.0, 2.0, 4.0, 0.5, -2.0]);
        assert_eq!(sigma_k_gradient(&a, 1).unwrap(), SymMatrix::identity(3));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let a = sym_from(3, &[0.3, -1.0, 2.0, 4.0, 0.5, -2.0]);
        for k in 1..=3 {
            let g = sigma_k_gradient(&a, k).unwrap();
            for al in 0..3 {
                for be in al..3 {
                    let errs: Vec<f64> = [1e-3, 1e-4]
                        .iter()
                        .map(|&eps| {
                            let mut p = a.clone();
                            let mut q = a.clone();
                            p.set(al, be, a.get(al, be) + eps);
                            q.set(al, be, a.get(al, be) - eps);
                            let fd = (sigma_k(&p, k).unwrap() - sigma_k(&q, k).unwrap()) / (2.0 * eps);
                            // symmetric perturbation moves both (α,β) and (β,α)
                            let mult = if al == be { 1.0 } else { 2.0 };
                            (fd - mult * g.get(al, be)).abs()
                        })
                        .collect();
                    assert!(errs[0] < 1e-5 && errs[1] < 1e-7, "k={k} ({al},{be}) {errs:?}");
                }
            }
        }
    }

    #[test]
    fn second_derivative_matches_gradient_differences() {
        let a = sym_from(3, &[0.3, -1.0, 2.0, 4.0, 0.5, -2.0]);
        for k in 2..=3 {
            let h = sigma_k_second_derivative(&a, k).unwrap();
            for mu in 0..3 {
                for nu in mu..3 {
                    let eps = 1e-5;
                    let mut p = a.clone();
                    let mut q = a.clone();
                    p.set(mu, nu, a.get(mu, nu) + eps);
                    q.set(mu, nu, a.get(mu, nu) - eps);
                    let gp = sigma_k_gradient(&p, k).unwrap();
                    let gq = sigma_k_gradient(&q, k).unwrap();
                    for al in 0..3 {
                        for be in 0..3 {
                            let fd = (gp.get(al, be) - gq.get(al, be)) / (2.0 * eps);
                            let exact = if mu == nu {
                                h.get(al, be, mu, nu)
                            } else {
                                h.get(al, be, mu, nu) + h.get(al, be, nu, mu)
                            };
                            assert!((fd - exact).abs() < 1e-8, "k={k} {al}{be}{mu}{nu}: {fd} {exact}");
                        }
                    }
                }
            }
        }
        assert!(sigma_k_second_derivative(&SymMatrix::identity(4), 2).is_err());
        assert!(sigma_k_second_derivative(&a, 1).is_err());
    }

    #[test]
    fn kronecker_symbol() {
        assert_eq!(kronecker_delta(&[0, 1], &[0, 1]), 1);
        assert_eq!(kronecker_delta(&[0, 1], &[1, 0]), -1);
        assert_eq!(kronecker_delta(&[0, 0], &[0, 0]), 0);
        assert_eq!(kronecker_delta(&[0, 1, 2], &[1, 2, 0]), 1);
        assert_eq!(kronecker_delta(&[0, 2], &[0, 1]), 0);
    }

    #[test]
    fn garding_cone_examples() {
        assert!(garding_cone_member(&[1.0, 1.0, 1.0], 3));
        let l = [-1.0, 5.0, 5.0];
        assert!(garding_cone_member(&l, 1));
        assert_eq!(sigma_of_values(&l, 2), 15.0);
        assert!(garding_cone_member(&l, 2));
        assert_eq!(sigma_of_values(&l, 3), -25.0);
        assert!(!garding_cone_member(&l, 3));
        for k in 1..4 {
            assert!(!garding_cone_member(&[0.0; 3], k));
        }
    }

    fn rotation(order: usize, seed: &[f64]) -> Vec<f64> {
        let m = nalgebra::DMatrix::from_fn(order, order, |i, j| seed[(i * order + j) % seed.len()] + if i == j { 2.0 } else { 0.0 });
        let q = m.qr().q();
        let mut out = vec![0.0; order * order];
        for i in 0..order {
            for j in 0..order {
                out[i * order + j] = q[(i, j)];
            }
        }
        out
    }

    proptest! {
        #[test]
        fn orthogonal_invariance(order in 1usize..=4, vals in prop::collection::vec(-2.0f64..2.0, 10), seed in prop::collection::vec(-1.0f64..1.0, 16)) {
            let a = sym_from(order, &vals);
            let q = rotation(order, &seed);
            let b = a.congruence(&q);
            for k in 0..=order {
                let sa = sigma_k(&a, k).unwrap();
                let sb = sigma_k(&b, k).unwrap();
                prop_assert!((sa - sb).abs() < 1e-12 * (1.0 + sa.abs()) * 10.0, "k={} {} {}", k, sa, sb);
            }
        }

        #[test]
        fn euler_homogeneity(order in 1usize..=4, vals in prop::collection::vec(-2.0f64..2.0, 10)) {
            let a = sym_from(order, &vals);
            for k in 1..=order {
                let g = sigma_k_gradient(&a, k).unwrap();
                let mut s = 0.0;
                for i in 0..order {
                    for j in 0..order {
                        s += g.get(i, j) * a.get(i, j);
                    }
                }
                let sk = sigma_k(&a, k).unwrap();
                prop_assert!((s / k as f64 - sk).abs() < 1e-10 * (1.0 + sk.abs()));
            }
        }

        #[test]
        fn matches_subset_enumeration(order in 1usize..=4, vals in prop::collection::vec(-2.0f64..2.0, 10)) {
            let a = sym_from(order, &vals);
            let ev = a.eigenvalues();
            for k in 0..=order {
                let brute = subset_sigma(&ev, k);
                let s = sigma_k(&a, k).unwrap();
                prop_assert!((s - brute).abs() < 1e-10 * (1.0 + brute.abs()));
                prop_assert!((sigma_of_values(&ev, k) - brute).abs() < 1e-10 * (1.0 + brute.abs()));
            }
        }
    }
}
