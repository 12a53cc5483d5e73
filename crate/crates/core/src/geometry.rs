//! The hypersurface with horospherical support function log φ, realised in
//! the hyperboloid model of H^{n+1} ⊂ R^{n+1,1}, with its curvature data,
//! the integral identities and the Poincaré-ball mesh export.
//!
//! Points are stored as `[X_1, …, X_{n+1}, X_0]` with the time component
//! last; ⟨A, B⟩ = Σ A_i B_i − A_0 B_0.

use crate::equation::{residual, u_matrix, PrescribedData, SupportField, UMatrixField};
use crate::error::{Error, Result};
use crate::exec::{compensated_sum, Exec};
use crate::io::write_atomic;
use crate::sphere_grid::{Grid, GridMode, SphericalField};
use crate::symmetric_functions::sigma_of_values;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    let t = a.len() - 1;
    a[..t].iter().zip(&b[..t]).map(|(x, y)| x * y).sum::<f64>() - a[t] * b[t]
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone)]
pub struct EmbeddedHypersurface {
    grid: Arc<Grid>,
    phi: Vec<f64>,
    /// X̄ per node.
    pub points: Vec<Vec<f64>>,
    /// ν = X̄ − φ⁻¹(x, 1).
    pub normals: Vec<Vec<f64>>,
    pub cosh_r: Vec<f64>,
    /// ⟨V, ν⟩ with V = sinh r ∂_r.
    pub v_nu: Vec<f64>,
    /// Eigenvalues of U[φ] per node, ascending, with multiplicity.
    pub u_eigenvalues: Vec<Vec<f64>>,
}

/// U[φ] counts as singular when its smallest eigenvalue is below this.
pub const SINGULAR_U: f64 = 1e-10;

fn require_supporting(phi: &SupportField) -> Result<UMatrixField> {
    let min_phi = phi.field().min();
    if min_phi <= 1.0 {
        return Err(Error::NotAboveOne { min_phi });
    }
    let u = u_matrix(phi);
    let (min_eig, node) = u.min_eigenvalue();
    if min_eig <= SINGULAR_U {
        let p = phi.grid().nodes()[node];
        return Err(Error::NotHConvex {
            min_eig,
            node,
            theta: p.theta,
            lambda: p.lambda,
        });
    }
    Ok(u)
}

/// X̄(x) = ½φ(−x, 1) + ½(|Dφ|²/φ + 1/φ)(x, 1) − (Dφ, 0).
pub fn embed(phi: &SupportField) -> Result<EmbeddedHypersurface> {
    let u = require_supporting(phi)?;
    let grid = phi.grid().clone();
    let (n, mode) = (grid.dimension(), grid.mode());
    let jet = phi.field().jet();
    let p = phi.values();
    let len = grid.len();
    let mut points = Vec::with_capacity(len);
    let mut normals = Vec::with_capacity(len);
    let mut cosh_r = Vec::with_capacity(len);
    let mut v_nu = Vec::with_capacity(len);
    for (i, node) in grid.nodes().iter().enumerate() {
        let x = node.position(n, mode);
        let (e1, e2) = node.frame(n, mode);
        let g2 = jet.grad_sq(i);
        let a = 0.5 * (g2 + 1.0) / p[i];
        let mut xb: Vec<f64> = (0..=n)
            .map(|d| (a - 0.5 * p[i]) * x[d] - jet.grad1[i] * e1[d] - jet.grad2[i] * e2[d])
            .collect();
        xb.push(0.5 * p[i] + a);
        let mut nu = xb.clone();
        for (d, xd) in x.iter().enumerate() {
            nu[d] -= xd / p[i];
        }
        nu[n + 1] -= 1.0 / p[i];
        cosh_r.push(0.5 * g2 / p[i] + 0.5 * (p[i] + 1.0 / p[i]));
        v_nu.push(0.5 * g2 / p[i] + 0.5 * (p[i] - 1.0 / p[i]));
        points.push(xb);
        normals.push(nu);
    }
    Ok(EmbeddedHypersurface {
        grid,
        phi: p.to_vec(),
        points,
        normals,
        cosh_r,
        v_nu,
        u_eigenvalues: u.entries().iter().map(|m| m.eigenvalues()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryDefects {
    /// max |⟨X̄, X̄⟩ + 1|
    pub hyperboloid: f64,
    /// min X̄⁰
    pub min_time: f64,
    /// max |⟨ν, ν⟩ − 1|
    pub normal_length: f64,
    /// max |⟨X̄, ν⟩|
    pub tangency: f64,
    /// max |cosh r − ⟨V, ν⟩ − 1/φ|
    pub radial_identity: f64,
    /// max |cosh r − X̄⁰|
    pub cosh_r_vs_time: f64,
    /// max |⟨V, ν⟩ − ν⁰|, V = X̄⁰ X̄ − (0, 1)
    pub v_nu_vs_normal: f64,
    /// min κ_i
    pub min_kappa: f64,
}

impl EmbeddedHypersurface {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// κ_i = 1 + 1/(φ λ_i(U)), descending.
    pub fn kappa(&self) -> Vec<Vec<f64>> {
        self.u_eigenvalues
            .iter()
            .zip(&self.phi)
            .map(|(ev, p)| ev.iter().map(|l| 1.0 + 1.0 / (p * l)).collect())
            .collect()
    }

    /// R_i = φ λ_i(U) = 1/(κ_i − 1), ascending.
    pub fn radii(&self) -> Vec<Vec<f64>> {
        self.u_eigenvalues
            .iter()
            .zip(&self.phi)
            .map(|(ev, p)| ev.iter().map(|l| p * l).collect())
            .collect()
    }

    pub fn defects(&self) -> GeometryDefects {
        let mut d = GeometryDefects {
            hyperboloid: 0.0,
            min_time: f64::INFINITY,
            normal_length: 0.0,
            tangency: 0.0,
            radial_identity: 0.0,
            cosh_r_vs_time: 0.0,
            v_nu_vs_normal: 0.0,
            min_kappa: f64::INFINITY,
        };
        let t = self.grid.dimension() + 1;
        for i in 0..self.points.len() {
            let (x, nu) = (&self.points[i], &self.normals[i]);
            d.hyperboloid = d.hyperboloid.max((minkowski(x, x) + 1.0).abs());
            d.min_time = d.min_time.min(x[t]);
            d.normal_length = d.normal_length.max((minkowski(nu, nu) - 1.0).abs());
            d.tangency = d.tangency.max(minkowski(x, nu).abs());
            d.radial_identity = d
                .radial_identity
                .max((self.cosh_r[i] - self.v_nu[i] - 1.0 / self.phi[i]).abs());
            d.cosh_r_vs_time = d.cosh_r_vs_time.max((self.cosh_r[i] - x[t]).abs());
            // ⟨X̄⁰X̄ − N, ν⟩ = −⟨N, ν⟩ = ν⁰ since ⟨X̄, ν⟩ = 0
            let mut v = x.iter().map(|c| x[t] * c).collect::<Vec<_>>();
            v[t] -= 1.0;
            d.v_nu_vs_normal = d.v_nu_vs_normal.max((minkowski(&v, nu) - self.v_nu[i]).abs());
        }
        d.min_kappa = self
            .kappa()
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        d
    }

    /// Poincaré-ball image p = X_spatial / (1 + X⁰).
    pub fn ball_points(&self) -> Vec<Vec<f64>> {
        let t = self.grid.dimension() + 1;
        self.points
            .iter()
            .map(|x| x[..t].iter().map(|c| c / (1.0 + x[t])).collect())
            .collect()
    }

    /// Per-node table: theta, lambda, X components, cosh r, ⟨V,ν⟩, κ_i, R_i.
    pub fn to_csv(&self) -> String {
        let n = self.grid.dimension();
        let mut s = String::from("theta,lambda");
        for d in 1..=n + 1 {
            let _ = write!(s, ",X_{d}");
        }
        s.push_str(",X_0,cosh_r,v_nu");
        for d in 1..=n {
            let _ = write!(s, ",kappa_{d}");
        }
        for d in 1..=n {
            let _ = write!(s, ",R_{d}");
        }
        s.push('\n');
        let (kappa, radii) = (self.kappa(), self.radii());
        for (i, p) in self.grid.nodes().iter().enumerate() {
            let _ = write!(s, "{},{}", p.theta, p.lambda);
            for c in &self.points[i] {
                let _ = write!(s, ",{c}");
            }
            let _ = write!(s, ",{},{}", self.cosh_r[i], self.v_nu[i]);
            for c in kappa[i].iter().chain(&radii[i]) {
                let _ = write!(s, ",{c}");
            }
            s.push('\n');
        }
        s
    }
}

pub struct Shape {
    /// Principal curvatures per node, descending.
    pub kappa: Vec<Vec<f64>>,
    /// Hyperbolic curvature radii per node, ascending.
    pub radii: Vec<Vec<f64>>,
}

/// Eigenvalues of W = I + (φU)⁻¹ and R_i = φ λ_i(U).
pub fn shape(phi: &SupportField) -> Result<Shape> {
    let s = embed(phi)?;
    Ok(Shape {
        kappa: s.kappa(),
        radii: s.radii(),
    })
}

/// Σ R_i − f at every node.
pub fn christoffel_residual(phi: &SupportField, f: &PrescribedData) -> Result<SphericalField> {
    phi.field().check_same_grid(f.field())?;
    let sh = shape(phi)?;
    let vals = sh
        .radii
        .iter()
        .zip(f.values())
        .map(|(r, fv)| r.iter().sum::<f64>() - fv)
        .collect();
    SphericalField::new(phi.grid().clone(), vals)
}

/// φ · residual(φ, f), which equals Σ R_i − f identically.
pub fn scaled_residual(phi: &SupportField, f: &PrescribedData) -> Result<SphericalField> {
    residual(phi, f)?.zip_map(phi.field(), |r, p| r * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub k: usize,
    /// ∫ φ^{k−n} σ_{k+1}(U) dσ
    pub lhs: f64,
    /// C_n^{k+1}/C_n^k · ∫ ⟨V,ν⟩ φ^{k−n} σ_k(U) dσ
    pub rhs: f64,
    pub relative_gap: f64,
    pub coefficient: f64,
    /// Same integral with the reciprocal coefficient C_n^k/C_n^{k+1}.
    pub reciprocal_rhs: f64,
    pub reciprocal_coefficient: f64,
    pub reciprocal_relative_gap: f64,
    /// rhs / reciprocal_rhs = (C_n^{k+1}/C_n^k)²
    pub reciprocal_ratio: f64,
    /// ∫ (cosh r − ⟨V,ν⟩) H̃_j dμ with j = n − 1 − k, dμ = det U dσ
    pub geometric_lhs: f64,
    /// ∫ ⟨V,ν⟩ H̃_{j+1} dμ
    pub geometric_rhs: f64,
    pub geometric_relative_gap: f64,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Weighted integral identity for σ_k(U) at index k ∈ [0, n−1], evaluated
/// both in support-function form and through the shifted curvatures.
pub fn integral_identity_check(phi: &SupportField, k: usize) -> Result<IdentityCheck> {
    let n = phi.grid().dimension();
    if k >= n {
        return Err(Error::OutOfRange { k, max: n - 1 });
    }
    let s = embed(phi)?;
    let w = phi.grid().weights();
    let coefficient = binomial(n, k + 1) / binomial(n, k);
    let reciprocal_coefficient = 1.0 / coefficient;
    let j = n - 1 - k;
    let (mut l, mut r, mut gl, mut gr) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..w.len() {
        let p = s.phi[i];
        let ev = &s.u_eigenvalues[i];
        let pw = p.powi(k as i32 - n as i32);
        l.push(w[i] * pw * sigma_of_values(ev, k + 1));
        r.push(w[i] * s.v_nu[i] * pw * sigma_of_values(ev, k));
        let shifted: Vec<f64> = ev.iter().map(|lam| 1.0 / (p * lam)).collect();
        let dmu = w[i] * ev.iter().product::<f64>();
        let hj = sigma_of_values(&shifted, j) / binomial(n, j);
        let hj1 = sigma_of_values(&shifted, j + 1) / binomial(n, j + 1);
        gl.push((s.cosh_r[i] - s.v_nu[i]) * hj * dmu);
        gr.push(s.v_nu[i] * hj1 * dmu);
    }
    let lhs = compensated_sum(l);
    let base = compensated_sum(r);
    let rhs = coefficient * base;
    let reciprocal_rhs = reciprocal_coefficient * base;
    let (geometric_lhs, geometric_rhs) = (compensated_sum(gl), compensated_sum(gr));
    Ok(IdentityCheck {
        k,
        lhs,
        rhs,
        relative_gap: rel_gap(lhs, rhs),
        coefficient,
        reciprocal_rhs,
        reciprocal_coefficient,
        reciprocal_relative_gap: rel_gap(lhs, reciprocal_rhs),
        reciprocal_ratio: rhs / reciprocal_rhs,
        geometric_lhs,
        geometric_rhs,
        geometric_relative_gap: rel_gap(geometric_lhs, geometric_rhs),
    })
}

pub fn integral_identity_table(phi: &SupportField) -> Result<Vec<IdentityCheck>> {
    (0..phi.grid().dimension())
        .map(|k| integral_identity_check(phi, k))
        .collect()
}

/// Where the support function is sampled in the duality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualityDirections {
    /// The grid nodes themselves: the sup is attained at y = x, so this
    /// measures only whether any other surface point exceeds it.
    GridNodes,
    /// A fixed off-grid set (Fibonacci lattice on S², shifted colatitudes
    /// otherwise) with φ evaluated spectrally; discretization-limited.
    OffGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub directions: DualityDirections,
    pub count: usize,
    /// max over directions of |log φ(x) − max_y log(−⟨X̄(y), (x, 1)⟩)|
    pub max_deviation: f64,
    /// min of the signed difference log φ(x) − discrete sup
    pub min_signed: f64,
}

fn duality_directions(grid: &Grid, kind: DualityDirections) -> Vec<(f64, f64)> {
    match kind {
        DualityDirections::GridNodes => grid.nodes().iter().map(|p| (p.theta, p.lambda)).collect(),
        DualityDirections::OffGrid => {
            let count = grid.len();
            match grid.mode() {
                GridMode::FullS2 => {
                    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                    (0..count)
                        .map(|k| {
                            let z = 1.0 - (2 * k + 1) as f64 / count as f64;
                            let lam = (k as f64 * golden).rem_euclid(2.0 * std::f64::consts::PI);
                            (z.acos(), lam)
                        })
                        .collect()
                }
                GridMode::Axisymmetric => (0..count)
                    .map(|k| (std::f64::consts::PI * (k as f64 + 0.25) / count as f64, 0.0))
                    .collect(),
            }
        }
    }
}

pub fn support_duality_check(phi: &SupportField, kind: DualityDirections) -> Result<DualityReport> {
    support_duality_check_with(phi, kind, phi.grid().exec())
}

pub fn support_duality_check_with(phi: &SupportField, kind: DualityDirections, exec: Exec) -> Result<DualityReport> {
    let s = embed(phi)?;
    let grid = phi.grid();
    let (n, mode) = (grid.dimension(), grid.mode());
    let dirs = duality_directions(grid, kind);
    let coeffs = phi.field().coeffs();
    let t = n + 1;
    let signed: Vec<f64> = exec.map_slice(&dirs, |&(theta, lambda)| {
        let node = crate::sphere_grid::Node {
            theta,
            lambda,
            cos_theta: theta.cos(),
            sin_theta: theta.sin(),
        };
        let x = node.position(n, mode);
        let log_phi = match kind {
            DualityDirections::GridNodes => None,
            DualityDirections::OffGrid => Some(grid.evaluate_coeffs_at(&coeffs, theta, lambda).ln()),
        };
        let sup = s
            .points
            .iter()
            .map(|xb| xb[t] - xb[..t].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
            .ln();
        (log_phi, sup)
    })
    .into_iter()
    .zip(0..)
    .map(|((lp, sup), i)| lp.unwrap_or_else(|| s.phi[i].ln()) - sup)
    .collect();
    Ok(DualityReport {
        directions: kind,
        count: dirs.len(),
        max_deviation: signed.iter().fold(0.0, |a, v| a.max(v.abs())),
        min_signed: signed.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub faces: usize,
    pub lines: usize,
    pub max_norm: f64,
}

/// OBJ text for the Poincaré-ball image. Full S² grids give a closed
/// triangle mesh (ring quads split on a fixed diagonal, pole caps fanned);
/// axisymmetric grids give the meridian as a polyline in the (e_1, e_{n+1})
/// plane.
pub fn ball_mesh_obj(surface: &EmbeddedHypersurface) -> (String, MeshStats) {
    let grid = &surface.grid;
    let n = grid.dimension();
    let pts = surface.ball_points();
    let mut s = String::new();
    let mut stats = MeshStats {
        vertices: pts.len(),
        faces: 0,
        lines: 0,
        max_norm: pts
            .iter()
            .map(|p| p.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max),
    };
    match grid.mode() {
        GridMode::FullS2 => {
            for p in &pts {
                let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
            }
            let (rings, nlon) = (grid.ring_count(), grid.ring_len());
            let v = |i: usize, j: usize| i * nlon + (j % nlon) + 1;
            let face = |s: &mut String, a: usize, b: usize, c: usize| {
                let _ = writeln!(s, "f {a} {b} {c}");
            };
            // the support parametrization reverses orientation (X̄ ~ −x for
            // round spheres), so ring triangles are listed clockwise in (θ, λ)
            for j in 1..nlon - 1 {
                face(&mut s, v(0, 0), v(0, j + 1), v(0, j));
                stats.faces += 1;
            }
            for i in 0..rings - 1 {
                for j in 0..nlon {
                    face(&mut s, v(i, j), v(i + 1, j + 1), v(i + 1, j));
                    face(&mut s, v(i, j), v(i, j + 1), v(i + 1, j + 1));
                    stats.faces += 2;
                }
            }
            let last = rings - 1;
            for j in 1..nlon - 1 {
                face(&mut s, v(last, 0), v(last, j), v(last, j + 1));
                stats.faces += 1;
            }
        }
        GridMode::Axisymmetric => {
            for p in &pts {
                let _ = writeln!(s, "v {} 0 {}", p[0], p[n]);
            }
            s.push('l');
            for i in 1..=pts.len() {
                let _ = write!(s, " {i}");
            }
            s.push('\n');
            stats.lines = 1;
        }
    }
    (s, stats)
}

pub fn export_ball_mesh(surface: &EmbeddedHypersurface, path: &Path) -> Result<MeshStats> {
    let (obj, stats) = ball_mesh_obj(surface);
    write_atomic(path, obj.as_bytes())?;
    Ok(stats)
}

pub fn write_geometry_csv(surface: &EmbeddedHypersurface, path: &Path) -> Result<()> {
    write_atomic(path, surface.to_csv().as_bytes())
}
