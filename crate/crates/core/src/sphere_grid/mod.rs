//! Discretizations of S^n: a pseudospectral Gauss grid on S² and a cosine
//! collocation grid for rotationally symmetric fields on S^n.
//!
//! Both grids are antipodally closed by construction and avoid the poles,
//! so `cot θ` terms are always finite.

mod cosine;
mod field;
pub mod legendre;
mod spectral;

pub use cosine::{sphere_area, CosBasis};
pub use field::{FrameHessianField, FrameMatrix, SphericalField};
pub use spectral::ShBasis;

use crate::error::{Error, Result};
use crate::exec::Exec;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub const MIN_RESOLUTION: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    #[serde(rename = "full-s2")]
    FullS2,
    Axisymmetric,
}

impl fmt::Display for GridMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridMode::FullS2 => f.write_str("full-s2"),
            GridMode::Axisymmetric => f.write_str("axisymmetric"),
        }
    }
}

impl std::str::FromStr for GridMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full-s2" | "full" | "s2" => Ok(GridMode::FullS2),
            "axisymmetric" | "axi" => Ok(GridMode::Axisymmetric),
            other => Err(Error::Format(format!("unknown grid mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub theta: f64,
    pub lambda: f64,
    #[serde(skip)]
    pub cos_theta: f64,
    #[serde(skip)]
    pub sin_theta: f64,
}

impl Node {
    /// Position in R^{n+1}. Axisymmetric nodes are placed on the meridian
    /// through the first coordinate axis.
    pub fn position(&self, n: usize, mode: GridMode) -> Vec<f64> {
        match mode {
            GridMode::FullS2 => vec![
                self.sin_theta * self.lambda.cos(),
                self.sin_theta * self.lambda.sin(),
                self.cos_theta,
            ],
            GridMode::Axisymmetric => {
                let mut x = vec![0.0; n + 1];
                x[0] = self.sin_theta;
                x[n] = self.cos_theta;
                x
            }
        }
    }

    /// Orthonormal frame (e_θ, e_λ) in R^{n+1}; `e_λ` is zero for
    /// axisymmetric nodes.
    pub fn frame(&self, n: usize, mode: GridMode) -> (Vec<f64>, Vec<f64>) {
        match mode {
            GridMode::FullS2 => {
                let (cl, sl) = (self.lambda.cos(), self.lambda.sin());
                (
                    vec![self.cos_theta * cl, self.cos_theta * sl, -self.sin_theta],
                    vec![-sl, cl, 0.0],
                )
            }
            GridMode::Axisymmetric => {
                let mut e1 = vec![0.0; n + 1];
                e1[0] = self.cos_theta;
                e1[n] = -self.sin_theta;
                (e1, vec![0.0; n + 1])
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Basis {
    Spherical(ShBasis),
    Cosine(CosBasis),
}

/// Pointwise values and covariant derivatives in the orthonormal frame.
/// For axisymmetric grids `grad2`/`h12` are zero, `h11` is the radial and
/// `h22` the tangential Hessian eigen-entry.
#[derive(Debug, Clone, Default)]
pub struct Jet {
    pub value: Vec<f64>,
    pub grad1: Vec<f64>,
    pub grad2: Vec<f64>,
    pub h11: Vec<f64>,
    pub h12: Vec<f64>,
    pub h22: Vec<f64>,
    pub laplacian: Vec<f64>,
}

impl Jet {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            value: Vec::with_capacity(n),
            grad1: Vec::with_capacity(n),
            grad2: Vec::with_capacity(n),
            h11: Vec::with_capacity(n),
            h12: Vec::with_capacity(n),
            h22: Vec::with_capacity(n),
            laplacian: Vec::with_capacity(n),
        }
    }

    #[inline]
    pub fn grad_sq(&self, i: usize) -> f64 {
        self.grad1[i] * self.grad1[i] + self.grad2[i] * self.grad2[i]
    }
}

#[derive(Debug)]
pub struct Grid {
    n: usize,
    mode: GridMode,
    resolution: usize,
    nodes: Vec<Node>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
    basis: Basis,
    exec: Exec,
}

/// Build an antipodally closed grid. `resolution` is the spectral degree L
/// for [`GridMode::FullS2`] and the colatitude node count M otherwise.
pub fn build_grid(n: usize, mode: GridMode, resolution: usize) -> Result<Arc<Grid>> {
    Grid::new(n, mode, resolution, Exec::auto()).map(Arc::new)
}

impl Grid {
    pub fn new(n: usize, mode: GridMode, resolution: usize, exec: Exec) -> Result<Self> {
        if n < 2 || (mode == GridMode::FullS2 && n != 2) {
            return Err(Error::UnsupportedGrid {
                n,
                mode: mode.to_string(),
            });
        }
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall {
                got: resolution,
                min: MIN_RESOLUTION,
            });
        }
        match mode {
            GridMode::FullS2 => {
                let sh = ShBasis::new(resolution);
                let (nlat, nlon) = (sh.nlat, sh.nlon);
                let mut nodes = Vec::with_capacity(nlat * nlon);
                let mut weights = Vec::with_capacity(nlat * nlon);
                let mut antipode = Vec::with_capacity(nlat * nlon);
                let dl = 2.0 * std::f64::consts::PI / nlon as f64;
                for i in 0..nlat {
                    let theta = sh.sin_t[i].atan2(sh.cos_t[i]);
                    for j in 0..nlon {
                        nodes.push(Node {
                            theta,
                            lambda: sh.lambda[j],
                            cos_theta: sh.cos_t[i],
                            sin_theta: sh.sin_t[i],
                        });
                        weights.push(sh.gauss_w[i] * dl);
                        antipode.push((nlat - 1 - i) * nlon + (j + nlon / 2) % nlon);
                    }
                }
                Ok(Self {
                    n,
                    mode,
                    resolution,
                    nodes,
                    weights,
                    antipode,
                    basis: Basis::Spherical(sh),
                    exec,
                })
            }
            GridMode::Axisymmetric => {
                let cb = CosBasis::new(n, resolution);
                let nodes = (0..resolution)
                    .map(|j| Node {
                        theta: cb.theta[j],
                        lambda: 0.0,
                        cos_theta: cb.cos_t[j],
                        sin_theta: cb.sin_t[j],
                    })
                    .collect();
                let weights = cb.weights();
                let antipode = (0..resolution).rev().collect();
                Ok(Self {
                    n,
                    mode,
                    resolution,
                    nodes,
                    weights,
                    antipode,
                    basis: Basis::Cosine(cb),
                    exec,
                })
            }
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn antipode(&self) -> &[usize] {
        &self.antipode
    }

    /// Number of longitudes per ring (1 for axisymmetric grids).
    pub fn ring_len(&self) -> usize {
        match &self.basis {
            Basis::Spherical(sh) => sh.nlon,
            Basis::Cosine(_) => 1,
        }
    }

    pub fn ring_count(&self) -> usize {
        match &self.basis {
            Basis::Spherical(sh) => sh.nlat,
            Basis::Cosine(cb) => cb.count,
        }
    }

    #[cfg(test)]
    pub(crate) fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Tangential multiplicity of the frame Hessian (1 on S², n-1 otherwise).
    pub fn tangential_multiplicity(&self) -> usize {
        match self.mode {
            GridMode::FullS2 => 1,
            GridMode::Axisymmetric => self.n - 1,
        }
    }

    pub fn coeff_len(&self) -> usize {
        match &self.basis {
            Basis::Spherical(sh) => sh.coeff_len(),
            Basis::Cosine(cb) => cb.count,
        }
    }

    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        match &self.basis {
            Basis::Spherical(sh) => sh.analyze(values, self.exec),
            Basis::Cosine(cb) => cb.analyze(values),
        }
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        match &self.basis {
            Basis::Spherical(sh) => sh.synthesize(coeffs, self.exec),
            Basis::Cosine(cb) => cb.synthesize(coeffs),
        }
    }

    pub fn jet_from_coeffs(&self, coeffs: &[f64]) -> Jet {
        match &self.basis {
            Basis::Spherical(sh) => sh.jet(coeffs, self.exec),
            Basis::Cosine(cb) => cb.jet(coeffs),
        }
    }

    pub fn jet(&self, values: &[f64]) -> Jet {
        self.jet_from_coeffs(&self.analyze(values))
    }

    /// Harmonic degree (S²) or cosine wavenumber (axisymmetric) of a
    /// coefficient slot. Even degree ⇔ even under the antipodal map.
    pub fn coeff_degree(&self, idx: usize) -> usize {
        match &self.basis {
            Basis::Spherical(sh) => sh.index_info(idx).0,
            Basis::Cosine(_) => idx,
        }
    }

    /// Coefficient slots spanning the even subspace.
    pub fn even_coeff_indices(&self) -> Vec<usize> {
        (0..self.coeff_len())
            .filter(|&i| self.coeff_degree(i) % 2 == 0)
            .collect()
    }

    pub fn evaluate_coeffs_at(&self, coeffs: &[f64], theta: f64, lambda: f64) -> f64 {
        match &self.basis {
            Basis::Spherical(sh) => sh.evaluate_at(coeffs, theta, lambda),
            Basis::Cosine(cb) => cb.evaluate_at(coeffs, theta),
        }
    }

    /// Move coefficients to another grid of the same mode and dimension.
    pub fn transfer_coeffs(&self, coeffs: &[f64], target: &Grid) -> Result<Vec<f64>> {
        match (&self.basis, &target.basis) {
            (Basis::Spherical(a), Basis::Spherical(b)) => Ok(a.transfer(coeffs, b)),
            (Basis::Cosine(a), Basis::Cosine(b)) if self.n == target.n => Ok(a.transfer(coeffs, b)),
            _ => Err(Error::Format("grids are not compatible for resampling".into())),
        }
    }

    pub fn metadata(&self) -> GridMetadata {
        GridMetadata {
            n: self.n,
            mode: self.mode,
            resolution: self.resolution,
            nodes: self.nodes.iter().map(|p| [p.theta, p.lambda]).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// JSON form of a grid.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridMetadata {
    pub n: usize,
    pub mode: GridMode,
    pub resolution: usize,
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl GridMetadata {
    pub fn build(&self) -> Result<Arc<Grid>> {
        build_grid(self.n, self.mode, self.resolution)
    }
}
