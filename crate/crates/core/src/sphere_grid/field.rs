use super::{Grid, GridMode, Jet};
use crate::error::{Error, Result};
use crate::exec::compensated_sum;
use std::sync::Arc;

/// Scalar field sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone)]
pub struct SphericalField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl SphericalField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                got: values.len(),
                expected: grid.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    /// Sample `f(theta, lambda)` at every node.
    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync + Send>(grid: Arc<Grid>, f: F) -> Result<Self> {
        let values = grid
            .exec()
            .map_slice(grid.nodes(), |p| f(p.theta, p.lambda));
        Self::new(grid, values)
    }

    /// Sample `f(x)` with x the node position in R^{n+1}.
    pub fn from_position<F: Fn(&[f64]) -> f64 + Sync + Send>(grid: Arc<Grid>, f: F) -> Result<Self> {
        let (n, mode) = (grid.dimension(), grid.mode());
        let values = grid.exec().map_slice(grid.nodes(), |p| f(&p.position(n, mode)));
        Self::new(grid, values)
    }

    pub fn from_coeffs(grid: Arc<Grid>, coeffs: &[f64]) -> Result<Self> {
        let values = grid.synthesize(coeffs);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise map; the result must stay finite.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &SphericalField, f: F) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub(crate) fn check_same_grid(&self, other: &SphericalField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.len() == other.grid.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                got: other.len(),
                expected: self.len(),
            })
        }
    }

    pub fn coeffs(&self) -> Vec<f64> {
        self.grid.analyze(&self.values)
    }

    pub fn jet(&self) -> Jet {
        self.grid.jet(&self.values)
    }

    pub fn laplacian(&self) -> SphericalField {
        let jet = self.jet();
        Self {
            grid: self.grid.clone(),
            values: jet.laplacian,
        }
    }

    /// |D f|² in the round metric.
    pub fn gradient_squared(&self) -> SphericalField {
        let jet = self.jet();
        let values = (0..self.len()).map(|i| jet.grad_sq(i)).collect();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn hessian(&self) -> FrameHessianField {
        FrameHessianField::from_jet(self.grid.clone(), &self.jet())
    }

    /// Quadrature Σ w_i f_i with compensated summation.
    pub fn integrate(&self) -> f64 {
        compensated_sum(self.values.iter().zip(self.grid.weights()).map(|(v, w)| v * w))
    }

    /// Projection onto even functions, (f(x) + f(−x)) / 2.
    pub fn symmetrize_even(&self) -> SphericalField {
        let a = self.grid.antipode();
        let values = (0..self.len())
            .map(|i| 0.5 * (self.values[i] + self.values[a[i]]))
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    /// max_x |f(x) − f(−x)|.
    pub fn antipodal_deviation(&self) -> f64 {
        let a = self.grid.antipode();
        (0..self.len()).fold(0.0, |m, i| m.max((self.values[i] - self.values[a[i]]).abs()))
    }

    pub fn is_even(&self, tol: f64) -> bool {
        self.antipodal_deviation() <= tol
    }

    /// Spectral interpolation onto another grid of the same mode and dimension.
    pub fn resample(&self, target: &Arc<Grid>) -> Result<SphericalField> {
        let c = self.grid.transfer_coeffs(&self.coeffs(), target)?;
        Self::from_coeffs(target.clone(), &c)
    }

    /// Interpolated value at an arbitrary direction.
    pub fn evaluate_at(&self, theta: f64, lambda: f64) -> f64 {
        self.grid.evaluate_coeffs_at(&self.coeffs(), theta, lambda)
    }
}

/// Symmetric matrix in the local orthonormal frame at one node.
///
/// On S² this is a full 2×2 matrix. For rotationally symmetric fields on
/// S^n it is diagonal with one radial entry and a tangential entry of
/// multiplicity n − 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameMatrix {
    Full { tt: f64, tl: f64, ll: f64 },
    Axi { radial: f64, tangential: f64, multiplicity: usize },
}

impl FrameMatrix {
    pub fn from_jet(jet: &Jet, i: usize, mode: GridMode, multiplicity: usize) -> Self {
        match mode {
            GridMode::FullS2 => FrameMatrix::Full {
                tt: jet.h11[i],
                tl: jet.h12[i],
                ll: jet.h22[i],
            },
            GridMode::Axisymmetric => FrameMatrix::Axi {
                radial: jet.h11[i],
                tangential: jet.h22[i],
                multiplicity,
            },
        }
    }

    pub fn order(&self) -> usize {
        match self {
            FrameMatrix::Full { .. } => 2,
            FrameMatrix::Axi { multiplicity, .. } => 1 + multiplicity,
        }
    }

    /// Add `s·I`.
    pub fn shifted(&self, s: f64) -> Self {
        match *self {
            FrameMatrix::Full { tt, tl, ll } => FrameMatrix::Full {
                tt: tt + s,
                tl,
                ll: ll + s,
            },
            FrameMatrix::Axi {
                radial,
                tangential,
                multiplicity,
            } => FrameMatrix::Axi {
                radial: radial + s,
                tangential: tangential + s,
                multiplicity,
            },
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            FrameMatrix::Full { tt, tl, ll } => FrameMatrix::Full {
                tt: tt * s,
                tl: tl * s,
                ll: ll * s,
            },
            FrameMatrix::Axi {
                radial,
                tangential,
                multiplicity,
            } => FrameMatrix::Axi {
                radial: radial * s,
                tangential: tangential * s,
                multiplicity,
            },
        }
    }

    pub fn trace(&self) -> f64 {
        match *self {
            FrameMatrix::Full { tt, ll, .. } => tt + ll,
            FrameMatrix::Axi {
                radial,
                tangential,
                multiplicity,
            } => radial + multiplicity as f64 * tangential,
        }
    }

    /// Eigenvalues in ascending order, with multiplicity.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match *self {
            FrameMatrix::Full { tt, tl, ll } => {
                let mean = 0.5 * (tt + ll);
                let rad = (0.25 * (tt - ll) * (tt - ll) + tl * tl).sqrt();
                vec![mean - rad, mean + rad]
            }
            FrameMatrix::Axi {
                radial,
                tangential,
                multiplicity,
            } => {
                let mut v = vec![tangential; multiplicity];
                v.push(radial);
                v.sort_by(f64::total_cmp);
                v
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().unwrap()
    }

    /// σ_k of the eigenvalues.
    pub fn sigma(&self, k: usize) -> f64 {
        crate::symmetric_functions::sigma_of_values(&self.eigenvalues(), k)
    }

    pub fn to_sym_matrix(&self) -> crate::symmetric_functions::SymMatrix {
        use crate::symmetric_functions::SymMatrix;
        match *self {
            FrameMatrix::Full { tt, tl, ll } => SymMatrix::from_upper(2, &[tt, tl, ll]).unwrap(),
            _ => SymMatrix::diagonal(&self.eigenvalues()),
        }
    }
}

/// Covariant Hessian D²f per node, in the frame (e_θ, e_λ).
#[derive(Debug, Clone)]
pub struct FrameHessianField {
    grid: Arc<Grid>,
    entries: Vec<FrameMatrix>,
}

impl FrameHessianField {
    pub(crate) fn from_jet(grid: Arc<Grid>, jet: &Jet) -> Self {
        let (mode, mult) = (grid.mode(), grid.tangential_multiplicity());
        let entries = (0..grid.len())
            .map(|i| FrameMatrix::from_jet(jet, i, mode, mult))
            .collect();
        Self { grid, entries }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn entries(&self) -> &[FrameMatrix] {
        &self.entries
    }

    pub fn trace(&self) -> SphericalField {
        let values = self.entries.iter().map(FrameMatrix::trace).collect();
        SphericalField {
            grid: self.grid.clone(),
            values,
        }
    }
}
