//! Change of variables φ = v^{−2/(n−2)} taking the Christoffel equation to
//! the prescribed scalar curvature equation
//! −Δv + n(n−2)/4 · v = (n−2)/(4(n−1)) · R · v^{(n+2)/(n−2)}.
//!
//! The curvature that makes the two equations equivalent is
//! R = (n−1)(n + 2f). The alternative n(n−1)(f + ½) is kept for reporting;
//! it fails the constant-solution check unless f(n−2) = n/2.

use crate::equation::{PrescribedData, SupportField};
use crate::error::{Error, Result};
use crate::sphere_grid::{GridMode, SphericalField};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RConvention {
    /// R = (n−1)(n + 2f)
    Derived,
    /// R = n(n−1)(f + ½)
    Alternative,
}

impl RConvention {
    pub fn formula(self) -> &'static str {
        match self {
            Self::Derived => "(n-1)(n+2f)",
            Self::Alternative => "n(n-1)(f+1/2)",
        }
    }

    pub fn evaluate(self, f: f64, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Self::Derived => (n - 1.0) * (n + 2.0 * f),
            Self::Alternative => n * (n - 1.0) * (f + 0.5),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NirenbergData {
    pub v: SphericalField,
    pub r: SphericalField,
    pub n: usize,
    pub convention: RConvention,
}

/// JSON sidecar written next to the v and R field files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NirenbergSidecar {
    pub n: usize,
    pub mode: GridMode,
    pub resolution: usize,
    pub convention: RConvention,
    pub r_formula: String,
    pub alternative_formula: String,
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::NirenbergDimension(n))
    } else {
        Ok(())
    }
}

impl NirenbergData {
    pub fn new(v: SphericalField, r: SphericalField, convention: RConvention) -> Result<Self> {
        v.check_same_grid(&r)?;
        let n = v.grid().dimension();
        check_dimension(n)?;
        if let Some(node) = v.values().iter().position(|&x| x <= 0.0) {
            return Err(Error::NonPositive {
                what: "v",
                value: v.values()[node],
                node,
            });
        }
        Ok(Self { v, r, n, convention })
    }

    pub fn sidecar(&self) -> NirenbergSidecar {
        let alt = match self.convention {
            RConvention::Derived => RConvention::Alternative,
            RConvention::Alternative => RConvention::Derived,
        };
        NirenbergSidecar {
            n: self.n,
            mode: self.v.grid().mode(),
            resolution: self.v.grid().resolution(),
            convention: self.convention,
            r_formula: self.convention.formula().into(),
            alternative_formula: alt.formula().into(),
        }
    }

    pub fn residual(&self) -> Result<SphericalField> {
        nirenberg_residual(&self.v, &self.r)
    }
}

pub fn curvature(f: &PrescribedData, convention: RConvention) -> SphericalField {
    let n = f.grid().dimension();
    f.field().map(|x| convention.evaluate(x, n)).expect("finite curvature")
}

/// v = φ^{−(n−2)/2} and R under the given convention.
pub fn to_nirenberg_with(phi: &SupportField, f: &PrescribedData, convention: RConvention) -> Result<NirenbergData> {
    phi.field().check_same_grid(f.field())?;
    let n = phi.grid().dimension();
    check_dimension(n)?;
    let e = -0.5 * (n as f64 - 2.0);
    let v = phi.field().map(|p| p.powf(e))?;
    NirenbergData::new(v, curvature(f, convention), convention)
}

pub fn to_nirenberg(phi: &SupportField, f: &PrescribedData) -> Result<NirenbergData> {
    to_nirenberg_with(phi, f, RConvention::Derived)
}

/// −Δv + n(n−2)/4 · v − (n−2)/(4(n−1)) · R · v^{(n+2)/(n−2)}.
pub fn nirenberg_residual(v: &SphericalField, r: &SphericalField) -> Result<SphericalField> {
    v.check_same_grid(r)?;
    let n = v.grid().dimension();
    check_dimension(n)?;
    if let Some(node) = v.values().iter().position(|&x| x <= 0.0) {
        return Err(Error::NonPositive {
            what: "v",
            value: v.values()[node],
            node,
        });
    }
    let nf = n as f64;
    let lap = v.laplacian();
    let (a, b, p) = (nf * (nf - 2.0) / 4.0, (nf - 2.0) / (4.0 * (nf - 1.0)), (nf + 2.0) / (nf - 2.0));
    let vals = (0..v.len())
        .map(|i| {
            let x = v.values()[i];
            -lap.values()[i] + a * x - b * r.values()[i] * x.powf(p)
        })
        .collect();
    SphericalField::new(v.grid().clone(), vals)
}

/// (2/(n−2)) φ^{n/2} · N(v), which equals the Christoffel residual of φ
/// when R uses the derived convention.
pub fn rescaled_residual(phi: &SupportField, data: &NirenbergData) -> Result<SphericalField> {
    let n = data.n as f64;
    let nr = data.residual()?;
    nr.zip_map(phi.field(), |r, p| 2.0 / (n - 2.0) * p.powf(0.5 * n) * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::{constant_solution_value, residual};
    use crate::sphere_grid::build_grid;

    #[test]
    fn constant_oracle_n3() {
        let g = build_grid(3, GridMode::Axisymmetric, 16).unwrap();
        let c = constant_solution_value(4.0, 3);
        assert!((c - (11.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let phi = SupportField::constant(g.clone(), c).unwrap();
        let f = PrescribedData::constant(g.clone(), 4.0).unwrap();
        let d = to_nirenberg(&phi, &f).unwrap();
        assert!(d.v.values().iter().all(|v| (v - (11.0f64 / 3.0).powf(-0.25)).abs() < 1e-14));
        assert!((d.v.values()[0] - 0.72266).abs() < 1e-5);
        assert!(d.r.values().iter().all(|&r| r == 22.0));
        assert!(d.residual().unwrap().max_abs() < 1e-12);

        let alt = to_nirenberg_with(&phi, &f, RConvention::Alternative).unwrap();
        assert!(alt.r.values().iter().all(|&r| r == 27.0));
        let res = alt.residual().unwrap().max_abs();
        assert!(res > 0.1);
        // the nonlinear term is off by exactly 27/22
        let v = d.v.values()[0];
        let nonlinear = |r: f64| r / 8.0 * v.powi(5);
        assert!((nonlinear(27.0) / nonlinear(22.0) - 27.0 / 22.0).abs() < 1e-15);
        assert!((res - (nonlinear(27.0) - nonlinear(22.0))).abs() < 1e-12);
    }

    #[test]
    fn round_sphere_curvature() {
        for n in [3, 4, 6] {
            let g = build_grid(n, GridMode::Axisymmetric, 12).unwrap();
            let one = SphericalField::constant(g.clone(), 1.0);
            let r = SphericalField::constant(g.clone(), (n * (n - 1)) as f64);
            assert!(nirenberg_residual(&one, &r).unwrap().max_abs() < 1e-12);
            let r2 = SphericalField::constant(g, (n * (n - 1)) as f64 + 0.5);
            assert!(nirenberg_residual(&one, &r2).unwrap().max_abs() > 1e-3);
        }
    }

    #[test]
    fn dimension_two_rejected() {
        let g = build_grid(2, GridMode::FullS2, 8).unwrap();
        let phi = SupportField::constant(g.clone(), 2.0).unwrap();
        let f = PrescribedData::constant(g, 1.5).unwrap();
        assert!(matches!(to_nirenberg(&phi, &f), Err(Error::NirenbergDimension(2))));
    }

    #[test]
    fn transform_equivalence_on_arbitrary_fields() {
        for n in [3, 4, 5] {
            let g = build_grid(n, GridMode::Axisymmetric, 40).unwrap();
            let phi = SupportField::new(
                SphericalField::from_fn(g.clone(), |t, _| 1.8 + 0.2 * t.cos().powi(2) + 0.05 * t.cos().powi(4)).unwrap(),
            )
            .unwrap();
            let f = PrescribedData::new(SphericalField::from_fn(g.clone(), |t, _| 1.0 + 0.3 * t.cos().powi(2)).unwrap()).unwrap();
            let d = to_nirenberg(&phi, &f).unwrap();
            let direct = residual(&phi, &f).unwrap();
            let via = rescaled_residual(&phi, &d).unwrap();
            assert!(direct.max_abs() > 1e-2);
            for (a, b) in direct.values().iter().zip(via.values()) {
                assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sidecar_lists_both_conventions() {
        let g = build_grid(3, GridMode::Axisymmetric, 8).unwrap();
        let phi = SupportField::constant(g.clone(), 2.0).unwrap();
        let d = to_nirenberg(&phi, &PrescribedData::constant(g, 1.5).unwrap()).unwrap();
        let s = d.sidecar();
        assert_eq!(s.r_formula, "(n-1)(n+2f)");
        assert_eq!(s.alternative_formula, "n(n-1)(f+1/2)");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<NirenbergSidecar>(&json).unwrap(), s);
    }
}
