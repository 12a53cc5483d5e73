//! A priori estimates evaluated as runtime certificates on candidate and
//! solved fields.

use crate::equation::{residual, u_matrix, PrescribedData, SupportField, EVEN_TOL};
use crate::error::{Error, Result};
use crate::sphere_grid::FrameMatrix;
use serde::{Deserialize, Serialize};

/// Slack granted to each inequality in the favorable direction.
pub const BOUND_TOL: f64 = 1e-9;
/// Slack on the pointwise trace bound.
pub const TRACE_TOL: f64 = 1e-8;
/// The trace bound only applies when the residual ∞-norm is below this.
pub const TRACE_APPLICABLE_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Holds,
    Violated,
    NotApplicable,
}

impl CheckStatus {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Holds
        } else {
            Self::Violated
        }
    }

    /// Violated counts as failure; not-applicable does not.
    pub fn acceptable(self) -> bool {
        self != Self::Violated
    }
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Holds => "holds",
            Self::Violated => "violated",
            Self::NotApplicable => "not-applicable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C0Check {
    pub upper_ok: bool,
    pub gap_ok: bool,
    pub max_phi: f64,
    pub min_phi: f64,
    /// √((2/n) max f + 1) + √((2/n) max f)
    pub upper_bound: f64,
    /// ½(max φ + 1/max φ), the least admissible min φ
    pub gap_bound: f64,
    /// ½(m + 1/m) with m = √((2/n) min f + 1)
    pub lower_constant: f64,
}

pub fn check_c0(phi: &SupportField, f: &PrescribedData) -> C0Check {
    let n = phi.grid().dimension() as f64;
    let (max_phi, min_phi) = (phi.field().max(), phi.field().min());
    let a = 2.0 / n * f.max();
    let upper_bound = (a + 1.0).sqrt() + a.sqrt();
    let gap_bound = 0.5 * (max_phi + 1.0 / max_phi);
    let m = (2.0 / n * f.min() + 1.0).sqrt();
    C0Check {
        upper_ok: max_phi <= upper_bound + BOUND_TOL,
        gap_ok: gap_bound <= min_phi + BOUND_TOL,
        max_phi,
        min_phi,
        upper_bound,
        gap_bound,
        lower_constant: 0.5 * (m + 1.0 / m),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub ok: bool,
    pub max_ratio: f64,
}

/// max |Dφ|/φ < 1. The estimate assumes an even field.
pub fn check_gradient(phi: &SupportField) -> Result<GradientCheck> {
    let dev = phi.field().antipodal_deviation();
    if dev > EVEN_TOL {
        return Err(Error::NotEven { deviation: dev });
    }
    let g2 = phi.field().gradient_squared();
    let max_ratio = g2
        .values()
        .iter()
        .zip(phi.values())
        .map(|(g, p)| g.max(0.0).sqrt() / p)
        .fold(0.0, f64::max);
    Ok(GradientCheck {
        ok: max_ratio < 1.0 - BOUND_TOL,
        max_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub status: CheckStatus,
    /// max over nodes of λ_max(U) − f/φ
    pub max_excess: f64,
    pub residual: f64,
}

/// λ_max(U) ≤ f/φ pointwise; only meaningful on (near-)solutions.
pub fn check_trace_bound(phi: &SupportField, f: &PrescribedData) -> Result<TraceCheck> {
    let res = residual(phi, f)?.max_abs();
    let u = u_matrix(phi);
    let max_excess = u
        .entries()
        .iter()
        .zip(phi.values().iter().zip(f.values()))
        .map(|(m, (p, fv))| m.max_eigenvalue() - fv / p)
        .fold(f64::NEG_INFINITY, f64::max);
    let status = if res > TRACE_APPLICABLE_RESIDUAL {
        CheckStatus::NotApplicable
    } else {
        CheckStatus::from_bool(max_excess <= TRACE_TOL)
    };
    Ok(TraceCheck {
        status,
        max_excess,
        residual: res,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullRank {
    pub min_eig: f64,
    /// min over nodes of σ_l(U), l = 1..=n
    pub sigma_profile: Vec<f64>,
}

impl FullRank {
    pub fn uniformly_h_convex(&self) -> bool {
        self.min_eig > 0.0
    }
}

pub fn full_rank_monitor(phi: &SupportField) -> FullRank {
    let u = u_matrix(phi);
    let n = phi.grid().dimension();
    let sigma_profile = (1..=n)
        .map(|l| {
            u.entries()
                .iter()
                .map(|m: &FrameMatrix| m.sigma(l))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    FullRank {
        min_eig: u.min_eigenvalue().0,
        sigma_profile,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub c0_upper_ok: bool,
    pub c0_gap_ok: bool,
    pub gradient: CheckStatus,
    pub trace: CheckStatus,
    pub c0: C0Check,
    pub gradient_max_ratio: Option<f64>,
    pub trace_max_excess: f64,
    pub full_rank_min_eig: f64,
    pub sigma_profile: Vec<f64>,
}

impl BoundsReport {
    pub fn gradient_ok(&self) -> bool {
        self.gradient == CheckStatus::Holds
    }

    pub fn trace_ok(&self) -> bool {
        self.trace.acceptable()
    }

    /// All four estimates hold and U is positive definite.
    pub fn all_ok(&self) -> bool {
        self.c0_upper_ok
            && self.c0_gap_ok
            && self.gradient_ok()
            && self.trace_ok()
            && self.full_rank_min_eig > 0.0
    }

    pub fn csv_header() -> &'static str {
        "c0_upper_ok,c0_gap_ok,gradient,trace,full_rank_min_eig"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:e}",
            self.c0_upper_ok, self.c0_gap_ok, self.gradient, self.trace, self.full_rank_min_eig
        )
    }
}

/// Runs the whole suite. Odd fields get `NotApplicable` for the gradient
/// estimate instead of an error.
pub fn verify_bounds(phi: &SupportField, f: &PrescribedData) -> Result<BoundsReport> {
    let c0 = check_c0(phi, f);
    let (gradient, gradient_max_ratio) = match check_gradient(phi) {
        Ok(g) => (CheckStatus::from_bool(g.ok), Some(g.max_ratio)),
        Err(Error::NotEven { .. }) => (CheckStatus::NotApplicable, None),
        Err(e) => return Err(e),
    };
    let trace = check_trace_bound(phi, f)?;
    let rank = full_rank_monitor(phi);
    Ok(BoundsReport {
        c0_upper_ok: c0.upper_ok,
        c0_gap_ok: c0.gap_ok,
        gradient,
        trace: trace.status,
        c0,
        gradient_max_ratio,
        trace_max_excess: trace.max_excess,
        full_rank_min_eig: rank.min_eig,
        sigma_profile: rank.sigma_profile,
    })
}
