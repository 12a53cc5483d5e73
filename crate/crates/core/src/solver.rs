//! Newton–Krylov iteration in the even subspace and homotopy continuation
//! along f_t from the constant solution at t = 0.

use crate::equation::{
    check_conditions, constant_solution_value, homotopy_f, residual_from_jet, u_from_jet,
    LinearizedOperator, PrescribedData, SupportField, EVEN_TOL,
};
use crate::error::{Error, Result};
use crate::estimates::{verify_bounds, CheckStatus};
use crate::linalg::{gmres, GmresOptions};
use crate::sphere_grid::{Grid, GridMode, Jet, SphericalField};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stop when the nodal residual ∞-norm falls below this.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Initial number of continuation steps; Δt starts at 1/steps.
    pub continuation_steps: usize,
    pub min_step: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Iterates must keep min φ > 1 + this.
    pub min_phi_margin: f64,
    /// Iterates must keep min eig U > this.
    pub min_eig_margin: f64,
    pub linear_rel_tol: f64,
    pub linear_restart: usize,
    pub linear_max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iters: 30,
            continuation_steps: 20,
            min_step: 1e-3,
            backtrack_factor: 0.5,
            max_backtracks: 20,
            min_phi_margin: 1e-6,
            min_eig_margin: 1e-8,
            linear_rel_tol: 1e-13,
            linear_restart: 60,
            linear_max_iters: 600,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("min_step", self.min_step),
            ("min_phi_margin", self.min_phi_margin),
            ("min_eig_margin", self.min_eig_margin),
            ("linear_rel_tol", self.linear_rel_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Format(format!("solver option {name} must be positive (got {v})")));
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::Format(format!(
                "solver option backtrack_factor must lie in (0, 1) (got {})",
                self.backtrack_factor
            )));
        }
        if self.max_newton_iters == 0 || self.continuation_steps == 0 || self.linear_restart == 0 {
            return Err(Error::Format("solver iteration counts must be positive".into()));
        }
        if self.min_step > 1.0 / self.continuation_steps as f64 {
            return Err(Error::Format("min_step exceeds the initial continuation step".into()));
        }
        Ok(())
    }

    fn gmres(&self) -> GmresOptions {
        GmresOptions {
            restart: self.linear_restart,
            max_iterations: self.linear_max_iters,
            rel_tol: self.linear_rel_tol,
            ..GmresOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonDiagnostics {
    pub iterations: usize,
    /// Nodal residual ∞-norm before each step and after the last one.
    pub residual_history: Vec<f64>,
    pub backtracks: Vec<usize>,
    pub linear_iterations: Vec<usize>,
    pub final_residual: f64,
    pub min_phi: f64,
    pub max_phi: f64,
    pub min_eig_u: f64,
}

impl NewtonDiagnostics {
    pub fn total_backtracks(&self) -> usize {
        self.backtracks.iter().sum()
    }
}

/// (Δ + n)⁻¹ on the even coefficient subspace.
#[derive(Debug, Clone)]
enum Preconditioner {
    Diagonal(Vec<f64>),
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Preconditioner {
    fn new(space: &EvenSpace) -> Result<Self> {
        let grid = &space.grid;
        let n = grid.dimension() as f64;
        match grid.mode() {
            GridMode::FullS2 => Ok(Self::Diagonal(
                space
                    .indices
                    .iter()
                    .map(|&i| {
                        let l = grid.coeff_degree(i) as f64;
                        1.0 / (n - l * (l + n - 1.0))
                    })
                    .collect(),
            )),
            GridMode::Axisymmetric => {
                let a = space.assemble(|jet| {
                    (0..jet.value.len())
                        .map(|i| jet.laplacian[i] + n * jet.value[i])
                        .collect()
                });
                let lu = a.lu();
                if !lu.is_invertible() {
                    return Err(Error::Format("constant-coefficient operator is singular".into()));
                }
                Ok(Self::Dense(lu))
            }
        }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Self::Diagonal(d) => v.iter().zip(d).map(|(a, b)| a * b).collect(),
            Self::Dense(lu) => lu
                .solve(&DVector::from_column_slice(v))
                .expect("invertible")
                .as_slice()
                .to_vec(),
        }
    }
}

/// Coefficient slots of even basis functions and the maps to and from them.
#[derive(Debug, Clone)]
pub struct EvenSpace {
    grid: Arc<Grid>,
    indices: Vec<usize>,
}

impl EvenSpace {
    pub fn new(grid: Arc<Grid>) -> Self {
        let indices = grid.even_coeff_indices();
        Self { grid, indices }
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn embed(&self, c: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.grid.coeff_len()];
        for (&i, &v) in self.indices.iter().zip(c) {
            full[i] = v;
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| full[i]).collect()
    }

    /// Even-subspace coefficients of node values.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        self.restrict(&self.grid.analyze(values))
    }

    pub fn jet(&self, c: &[f64]) -> Jet {
        self.grid.jet_from_coeffs(&self.embed(c))
    }

    /// Node values with the antipodal pairs averaged so evenness is exact.
    pub fn values(&self, c: &[f64]) -> Vec<f64> {
        symmetrize(&self.grid, &self.grid.synthesize(&self.embed(c)))
    }

    /// Dense matrix of c ↦ P_even analyze(op(jet(c))).
    pub fn assemble<F: Fn(&Jet) -> Vec<f64> + Sync>(&self, op: F) -> DMatrix<f64> {
        let d = self.dim();
        let cols: Vec<Vec<f64>> = self.grid.exec().map(d, |j| {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            self.project(&op(&self.jet(&e)))
        });
        DMatrix::from_fn(d, d, |i, j| cols[j][i])
    }
}

fn symmetrize(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let anti = grid.antipode();
    (0..v.len()).map(|i| 0.5 * (v[i] + v[anti[i]])).collect()
}

/// Dense Jacobian of the projected residual in even coefficients.
pub fn assemble_jacobian(phi: &SupportField, f: &PrescribedData) -> Result<(EvenSpace, DMatrix<f64>)> {
    let lin = crate::equation::linearize(phi, f)?;
    let space = EvenSpace::new(phi.grid().clone());
    let m = space.assemble(|jet| lin.apply_jet(jet));
    Ok((space, m))
}

struct Iterate {
    coeffs: Vec<f64>,
    phi: Vec<f64>,
    jet: Jet,
    residual: Vec<f64>,
    res_inf: f64,
    merit: f64,
    min_phi: f64,
    max_phi: f64,
    min_eig: f64,
}

fn evaluate(space: &EvenSpace, f: &[f64], coeffs: Vec<f64>) -> Iterate {
    let grid = &space.grid;
    let phi = space.values(&coeffs);
    let mut jet = space.jet(&coeffs);
    jet.value.clone_from(&phi);
    let min_phi = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let max_phi = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (residual, min_eig) = if min_phi > 0.0 {
        let r = residual_from_jet(&jet, &phi, f, grid.dimension());
        (r, u_from_jet(grid, &jet, &phi).min_eigenvalue().0)
    } else {
        (vec![f64::INFINITY; phi.len()], f64::NEG_INFINITY)
    };
    let res_inf = residual.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let merit = if res_inf.is_finite() {
        space.project(&residual).iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        f64::INFINITY
    };
    Iterate {
        coeffs,
        phi,
        jet,
        residual,
        res_inf,
        merit,
        min_phi,
        max_phi,
        min_eig,
    }
}

fn require_even(field: &SphericalField) -> Result<()> {
    let deviation = field.antipodal_deviation();
    if deviation > EVEN_TOL {
        Err(Error::NotEven { deviation })
    } else {
        Ok(())
    }
}

/// Newton's method for φ with even iterates. Each linear system is solved by
/// GMRES right-preconditioned with (Δ + n)⁻¹.
pub fn newton_solve(
    f: &PrescribedData,
    phi0: &SupportField,
    opts: &SolverOptions,
) -> Result<(SupportField, NewtonDiagnostics)> {
    opts.validate()?;
    phi0.field().check_same_grid(f.field())?;
    require_even(phi0.field())?;
    require_even(f.field())?;
    if phi0.field().min() <= 1.0 {
        return Err(Error::NotAboveOne {
            min_phi: phi0.field().min(),
        });
    }
    let space = EvenSpace::new(phi0.grid().clone());
    let pre = Preconditioner::new(&space)?;
    newton_in_space(&space, &pre, f, space.project(phi0.values()), opts)
}

fn newton_in_space(
    space: &EvenSpace,
    pre: &Preconditioner,
    f: &PrescribedData,
    c0: Vec<f64>,
    opts: &SolverOptions,
) -> Result<(SupportField, NewtonDiagnostics)> {
    let grid = space.grid.clone();
    let fv = f.values();
    let mut it = evaluate(space, fv, c0);
    let mut diag = NewtonDiagnostics {
        iterations: 0,
        residual_history: vec![it.res_inf],
        backtracks: Vec::new(),
        linear_iterations: Vec::new(),
        final_residual: it.res_inf,
        min_phi: it.min_phi,
        max_phi: it.max_phi,
        min_eig_u: it.min_eig,
    };
    if !it.res_inf.is_finite() {
        return Err(Error::NotAboveOne { min_phi: it.min_phi });
    }
    let gopts = opts.gmres();
    while it.res_inf >= opts.newton_tol {
        if diag.iterations >= opts.max_newton_iters {
            return Err(Error::MaxIterations {
                iterations: diag.iterations,
                residual: it.res_inf,
            });
        }
        let lin = LinearizedOperator::from_jet(grid.clone(), &it.jet, &it.phi, fv);
        let rhs: Vec<f64> = space.project(&it.residual).iter().map(|v| -v).collect();
        let (delta, out) = gmres(
            |y| space.project(&lin.apply_jet(&space.jet(y))),
            |y| pre.apply(y),
            &rhs,
            &gopts,
        )?;
        let mut alpha = 1.0;
        let mut backtracks = 0;
        let next = loop {
            let trial: Vec<f64> = it.coeffs.iter().zip(&delta).map(|(c, d)| c + alpha * d).collect();
            let cand = evaluate(space, fv, trial);
            let admissible = cand.min_phi > 1.0 + opts.min_phi_margin
                && cand.min_eig > opts.min_eig_margin
                && cand.merit.is_finite()
                && (cand.merit <= (1.0 - 1e-4 * alpha) * it.merit || cand.res_inf < opts.newton_tol);
            if admissible {
                break cand;
            }
            if backtracks >= opts.max_backtracks {
                return Err(Error::TrustRegion {
                    backtracks,
                    residual: it.res_inf,
                });
            }
            backtracks += 1;
            alpha *= opts.backtrack_factor;
        };
        it = next;
        diag.iterations += 1;
        diag.backtracks.push(backtracks);
        diag.linear_iterations.push(out.iterations);
        diag.residual_history.push(it.res_inf);
    }
    diag.final_residual = it.res_inf;
    diag.min_phi = it.min_phi;
    diag.max_phi = it.max_phi;
    diag.min_eig_u = it.min_eig;
    let phi = SupportField::new(SphericalField::new(grid, it.phi)?)?;
    Ok((phi, diag))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: f64,
    pub newton_iterations: usize,
    pub backtracks: usize,
    pub residual: f64,
    pub min_phi: f64,
    pub max_phi: f64,
    pub min_eig_u: f64,
    pub c0_upper_ok: bool,
    pub c0_gap_ok: bool,
    pub gradient: CheckStatus,
    pub trace: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub steps: Vec<TraceStep>,
    /// Continuation attempts rejected and retried with a halved step.
    pub rejected_steps: usize,
}

impl SolveTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "t,newton_iterations,backtracks,residual,min_phi,max_phi,min_eig_u,c0_upper_ok,c0_gap_ok,gradient,trace\n",
        );
        for r in &self.steps {
            let _ = writeln!(
                s,
                "{},{},{},{:e},{},{},{:e},{},{},{},{}",
                r.t,
                r.newton_iterations,
                r.backtracks,
                r.residual,
                r.min_phi,
                r.max_phi,
                r.min_eig_u,
                r.c0_upper_ok,
                r.c0_gap_ok,
                r.gradient,
                r.trace
            );
        }
        s
    }

    pub fn t_strictly_increasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].t > w[0].t)
    }

    pub fn all_h_convex(&self) -> bool {
        self.steps.iter().all(|s| s.min_eig_u > 0.0 && s.min_phi > 1.0)
    }
}

fn record(t: f64, phi: &SupportField, f: &PrescribedData, diag: &NewtonDiagnostics) -> Result<TraceStep> {
    let b = verify_bounds(phi, f)?;
    Ok(TraceStep {
        t,
        newton_iterations: diag.iterations,
        backtracks: diag.total_backtracks(),
        residual: diag.final_residual,
        min_phi: diag.min_phi,
        max_phi: diag.max_phi,
        min_eig_u: diag.min_eig_u,
        c0_upper_ok: b.c0_upper_ok,
        c0_gap_ok: b.c0_gap_ok,
        gradient: b.gradient,
        trace: b.trace,
    })
}

/// Homotopy continuation. Requires both admissibility conditions.
pub fn continuation_solve(f: &PrescribedData, opts: &SolverOptions) -> Result<(SupportField, SolveTrace)> {
    let rep = check_conditions(f);
    if !rep.even_ok {
        return Err(Error::Inadmissible(format!(
            "f is not even (max antipodal deviation {:e})",
            rep.max_antipodal_deviation
        )));
    }
    if !rep.cond2_ok {
        return Err(Error::Inadmissible(format!(
            "semi-definiteness condition fails: min eigenvalue {:e} at theta = {}, lambda = {}",
            rep.cond2_min_eigenvalue, rep.cond2_argmin_theta, rep.cond2_argmin_lambda
        )));
    }
    continuation_solve_unchecked(f, opts)
}

/// Continuation without the semi-definiteness check. f must still be even.
pub fn continuation_solve_unchecked(f: &PrescribedData, opts: &SolverOptions) -> Result<(SupportField, SolveTrace)> {
    opts.validate()?;
    require_even(f.field())?;
    let grid = f.grid().clone();
    let n = grid.dimension();
    let space = EvenSpace::new(grid.clone());
    let pre = Preconditioner::new(&space)?;

    let c = constant_solution_value(f.max(), n);
    let mut phi = SupportField::constant(grid.clone(), c)?;
    let f0 = homotopy_f(f, 0.0)?;
    let (_, d0) = newton_in_space(&space, &pre, &f0, space.project(phi.values()), opts)?;
    let mut trace = SolveTrace {
        steps: vec![record(0.0, &phi, &f0, &d0)?],
        rejected_steps: 0,
    };
    let initial = if f.is_constant() {
        1.0
    } else {
        1.0 / opts.continuation_steps as f64
    };
    let mut dt = initial;
    let mut t = 0.0;
    let mut easy = 0;
    while t < 1.0 {
        let t_next = if t + dt >= 1.0 - 1e-12 { 1.0 } else { t + dt };
        let ft = homotopy_f(f, t_next)?;
        match newton_in_space(&space, &pre, &ft, space.project(phi.values()), opts) {
            Ok((next, diag)) => {
                trace.steps.push(record(t_next, &next, &ft, &diag)?);
                phi = next;
                t = t_next;
                if diag.total_backtracks() <= 1 {
                    easy += 1;
                    if easy >= 2 {
                        dt = (2.0 * dt).min(initial);
                        easy = 0;
                    }
                } else {
                    easy = 0;
                }
            }
            Err(Error::MaxIterations { .. } | Error::TrustRegion { .. } | Error::LinearStagnation { .. }) => {
                trace.rejected_steps += 1;
                easy = 0;
                dt *= 0.5;
                if dt < opts.min_step {
                    return Err(Error::ContinuationStall { t, step: dt });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok((phi, trace))
}

/// The joint certificate: small residual, U positive definite, φ > 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub residual: f64,
    pub min_eig_u: f64,
    pub min_phi: f64,
    pub certified: bool,
}

pub fn certify(phi: &SupportField, f: &PrescribedData, tol: f64) -> Result<Certificate> {
    let residual = crate::equation::residual(phi, f)?.max_abs();
    let min_eig_u = crate::equation::u_matrix(phi).min_eigenvalue().0;
    let min_phi = phi.field().min();
    Ok(Certificate {
        residual,
        min_eig_u,
        min_phi,
        certified: residual < tol && min_eig_u > 0.0 && min_phi > 1.0,
    })
}
