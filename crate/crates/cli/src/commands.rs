use crate::config::{Artifact, BuiltData, FSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::{
    DataSummary, GeometrySummary, NirenbergSummary, Outputs, ProbeSummary, RunReport, RunStatus, SolveSummary,
};
use christoffel::equation::{check_conditions, linearize, residual, PrescribedData, SupportField};
use christoffel::estimates::{verify_bounds, BoundsReport};
use christoffel::geometry::{
    ball_mesh_obj, christoffel_residual, embed, integral_identity_table, support_duality_check, DualityDirections,
};
use christoffel::io::{field_to_csv, read_field_csv_infer};
use christoffel::nirenberg::{nirenberg_residual, to_nirenberg, to_nirenberg_with, RConvention};
use christoffel::solver::{certify, continuation_solve_unchecked, SolveTrace};
use christoffel::{Error, Grid, SphericalField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::sync::Arc;

pub const IDENTITY_TOL: f64 = 1e-8;
pub const HYPERBOLOID_TOL: f64 = 1e-9;
pub const NIRENBERG_TOL: f64 = 1e-7;
const PROBE_FIELDS: usize = 8;

/// Flags that are not part of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Skip the semi-definiteness check before solving.
    pub force: bool,
    /// An existing solution, for reconstruct and verify.
    pub solution: Option<PathBuf>,
}

fn new_report(cmd: &str, cfg: &RunConfig) -> RunReport {
    RunReport::new(cmd, cfg.n, cfg.mode, cfg.resolution, cfg.seed)
}

fn summarize_data(cfg: &RunConfig, d: &BuiltData) -> DataSummary {
    let source = match &cfg.f {
        FSpec::Constant(c) => format!("constant {c}"),
        FSpec::Expression(e) => format!("expression {e}"),
        FSpec::Csv(p) => format!("csv {}", p.display()),
        FSpec::Generator(g) => format!("generator h = {}", g.h),
    };
    DataSummary {
        source,
        parity: d.parity.map(|p| p.to_string()),
        generator_c: d.generator_c,
        generator_search: d.generator,
        min: d.f.min(),
        max: d.f.max(),
    }
}

fn summarize_solve(trace: &SolveTrace) -> SolveSummary {
    let last = trace.steps.last().expect("trace has the t = 0 row");
    SolveSummary {
        steps: trace.steps.len(),
        rejected_steps: trace.rejected_steps,
        newton_iterations: trace.steps.iter().map(|s| s.newton_iterations).sum(),
        final_residual: last.residual,
        min_phi: last.min_phi,
        max_phi: last.max_phi,
        min_eig_u: last.min_eig_u,
        all_h_convex: trace.all_h_convex(),
    }
}

fn bounds_csv(b: &BoundsReport) -> String {
    format!("{}\n{}\n", BoundsReport::csv_header(), b.csv_row())
}

/// Admissibility of f only. Certified iff both conditions hold.
pub fn cmd_check(cfg: &RunConfig, _opts: &RunOptions) -> CliResult<RunReport> {
    let grid = cfg.grid()?;
    let data = cfg.build_f(&grid)?;
    let mut report = new_report("check", cfg);
    let adm = check_conditions(&data.f);
    if !adm.even_ok {
        report
            .notes
            .push(format!("f is not even: max antipodal deviation {:e}", adm.max_antipodal_deviation));
    }
    if !adm.cond2_ok {
        report.notes.push(format!(
            "semi-definiteness condition fails: min eigenvalue {:e} at theta = {}, lambda = {}",
            adm.cond2_min_eigenvalue, adm.cond2_argmin_theta, adm.cond2_argmin_lambda
        ));
    }
    report.status = if adm.passes() { RunStatus::Certified } else { RunStatus::Failed };
    report.data = Some(summarize_data(cfg, &data));
    report.admissibility = Some(adm);
    Outputs::create(&cfg.output_dir())?.finish(&mut report)?;
    Ok(report)
}

/// Checks shared by solve and verify. Returns whether everything passed.
fn verify_solution(
    report: &mut RunReport,
    phi: &SupportField,
    f: &PrescribedData,
    tol: f64,
) -> CliResult<(bool, BoundsReport)> {
    let cert = certify(phi, f, tol)?;
    report.certificate = Some(cert);
    if !cert.certified {
        report.notes.push(format!(
            "certificate fails: residual {:e}, min eig U {:e}, min phi {}",
            cert.residual, cert.min_eig_u, cert.min_phi
        ));
    }
    let bounds = verify_bounds(phi, f)?;
    if !bounds.all_ok() {
        report.notes.push("a priori bound check failed".into());
    }
    report.bounds = Some(bounds.clone());
    if !(cert.min_eig_u > 0.0 && cert.min_phi > 1.0) {
        return Ok((false, bounds));
    }
    report.identity = integral_identity_table(phi)?;
    let identity_ok = report.identity.iter().all(|r| r.relative_gap < IDENTITY_TOL);
    if !identity_ok {
        report.notes.push(format!("integral identity gap above {IDENTITY_TOL:e}"));
    }
    let surf = embed(phi)?;
    let defects = surf.defects();
    let geometry_ok = defects.hyperboloid < HYPERBOLOID_TOL;
    if !geometry_ok {
        report.notes.push(format!("hyperboloid defect {:e}", defects.hyperboloid));
    }
    let scale = f.max().max(1.0);
    let cr = christoffel_residual(phi, f)?.max_abs();
    report.geometry = Some(GeometrySummary {
        defects,
        duality_grid: support_duality_check(phi, DualityDirections::GridNodes)?,
        duality_off_grid: support_duality_check(phi, DualityDirections::OffGrid)?,
        christoffel_residual: Some(cr),
        mesh: None,
    });
    let christoffel_ok = cr < 10.0 * tol * scale;
    if !christoffel_ok {
        report.notes.push(format!("max |sum R_i - f| = {cr:e}"));
    }
    Ok((
        cert.certified && bounds.all_ok() && identity_ok && geometry_ok && christoffel_ok,
        bounds,
    ))
}

fn write_mesh(out: &mut Outputs, report: &mut RunReport, phi: &SupportField) -> CliResult<()> {
    let surf = embed(phi)?;
    let (obj, stats) = ball_mesh_obj(&surf);
    out.write("mesh.obj", obj.as_bytes())?;
    out.write("geometry.csv", surf.to_csv().as_bytes())?;
    if let Some(g) = report.geometry.as_mut() {
        g.mesh = Some(stats);
    }
    Ok(())
}

fn write_nirenberg(out: &mut Outputs, report: &mut RunReport, phi: &SupportField, f: &PrescribedData) -> CliResult<bool> {
    let d = to_nirenberg(phi, f)?;
    let alt = to_nirenberg_with(phi, f, RConvention::Alternative)?;
    let residual = d.residual()?.max_abs();
    let alternative_residual = nirenberg_residual(&alt.v, &alt.r)?.max_abs();
    let verified = residual < NIRENBERG_TOL;
    out.write("v.csv", field_to_csv(&d.v).as_bytes())?;
    out.write("r.csv", field_to_csv(&d.r).as_bytes())?;
    out.write("r_alternative.csv", field_to_csv(&alt.r).as_bytes())?;
    let sidecar = d.sidecar();
    let mut json = serde_json::to_string_pretty(&sidecar).map_err(Error::from)?;
    json.push('\n');
    out.write("nirenberg.json", json.as_bytes())?;
    report.notes.push(format!(
        "curvature uses R = {}; the alternative R = {} leaves residual {:e}",
        RConvention::Derived.formula(),
        RConvention::Alternative.formula(),
        alternative_residual
    ));
    report.nirenberg = Some(NirenbergSummary {
        sidecar,
        residual,
        alternative_residual,
        verified,
        v_min: d.v.min(),
        v_max: d.v.max(),
        r_min: d.r.min(),
        r_max: d.r.max(),
    });
    Ok(verified)
}

struct Solved {
    report: RunReport,
    out: Outputs,
    phi: Option<SupportField>,
    f: PrescribedData,
    ok: bool,
}

fn solve_inner(cmd: &str, cfg: &RunConfig, opts: &RunOptions) -> CliResult<Solved> {
    let grid = cfg.grid()?;
    let data = cfg.build_f(&grid)?;
    let mut report = new_report(cmd, cfg);
    let mut out = Outputs::create(&cfg.output_dir())?;
    report.data = Some(summarize_data(cfg, &data));
    let adm = check_conditions(&data.f);
    report.admissibility = Some(adm.clone());
    let f = data.f;
    if !adm.even_ok {
        report.notes.push(format!(
            "refusing to solve: f is not even (max antipodal deviation {:e})",
            adm.max_antipodal_deviation
        ));
        return Ok(Solved { report, out, phi: None, f, ok: false });
    }
    if !adm.cond2_ok {
        let msg = format!(
            "semi-definiteness condition fails: min eigenvalue {:e} at theta = {}, lambda = {}",
            adm.cond2_min_eigenvalue, adm.cond2_argmin_theta, adm.cond2_argmin_lambda
        );
        if !opts.force {
            report.notes.push(format!("refusing to solve: {msg}; pass --force to try anyway"));
            return Ok(Solved { report, out, phi: None, f, ok: false });
        }
        report.notes.push(format!("{msg}; solving anyway (--force)"));
    }
    let (phi, trace) = continuation_solve_unchecked(&f, &cfg.solver)?;
    report.solve = Some(summarize_solve(&trace));
    out.write("solution.csv", field_to_csv(phi.field()).as_bytes())?;
    if cfg.wants(Artifact::Trace) {
        out.write("trace.csv", trace.to_csv().as_bytes())?;
    }
    let (ok, bounds) = verify_solution(&mut report, &phi, &f, cfg.certify_tol)?;
    if cfg.wants(Artifact::Bounds) {
        out.write("bounds.csv", bounds_csv(&bounds).as_bytes())?;
    }
    if cfg.wants(Artifact::Mesh) && report.geometry.is_some() {
        write_mesh(&mut out, &mut report, &phi)?;
    }
    Ok(Solved { report, out, phi: Some(phi), f, ok })
}

fn finish(mut s: Solved, extra_ok: bool) -> CliResult<RunReport> {
    s.report.status = match (&s.phi, s.ok && extra_ok) {
        (None, _) => RunStatus::Failed,
        (Some(_), true) => RunStatus::Certified,
        (Some(_), false) => RunStatus::Uncertified,
    };
    s.out.finish(&mut s.report)?;
    Ok(s.report)
}

/// Continuation solve, verification suite and requested artifacts.
pub fn cmd_solve(cfg: &RunConfig, opts: &RunOptions) -> CliResult<RunReport> {
    let mut s = solve_inner("solve", cfg, opts)?;
    let mut extra = true;
    if cfg.wants(Artifact::Nirenberg) {
        match (&s.phi, cfg.n >= 3) {
            (Some(phi), true) => extra = write_nirenberg(&mut s.out, &mut s.report, &phi.clone(), &s.f.clone())?,
            (Some(_), false) => s.report.notes.push(format!("nirenberg artifact skipped: needs n >= 3, got {}", cfg.n)),
            _ => {}
        }
    }
    finish(s, extra)
}

pub fn cmd_nirenberg(cfg: &RunConfig, opts: &RunOptions) -> CliResult<RunReport> {
    if cfg.n < 3 {
        return Err(Error::NirenbergDimension(cfg.n).into());
    }
    let mut s = solve_inner("nirenberg", cfg, opts)?;
    let mut extra = true;
    if let Some(phi) = s.phi.clone() {
        extra = write_nirenberg(&mut s.out, &mut s.report, &phi, &s.f.clone())?;
    }
    finish(s, extra)
}

fn load_solution(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Option<SupportField>> {
    match &opts.solution {
        Some(p) => Ok(Some(SupportField::new(read_field_csv_infer(p, cfg.n, cfg.mode)?)?)),
        None => Ok(None),
    }
}

/// Geometry and mesh for a solution file, or for a fresh solve.
pub fn cmd_reconstruct(cfg: &RunConfig, opts: &RunOptions) -> CliResult<RunReport> {
    let Some(phi) = load_solution(cfg, opts)? else {
        let mut c = cfg.clone();
        if !c.wants(Artifact::Mesh) {
            c.artifacts.push(Artifact::Mesh);
        }
        return finish(solve_inner("reconstruct", &c, opts)?, true);
    };
    let grid = phi.grid().clone();
    let mut report = RunReport::new("reconstruct", cfg.n, cfg.mode, grid.resolution(), cfg.seed);
    let mut out = Outputs::create(&cfg.output_dir())?;
    let surf = embed(&phi)?;
    let defects = surf.defects();
    let mut ok = defects.hyperboloid < HYPERBOLOID_TOL;
    let cr = match cfg.build_f(&grid) {
        Ok(d) => {
            let r = christoffel_residual(&phi, &d.f)?;
            out.write("christoffel_residual.csv", field_to_csv(&r).as_bytes())?;
            let m = r.max_abs();
            ok &= m < 10.0 * cfg.certify_tol * d.f.max().max(1.0);
            report.data = Some(summarize_data(cfg, &d));
            Some(m)
        }
        Err(e) => {
            report.notes.push(format!("f unavailable on the solution grid, residual table skipped: {e}"));
            None
        }
    };
    let (obj, stats) = ball_mesh_obj(&surf);
    out.write("mesh.obj", obj.as_bytes())?;
    out.write("geometry.csv", surf.to_csv().as_bytes())?;
    report.geometry = Some(GeometrySummary {
        defects,
        duality_grid: support_duality_check(&phi, DualityDirections::GridNodes)?,
        duality_off_grid: support_duality_check(&phi, DualityDirections::OffGrid)?,
        christoffel_residual: cr,
        mesh: Some(stats),
    });
    report.status = if ok { RunStatus::Certified } else { RunStatus::Uncertified };
    out.finish(&mut report)?;
    Ok(report)
}

fn random_even_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> CliResult<SphericalField> {
    let mut c = vec![0.0; grid.coeff_len()];
    for i in grid.even_coeff_indices() {
        let l = grid.coeff_degree(i) as f64;
        c[i] = rng.gen_range(-1.0..1.0) / (1.0 + l).powi(2);
    }
    Ok(SphericalField::from_coeffs(grid.clone(), &c)?)
}

/// max relative gap between the linearized operator and central
/// differences of the residual along seeded random even directions.
pub fn linearization_probe(phi: &SupportField, f: &PrescribedData, seed: u64, fields: usize) -> CliResult<f64> {
    let lin = linearize(phi, f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = phi.field().min() - 1.0;
    let mut worst = 0.0f64;
    for _ in 0..fields {
        let psi = random_even_field(phi.grid(), &mut rng)?;
        let eps = 1e-5 * margin.min(1.0) / psi.max_abs().max(1e-300);
        let shifted = |s: f64| -> CliResult<SphericalField> {
            let p = SupportField::new(phi.field().zip_map(&psi, |a, b| a + s * b)?)?;
            Ok(residual(&p, f)?)
        };
        let (rp, rm) = (shifted(eps)?, shifted(-eps)?);
        let lp = lin.apply(&psi);
        let mut num = 0.0f64;
        for i in 0..lp.len() {
            let fd = (rp.values()[i] - rm.values()[i]) / (2.0 * eps);
            num = num.max((fd - lp.values()[i]).abs());
        }
        worst = worst.max(num / lp.max_abs().max(1e-300));
    }
    Ok(worst)
}

/// Verification suite for an existing solution file.
pub fn cmd_verify(cfg: &RunConfig, opts: &RunOptions) -> CliResult<RunReport> {
    let phi = load_solution(cfg, opts)?.ok_or_else(|| CliError::Usage("verify needs --solution PATH".into()))?;
    let grid = phi.grid().clone();
    let data = cfg.build_f(&grid)?;
    let mut report = RunReport::new("verify", cfg.n, cfg.mode, grid.resolution(), cfg.seed);
    report.data = Some(summarize_data(cfg, &data));
    report.admissibility = Some(check_conditions(&data.f));
    let (ok, _) = verify_solution(&mut report, &phi, &data.f, cfg.certify_tol)?;
    report.probe = Some(ProbeSummary {
        seed: cfg.seed,
        fields: PROBE_FIELDS,
        max_relative_error: linearization_probe(&phi, &data.f, cfg.seed, PROBE_FIELDS)?,
    });
    report.status = if ok { RunStatus::Certified } else { RunStatus::Uncertified };
    Outputs::create(&cfg.output_dir())?.finish(&mut report)?;
    Ok(report)
}
