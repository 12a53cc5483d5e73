//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any FAIL.

use christoffel::equation::{
    constant_solution, constant_solution_value, find_admissible_c, generate_admissible_f, manufactured_data, residual,
    PrescribedData, SupportField,
};
use christoffel::estimates::CheckStatus;
use christoffel::geometry::{
    binomial, embed, integral_identity_check, integral_identity_table, shape, support_duality_check, DualityDirections,
};
use christoffel::nirenberg::{to_nirenberg, to_nirenberg_with, RConvention};
use christoffel::solver::{assemble_jacobian, certify, continuation_solve, newton_solve, SolverOptions};
use christoffel::{build_grid, Grid, GridMode, SphericalField};
use christoffel_cli::{cmd_solve, RunConfig, RunOptions, RunStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn grid(n: usize, l: usize) -> Arc<Grid> {
    let mode = if n == 2 { GridMode::FullS2 } else { GridMode::Axisymmetric };
    build_grid(n, mode, l).unwrap()
}

fn generated(g: &Arc<Grid>, c: Option<f64>) -> PrescribedData {
    let h = SphericalField::from_fn(g.clone(), |t, _| 1.0 + 0.3 * t.cos().powi(2)).unwrap();
    let c = c.unwrap_or_else(|| find_admissible_c(&h).unwrap().c);
    generate_admissible_f(&h, c).unwrap()
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn constant_oracle() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for (n, gamma) in [(2, 1.0), (2, 4.0), (3, 4.0), (5, 2.0)] {
        let start = Instant::now();
        let g = grid(n, 16);
        let f = PrescribedData::constant(g.clone(), gamma).map_err(e)?;
        let c = (1.0 + 2.0 * gamma / n as f64).sqrt();
        let (phi, _) = continuation_solve(&f, &SolverOptions::default()).map_err(e)?;
        let err = phi.values().iter().map(|p| (p - c).abs()).fold(0.0, f64::max);
        // Newton from a non-constant even start lands on the same constant
        let bump = SphericalField::from_fn(g.clone(), |t, _| c + 0.3 * t.cos().powi(2)).map_err(e)?;
        let (phi2, _) = newton_solve(&f, &SupportField::new(bump).map_err(e)?, &SolverOptions::default()).map_err(e)?;
        let err2 = phi2.values().iter().map(|p| (p - c).abs()).fold(0.0, f64::max);
        let secs = start.elapsed().as_secs_f64();
        check(err < 1e-9 && err2 < 1e-9, format!("(n={n}, gamma={gamma}): error {err:e} / {err2:e}"))?;
        check(secs < 2.0, format!("(n={n}, gamma={gamma}) took {secs:.2} s"))?;
        worst = (worst.0.max(err.max(err2)), worst.1.max(secs));
    }
    Ok(format!("max error {:.1e}, slowest case {:.3} s", worst.0, worst.1))
}

fn translated_family() -> Outcome {
    let g = grid(2, 16);
    let f = PrescribedData::constant(g.clone(), 4.0).map_err(e)?;
    let mut worst = 0.0f64;
    for r in [0.1, 0.3] {
        let s = r / 3f64.sqrt();
        for x0 in [[r, 0.0, 0.0], [0.0, 0.0, r], [s, s, s]] {
            let phi = constant_solution(4.0, g.clone(), &x0).map_err(e)?;
            let res = residual(&phi, &f).map_err(e)?.max_abs();
            check(res < 1e-9, format!("|x0| = {r}, x0 = {x0:?}: residual {res:e}"))?;
            worst = worst.max(res);
        }
    }
    Ok(format!("max residual {worst:.1e} over 6 centres"))
}

fn linearization_anchor() -> Outcome {
    let g = grid(2, 16);
    let gamma = 4.0;
    let phi = SupportField::constant(g.clone(), constant_solution_value(gamma, 2)).map_err(e)?;
    let f = PrescribedData::constant(g.clone(), gamma).map_err(e)?;
    let (space, jac) = assemble_jacobian(&phi, &f).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let c: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let psi = SphericalField::from_coeffs(g.clone(), &space.embed(&c)).map_err(e)?;
        let expected: Vec<f64> = psi
            .laplacian()
            .values()
            .iter()
            .zip(psi.values())
            .map(|(l, p)| l + 2.0 * p)
            .collect();
        let jc: Vec<f64> = (0..space.dim())
            .map(|i| (0..space.dim()).map(|j| jac[(i, j)] * c[j]).sum())
            .collect();
        let got = g.synthesize(&space.embed(&jc));
        let scale = expected.iter().map(|x| x.abs()).fold(0.0, f64::max);
        worst = worst.max(max_diff(&got, &expected) / scale);
    }
    check(worst < 1e-9, format!("relative error {worst:e}"))?;
    Ok(format!("50 random even fields, max relative error {worst:.1e}"))
}

fn manufactured() -> Outcome {
    let g = grid(2, 32);
    let star = SupportField::new(
        SphericalField::from_fn(g.clone(), |t, _| 5f64.sqrt() + 0.1 * t.cos().powi(2)).map_err(e)?,
    )
    .map_err(e)?;
    let f = manufactured_data(&star).map_err(e)?;
    let phi0 = SupportField::constant(g, 5f64.sqrt()).map_err(e)?;
    let (phi, d) = newton_solve(&f, &phi0, &SolverOptions::default()).map_err(e)?;
    let err = max_diff(phi.values(), star.values());
    check(err < 1e-8, format!("recovery error {err:e}"))?;
    let h = &d.residual_history;
    check(h.len() >= 4, format!("only {} residuals recorded", h.len()))?;
    // r_{k+1} <= C r_k^2 + floor on the last three steps, C from the first of them
    let floor = 1e-12;
    let tail = &h[h.len() - 4..];
    let c = (tail[1] / (tail[0] * tail[0])).max(1.0);
    for w in tail[1..].windows(2) {
        check(
            w[1] <= 10.0 * c * w[0] * w[0] + floor,
            format!("not quadratic: {:e} -> {:e} (C = {c:.2}), history {h:?}", w[0], w[1]),
        )?;
    }
    let orders: Vec<f64> = tail
        .windows(3)
        .filter(|w| w[2] > floor)
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .collect();
    check(orders.iter().all(|&p| p >= 1.8), format!("observed orders {orders:?}"))?;
    let orders: Vec<String> = orders.iter().map(|p| format!("{p:.2}")).collect();
    Ok(format!(
        "error {err:.1e}; last residuals {}; observed order {}",
        tail.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>().join(" -> "),
        if orders.is_empty() { "n/a (floor reached)".into() } else { orders.join(", ") }
    ))
}

fn full_pipeline() -> Outcome {
    let start = Instant::now();
    let g = grid(2, 32);
    let f = generated(&g, None);
    let (phi, trace) = continuation_solve(&f, &SolverOptions::default()).map_err(e)?;
    let secs = start.elapsed().as_secs_f64();
    for s in &trace.steps {
        check(s.min_eig_u > 0.0 && s.min_phi > 1.0, format!("t = {}: min eig U {:e}, min phi {}", s.t, s.min_eig_u, s.min_phi))?;
        check(
            s.c0_upper_ok && s.c0_gap_ok && s.gradient == CheckStatus::Holds && s.trace == CheckStatus::Holds,
            format!("t = {}: bounds {:?}", s.t, s),
        )?;
    }
    check(trace.steps.last().map(|s| s.t) == Some(1.0), "continuation did not reach t = 1".into())?;
    check(certify(&phi, &f, 1e-9).map_err(e)?.certified, "final solution not certified".into())?;
    check(secs < 30.0, format!("took {secs:.1} s"))?;
    let min_eig = trace.steps.iter().map(|s| s.min_eig_u).fold(f64::INFINITY, f64::min);
    Ok(format!("{} steps, min eig U {min_eig:.3}, all bounds hold, {secs:.2} s", trace.steps.len()))
}

fn certified_solutions() -> Vec<(String, SupportField)> {
    let mut out = Vec::new();
    let opts = SolverOptions::default();
    for (name, g) in [("n=2 L=32", grid(2, 32)), ("n=3 L=24", grid(3, 24)), ("n=4 L=24", grid(4, 24))] {
        let f = generated(&g, None);
        let (phi, _) = continuation_solve(&f, &opts).unwrap();
        assert!(certify(&phi, &f, 1e-9).unwrap().certified);
        out.push((name.to_string(), phi));
    }
    let g = grid(2, 32);
    let star = SupportField::new(SphericalField::from_fn(g.clone(), |t, l| 2.0 + 0.2 * t.cos().powi(2) + 0.1 * (t.sin() * l.sin()).powi(2)).unwrap()).unwrap();
    let f = manufactured_data(&star).unwrap();
    // this f fails the semi-definiteness condition, so no continuation
    let (phi, _) = newton_solve(&f, &SupportField::constant(g, 2.1).unwrap(), &opts).unwrap();
    assert!(certify(&phi, &f, 1e-9).unwrap().certified);
    out.push(("manufactured n=2".into(), phi));
    out
}

fn integral_identity(sols: &[(String, SupportField)]) -> Outcome {
    let mut worst = 0.0f64;
    for (name, phi) in sols {
        for r in integral_identity_table(phi).map_err(e)? {
            check(r.relative_gap < 1e-8, format!("{name} k={}: gap {:e}", r.k, r.relative_gap))?;
            worst = worst.max(r.relative_gap).max(r.geometric_relative_gap);
        }
    }
    let g = grid(2, 16);
    let two = SupportField::constant(g, 2.0).map_err(e)?;
    let r = integral_identity_check(&two, 0).map_err(e)?;
    let target = 1.5 * std::f64::consts::PI;
    check(
        (r.lhs - target).abs() < 1e-12 * target && (r.rhs - target).abs() < 1e-12 * target,
        format!("constant sphere: lhs {} rhs {} vs 1.5 pi", r.lhs, r.rhs),
    )?;
    let factor = (binomial(2, 1) / binomial(2, 0)).powi(2);
    check(
        (r.rhs / r.reciprocal_rhs - factor).abs() < 1e-12 && r.reciprocal_relative_gap > 0.5,
        format!("reciprocal coefficient ratio {}", r.rhs / r.reciprocal_rhs),
    )?;
    Ok(format!(
        "max gap {worst:.1e} on {} solutions; c=2: lhs = rhs = {:.12} = 1.5 pi, reciprocal coefficient off by factor {}",
        sols.len(),
        r.lhs,
        r.rhs / r.reciprocal_rhs
    ))
}

fn geometry(sols: &[(String, SupportField)]) -> Outcome {
    let mut worst = 0.0f64;
    for (name, phi) in sols {
        let d = embed(phi).map_err(e)?.defects();
        check(d.hyperboloid < 1e-9, format!("{name}: hyperboloid defect {:e}", d.hyperboloid))?;
        worst = worst.max(d.hyperboloid);
    }
    let mut kappa_err = 0.0f64;
    for c in [std::f64::consts::E, 2.0] {
        let s = shape(&SupportField::constant(grid(2, 12), c).map_err(e)?).map_err(e)?;
        let want = 1.0 / c.ln().tanh();
        for k in s.kappa.iter().flatten() {
            kappa_err = kappa_err.max((k - want).abs());
        }
    }
    check(kappa_err < 1e-10, format!("geodesic sphere curvature error {kappa_err:e}"))?;
    let mut devs = Vec::new();
    for l in [8, 16, 32] {
        let g = grid(2, l);
        let (phi, _) = continuation_solve(&generated(&g, Some(2.0)), &SolverOptions::default()).map_err(e)?;
        devs.push(support_duality_check(&phi, DualityDirections::OffGrid).map_err(e)?.max_deviation);
    }
    check(devs.windows(2).all(|w| w[1] < w[0]), format!("duality deviation not decreasing: {devs:?}"))?;
    Ok(format!(
        "hyperboloid defect {worst:.1e}, kappa error {kappa_err:.1e}, off-grid duality deviation L=8,16,32: {}",
        devs.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>().join(", ")
    ))
}

fn nirenberg() -> Outcome {
    let g = grid(3, 16);
    let c = constant_solution_value(4.0, 3);
    let phi = SupportField::constant(g.clone(), c).map_err(e)?;
    let f = PrescribedData::constant(g, 4.0).map_err(e)?;
    let d = to_nirenberg(&phi, &f).map_err(e)?;
    let r0 = d.residual().map_err(e)?.max_abs();
    let alt = to_nirenberg_with(&phi, &f, RConvention::Alternative).map_err(e)?;
    let r1 = alt.residual().map_err(e)?.max_abs();
    check(d.r.max() == 22.0 && alt.r.max() == 27.0, format!("R = {} / {}", d.r.max(), alt.r.max()))?;
    check(r0 < 1e-12 && r1 > 1e-3, format!("residuals {r0:e} / {r1:e}"))?;
    // linear terms agree, so the alternative residual is the nonlinear term times (27/22 - 1)
    let v = d.v.max();
    let nonlinear = 22.0 / 8.0 * v.powi(5);
    let ratio = (nonlinear + r1) / nonlinear;
    check((ratio - 27.0 / 22.0).abs() < 1e-12, format!("nonlinear mismatch ratio {ratio}"))?;

    let g = grid(3, 32);
    let f = generated(&g, None);
    check(!f.is_constant(), "generated f is constant".into())?;
    let (phi, _) = continuation_solve(&f, &SolverOptions::default()).map_err(e)?;
    let nr = to_nirenberg(&phi, &f).map_err(e)?.residual().map_err(e)?.max_abs();
    check(nr < 1e-7, format!("non-constant residual {nr:e}"))?;
    Ok(format!(
        "v = {v:.6}, R=22 residual {r0:.1e}, R=27 residual {r1:.3} (nonlinear ratio {ratio:.6} = 27/22); non-constant n=3 residual {nr:.1e}"
    ))
}

fn determinism(dir: &Path) -> Outcome {
    let src = "n = 2\nmode = \"full-s2\"\nresolution = 24\nseed = 11\n[f]\ngenerator = { h = \"1 + 0.3*cos(theta)^2 + 0.1*(cos(lambda)*sin(theta))^2\", c = \"auto\" }\n";
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let mut cfg = RunConfig::parse(src, Path::new("det.toml"), PathBuf::new()).map_err(e)?;
        cfg.output = dir.join(run);
        let r = cmd_solve(&cfg, &RunOptions::default()).map_err(e)?;
        check(r.status == RunStatus::Certified, format!("run {run}: {:?}", r.status))?;
        reports.push((std::fs::read(cfg.output.join("report.json")).map_err(e)?, r.manifest));
    }
    check(reports[0].1 == reports[1].1, "manifests differ".into())?;
    check(reports[0].0 == reports[1].0, "report.json differs".into())?;
    Ok(format!("{} files plus report.json byte-identical across two runs", reports[0].1.len()))
}

fn refinement() -> Outcome {
    let mut out = Vec::new();
    for (n, l) in [(2, 16), (3, 16)] {
        let (g1, g2) = (grid(n, l), grid(n, 2 * l));
        let opts = SolverOptions::default();
        let (p1, _) = continuation_solve(&generated(&g1, Some(2.0)), &opts).map_err(e)?;
        let f2 = generated(&g2, Some(2.0));
        let (p2, _) = continuation_solve(&f2, &opts).map_err(e)?;
        check(certify(&p2, &f2, 1e-9).map_err(e)?.certified, format!("n={n} L={}: not certified", 2 * l))?;
        let diff = max_diff(p1.field().resample(&g2).map_err(e)?.values(), p2.values());
        check(diff < 1e-7, format!("n={n}: L={l} vs L={}: {diff:e}", 2 * l))?;
        out.push(format!("n={n} L={l}->{}: {diff:.1e}", 2 * l));
    }
    Ok(out.join(", "))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let sols = certified_solutions();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("constant-solution oracle", Box::new(constant_oracle)),
        ("translated-solution residual", Box::new(translated_family)),
        ("linearization anchor", Box::new(linearization_anchor)),
        ("manufactured-solution recovery", Box::new(manufactured)),
        ("full pipeline on generated data", Box::new(full_pipeline)),
        ("integral identity", Box::new(|| integral_identity(&sols))),
        ("geometry certificates", Box::new(|| geometry(&sols))),
        ("nirenberg bridge", Box::new(nirenberg)),
        ("determinism", Box::new(|| determinism(tmp.path()))),
        ("refinement consistency", Box::new(refinement)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
