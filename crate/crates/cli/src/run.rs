//! Experiment runners. Each experiment builds its instance from the spec seed,
//! calls the library, and turns the results into checks and CSV artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specshift::analytic::{
    heat_trace_convexity, lemma33_derivative, lemma34_sign_check, phi_mu_eps, regularization_limit_check,
    semibounded_concavity_check, truncation_experiment,
};
use specshift::contour::Contour;
use specshift::flow::{
    averaging_identity_check, concavity_check, kostrykin_functional_check, monotonicity_scan, projected_trace_scan,
    subadditivity_check, FamilyKind, Weight,
};
use specshift::generate::{instance, operator_pair, rational_pair, truncation_instance};
use specshift::herglotz::{
    contour_trace_integral, convergence_check, j_decomposition, lemma21_closed_form, lemma21_quadrature,
    lemma21_residue, phi_admissible,
};
use specshift::linalg::{schatten_norm, trace, RealInterval, SchattenP};
use specshift::rng::SplitMix64;
use specshift::shift::{krein_check, sandwich_check, xi};
use specshift::{HermitianOperator, OperatorFamily, ScanReport, SmoothFunction, StepFunction};

use crate::error::CliError;
use crate::report::{to_canonical_json, write_atomic, Check, Report};
use crate::spec::{ContourSpec, Experiment, Grid, InstanceSpec};

type Res<T> = Result<T, CliError>;

/// A CSV table produced by an experiment, written as `<stem>.<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

struct Output {
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
}

impl Output {
    fn new() -> Self {
        Output {
            checks: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn csv(&mut self, name: impl Into<String>, write: impl FnOnce(&mut Vec<u8>) -> specshift::Result<()>) -> Res<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.artifacts.push(Artifact {
            name: name.into(),
            csv: String::from_utf8(buf).expect("csv output is UTF-8"),
        });
        Ok(())
    }

    fn scan(&mut self, name: &str, report: &ScanReport) -> Res<()> {
        self.check(scan_check(name, report));
        self.csv(name, |w| report.write_csv(w))
    }
}

fn scan_check(name: &str, report: &ScanReport) -> Check {
    let summary = report.summary();
    Check::at_most(name, report.violations.len() as f64, 0.0)
        .with("points", summary.points)
        .with("min", summary.min)
        .with("max", summary.max)
        .with("worst_gap", summary.worst_gap)
        .with("scan_tolerance", report.tolerance)
}

/// Runs one spec. `tol`, when given, replaces `params.tol` and is echoed in
/// the report.
pub fn run(spec: &InstanceSpec, tol: Option<f64>) -> Res<Outcome> {
    let mut spec = spec.clone();
    if tol.is_some() {
        spec.params.tol = tol;
    }
    spec.validate()?;
    let start = Instant::now();
    let out = match spec.experiment {
        Experiment::Xi => run_xi(&spec),
        Experiment::Krein => run_krein(&spec),
        Experiment::Average => run_average(&spec),
        Experiment::Monotonicity => run_monotonicity(&spec),
        Experiment::Concavity => run_concavity(&spec),
        Experiment::Subadditivity => run_subadditivity(&spec),
        Experiment::Kostrykin => run_kostrykin(&spec),
        Experiment::Lemma21 => run_lemma21(&spec),
        Experiment::Theorem23 => run_theorem23(&spec),
        Experiment::Jdecomp => run_jdecomp(&spec),
        Experiment::Lemma33 => run_lemma33(&spec),
        Experiment::Truncation => run_truncation(&spec),
        Experiment::Semibounded => run_semibounded(&spec),
        Experiment::Heat => run_heat(&spec),
        Experiment::Regularization => run_regularization(&spec),
    }?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(Outcome {
        report: Report::new(spec, out.checks, elapsed),
        artifacts: out.artifacts,
    })
}

fn tol_or(spec: &InstanceSpec, default: f64) -> f64 {
    spec.params.tol.unwrap_or(default)
}

fn grid_or(spec: &InstanceSpec, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    spec.params.grid.unwrap_or(Grid::new(lo, hi, points)).values()
}

fn seeded_instance(spec: &InstanceSpec) -> Res<(HermitianOperator, OperatorFamily)> {
    Ok(instance(spec.seed, spec.family_kind, spec.dim, spec.scale)?)
}

fn phi_or(spec: &InstanceSpec, default: impl FnOnce() -> SmoothFunction) -> Res<SmoothFunction> {
    match &spec.params.phi {
        Some(p) => p.build(),
        None => Ok(default()),
    }
}

fn contour_or(spec: &InstanceSpec, default: Contour) -> Res<Contour> {
    match spec.params.contour {
        Some(ContourSpec { a, b, half_height, margin }) => Ok(Contour::new(a, b, half_height, margin)?),
        None => Ok(default),
    }
}

/// `μ` values: the spec's `mu`, else just below, in the middle of and just
/// above the spectrum of `H0`.
fn mus(spec: &InstanceSpec, h0: &HermitianOperator) -> Res<Vec<f64>> {
    if let Some(mu) = spec.params.mu {
        return Ok(vec![mu]);
    }
    let (lo, hi) = (h0.min_eigenvalue()?, h0.max_eigenvalue()?);
    Ok(vec![lo - 0.25, 0.5 * (lo + hi), hi + 0.25])
}

fn mid_spectrum(h0: &HermitianOperator) -> Res<f64> {
    Ok(0.5 * (h0.min_eigenvalue()? + h0.max_eigenvalue()?))
}

/// Real interval hull of the spectra of `H(s)` over `points`.
fn spectral_hull(h0: &HermitianOperator, fam: &OperatorFamily, points: &[f64]) -> Res<(f64, f64)> {
    let mut hull = (f64::INFINITY, f64::NEG_INFINITY);
    for &s in points {
        let h = fam.perturbed(h0, s)?;
        hull = (hull.0.min(h.min_eigenvalue()?), hull.1.max(h.max_eigenvalue()?));
    }
    Ok(hull)
}

fn run_xi(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-9);
    let (h0, fam) = seeded_instance(spec)?;
    let v = fam.v(spec.params.s.unwrap_or(1.0))?;
    let r = xi(&h0, &v)?;
    let norm = schatten_norm(&v, SchattenP::One)?;
    let integral = r.xi.integral()?;
    let mut out = Output::new();
    out.check(
        Check::at_most("l1_bound", r.xi_l1 - norm, tol)
            .with("xi_l1", r.xi_l1)
            .with("trace_norm_v", norm),
    );
    out.check(
        Check::at_most("trace_identity", (integral - r.v_trace).abs() / (1.0 + norm), tol)
            .with("xi_integral", integral)
            .with("trace_v", r.v_trace),
    );
    let mu = spec.params.mu.unwrap_or(mid_spectrum(&h0)?);
    let sw = sandwich_check(&h0, &v, mu)?;
    out.check(
        Check::at_most("zeta_sandwich", sw.violation(), tol)
            .with("mu", mu)
            .with("lower", sw.lower)
            .with("zeta", sw.mid)
            .with("upper", sw.upper),
    );
    out.csv("xi", |w| r.xi.write_csv(w))?;
    Ok(out)
}

fn krein_functions() -> Vec<SmoothFunction> {
    vec![
        SmoothFunction::polynomial(&[0.0, 1.0]),
        SmoothFunction::polynomial(&[0.0, 0.0, 1.0]),
        SmoothFunction::polynomial(&[0.0, 0.0, 0.0, 1.0]),
        SmoothFunction::exp_decay(1.0),
        SmoothFunction::exp_decay(2.0),
        SmoothFunction::arctan(),
    ]
}

fn run_krein(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-8);
    let (h0, fam) = seeded_instance(spec)?;
    let v = fam.v(spec.params.s.unwrap_or(1.0))?;
    let phis = match &spec.params.phi {
        Some(p) => vec![p.build()?],
        None => krein_functions(),
    };
    let mut out = Output::new();
    for phi in &phis {
        let c = krein_check(&h0, &v, |x| phi.value(x))?;
        out.check(
            Check::at_most(format!("krein[{}]", phi.descriptor()), c.relative_gap(), tol)
                .with("lhs", c.lhs)
                .with("rhs", c.rhs)
                .with("trace_v", trace(&v)),
        );
    }
    Ok(out)
}

fn run_average(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-7);
    let (h0, fam) = seeded_instance(spec)?;
    let s = spec.params.s.unwrap_or(1.0);
    let (s_lo, s_hi) = if s >= 0.0 { (0.0, s) } else { (s, 0.0) };
    let deltas: Vec<(String, RealInterval)> = match (spec.params.interval, spec.params.mu) {
        (Some([lo, hi]), _) => vec![(format!("({lo}, {hi})"), RealInterval::open(lo, hi)?)],
        (None, Some(mu)) => vec![(format!("(-inf, {mu})"), RealInterval::below(mu))],
        (None, None) => {
            let mu = h0.min_eigenvalue()? + 0.37;
            vec![
                ("R".to_string(), RealInterval::real_line()),
                (format!("(-inf, {mu})"), RealInterval::below(mu)),
                (format!("({}, {})", mu - 1.0, mu + 1.5), RealInterval::open(mu - 1.0, mu + 1.5)?),
            ]
        }
    };
    let mut out = Output::new();
    for (label, delta) in &deltas {
        let c = averaging_identity_check(&h0, &fam, delta, s_lo, s_hi, tol)?;
        out.check(
            Check::at_most(format!("average[{label}]"), c.gap, 10.0 * tol)
                .with("lhs", c.lhs)
                .with("rhs", c.rhs)
                .with("s_lo", s_lo)
                .with("s_hi", s_hi),
        );
    }
    Ok(out)
}

fn run_monotonicity(spec: &InstanceSpec) -> Res<Output> {
    let (h0, fam) = seeded_instance(spec)?;
    let grid = grid_or(spec, -1.0, 1.0, 101);
    let mut out = Output::new();
    for (i, mu) in mus(spec, &h0)?.into_iter().enumerate() {
        let name = format!("monotonicity[mu{i}]");
        if spec.family_kind == FamilyKind::MatrixPolynomial {
            // Convex negative control: recorded, exempt from the contract.
            let r = projected_trace_scan(&h0, &fam, mu, &grid)?;
            out.check(
                Check::at_least(format!("negative_control[mu{i}]"), r.violations.len() as f64, 0.0)
                    .with("mu", mu)
                    .with("status", "exempt"),
            );
            out.csv(name, |w| r.write_csv(w))?;
        } else {
            let r = monotonicity_scan(&h0, &fam, mu, &grid)?;
            out.check(scan_check(&name, &r).with("mu", mu));
            out.csv(name, |w| r.write_csv(w))?;
        }
    }
    Ok(out)
}

fn run_concavity(spec: &InstanceSpec) -> Res<Output> {
    let (h0, fam) = seeded_instance(spec)?;
    let grid = grid_or(spec, -1.0, 1.0, 101);
    let mut out = Output::new();
    for (i, mu) in mus(spec, &h0)?.into_iter().enumerate() {
        let r = concavity_check(&h0, &fam, mu, &grid)?;
        out.scan(&format!("concavity[mu{i}]"), &r)?;
        out.checks.last_mut().unwrap().values.insert("mu".into(), mu.into());
    }
    Ok(out)
}

fn run_subadditivity(spec: &InstanceSpec) -> Res<Output> {
    let (h0, fam) = seeded_instance(spec)?;
    let steps = grid_or(spec, 0.0, 1.0, 11);
    let pairs: Vec<(f64, f64)> = steps.iter().flat_map(|&s| steps.iter().map(move |&t| (s, t))).collect();
    let mut out = Output::new();
    for (i, mu) in mus(spec, &h0)?.into_iter().enumerate() {
        let r = subadditivity_check(&h0, &fam, mu, &pairs)?;
        out.check(scan_check(&format!("subadditivity[mu{i}]"), &r).with("mu", mu).with("pairs", pairs.len()));
    }
    Ok(out)
}

fn run_kostrykin(spec: &InstanceSpec) -> Res<Output> {
    let (h0, fam) = seeded_instance(spec)?;
    let grid = grid_or(spec, -1.0, 1.0, 41);
    let smooth = phi_or(spec, || SmoothFunction::exp_decay(1.0))?;
    let mu = spec.params.mu.unwrap_or(mid_spectrum(&h0)?);
    let weights = [
        (format!("kostrykin[{}]", smooth.descriptor()), Weight::Smooth { function: smooth.clone(), tol: 1e-11 }),
        (format!("kostrykin[1(-inf,{mu})]"), Weight::Step(StepFunction::new(vec![mu], vec![1.0, 0.0])?)),
    ];
    let mut out = Output::new();
    for (name, weight) in &weights {
        let r = kostrykin_functional_check(&h0, &fam, weight, &grid)?;
        out.check(scan_check(name, &r));
    }
    Ok(out)
}

fn run_lemma21(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-8);
    let n_points = spec.params.n_points.unwrap_or(2048);
    let left_segment = spec.params.left_segment.unwrap_or(true);
    let pair = rational_pair(&mut SplitMix64::new(spec.seed), spec.params.max_poles.unwrap_or(6), left_segment)?;
    let contour = contour_or(spec, pair.contour)?;
    let closed = lemma21_closed_form(&pair.p, &pair.q, &contour)?;
    let quad = lemma21_quadrature(&pair.p, &pair.q, &contour, n_points)?;
    let mut out = Output::new();
    out.check(
        Check::at_most("residue_vs_quadrature", (closed - quad).abs(), tol)
            .with("closed_form", closed)
            .with("quadrature", quad)
            .with("p_poles", pair.p.poles())
            .with("q_poles", pair.q.poles()),
    );
    match lemma21_residue(&pair.p, &pair.q, &contour) {
        Ok(v) => out.check(Check::at_least("nonnegative", v, -1e-12).with("value", v)),
        Err(specshift::Error::LeftSegmentViolated { interior, exterior }) => out.check(
            Check::at_least("nonnegative", 0.0, 0.0)
                .with("status", "hypothesis not met, exempt")
                .with("top_interior_pole", interior)
                .with("bottom_exterior_pole", exterior)
                .with("value", closed),
        ),
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

fn operator_instance(spec: &InstanceSpec) -> Res<(specshift::generate::OperatorPair, SmoothFunction, Contour)> {
    let inner = spec.params.inner_dim.unwrap_or(spec.dim + 1).max(1);
    let pair = operator_pair(&mut SplitMix64::new(spec.seed), spec.dim, inner, spec.scale)?;
    let contour = contour_or(spec, pair.contour)?;
    let phi = phi_or(spec, || SmoothFunction::exp_decay(1.0))?;
    if !phi_admissible(&phi, contour.a, contour.b) {
        return Err(specshift::Error::Hypothesis {
            name: "phi_nonnegative_nonincreasing",
            detail: format!("`{}` is negative or increasing on ({}, {})", phi.descriptor(), contour.a, contour.b),
        }
        .into());
    }
    Ok((pair, phi, contour))
}

fn run_theorem23(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-8);
    let n_points = spec.params.n_points.unwrap_or(1024);
    let (pair, phi, contour) = operator_instance(spec)?;
    let analytic = phi.analytic_extension()?;
    let value = contour_trace_integral(&pair.m1, &pair.m2, |z| analytic(z), &contour, n_points)?;
    let mut out = Output::new();
    out.check(
        Check::at_least("nonnegative", value, -tol)
            .with("value", value)
            .with("phi", phi.descriptor())
            .with("l1_spectrum", pair.m1.poles())
            .with("l2_spectrum", pair.m2.poles()),
    );
    Ok(out)
}

fn run_jdecomp(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-7);
    let n_points = spec.params.n_points.unwrap_or(1024);
    let ns = spec.params.n.clone().unwrap_or_else(|| vec![16]);
    let (pair, phi, contour) = operator_instance(spec)?;
    let mut out = Output::new();
    let mut rows = String::from("n,j1,j2,j2_quadrature,j3,j4,total,quadrature_total\n");
    for &n in &ns {
        let j = j_decomposition(&pair.m1, &pair.m2, &phi, &contour, n, n_points)?;
        rows.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            j.n, j.j1, j.j2, j.j2_quadrature, j.j3, j.j4, j.total, j.quadrature_total
        ));
        out.check(
            Check::at_least(format!("j_terms_nonnegative[n={n}]"), j.j1.min(j.j3).min(j.j4), -1e-10)
                .with("j1", j.j1)
                .with("j3", j.j3)
                .with("j4", j.j4),
        );
        out.check(Check::at_most(format!("j2_vanishes[n={n}]"), j.j2_quadrature.abs(), 1e-8).with("j2", j.j2));
        out.check(
            Check::at_most(format!("sum_matches_quadrature[n={n}]"), (j.total - j.quadrature_total).abs(), tol)
                .with("total", j.total)
                .with("quadrature_total", j.quadrature_total),
        );
    }
    out.artifacts.push(Artifact {
        name: "jdecomp".into(),
        csv: rows,
    });
    if ns.len() > 1 {
        let c = convergence_check(&pair.m1, &pair.m2, &phi, &contour, &ns, n_points)?;
        let first = (c.totals[0] - c.exact).abs();
        // First-order convergence in 1/n: the error must shrink at least by
        // the refinement ratio over 8.
        let ratio = *ns.last().unwrap() as f64 / ns[0] as f64;
        out.check(
            Check::at_most("convergence", c.exact_gap, first * 8.0 / ratio)
                .with("exact", c.exact)
                .with("totals", c.totals.as_slice())
                .with("cauchy_gap", c.cauchy_gap)
                .with("first_gap", first),
        );
    }
    Ok(out)
}

fn run_lemma33(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-5);
    let n_points = spec.params.n_points.unwrap_or(1024);
    let (h0, fam) = seeded_instance(spec)?;
    let phi = phi_or(spec, || SmoothFunction::exp_decay(1.0))?;
    let s = spec.params.s.unwrap_or(0.0);
    let grid = grid_or(spec, -0.5, 0.5, 11);
    let mut points = grid.clone();
    points.push(s);
    let (lo, hi) = spectral_hull(&h0, &fam, &points)?;
    let contour = contour_or(spec, Contour::new(lo - 0.5, hi + 0.5, 1.0, 0.5)?)?;
    let d = lemma33_derivative(&h0, &fam, s, &phi, &contour, n_points)?;
    let mut out = Output::new();
    out.check(
        Check::at_most("derivative_formula", d.relative_gap(), tol)
            .with("analytic", d.analytic)
            .with("finite_difference", d.finite_diff)
            .with("curvature_term", d.terms.curvature_term)
            .with("contour_term", d.terms.contour_term),
    );
    if spec.family_kind != FamilyKind::MatrixPolynomial {
        let sign = lemma34_sign_check(&h0, &fam, &phi, &contour, &grid, n_points)?;
        out.scan("derivative_signs", &sign.report)?;
    }
    Ok(out)
}

fn run_truncation(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-6);
    let mut rng = SplitMix64::new(spec.seed);
    let (h0, fam) = truncation_instance(&mut rng, spec.dim, spec.params.high_dim.unwrap_or(10), spec.scale)?;
    let phi = match &spec.params.phi {
        Some(p) => p.build()?,
        None => phi_mu_eps(spec.params.mu.unwrap_or(0.0), 1e-2)?,
    };
    let grid = grid_or(spec, -0.5, 0.5, 21);
    let cutoffs = spec
        .params
        .cutoffs
        .clone()
        .unwrap_or_else(|| (0..9).map(|k| 2f64.powi(k)).collect());
    let table = truncation_experiment(&h0, &fam, &phi, &grid, &cutoffs)?;
    let mut out = Output::new();
    out.check(Check::at_most("column_convergence", table.column_gap(), tol));
    out.check(Check::at_most("matches_untruncated", table.oracle_gap(), tol));
    out.check(Check::at_most("rows_nonincreasing", table.row_violations(1e-8).len() as f64, 0.0));
    out.csv("truncation", |w| table.write_csv(w))?;
    Ok(out)
}

fn run_semibounded(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-7);
    let (h0, fam) = seeded_instance(spec)?;
    let lo = h0.min_eigenvalue()?;
    let phi = phi_or(spec, || SmoothFunction::tanh_rise(lo - 10.0))?;
    let grid = grid_or(spec, -1.0, 1.0, 41);
    let c = semibounded_concavity_check(&h0, &fam, &phi, &grid)?;
    let mut out = Output::new();
    out.check(
        Check::at_most("integration_by_parts", c.max_identity_gap(), tol)
            .with("lambda_lo", c.lambda.0)
            .with("lambda_hi", c.lambda.1)
            .with("phi", phi.descriptor()),
    );
    out.scan("concavity", &c.report)?;
    Ok(out)
}

fn run_heat(spec: &InstanceSpec) -> Res<Output> {
    let (h0, fam) = seeded_instance(spec)?;
    let ts = spec.params.t.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let grid = grid_or(spec, -1.0, 1.0, 41);
    let reports = heat_trace_convexity(&h0, &fam, &ts, &grid)?;
    let mut out = Output::new();
    for (t, r) in ts.iter().zip(&reports) {
        out.check(scan_check(&format!("heat_convexity[t={t}]"), r));
    }
    let mut table = String::from("s");
    for t in &ts {
        table.push_str(&format!(",t={t}"));
    }
    table.push('\n');
    for (i, s) in grid.iter().enumerate() {
        table.push_str(&s.to_string());
        for r in &reports {
            table.push_str(&format!(",{}", r.values[i]));
        }
        table.push('\n');
    }
    out.artifacts.push(Artifact {
        name: "heat".into(),
        csv: table,
    });
    Ok(out)
}

fn run_regularization(spec: &InstanceSpec) -> Res<Output> {
    let tol = tol_or(spec, 1e-6);
    let (h0, fam) = seeded_instance(spec)?;
    let fv = fam.eval(spec.params.s.unwrap_or(0.3))?;
    let h = h0.add(&fv.v);
    let e = h.eigenvalues()?.to_vec();
    let mu = match spec.params.mu {
        Some(mu) => mu,
        None if e.len() == 1 => e[0] - 1.0,
        None => {
            let k = (0..e.len() - 1)
                .max_by(|&a, &b| (e[a + 1] - e[a]).total_cmp(&(e[b + 1] - e[b])))
                .unwrap();
            0.5 * (e[k] + e[k + 1])
        }
    };
    let gap = e.iter().map(|l| (l - mu).abs()).fold(f64::INFINITY, f64::min);
    let eps = match &spec.params.eps {
        Some(eps) => eps.clone(),
        None => {
            let floor = 1e-8 * gap * gap;
            let mut eps: Vec<f64> = (0..=8).map(|j| 1e-2 * 10f64.powi(-j)).filter(|&x| x > floor).collect();
            eps.push(floor);
            eps
        }
    };
    let r = regularization_limit_check(&h, &fv.dv, mu, &eps)?;
    let mut out = Output::new();
    out.check(
        Check::at_most("regularized_limit", r.final_gap(), tol)
            .with("mu", mu)
            .with("limit", r.limit)
            .with("eps", r.eps.as_slice())
            .with("values", r.values.as_slice())
            .with("spectral_gap", r.spectral_gap)
            .with("schedule_reaches_contract", if r.contract_applies() { "yes" } else { "no" }),
    );
    Ok(out)
}

/// Writes `<stem>.json` and, with `csv`, one `<stem>.<artifact>.csv` per
/// artifact into `dir`.
pub fn write_outcome(outcome: &Outcome, dir: &Path, stem: &str, csv: bool) -> Res<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let json_path = dir.join(format!("{stem}.json"));
    write_atomic(&json_path, to_canonical_json(&outcome.report)?.as_bytes())?;
    let mut written = vec![json_path];
    if csv {
        for a in &outcome.artifacts {
            let path = dir.join(format!("{stem}.{}.csv", a.name));
            write_atomic(&path, a.csv.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub file: String,
    pub experiment: Option<Experiment>,
    pub pass: bool,
    pub failed_checks: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
    pub total: usize,
    pub failed: usize,
    pub errors: usize,
    pub pass: bool,
    pub version: String,
}

/// Every `*.json` spec directly inside `dir`, sorted by file name.
pub fn suite_files(dir: &Path) -> Res<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every spec in `dir` in parallel. Per-spec reports go to `out_dir` when
/// given; errors in one spec are recorded and do not stop the others.
pub fn run_suite(dir: &Path, tol: Option<f64>, out_dir: Option<&Path>, csv: bool) -> Res<SuiteReport> {
    let files = suite_files(dir)?;
    let entries: Vec<SuiteEntry> = files
        .par_iter()
        .map(|path| {
            let file = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let result = InstanceSpec::from_path(path).and_then(|spec| {
                let outcome = run(&spec, tol)?;
                if let Some(d) = out_dir {
                    write_outcome(&outcome, d, &stem, csv)?;
                }
                Ok(outcome)
            });
            match result {
                Ok(o) => SuiteEntry {
                    file,
                    experiment: Some(o.report.spec.experiment),
                    pass: o.report.pass,
                    failed_checks: o.report.failed_checks().map(|c| c.name.clone()).collect(),
                    error: None,
                },
                Err(e) => SuiteEntry {
                    file,
                    experiment: None,
                    pass: false,
                    failed_checks: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let failed = entries.iter().filter(|e| !e.pass && e.error.is_none()).count();
    let errors = entries.iter().filter(|e| e.error.is_some()).count();
    Ok(SuiteReport {
        total: entries.len(),
        failed,
        errors,
        pass: failed == 0 && errors == 0,
        entries,
        version: crate::report::VERSION.to_string(),
    })
}
