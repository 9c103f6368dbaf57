use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regfrac::angular::{assemble_angular, eigenpairs, gap_check_with, w0_angular_derivative, w0_angular_profile};
use regfrac::constants::{gamma_n_limit, kappa_bar, mu, ConstantsBundle};
use regfrac::extension::{extension_flux, w_gamma, HalfPlanePoint};
use regfrac::galerkin::assemble;
use regfrac::mesh::{graded_mesh, Domain1D};
use regfrac::operator::{full_flap, full_flap_zero_ext, killing_potential, regional_flap, QuadSpec};
use regfrac::probe::{
    dirichlet_boundary_ratio, dirichlet_weighted_gradient, neumann_normal_derivative, s_to_one_comparison,
    solution_rate, GradientRelation, QuotientLimit, Side,
};
use regfrac::{omega_gamma, BoundaryCondition, PowerLaw, ScalarField};
use serde_json::{json, Value};

use crate::config::{Bc, FieldName, Resolved};
use crate::error::CliError;
use crate::output::Table;
use crate::row;

pub struct ScenarioOutput {
    pub tables: Vec<Table>,
    pub tolerances: Value,
}

pub fn run(r: &Resolved) -> Result<ScenarioOutput, CliError> {
    match r.scenario {
        "constants" => constants(r),
        "eval-op" => eval_op(r),
        "solve" => solve(r),
        "rates" => rates(r),
        "eigen" => eigen(r),
        "extension" => extension(r),
        "limit-s1" => limit_s1(r),
        other => Err(CliError::Config(format!("scenario {other} has no runner"))),
    }
}

fn constants(r: &Resolved) -> Result<ScenarioOutput, CliError> {
    let mut t = Table::new(
        "constants",
        &["s", "c1s", "a_s", "b_s", "kappa_bar", "hardy", "mu_mid", "mu_zero", "mu_harmonic", "identity_residual"],
    );
    for &s in &r.s {
        let so = r.order(s)?;
        let b = ConstantsBundle::new(1, so)?;
        t.push(row![
            s,
            b.c_ns,
            b.a_s,
            b.b_s,
            b.kappa_bar,
            b.hardy,
            b.mu_mid(),
            mu(0.0, so)?,
            mu(2.0 * s - 1.0, so)?,
            b.identity_residual()
        ]);
    }
    Ok(ScenarioOutput {
        tables: vec![t],
        tolerances: json!({"identity_residual": 1e-8, "mu_zero": 1e-8, "mu_harmonic": 1e-8}),
    })
}

fn bump(center: f64, width: f64, amp: f64) -> ScalarField {
    ScalarField::compact(
        move |y| {
            let r = (y - center) / width;
            let q = 1.0 - r * r;
            if q <= 0.0 {
                0.0
            } else {
                amp * (1.0 - 1.0 / q).exp()
            }
        },
        center - width,
        center + width,
    )
}

fn eval_op(r: &Resolved) -> Result<ScenarioOutput, CliError> {
    let q = QuadSpec::default();
    let mut harmonic = Table::new("harmonic", &["s", "gamma", "x", "value", "error"]);
    for &s in &r.s {
        let so = r.order(s)?;
        for gamma in [0.0, 2.0 * s - 1.0] {
            if gamma <= -1.0 {
                continue;
            }
            for x in [0.25, 1.0, 4.0] {
                let v = regional_flap(&omega_gamma(gamma), &Domain1D::HalfLine, x, so, &q)?;
                harmonic.push(row![s, gamma, x, v.value, v.error]);
            }
        }
    }
    let mut killing = Table::new(
        "killing",
        &["trial", "s", "center", "width", "amp", "x", "full", "regional", "killing_term", "gap", "error_bound"],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    for trial in 0..r.trials {
        let s: f64 = rng.random_range(0.15..0.95);
        let so = r.order(s)?;
        let c: f64 = rng.random_range(0.5..3.0);
        let w: f64 = rng.random_range(0.1..(c - 0.05).min(1.0));
        let amp: f64 = rng.random_range(-2.0..2.0);
        let x = loop {
            let x: f64 = rng.random_range((c - 2.0 * w).max(0.05)..c + 2.0 * w);
            if (x - (c - w)).abs() > 1e-3 && (x - (c + w)).abs() > 1e-3 {
                break x;
            }
        };
        let u = bump(c, w, amp);
        let full = full_flap_zero_ext(&u, x, so, &q)?;
        let regional = regional_flap(&u, &Domain1D::HalfLine, x, so, &q)?;
        let kill = killing_potential(x, so)? * u.eval(x);
        let gap = full.value - regional.value - kill;
        killing.push(row![
            trial,
            s,
            c,
            w,
            amp,
            x,
            full.value,
            regional.value,
            kill,
            gap,
            10.0 * (full.error + regional.error)
        ]);
    }
    Ok(ScenarioOutput {
        tables: vec![harmonic, killing],
        tolerances: json!({"harmonic_value": 1e-6, "killing_gap": "10 x reported quadrature error"}),
    })
}

fn solve(r: &Resolved) -> Result<ScenarioOutput, CliError> {
    let bc: BoundaryCondition = r.bc.into();
    let f = r.f.field();
    let mut summary = Table::new(
        "summary",
        &["s", "n", "bc", "f", "grading", "max_abs", "mean", "solver_residual", "constraint_residual"],
    );
    let mut solution = Table::new("solution", &["s", "n", "node", "x", "value"]);
    for &s in &r.s {
        let so = r.order(s)?;
        for &n in &r.n {
            let g = r.grading_for(so);
            let mesh = graded_mesh(-1.0, 1.0, n, g)?;
            let u = assemble(&mesh, so, bc)?.solve(&f)?;
            summary.push(row![
                s,
                n,
                bc.to_string(),
                r.f.label(),
                g,
                u.max_abs(),
                u.mean(),
                u.diagnostics.solver_residual,
                u.diagnostics.constraint_residual
            ]);
            for (j, (&x, &v)) in mesh.nodes().iter().zip(&u.values).enumerate() {
                solution.push(row![s, n, j, x, v]);
            }
        }
    }
    Ok(ScenarioOutput {
        tables: vec![summary, solution],
        tolerances: json!({"neumann_compatibility": "|int f| <= 1e-8 ||f||_1"}),
    })
}

fn side_label(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn quotient_cells(q: QuotientLimit) -> (f64, &'static str, f64) {
    match q {
        QuotientLimit::Limit { value, error } => (value, "limit", error),
        QuotientLimit::Divergent { exponent } => (exponent, "divergent_exponent", f64::NAN),
    }
}

fn rates(r: &Resolved) -> Result<ScenarioOutput, CliError> {
    let bc: BoundaryCondition = r.bc.into();
    let f = r.f.field();
    let mut tables = Vec::new();
    match r.bc {
        Bc::Dirichlet => {
            let mut t = Table::new(
                "rates",
                &[
                    "s",
                    "n",
                    "grading",
                    "side",
                    "exponent",
                    "exponent_target",
                    "fit_constant",
                    "fit_residual",
                    "fit_points",
                    "trace",
                    "trace_error",
                    "gradient_residual",
                    "window_lo",
                    "window_hi",
                ],
            );
            for &s in &r.s {
                let so = r.order(s)?;
                for &n in &r.n {
                    let g = r.grading_for(so);
                    let mesh = graded_mesh(-1.0, 1.0, n, g)?;
                    let v = assemble(&mesh, so, bc)?.solve(&f)?;
                    let ratio = dirichlet_boundary_ratio(&v)?;
                    let grad = dirichlet_weighted_gradient(&v)?;
                    for (side, trace, rel) in
                        [(Side::Left, ratio.left, grad.left), (Side::Right, ratio.right, grad.right)]
                    {
                        let fit = solution_rate(&v, side)?;
                        let residual = match rel {
                            GradientRelation::Ratio { residual, .. } => residual,
                            GradientRelation::ZeroTrace => f64::NAN,
                        };
                        t.push(row![
                            s,
                            n,
                            g,
                            side_label(side),
                            fit.exponent,
                            2.0 * s - 1.0,
                            fit.constant,
                            fit.residual,
                            fit.points,
                            trace.trace,
                            trace.error,
                            residual,
                            ratio.window.0,
                            ratio.window.1
                        ]);
                    }
                }
            }
            tables.push(t);
        }
        Bc::Neumann => {
            let mut t = Table::new(
                "neumann_rates",
                &[
                    "s",
                    "n",
                    "grading",
                    "side",
                    "increment_exponent",
                    "first_quotient",
                    "first_status",
                    "first_error",
                    "second_quotient",
                    "second_status",
                    "second_error",
                    "max_abs",
                    "window_lo",
                    "window_hi",
                ],
            );
            for &s in &r.s {
                let so = r.order(s)?;
                for &n in &r.n {
                    let g = r.grading_for(so);
                    let mesh = graded_mesh(-1.0, 1.0, n, g)?;
                    let u = assemble(&mesh, so, bc)?.solve(&f)?;
                    let q = neumann_normal_derivative(&u)?;
                    for (side, e) in [(Side::Left, q.left), (Side::Right, q.right)] {
                        let (fv, fs, fe) = quotient_cells(e.first);
                        let (sv, ss, se) = quotient_cells(e.second);
                        t.push(row![
                            s,
                            n,
                            g,
                            side_label(side),
                            e.increment.map(|f| f.exponent).unwrap_or(f64::NAN),
                            fv,
                            fs,
                            fe,
                            sv,
                            ss,
                            se,
                            u.max_abs(),
                            q.window.0,
                            q.window.1
                        ]);
                    }
                }
            }
            tables.push(t);
        }
    }
    Ok(ScenarioOutput {
        tables,
        tolerances: json!({
            "exponent": "within 0.05 of 2s-1",
            "trace_symmetry": 0.01,
            "gradient_residual": 0.05,
            "neumann_first_quotient": "<= 1e-2 max|u|",
            "neumann_increment_exponent": 1.2
        }),
    })
}

fn eigen(r: &Resolved) -> Result<ScenarioOutput, CliError> {
    let mut values = Table::new("eigenvalues", &["s", "n", "index", "lambda", "sqrt_lambda"]);
    let mut summary = Table::new(
        "summary",
        &["s", "n", "lambda1", "lambda1_expected", "lambda1_error", "lambda2", "sqrt_lambda2", "gap_margin", "gap_holds"],
    );
    for &s in &r.s {
        let so = r.order(s)?;
        for &n in &r.n {
            let pairs = eigenpairs(&assemble_angular(so, n)?, r.k.max(2))?;
            for (i, p) in pairs.iter().enumerate().take(r.k) {
                values.push(row![s, n, i + 1, p.lambda, p.lambda.max(0.0).sqrt()]);
            }
            let expected = (2.0 * s - 1.0).powi(2) / 4.0;
            let gap = gap_check_with(so, n)?;
            summary.push(row![
                s,
                n,
                pairs[0].lambda,
                expected,
                (pairs[0].lambda - expected).abs(),
                pairs[1].lambda,
                pairs[1].lambda.max(0.0).sqrt(),
                gap.margin,
                gap.holds
            ]);
        }
    }
    Ok(ScenarioOutput {
        tables: vec![values, summary],
        tolerances: json!({"lambda1_error": 1e-3, "half_order_sqrt_lambda2": 1.430_296_653_124_202_8, "gap_margin": -1e-3}),
    })
}

fn extension(r: &Resolved) -> Result<ScenarioOutput, CliError> {
    let gaussian = ScalarField::new(|y| (-y * y).exp())
        .with_second_derivative(|y| (4.0 * y * y - 2.0) * (-y * y).exp())
        .with_left_tail(PowerLaw::new(0.0, 0.0))
        .with_right_tail(PowerLaw::new(0.0, 0.0));
    let mut flux = Table::new("flux", &["s", "u", "x0", "flux", "flux_error", "expected", "relative_error"]);
    let mut profile = Table::new("w0", &["s", "theta", "profile", "derivative", "extension_r1", "extension_r5"]);
    let q = QuadSpec::default();
    for &s in &r.s {
        let so = r.order(s)?;
        for x0 in [0.0, 0.5] {
            let fl = extension_flux(&gaussian, x0, so)?;
            let expected = -kappa_bar(so) * full_flap(&gaussian, x0, so, &q)?.value;
            flux.push(row![s, "gaussian", x0, fl.value, fl.error, expected, (fl.value - expected).abs() / expected.abs()]);
        }
        let hardy_power = omega_gamma(s - 0.5);
        let fl = extension_flux(&hardy_power, 1.0, so)?;
        let expected = -kappa_bar(so) * full_flap(&hardy_power, 1.0, so, &q)?.value;
        flux.push(row![s, "hardy_power", 1.0, fl.value, fl.error, expected, (fl.value - expected).abs() / expected.abs()]);
        for k in 1..8 {
            let theta = PI * k as f64 / 8.0;
            profile.push(row![
                s,
                theta,
                w0_angular_profile(theta, so)?,
                w0_angular_derivative(theta, so)?,
                w_gamma(0.0, HalfPlanePoint::polar(1.0, theta)?, so)?.value,
                w_gamma(0.0, HalfPlanePoint::polar(5.0, theta)?, so)?.value
            ]);
        }
    }
    Ok(ScenarioOutput {
        tables: vec![flux, profile],
        tolerances: json!({"flux_relative_error": 1e-3, "angular_factorization": 1e-8}),
    })
}

fn limit_s1(r: &Resolved) -> Result<ScenarioOutput, CliError> {
    let mut t = Table::new("limit", &["bc", "f", "s", "n", "l2_error", "classical_l2"]);
    for &n in &r.n {
        let g = match r.grading {
            crate::config::Grading::Fixed(g) => g,
            _ => 2.0,
        };
        let mesh = graded_mesh(-1.0, 1.0, n, g)?;
        for (bc, f) in [(BoundaryCondition::Dirichlet, FieldName::Const1), (BoundaryCondition::Neumann, FieldName::Linear)] {
            for row in s_to_one_comparison(&f.field(), bc, &r.s, &mesh)? {
                t.push(row![bc.to_string(), f.label(), row.s, n, row.l2_error, row.classical_l2]);
            }
        }
    }
    let mut gamma = Table::new("gamma_n", &["dim", "gamma_n_limit", "error"]);
    for dim in 1u32..=3 {
        let g = gamma_n_limit(dim);
        gamma.push(row![dim, g, (g - 2.0).abs()]);
    }
    Ok(ScenarioOutput {
        tables: vec![t, gamma],
        tolerances: json!({"l2_error": "strictly decreasing in s", "gamma_n_limit": 1e-6}),
    })
}
