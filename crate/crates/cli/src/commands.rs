use aggdiff_core::even_lambda::EvenLambda;
use aggdiff_core::general_lambda::{self, GeneralLambda, DEFAULT_DEGREE};
use aggdiff_core::params::{alpha_of, even_half, is_quartic, q_from_alpha, ProblemParams};
use aggdiff_core::quadrature::QuadratureRule;
use aggdiff_core::quartic::{self, Quartic};
use aggdiff_core::specfun::{kernel_k, KernelEvalMethod};
use aggdiff_core::{Extended, Regime};
use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{csv_num, json_line, Artifact};
use crate::{CliError, Common};

/// An artifact and the exit status to report after writing it.
pub struct Outcome {
    pub artifact: Artifact,
    pub status: Result<(), CliError>,
}

impl Outcome {
    fn ok(artifact: Artifact) -> Self {
        Self { artifact, status: Ok(()) }
    }
}

fn artifact(text: String, parameters: Value, rule: &QuadratureRule, solver: Value) -> Artifact {
    Artifact { text, parameters, quadrature: json!(rule), solver }
}

fn even_n(lambda: f64) -> Result<usize, CliError> {
    even_half(lambda).ok_or_else(|| CliError::Usage(format!("lambda must be an even integer, got {lambda}")))
}

#[derive(Args)]
pub struct QuarticArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long)]
    q: f64,
    /// Lagrange multiplier; solves the minimization problem when omitted.
    #[arg(long = "L")]
    l: Option<f64>,
    /// Accept formal minimizers with infinite free energy.
    #[arg(long)]
    allow_formal: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct QuarticOut {
    #[serde(rename = "N")]
    dim: usize,
    q: f64,
    regime: Regime,
    branch: Option<quartic::Branch>,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "B")]
    b: f64,
    mass: f64,
    atom: f64,
    q_crit4: f64,
}

pub fn quartic(args: &QuarticArgs) -> Result<Outcome, CliError> {
    let p = ProblemParams::new(args.dim, 4.0, args.q)?;
    let regime = p.regime();
    if regime == Regime::UnboundedBelow {
        return Err(CliError::Usage(format!(
            "regime UnboundedBelow: the free energy is not bounded from below for N = {}, q = {}",
            args.dim, args.q
        )));
    }
    let rule = args.common.rule(QuadratureRule::default())?;
    let solver = Quartic::new(rule);
    let out = match args.l {
        None => {
            let sol = solver.solve_minimizer(args.dim, args.q, args.allow_formal)?;
            QuarticOut {
                dim: args.dim,
                q: args.q,
                regime,
                branch: Some(sol.branch),
                l: sol.multiplier,
                b: sol.b,
                mass: sol.mass,
                atom: sol.atom,
                q_crit4: quartic::critical_q4(args.dim),
            }
        }
        Some(l) => {
            if !(l >= 0.0) {
                return Err(CliError::Usage(format!("L must be >= 0, got {l}")));
            }
            let mass = solver.mass_at(args.dim, args.q, l)?.as_f64();
            QuarticOut {
                dim: args.dim,
                q: args.q,
                regime,
                branch: None,
                l,
                b: solver.solve_b(args.dim, args.q, l)?,
                mass,
                atom: if l == 0.0 { (1.0 - mass).max(0.0) } else { 0.0 },
                q_crit4: quartic::critical_q4(args.dim),
            }
        }
    };
    let params = json!({"N": args.dim, "q": args.q, "L": args.l, "allow_formal": args.allow_formal});
    Ok(Outcome::ok(artifact(json_line(&out), params, &rule, json!(solver.root))))
}

#[derive(Args)]
pub struct MassCurveArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha_min: f64,
    #[arg(long, default_value_t = 0.99)]
    alpha_max: f64,
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn mass_curve(args: &MassCurveArgs) -> Result<Outcome, CliError> {
    let n = even_n(args.lambda)?;
    if args.steps == 0 {
        return Err(CliError::Usage("steps must be >= 1".into()));
    }
    if !(args.alpha_min <= args.alpha_max) {
        return Err(CliError::Usage(format!("alpha-min {} exceeds alpha-max {}", args.alpha_min, args.alpha_max)));
    }
    ProblemParams::new(args.dim, args.lambda, 0.5)?;
    let solver = EvenLambda::new(args.common.rule(EvenLambda::default().rule)?);
    let grid: Vec<f64> = if args.steps == 1 {
        vec![args.alpha_min]
    } else {
        (0..args.steps)
            .map(|k| args.alpha_min + (args.alpha_max - args.alpha_min) * k as f64 / (args.steps - 1) as f64)
            .collect()
    };
    let points = solver.mass_curve(args.dim, n, &grid);
    let mut text = String::from("alpha,q,m0,residual,converged\n");
    for p in &points {
        text += &format!("{},{},{},{},{}\n", csv_num(p.alpha), csv_num(p.q), csv_num(p.m0), csv_num(p.residual), p.converged);
    }
    let converged = points.iter().filter(|p| p.converged).count();
    let status = if 10 * converged >= 9 * points.len() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("only {converged} of {} points converged", points.len())))
    };
    let params = json!({"N": args.dim, "lambda": args.lambda, "alpha_min": args.alpha_min, "alpha_max": args.alpha_max, "steps": args.steps});
    Ok(Outcome { artifact: artifact(text, params, &solver.rule, json!({"bfgs": solver.bfgs, "root": solver.root})), status })
}

#[derive(Args)]
pub struct CriticalQArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Use the polynomial ansatz; required for non-even lambda.
    #[arg(long)]
    general: bool,
    /// Degree of the ansatz polynomial.
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    degree: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct CriticalQOut {
    #[serde(rename = "N")]
    dim: usize,
    lambda: f64,
    concentration: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_crit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_crit: Option<f64>,
    tol: f64,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    l1_error: Option<f64>,
}

pub fn critical_q(args: &CriticalQArgs) -> Result<Outcome, CliError> {
    ProblemParams::new(args.dim, args.lambda, 0.5)?;
    if !(args.tol > 0.0) {
        return Err(CliError::Usage(format!("tol must be > 0, got {}", args.tol)));
    }
    let params = json!({"N": args.dim, "lambda": args.lambda, "tol": args.tol, "general": args.general, "degree": args.degree});
    let mut out = CriticalQOut {
        dim: args.dim,
        lambda: args.lambda,
        concentration: false,
        q_crit: None,
        alpha_crit: None,
        tol: args.tol,
        method: "",
        l1_error: None,
    };
    let set = |out: &mut CriticalQOut, q: Option<f64>| {
        out.concentration = q.is_some();
        out.q_crit = q;
        out.alpha_crit = q.map(|q| alpha_of(args.dim, args.lambda, q));
    };
    if args.general {
        let rule = args.common.rule(QuadratureRule::reference_riemann())?;
        let op = GeneralLambda::new(args.dim, args.lambda, rule)?;
        let scan = op.critical_q(args.degree, args.tol, None)?;
        out.method = "polynomial-ansatz";
        out.l1_error = Some(scan.l1_error);
        set(&mut out, scan.crossing.map(|c| c.q));
        let status = if scan.converged {
            Ok(())
        } else {
            Err(CliError::Numerical(format!("general solves did not converge (l1 error {:e})", scan.l1_error)))
        };
        let solver = json!({"bfgs": op.bfgs, "root": op.root, "l1_threshold": op.l1_threshold});
        return Ok(Outcome { artifact: artifact(json_line(&out), params, &rule, solver), status });
    }
    let n = even_half(args.lambda).ok_or_else(|| {
        CliError::Usage(format!("lambda = {} is not an even integer; pass --general", args.lambda))
    })?;
    if is_quartic(args.lambda) {
        let rule = args.common.rule(QuadratureRule::default())?;
        let q4 = quartic::critical_q4(args.dim);
        let nf = args.dim as f64;
        out.method = "quartic-closed-form";
        set(&mut out, (args.dim >= 3 && q4 > nf / (nf + 4.0)).then_some(q4));
        return Ok(Outcome::ok(artifact(json_line(&out), params, &rule, json!({}))));
    }
    let solver = EvenLambda::new(args.common.rule(EvenLambda::default().rule)?);
    let crit = solver.critical_q(args.dim, n, args.tol)?;
    out.method = "even-fixed-point";
    set(&mut out, crit.map(|c| c.q));
    Ok(Outcome::ok(artifact(json_line(&out), params, &solver.rule, json!({"bfgs": solver.bfgs, "root": solver.root}))))
}

#[derive(Args)]
pub struct CriticalCurveArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long, default_value_t = 4.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 10.0)]
    lambda_max: f64,
    /// Number of lambda values, endpoints included.
    #[arg(long, default_value_t = 13)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    degree: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    pub common: Common,
}

pub fn critical_curve(args: &CriticalCurveArgs) -> Result<Outcome, CliError> {
    if args.steps == 0 {
        return Err(CliError::Usage("steps must be >= 1".into()));
    }
    if !(args.lambda_min > 0.0 && args.lambda_min <= args.lambda_max) {
        return Err(CliError::Usage(format!("invalid lambda range [{}, {}]", args.lambda_min, args.lambda_max)));
    }
    let rule = args.common.rule(QuadratureRule::reference_riemann())?;
    let lambdas: Vec<f64> = if args.steps == 1 {
        vec![args.lambda_min]
    } else {
        (0..args.steps)
            .map(|k| args.lambda_min + (args.lambda_max - args.lambda_min) * k as f64 / (args.steps - 1) as f64)
            .collect()
    };
    let curve = general_lambda::critical_curve(args.dim, &lambdas, args.degree, rule, args.tol)?;
    let mut text = String::from("lambda,q_crit,alpha_crit,l1_error,converged\n");
    for p in &curve {
        let (q, a) = p.crossing.map_or((f64::NAN, f64::NAN), |c| (c.q, c.alpha));
        text += &format!("{},{},{},{},{}\n", csv_num(p.lambda), csv_num(q), csv_num(a), csv_num(p.l1_error), p.converged);
    }
    let failed = curve.iter().filter(|p| !p.converged).count();
    let status = if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{failed} lambda values did not converge")))
    };
    let params = json!({"N": args.dim, "lambda_min": args.lambda_min, "lambda_max": args.lambda_max, "steps": args.steps, "degree": args.degree, "tol": args.tol});
    Ok(Outcome { artifact: artifact(text, params, &rule, json!({"l1_threshold": general_lambda::DEFAULT_L1_THRESHOLD})), status })
}

#[derive(Args)]
pub struct ProfileArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    q: f64,
    /// Lagrange multiplier for even lambda; the quartic default solves for it.
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    r_min: f64,
    #[arg(long, default_value_t = 1e3)]
    r_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    degree: usize,
    /// Accept formal quartic minimizers.
    #[arg(long)]
    allow_formal: bool,
    #[command(flatten)]
    pub common: Common,
}

pub fn profile(args: &ProfileArgs) -> Result<Outcome, CliError> {
    if !(args.r_min > 0.0 && args.r_min < args.r_max && args.r_max.is_finite()) {
        return Err(CliError::Usage(format!("need 0 < r-min < r-max, got [{}, {}]", args.r_min, args.r_max)));
    }
    if args.points < 2 {
        return Err(CliError::Usage("points must be >= 2".into()));
    }
    ProblemParams::new(args.dim, args.lambda, args.q)?;
    let radii: Vec<f64> = (0..args.points)
        .map(|k| {
            let t = k as f64 / (args.points - 1) as f64;
            (args.r_min.ln() + t * (args.r_max.ln() - args.r_min.ln())).exp()
        })
        .collect();
    let params = json!({"N": args.dim, "lambda": args.lambda, "q": args.q, "L": args.l, "r_min": args.r_min, "r_max": args.r_max, "points": args.points});
    let (rho, atom, mass, rule, solver): (Vec<f64>, f64, f64, QuadratureRule, Value) = if is_quartic(args.lambda) && args.l.is_none() {
        let rule = args.common.rule(QuadratureRule::default())?;
        let q = Quartic::new(rule);
        let sol = q.solve_minimizer(args.dim, args.q, args.allow_formal)?;
        (radii.iter().map(|&r| sol.density(r).as_f64()).collect(), sol.atom, sol.mass, rule, json!(q.root))
    } else if let Some(n) = even_half(args.lambda) {
        let l = args.l.unwrap_or(0.0);
        if !(l >= 0.0) {
            return Err(CliError::Usage(format!("L must be >= 0, got {l}")));
        }
        let solver = EvenLambda::new(args.common.rule(EvenLambda::default().rule)?);
        let state = solver.solve_betas(args.dim, n, args.q, l, None)?;
        if !state.converged {
            return Err(CliError::Numerical(format!("fixed point did not converge (residual {:e})", state.residual)));
        }
        let mass = match solver.mass(&state)? {
            Extended::Finite(m) => m,
            Extended::Divergent => return Err(CliError::Numerical("mass diverges".into())),
        };
        let atom = if l == 0.0 { (1.0 - mass).max(0.0) } else { 0.0 };
        let rho = radii.iter().map(|&r| state.density(r).as_f64()).collect();
        (rho, atom, mass, solver.rule, json!({"bfgs": solver.bfgs, "root": solver.root}))
    } else {
        if args.l.is_some_and(|l| l != 0.0) {
            return Err(CliError::Usage("non-even lambda supports only L = 0".into()));
        }
        let rule = args.common.rule(QuadratureRule::reference_riemann())?;
        let op = GeneralLambda::new(args.dim, args.lambda, rule)?;
        let sol = op.solve(args.q, args.degree, None)?;
        if !sol.converged {
            return Err(CliError::Numerical(format!("polynomial ansatz did not converge (l1 error {:e})", sol.l1_error)));
        }
        let rho = radii.iter().map(|&r| sol.density(r)).collect::<Result<Vec<_>, _>>()?;
        let solver = json!({"bfgs": op.bfgs, "degree": args.degree, "l1_error": sol.l1_error});
        (rho, (1.0 - sol.mass).max(0.0), sol.mass, rule, solver)
    };
    let mut text = format!("# atom={}\n# mass={}\nr,rho\n", csv_num(atom), csv_num(mass));
    for (r, v) in radii.iter().zip(&rho) {
        text += &format!("{},{}\n", csv_num(*r), csv_num(*v));
    }
    Ok(Outcome::ok(artifact(text, params, &rule, solver)))
}

#[derive(Args)]
pub struct KernelArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    s: f64,
    /// auto, even-polynomial, closed-form-n3, hypergeometric or gegenbauer-oracle.
    #[arg(long, default_value = "auto")]
    method: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct MethodValue {
    method: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct KernelOut {
    #[serde(rename = "N")]
    dim: usize,
    lambda: f64,
    r: f64,
    s: f64,
    method: &'static str,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    methods: Option<Vec<MethodValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_rel_deviation: Option<f64>,
}

pub fn kernel(args: &KernelArgs) -> Result<Outcome, CliError> {
    let params = json!({"N": args.dim, "lambda": args.lambda, "r": args.r, "s": args.s, "method": args.method});
    let rule = QuadratureRule::default();
    let out = if args.method == "auto" {
        let preferred = KernelEvalMethod::preferred(args.dim, args.lambda);
        let value = kernel_k(args.dim, args.lambda, args.r, args.s, preferred)?;
        let methods = KernelEvalMethod::ALL
            .into_iter()
            .filter(|m| m.supports(args.dim, args.lambda))
            .map(|m| Ok(MethodValue { method: m.name(), value: kernel_k(args.dim, args.lambda, args.r, args.s, m)? }))
            .collect::<Result<Vec<_>, aggdiff_core::Error>>()?;
        let mut dev = 0.0_f64;
        for a in &methods {
            for b in &methods {
                let scale = a.value.abs().max(b.value.abs());
                if scale > 0.0 {
                    dev = dev.max((a.value - b.value).abs() / scale);
                }
            }
        }
        KernelOut {
            dim: args.dim,
            lambda: args.lambda,
            r: args.r,
            s: args.s,
            method: preferred.name(),
            value,
            methods: Some(methods),
            max_rel_deviation: Some(dev),
        }
    } else {
        let method: KernelEvalMethod = args.method.parse()?;
        KernelOut {
            dim: args.dim,
            lambda: args.lambda,
            r: args.r,
            s: args.s,
            method: method.name(),
            value: kernel_k(args.dim, args.lambda, args.r, args.s, method)?,
            methods: None,
            max_rel_deviation: None,
        }
    };
    Ok(Outcome::ok(artifact(json_line(&out), params, &rule, json!({}))))
}

#[derive(Args)]
pub struct GeneralSolveArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    degree: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct Verification {
    grid: QuadratureRule,
    /// The solution's polynomial evaluated on the accurate grid.
    l1_error: f64,
    mass: f64,
    /// After re-solving on the accurate grid from the solution.
    resolved_l1_error: f64,
    resolved_mass: f64,
}

#[derive(Serialize)]
struct GeneralSolveOut {
    #[serde(rename = "N")]
    dim: usize,
    lambda: f64,
    q: f64,
    alpha: f64,
    degree: usize,
    #[serde(flatten)]
    solution: general_lambda::GeneralSolution,
    atom: f64,
    verification: Option<Verification>,
}

pub fn general_solve(args: &GeneralSolveArgs) -> Result<Outcome, CliError> {
    let p = ProblemParams::new(args.dim, args.lambda, args.q)?;
    let rule = args.common.rule(QuadratureRule::reference_riemann())?;
    let op = GeneralLambda::new(args.dim, args.lambda, rule)?;
    let sol = op.solve(args.q, args.degree, None)?;
    let verification = if sol.converged {
        let gauss = GeneralLambda::new(args.dim, args.lambda, QuadratureRule::default())?;
        let d = gauss.diagnostics(args.q, &sol.ansatz)?;
        let again = gauss.solve(args.q, args.degree, Some(&sol.ansatz))?;
        Some(Verification {
            grid: gauss.rule,
            l1_error: d.l1_error,
            mass: d.mass,
            resolved_l1_error: again.l1_error,
            resolved_mass: again.mass,
        })
    } else {
        None
    };
    let status = if sol.converged {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("polynomial ansatz did not converge (l1 error {:e})", sol.l1_error)))
    };
    let out = GeneralSolveOut {
        dim: args.dim,
        lambda: args.lambda,
        q: args.q,
        alpha: p.alpha(),
        degree: args.degree,
        atom: (1.0 - sol.mass).max(0.0),
        solution: sol,
        verification,
    };
    let params = json!({"N": args.dim, "lambda": args.lambda, "q": args.q, "degree": args.degree});
    let solver = json!({"bfgs": op.bfgs, "l1_threshold": op.l1_threshold});
    Ok(Outcome { artifact: artifact(json_line(&out), params, &rule, solver), status })
}

#[derive(Args)]
pub struct MonotonicityArgs {
    #[arg(long = "N")]
    dim: usize,
    #[arg(long)]
    lambda: f64,
    /// Exponent; defaults to alpha = 0.5.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    l_min: f64,
    #[arg(long, default_value_t = 1.0)]
    l_max: f64,
    #[arg(long, default_value_t = 6)]
    steps: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn monotonicity(args: &MonotonicityArgs) -> Result<Outcome, CliError> {
    let n = even_n(args.lambda)?;
    if args.steps < 2 || !(args.l_min >= 0.0 && args.l_min < args.l_max) {
        return Err(CliError::Usage("need steps >= 2 and 0 <= l-min < l-max".into()));
    }
    let q = match args.q {
        Some(q) => q,
        None => q_from_alpha(args.dim, args.lambda, 0.5)?,
    };
    let grid: Vec<f64> =
        (0..args.steps).map(|k| args.l_min + (args.l_max - args.l_min) * k as f64 / (args.steps - 1) as f64).collect();
    let solver = EvenLambda::new(args.common.rule(EvenLambda::default().rule)?);
    let report = solver.monotonicity_scan(args.dim, n, q, &grid)?;
    let mut text = format!("# q={}\n# monotone={}\nL,mass,converged\n", csv_num(q), report.monotone);
    for p in &report.points {
        text += &format!("{},{},{}\n", csv_num(p.l), csv_num(p.mass), p.converged);
    }
    let status = if report.monotone {
        Ok(())
    } else {
        Err(CliError::Numerical("m(L) is not strictly decreasing on the grid".into()))
    };
    let params = json!({"N": args.dim, "lambda": args.lambda, "q": q, "l_min": args.l_min, "l_max": args.l_max, "steps": args.steps});
    Ok(Outcome { artifact: artifact(text, params, &solver.rule, json!({"bfgs": solver.bfgs})), status })
}
