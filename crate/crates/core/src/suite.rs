//! Self-verification on problems with known solutions.
//!
//! Each check runs solvers on small instances whose minimizer is available
//! in closed form and compares the traces against the guarantees.

use crate::analysis::{
    acgm_guarantee_floor, acgm_weight_next_mu0, appendix_b_rates, certify_eq8, gap_nonincreasing,
    gap_sequence, GuaranteeParams, KnownSolutionProblem,
};
use crate::bench::{lasso_synthetic, quadratic_l1_known, SplitMix64};
use crate::error::Result;
use crate::linesearch::{l_upper_bound, LineSearchParams};
use crate::solvers::{fista_weight_next, run, Budget, FaultInjection, SolverKind, SolverOptions, StepPolicy, Trace};
use crate::vector;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteConfig {
    pub fault: FaultInjection,
}

pub const R_U: f64 = 2.0;
pub const R_D: f64 = 0.9;

fn backtracking(l0: f64) -> Result<SolverOptions> {
    Ok(SolverOptions::new(StepPolicy::Backtracking(LineSearchParams::new(l0, R_U, R_D)?)))
}

/// The two known-solution instances: `μ = 0` declared, and `μ_f = min dᵢ`.
fn instances() -> Result<Vec<(KnownSolutionProblem, bool)>> {
    Ok(vec![
        (quadratic_l1_known(40, 11, 0.05, 4.0)?, false),
        (quadratic_l1_known(40, 12, 0.2, 3.0)?, true),
    ])
}

fn known_run(
    kind: SolverKind,
    k: &KnownSolutionProblem,
    strongly_convex: bool,
    options: &SolverOptions,
    iters: usize,
) -> Result<(Trace, Vec<f64>)> {
    let p = k.problem(strongly_convex)?;
    let x0 = vec![0.0; k.d.len()];
    let trace = run(kind, &p, &x0, options, Budget::Iterations(iters), None)?;
    Ok((trace, x0))
}

fn summarize(name: &'static str, failures: Vec<String>, total: usize) -> CheckResult {
    CheckResult {
        name,
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{total} cases")
        } else {
            format!("{} of {total} cases failed: {}", failures.len(), failures.join("; "))
        },
    }
}

fn check_certificate(cfg: &SuiteConfig) -> Result<CheckResult> {
    let mut failures = Vec::new();
    let mut total = 0;
    for (k, sc) in instances()? {
        let x_star = k.x_star();
        let f_star = k.f_star();
        for kind in [SolverKind::AcgmEs, SolverKind::AcgmEx, SolverKind::FistaCp, SolverKind::Amgs] {
            let mut opts = backtracking(0.5)?;
            opts.fault = cfg.fault;
            let (trace, x0) = known_run(kind, &k, sc, &opts, 500)?;
            total += 1;
            let rows = certify_eq8(&trace, &x_star, f_star, &x0);
            if let Some(bad) = rows.iter().find(|r| !r.pass) {
                failures.push(format!("{kind} mu>0={sc} k={}", bad.k));
            } else if trace.abort.is_some() {
                failures.push(format!("{kind} mu>0={sc} aborted"));
            }
        }
    }
    // FGM needs a smooth instance
    let smooth = KnownSolutionProblem::new(vec![0.5, 1.0, 2.0, 4.0], vec![1.0, -2.0, 3.0, 0.5], 0.0)?;
    for sc in [false, true] {
        let (trace, x0) = known_run(SolverKind::Fgm, &smooth, sc, &backtracking(1.0)?, 500)?;
        total += 1;
        let rows = certify_eq8(&trace, &smooth.x_star(), smooth.f_star(), &x0);
        if let Some(bad) = rows.iter().find(|r| !r.pass) {
            failures.push(format!("fgm mu>0={sc} k={}", bad.k));
        }
    }
    Ok(summarize("convergence certificate", failures, total))
}

fn check_gap(cfg: &SuiteConfig) -> Result<CheckResult> {
    let mut failures = Vec::new();
    let mut total = 0;
    for (k, sc) in instances()? {
        let mut opts = backtracking(0.5)?.keep_iterates(true);
        opts.fault = cfg.fault;
        let (trace, _) = known_run(SolverKind::AcgmEs, &k, sc, &opts, 500)?;
        total += 1;
        let rows = gap_sequence(&trace, &k.x_star(), k.f_star())?;
        if let Some(i) = gap_nonincreasing(&rows).iter().position(|ok| !ok) {
            failures.push(format!("mu>0={sc} k={}", rows[i + 1].k));
        }
    }
    Ok(summarize("gap monotonicity", failures, total))
}

fn check_floors(cfg: &SuiteConfig) -> Result<CheckResult> {
    let mut failures = Vec::new();
    let mut total = 0;
    for (k, sc) in instances()? {
        for l0 in [0.3 * k.l_f(), 10.0 * k.l_f()] {
            let mut opts = backtracking(l0)?;
            opts.fault = cfg.fault;
            let (trace, _) = known_run(SolverKind::AcgmEs, &k, sc, &opts, 500)?;
            total += 1;
            let l_u = l_upper_bound(k.l_f(), l0, R_U, R_D);
            let params = GuaranteeParams::new(l_u, if sc { k.mu_f() } else { 0.0 }, 0.0)?;
            for r in trace.records.iter().filter(|r| r.k >= 1) {
                let floor = acgm_guarantee_floor(r.k, &params)?;
                if r.a < floor * (1.0 - 1e-9) || r.l > l_u * (1.0 + 1e-12) {
                    failures.push(format!("mu>0={sc} L0={l0:.3} k={}", r.k));
                    break;
                }
            }
        }
    }
    Ok(summarize("guarantee floors", failures, total))
}

/// Random curvature schedules: ACGM follows the schedule, FISTA its running
/// maximum.
fn check_fista_weights() -> Result<CheckResult> {
    let mut failures = Vec::new();
    let mut rng = SplitMix64::new(0xF15A);
    for s in 0..10 {
        let (mut a_acgm, mut a_fista) = (0.0, 0.0);
        let (mut l_fista, mut l_prev) = (0.0f64, 0.0);
        for k in 1..=1000 {
            let c = rng.uniform(0.1, 10.0);
            l_fista = l_fista.max(c);
            a_acgm = acgm_weight_next_mu0(a_acgm, c);
            a_fista = fista_weight_next(a_fista, if k == 1 { l_fista } else { l_prev }, l_fista);
            l_prev = l_fista;
            if a_acgm < a_fista * (1.0 - 1e-12) {
                failures.push(format!("schedule {s} k={k}"));
                break;
            }
        }
    }
    Ok(summarize("ACGM vs FISTA weights", failures, 10))
}

/// Estimate-sequence and extrapolated forms, the latter replaying the
/// former's accepted `L` sequence.
fn check_form_equivalence(cfg: &SuiteConfig) -> Result<CheckResult> {
    let mut failures = Vec::new();
    let mut total = 0;
    let lasso = lasso_synthetic(30, 40, 0.05, 5)?;
    let known = quadratic_l1_known(40, 6, 0.2, 3.0)?;
    let cases = [
        (lasso.problem.clone(), lasso.x0.clone()),
        (known.problem(true)?, vec![1.0; 40]),
    ];
    for (i, (p, x0)) in cases.iter().enumerate() {
        total += 1;
        let l_f = p.lf_hint().unwrap_or(1.0);
        let mut opts = backtracking(0.3 * l_f)?.keep_iterates(true);
        opts.fault = cfg.fault;
        let es = run(SolverKind::AcgmEs, p, x0, &opts, Budget::Iterations(100), None)?;
        let schedule: Vec<f64> = es.records.iter().skip(1).map(|r| r.l).collect();
        let replay = SolverOptions::new(StepPolicy::Scripted { l0: 0.3 * l_f, schedule }).keep_iterates(true);
        let ex = run(SolverKind::AcgmEx, p, x0, &replay, Budget::Iterations(100), None)?;
        let worst = es
            .snapshots
            .iter()
            .zip(&ex.snapshots)
            .map(|(a, b)| vector::dist_sq(&a.x, &b.x).sqrt() / vector::norm(&a.x).max(1e-300))
            .fold(0.0, f64::max);
        if worst > 1e-8 || es.snapshots.len() != ex.snapshots.len() {
            failures.push(format!("case {i}: deviation {worst:e}"));
        }
    }
    Ok(summarize("form equivalence", failures, total))
}

fn check_rates() -> Result<CheckResult> {
    let mut failures = Vec::new();
    let grid: Vec<f64> = (0..=19).map(|i| if i == 0 { 0.01 } else { 0.05 * i as f64 }).collect();
    for &q in &grid {
        if appendix_b_rates(q, 1.0)?.ratio() >= 1.0 {
            failures.push(format!("q={q}"));
        }
    }
    Ok(summarize("rate constant ratio", failures, grid.len()))
}

/// Runs every check. Errors inside a check are reported as failures.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckResult> {
    type Check<'a> = Box<dyn Fn() -> Result<CheckResult> + 'a>;
    let checks: Vec<(&'static str, Check)> = vec![
        ("convergence certificate", Box::new(|| check_certificate(cfg))),
        ("gap monotonicity", Box::new(|| check_gap(cfg))),
        ("guarantee floors", Box::new(|| check_floors(cfg))),
        ("ACGM vs FISTA weights", Box::new(check_fista_weights)),
        ("form equivalence", Box::new(|| check_form_equivalence(cfg))),
        ("rate constant ratio", Box::new(check_rates)),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            f().unwrap_or_else(|e| CheckResult { name, passed: false, detail: format!("error: {e}") })
        })
        .collect()
}
