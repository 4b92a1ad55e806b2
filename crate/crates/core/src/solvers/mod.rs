//! Iterative methods and the budgeted run loop.
//!
//! Every method implements [`Method`]: one call to [`Method::step`] performs
//! a full iteration including its line search, and [`run`] turns a sequence
//! of steps into a [`Trace`] metered in WTU.

mod acgm;
mod amgs;
mod fgm;
mod fista;

use std::fmt;
use std::str::FromStr;

pub use acgm::{
    acgm_weight_a, extrapolation_beta, t_update, weight_from_t, AcgmEsState, AcgmExState,
};
pub use amgs::{amgs_weight_a, AmgsState};
pub use fgm::{fgm_weight_a, FgmState};
pub use fista::{fista_t_next, fista_weight_next, FistaState};

use crate::error::{Error, Result};
use crate::linesearch::{backtracking_search, AcceptanceCriterion, LineSearchParams, SearchOutcome, Trial};
use crate::metering::{iteration_cost, CostEvent, MethodKind, WtuLedger};
use crate::problem::CompositeProblem;
use crate::vector::{self, Extended};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    /// ACGM, estimate-sequence form.
    AcgmEs,
    /// ACGM, extrapolated form.
    AcgmEx,
    Fista,
    FistaCp,
    Amgs,
    Fgm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::AcgmEs,
        SolverKind::AcgmEx,
        SolverKind::Fista,
        SolverKind::FistaCp,
        SolverKind::Amgs,
        SolverKind::Fgm,
    ];

    pub fn method(self) -> MethodKind {
        match self {
            SolverKind::AcgmEs | SolverKind::AcgmEx => MethodKind::Acgm,
            SolverKind::Fista => MethodKind::Fista,
            SolverKind::FistaCp => MethodKind::FistaCp,
            SolverKind::Amgs => MethodKind::Amgs,
            SolverKind::Fgm => MethodKind::Fgm,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::AcgmEs => "acgm_es",
            SolverKind::AcgmEx => "acgm_ex",
            SolverKind::Fista => "fista",
            SolverKind::FistaCp => "fista_cp",
            SolverKind::Amgs => "amgs",
            SolverKind::Fgm => "fgm",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown solver '{s}'")))
    }
}

/// How each iteration picks its Lipschitz estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum StepPolicy {
    /// Adaptive backtracking search.
    Backtracking(LineSearchParams),
    /// Constant `L`, no acceptance test.
    Fixed(f64),
    /// Iteration `k` uses `schedule[k]` without testing; `l0` plays the role
    /// of the initial estimate.
    Scripted { l0: f64, schedule: Vec<f64> },
}

impl StepPolicy {
    pub fn initial_l(&self) -> f64 {
        match self {
            StepPolicy::Backtracking(p) => p.l0,
            StepPolicy::Fixed(l) => *l,
            StepPolicy::Scripted { l0, .. } => *l0,
        }
    }

    fn validate(&self, problem: &CompositeProblem) -> Result<()> {
        match self {
            StepPolicy::Backtracking(p) => {
                p.validate()?;
                p.criterion.check_applicable(problem)
            }
            StepPolicy::Fixed(l) => check_l(*l),
            StepPolicy::Scripted { l0, schedule } => {
                check_l(*l0)?;
                schedule.iter().try_for_each(|&l| check_l(l))
            }
        }
    }

    /// Picks `L̂` for iteration `k` given the previous estimate. `trial(L̂,
    /// test)` builds the candidate and evaluates the acceptance test only
    /// when `test` is set; returning `None` rejects `L̂` outright.
    pub(crate) fn search<T>(
        &self,
        k: usize,
        l_prev: f64,
        mut trial: impl FnMut(f64, bool) -> Result<Trial<Option<T>>>,
    ) -> Result<SearchOutcome<T>> {
        let untested = |l: f64, trial: &mut dyn FnMut(f64, bool) -> Result<Trial<Option<T>>>| {
            let t = trial(l, false)?;
            let candidate = t.candidate.ok_or(Error::InvalidParameter(format!(
                "fixed step L = {l:e} is outside the admissible range"
            )))?;
            Ok(SearchOutcome { accepted_l: l, candidate, backtrack_count: 0 })
        };
        match self {
            StepPolicy::Backtracking(params) => {
                let out = backtracking_search(params, l_prev, |l| trial(l, true))?;
                Ok(SearchOutcome {
                    accepted_l: out.accepted_l,
                    candidate: out.candidate.expect("accepted trials carry a candidate"),
                    backtrack_count: out.backtrack_count,
                })
            }
            StepPolicy::Fixed(l) => untested(*l, &mut trial),
            StepPolicy::Scripted { schedule, .. } => {
                let l = *schedule.get(k).ok_or(Error::ScheduleExhausted(k))?;
                untested(l, &mut trial)
            }
        }
    }

    pub(crate) fn criterion(&self) -> AcceptanceCriterion {
        match self {
            StepPolicy::Backtracking(p) => p.criterion,
            _ => AcceptanceCriterion::OracleDescent,
        }
    }
}

fn check_l(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("L must be > 0, got {l}")));
    }
    Ok(())
}

/// Deliberate defects used as negative controls by the verification suite.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FaultInjection {
    #[default]
    None,
    /// ACGM estimate-sequence form keeps `v_{k+1} = v_k`.
    SkipVertexUpdate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub policy: StepPolicy,
    /// FGM initial curvature; defaults to `max(μ, L_f)`.
    pub fgm_gamma0: Option<f64>,
    /// Keep per-iteration iterates in the trace.
    pub keep_iterates: bool,
    pub fault: FaultInjection,
}

impl SolverOptions {
    pub fn new(policy: StepPolicy) -> Self {
        Self {
            policy,
            fgm_gamma0: None,
            keep_iterates: false,
            fault: FaultInjection::None,
        }
    }

    pub fn keep_iterates(mut self, keep: bool) -> Self {
        self.keep_iterates = keep;
        self
    }
}

/// What one completed iteration reports back to the run loop.
#[derive(Clone, Debug)]
pub struct StepInfo {
    pub l: f64,
    /// Guarantee weight `A_{k+1}` (or the method's surrogate).
    pub weight: f64,
    pub backtracks: usize,
    pub gamma: Option<f64>,
    /// Point where the accepted gradient step was taken.
    pub y: Vec<f64>,
}

pub trait Method: Send {
    fn kind(&self) -> SolverKind;
    fn step(&mut self, problem: &CompositeProblem) -> Result<StepInfo>;
    fn x(&self) -> &[f64];
    fn l(&self) -> f64;
    fn weight(&self) -> f64;
    fn vertex(&self) -> Option<&[f64]> {
        None
    }
    fn gamma(&self) -> Option<f64> {
        None
    }
}

/// Constructs the state of `kind` at `x0`.
pub fn build(
    kind: SolverKind,
    problem: &CompositeProblem,
    x0: &[f64],
    options: &SolverOptions,
) -> Result<Box<dyn Method>> {
    if x0.len() != problem.dim() {
        return Err(Error::Dimension { expected: problem.dim(), actual: x0.len() });
    }
    if !vector::all_finite(x0) {
        return Err(Error::InvalidParameter("x0 has non-finite entries".into()));
    }
    options.policy.validate(problem)?;
    let method: Box<dyn Method> = match kind {
        SolverKind::AcgmEs => Box::new(AcgmEsState::new(problem, x0, options.policy.clone(), options.fault)),
        SolverKind::AcgmEx => Box::new(AcgmExState::new(problem, x0, options.policy.clone())),
        SolverKind::FistaCp => {
            let lf = problem.lf_hint().ok_or_else(|| Error::MissingLipschitz("FISTA-CP".into()))?;
            Box::new(AcgmExState::fista_cp(problem, x0, lf))
        }
        SolverKind::Fista => {
            let policy = match &options.policy {
                StepPolicy::Backtracking(p) => StepPolicy::Backtracking(LineSearchParams { r_d: 1.0, ..*p }),
                other => other.clone(),
            };
            Box::new(FistaState::new(x0, policy))
        }
        SolverKind::Amgs => Box::new(AmgsState::new(x0, options.policy.clone())),
        SolverKind::Fgm => Box::new(FgmState::new(problem, x0, options.fgm_gamma0)?),
    };
    Ok(method)
}

/// One row of a convergence trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub wtu: u64,
    pub f_val: Extended,
    pub l: f64,
    pub a: f64,
    pub backtracks: usize,
}

/// Iterate data kept when [`SolverOptions::keep_iterates`] is set.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateSnapshot {
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub vertex: Option<Vec<f64>>,
    pub gamma: Option<f64>,
}

#[derive(Debug)]
pub struct Trace {
    pub solver: SolverKind,
    pub records: Vec<TraceRecord>,
    /// Parallel to `records` when iterates were kept, else empty.
    pub snapshots: Vec<IterateSnapshot>,
    pub final_x: Vec<f64>,
    /// Set when the run stopped on an error; the records stay valid.
    pub abort: Option<Error>,
}

impl Trace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("a trace holds at least the k = 0 record")
    }

    pub fn is_complete(&self) -> bool {
        self.abort.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Iterations(usize),
    Wtu(u64),
}

/// Runs `kind` from `x0` until the budget is spent.
///
/// A WTU budget is never overdrawn: an iteration whose cost would exceed it
/// is discarded and the run ends. `stop_tol` ends the run once
/// `‖x_{k+1} − y_{k+1}‖` falls to it.
pub fn run(
    kind: SolverKind,
    problem: &CompositeProblem,
    x0: &[f64],
    options: &SolverOptions,
    budget: Budget,
    stop_tol: Option<f64>,
) -> Result<Trace> {
    let mut method = build(kind, problem, x0, options)?;
    let mut ledger = WtuLedger::new();
    let mut trace = Trace {
        solver: kind,
        records: vec![TraceRecord {
            k: 0,
            wtu: 0,
            f_val: problem.eval_objective(x0)?,
            l: method.l(),
            a: method.weight(),
            backtracks: 0,
        }],
        snapshots: Vec::new(),
        final_x: x0.to_vec(),
        abort: None,
    };
    if options.keep_iterates {
        trace.snapshots.push(IterateSnapshot {
            x: x0.to_vec(),
            y: None,
            vertex: method.vertex().map(<[f64]>::to_vec),
            gamma: method.gamma(),
        });
    }

    let method_kind = kind.method();
    let mut k = 0usize;
    loop {
        if let Budget::Iterations(max) = budget {
            if k >= max {
                break;
            }
        }
        let info = match method.step(problem) {
            Ok(info) => info,
            Err(e) => {
                trace.abort = Some(e);
                break;
            }
        };
        let cost = iteration_cost(method_kind, info.backtracks as u64)?;
        if let Budget::Wtu(max) = budget {
            if ledger.total() + cost > max {
                break;
            }
        }
        ledger.charge(method_kind, CostEvent::PlainIteration, 1)?;
        if info.backtracks > 0 {
            ledger.charge(method_kind, CostEvent::Backtrack, info.backtracks as u64)?;
        }
        k += 1;
        let f_val = match problem.eval_objective(method.x()) {
            Ok(v) => v,
            Err(e) => {
                trace.abort = Some(e);
                break;
            }
        };
        trace.records.push(TraceRecord {
            k,
            wtu: ledger.total(),
            f_val,
            l: info.l,
            a: info.weight,
            backtracks: info.backtracks,
        });
        trace.final_x.clear();
        trace.final_x.extend_from_slice(method.x());
        let step_len = stop_tol.map(|_| vector::dist_sq(method.x(), &info.y).sqrt());
        if options.keep_iterates {
            trace.snapshots.push(IterateSnapshot {
                x: method.x().to_vec(),
                y: Some(info.y),
                vertex: method.vertex().map(<[f64]>::to_vec),
                gamma: info.gamma,
            });
        }
        if let (Some(tol), Some(len)) = (stop_tol, step_len) {
            if len <= tol {
                break;
            }
        }
    }
    Ok(trace)
}
