use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use acgm_core::analysis::{acgm_guarantee_floor, GuaranteeParams};
use acgm_core::solvers::FaultInjection;
use acgm_core::suite::{run_suite, SuiteConfig};
use acgm_core::vector::Extended;
use acgm_core::{run, SolverKind, Trace};
use anyhow::{bail, Context, Result};

use crate::config::RunSettings;

pub const OUTPUT_DIR_ENV: &str = "ACGM_OUTPUT_DIR";
const TRACE_HEADER: &str = "k,wtu,F,L,A,backtracks";

/// `Ok(true)` when all requested work completed.
pub type Status = Result<bool>;

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v:.15e}")
    }
}

fn objective(f: Extended) -> String {
    match f {
        Extended::Finite(v) => num(v),
        Extended::PosInfinity => "inf".into(),
    }
}

fn write_rows(out: &mut dyn Write, trace: &Trace, prefix: Option<&str>) -> io::Result<()> {
    for r in &trace.records {
        if let Some(p) = prefix {
            write!(out, "{p},")?;
        }
        writeln!(out, "{},{},{},{},{},{}", r.k, r.wtu, objective(r.f_val), num(r.l), num(r.a), r.backtracks)?;
    }
    Ok(())
}

/// `--output`, else `$ACGM_OUTPUT_DIR/<default_name>`, else stdout.
fn sink(output: Option<&Path>, default_name: &str) -> Result<(Box<dyn Write>, Option<PathBuf>)> {
    let path = match output {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUTPUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)),
    };
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
            Ok((Box::new(BufWriter::new(f)), Some(p)))
        }
        None => Ok((Box::new(BufWriter::new(io::stdout().lock())), None)),
    }
}

fn report_abort(trace: &Trace) -> bool {
    match &trace.abort {
        Some(e) => {
            eprintln!("{} aborted after {} iterations: {e}", trace.solver, trace.last().k);
            false
        }
        None => true,
    }
}

fn problem_name(settings: &RunSettings) -> Result<String> {
    let kind = settings.problem_kind()?;
    Ok(format!("{kind:?}").chars().fold(String::new(), |mut s, c| {
        if c.is_uppercase() && !s.is_empty() {
            s.push('_');
        }
        s.push(c.to_ascii_lowercase());
        s
    }))
}

pub fn cmd_run(settings: RunSettings, solver: Option<SolverKind>) -> Status {
    let (settings, file) = settings.resolve()?;
    let solver = match (solver, file.solver) {
        (Some(s), _) => s,
        (None, Some(s)) => s.parse()?,
        (None, None) => bail!("no solver given (use --solver or the config file)"),
    };
    let (problem, x0) = settings.instance()?;
    let opts = settings.solver_options(solver, &problem)?;
    let trace = run(solver, &problem, &x0, &opts, settings.budget()?, None)?;

    let name = format!("{}_{solver}.csv", problem_name(&settings)?);
    let (mut out, path) = sink(settings.output.as_deref(), &name)?;
    writeln!(out, "{TRACE_HEADER}")?;
    write_rows(&mut out, &trace, None)?;
    out.flush()?;
    if let Some(p) = path {
        eprintln!("wrote {} rows to {}", trace.records.len(), p.display());
    }
    Ok(report_abort(&trace))
}

pub fn cmd_compare(settings: RunSettings, solvers: Vec<SolverKind>) -> Status {
    let (settings, file) = settings.resolve()?;
    let solvers = match (solvers.is_empty(), file.solvers) {
        (false, _) => solvers,
        (true, Some(names)) => names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
        (true, None) => bail!("no solvers given (use --solvers or the config file)"),
    };
    let (problem, x0) = settings.instance()?;
    let budget = settings.budget()?;
    let options = solvers
        .iter()
        .map(|&s| settings.solver_options(s, &problem))
        .collect::<Result<Vec<_>>>()?;

    // every solver sees the same instance and starting point
    let traces: Vec<Trace> = std::thread::scope(|scope| {
        let handles: Vec<_> = solvers
            .iter()
            .zip(&options)
            .map(|(&s, o)| {
                let (problem, x0) = (&problem, &x0);
                scope.spawn(move || run(s, problem, x0, o, budget, None))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect::<Result<_, _>>()
    })?;

    let (mut out, path) = sink(settings.output.as_deref(), &format!("{}_compare.csv", problem_name(&settings)?))?;
    writeln!(out, "solver,{TRACE_HEADER}")?;
    for t in &traces {
        write_rows(&mut out, t, Some(t.solver.name()))?;
    }
    out.flush()?;
    if let Some(p) = path {
        eprintln!("wrote {} solvers to {}", traces.len(), p.display());
    }
    // report every abort, not just the first
    Ok(traces.iter().map(report_abort).filter(|ok| !ok).count() == 0)
}

pub struct BoundsArgs {
    pub l_u: f64,
    pub mu_f: f64,
    pub mu_psi: f64,
    pub iterations: usize,
    pub dist0: f64,
    pub output: Option<PathBuf>,
}

/// `k, floor_A, envelope_F_gap` for `k = 1..=K`, where the envelope is
/// `½‖x₀ − x*‖²/floor_A`.
pub fn cmd_bounds(args: BoundsArgs) -> Status {
    let params = GuaranteeParams::new(args.l_u, args.mu_f, args.mu_psi)?;
    if params.q_u() >= 1.0 {
        bail!("q_u = {} must be < 1", params.q_u());
    }
    let r0 = 0.5 * args.dist0 * args.dist0;
    let mut rows = Vec::with_capacity(args.iterations);
    for k in 1..=args.iterations {
        let floor = acgm_guarantee_floor(k, &params)?;
        rows.push(format!("{k},{},{}", num(floor), num(r0 / floor)));
    }
    let (mut out, _) = sink(args.output.as_deref(), "bounds.csv")?;
    writeln!(out, "k,floor_A,envelope_F_gap")?;
    for r in rows {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(true)
}

pub fn cmd_verify(inject_fault: bool) -> Status {
    let fault = if inject_fault { FaultInjection::SkipVertexUpdate } else { FaultInjection::None };
    let results = run_suite(&SuiteConfig { fault });
    let mut passed = 0;
    for c in &results {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        passed += c.passed as usize;
    }
    println!("{passed}/{} checks passed", results.len());
    Ok(passed == results.len())
}
