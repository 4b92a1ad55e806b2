//! Run configuration: JSON file values overridden by command-line flags.

use std::path::{Path, PathBuf};

use acgm_core::bench::{self, BenchProblem};
use acgm_core::linesearch::{AcceptanceCriterion, LineSearchParams};
use acgm_core::solvers::FaultInjection;
use acgm_core::{Budget, CompositeProblem, SolverKind, SolverOptions, StepPolicy};
use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ProblemKind {
    LassoSynthetic,
    Deblur,
    HuberRofDual,
    QuadraticL1Known,
}

impl ProblemKind {
    fn default_size(self) -> usize {
        match self {
            ProblemKind::LassoSynthetic => 100,
            ProblemKind::Deblur | ProblemKind::HuberRofDual => 64,
            ProblemKind::QuadraticL1Known => 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Criterion {
    Descent,
    QuadraticResidual,
}

/// Settings shared by `run` and `compare`. Every field is optional so that
/// the config file and the flags can be layered.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct RunSettings {
    /// JSON file with any of these settings; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub problem: Option<ProblemKind>,
    /// PGM image for deblur / huber_rof_dual instead of the synthetic pattern
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Image side length, or the dimension of the synthetic problems
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial Lipschitz estimate; defaults to the problem's L_f
    #[arg(long = "L0")]
    pub l0: Option<f64>,
    #[arg(long)]
    pub r_u: Option<f64>,
    /// Defaults to sqrt(0.9) for ACGM, 0.9 for AMGS and 1 for FISTA
    #[arg(long)]
    pub r_d: Option<f64>,
    #[arg(long)]
    pub mu_f: Option<f64>,
    #[arg(long)]
    pub mu_psi: Option<f64>,
    /// Override the Lipschitz constant the problem reports
    #[arg(long)]
    pub lf: Option<f64>,
    #[arg(long, value_enum)]
    pub criterion: Option<Criterion>,
    #[arg(long, conflicts_with = "budget_wtu")]
    pub budget_iters: Option<usize>,
    #[arg(long)]
    pub budget_wtu: Option<u64>,
    /// Output CSV; defaults to $ACGM_OUTPUT_DIR/<name>.csv, else stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// JSON config layout. Keys match the long flag names with `_` for `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    problem: Option<ProblemKind>,
    image: Option<PathBuf>,
    size: Option<usize>,
    seed: Option<u64>,
    #[serde(rename = "L0")]
    l0: Option<f64>,
    r_u: Option<f64>,
    r_d: Option<f64>,
    mu_f: Option<f64>,
    mu_psi: Option<f64>,
    lf: Option<f64>,
    criterion: Option<Criterion>,
    budget_iters: Option<usize>,
    budget_wtu: Option<u64>,
    output: Option<PathBuf>,
    pub solver: Option<String>,
    pub solvers: Option<Vec<String>>,
}

impl RunSettings {
    /// Fills unset flags from the `--config` file and returns the file's
    /// solver selection alongside.
    pub fn resolve(self) -> Result<(Self, FileConfig)> {
        let Some(path) = &self.config else {
            return Ok((self, FileConfig::default()));
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut f: FileConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // a budget flag replaces the file's budget of either kind
        let (budget_iters, budget_wtu) = if self.budget_iters.is_some() || self.budget_wtu.is_some() {
            (self.budget_iters, self.budget_wtu)
        } else {
            (f.budget_iters, f.budget_wtu)
        };
        let merged = Self {
            config: self.config.clone(),
            problem: self.problem.or(f.problem),
            image: self.image.or(f.image.take()),
            size: self.size.or(f.size),
            seed: self.seed.or(f.seed),
            l0: self.l0.or(f.l0),
            r_u: self.r_u.or(f.r_u),
            r_d: self.r_d.or(f.r_d),
            mu_f: self.mu_f.or(f.mu_f),
            mu_psi: self.mu_psi.or(f.mu_psi),
            lf: self.lf.or(f.lf),
            criterion: self.criterion.or(f.criterion),
            budget_iters,
            budget_wtu,
            output: self.output.or(f.output.take()),
            inject_fault: self.inject_fault,
        };
        Ok((merged, f))
    }

    pub fn problem_kind(&self) -> Result<ProblemKind> {
        self.problem.context("no problem given (use --problem or the config file)")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn budget(&self) -> Result<Budget> {
        match (self.budget_iters, self.budget_wtu) {
            (Some(_), Some(_)) => bail!("give either an iteration or a WTU budget, not both"),
            (_, Some(w)) => Ok(Budget::Wtu(w)),
            (Some(i), None) => Ok(Budget::Iterations(i)),
            (None, None) => Ok(Budget::Iterations(100)),
        }
    }

    /// Builds the problem instance and starting point.
    pub fn instance(&self) -> Result<(CompositeProblem, Vec<f64>)> {
        let kind = self.problem_kind()?;
        let size = self.size.unwrap_or(kind.default_size());
        let seed = self.seed();
        if self.image.is_some() && !matches!(kind, ProblemKind::Deblur | ProblemKind::HuberRofDual) {
            bail!("--image applies to deblur and huber_rof_dual only");
        }
        let (mut problem, x0) = match kind {
            ProblemKind::LassoSynthetic => split(bench::lasso_synthetic(size, 2 * size, 0.1, seed)?),
            ProblemKind::QuadraticL1Known => {
                let k = bench::quadratic_l1_known(size, seed, 0.1, 4.0)?;
                (k.problem(false)?, vec![0.0; size])
            }
            ProblemKind::Deblur => split(match &self.image {
                Some(path) => {
                    let clean = read_image(path)?;
                    let b = bench::blurred_observation(&clean, bench::DEBLUR_NOISE_STD, seed)?;
                    bench::build_deblurring_problem(&b, bench::DEBLUR_LAMBDA)?
                }
                None => bench::deblurring_instance(size, seed, bench::DEBLUR_LAMBDA)?,
            }),
            ProblemKind::HuberRofDual => split(match &self.image {
                Some(path) => {
                    let clean = read_image(path)?;
                    let b = bench::add_gaussian_noise(&clean, bench::HUBER_NOISE_STD, seed)?;
                    bench::build_huber_rof_dual_problem(&b, bench::HUBER_LAMBDA, bench::HUBER_EPS)?
                }
                None => bench::huber_rof_instance(size, seed)?,
            }),
        };
        if let Some(mu) = self.mu_f {
            problem = problem.with_mu_f(mu)?;
        }
        if let Some(mu) = self.mu_psi {
            problem = problem.with_mu_psi(mu)?;
        }
        if let Some(lf) = self.lf {
            problem = problem.with_lf_hint(lf)?;
        }
        Ok((problem, x0))
    }

    pub fn solver_options(&self, kind: SolverKind, problem: &CompositeProblem) -> Result<SolverOptions> {
        let l0 = match (self.l0, problem.lf_hint()) {
            (Some(l0), _) => l0,
            (None, Some(lf)) => lf,
            (None, None) => 1.0,
        };
        let r_d = self.r_d.unwrap_or(match kind {
            SolverKind::AcgmEs | SolverKind::AcgmEx => 0.9f64.sqrt(),
            SolverKind::Amgs => 0.9,
            _ => 1.0,
        });
        let criterion = match self.criterion.unwrap_or(Criterion::Descent) {
            Criterion::Descent => AcceptanceCriterion::OracleDescent,
            Criterion::QuadraticResidual => AcceptanceCriterion::QuadraticResidual,
        };
        let params = LineSearchParams::new(l0, self.r_u.unwrap_or(2.0), r_d)?.with_criterion(criterion);
        let mut opts = SolverOptions::new(StepPolicy::Backtracking(params));
        if self.inject_fault {
            opts.fault = FaultInjection::SkipVertexUpdate;
        }
        Ok(opts)
    }
}

fn split(bp: BenchProblem) -> (CompositeProblem, Vec<f64>) {
    (bp.problem, bp.x0)
}

fn read_image(path: &Path) -> Result<bench::ImageGray> {
    bench::pgm_read(path).with_context(|| format!("reading image {}", path.display()))
}
