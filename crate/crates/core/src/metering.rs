//! Simulated wall-clock time units (WTU).
//!
//! One WTU is the time of one `f` or `∇f` evaluation on a parallel
//! processing unit; prox calls and vector arithmetic are free. The
//! per-iteration costs below are what the three-unit speculative schedule
//! amounts to for each method.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodKind {
    Acgm,
    Fista,
    FistaCp,
    Amgs,
    Fgm,
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MethodKind::Acgm => "ACGM",
            MethodKind::Fista => "FISTA",
            MethodKind::FistaCp => "FISTA-CP",
            MethodKind::Amgs => "AMGS",
            MethodKind::Fgm => "FGM",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CostEvent {
    PlainIteration,
    Backtrack,
}

impl fmt::Display for CostEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostEvent::PlainIteration => f.write_str("plain_iteration"),
            CostEvent::Backtrack => f.write_str("backtrack"),
        }
    }
}

/// Tabulated cost of each (method, event) pair.
#[derive(Clone, Copy, Debug, Default)]
pub struct CostModel;

impl CostModel {
    pub fn cost(&self, method: MethodKind, event: CostEvent) -> Result<u64> {
        use CostEvent::*;
        use MethodKind::*;
        match (method, event) {
            (Acgm, PlainIteration) => Ok(1),
            (Acgm, Backtrack) => Ok(2),
            (Fista, PlainIteration) => Ok(1),
            (Fista, Backtrack) => Ok(1),
            (Amgs, PlainIteration) => Ok(2),
            (Amgs, Backtrack) => Ok(2),
            (Fgm, PlainIteration) => Ok(1),
            (FistaCp, PlainIteration) => Ok(1),
            (m, e) => Err(Error::UnknownCost {
                method: m.to_string(),
                event: e.to_string(),
            }),
        }
    }
}

/// Accumulated WTU of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WtuLedger {
    total_wtu: u64,
    counts: BTreeMap<(MethodKind, CostEvent), u64>,
}

impl WtuLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> u64 {
        self.total_wtu
    }

    pub fn count(&self, method: MethodKind, event: CostEvent) -> u64 {
        self.counts.get(&(method, event)).copied().unwrap_or(0)
    }

    pub fn charge(&mut self, method: MethodKind, event: CostEvent, multiplicity: u64) -> Result<()> {
        let unit = CostModel.cost(method, event)?;
        self.total_wtu += unit * multiplicity;
        *self.counts.entry((method, event)).or_insert(0) += multiplicity;
        Ok(())
    }
}

/// WTU of an iteration with `backtracks` rejected trials.
pub fn iteration_cost(method: MethodKind, backtracks: u64) -> Result<u64> {
    let plain = CostModel.cost(method, CostEvent::PlainIteration)?;
    if backtracks == 0 {
        return Ok(plain);
    }
    Ok(plain + backtracks * CostModel.cost(method, CostEvent::Backtrack)?)
}

pub fn wtu_of_run(method: MethodKind, iterations: u64, backtracks: u64) -> Result<u64> {
    let mut ledger = WtuLedger::new();
    ledger.charge(method, CostEvent::PlainIteration, iterations)?;
    if backtracks > 0 {
        ledger.charge(method, CostEvent::Backtrack, backtracks)?;
    }
    Ok(ledger.total())
}
