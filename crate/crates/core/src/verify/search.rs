//! Derivative-free search for states that violate a relation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::entropy::Marginals;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigh, ComplexMatrix, C64};
use crate::measure::{MqmiKind, MqmiSpec};
use crate::partition::Partition;
use crate::state::{DensityMatrix, SubsystemLayout};
use crate::states;
use crate::verify::monotone::PairScope;
use crate::verify::sweep::{evaluate, prepare, Prepared, SampleResult, SweepCheck};
use crate::verify::triangle::{form_partitions, triangle_slack};
use crate::verify::{CheckReport, Claim, Witness};

/// Restarts stop climbing once the margin drops below this.
pub const STOP_MARGIN: f64 = -1e-4;
/// A margin below this counts as a violation.
pub const FOUND_MARGIN: f64 = -1e-6;
pub const DEFAULT_BUDGET: usize = 20_000;
pub const DEFAULT_SEED: u64 = 7;

const BATCH: usize = 4;
const EVALS_PER_RESTART: usize = 1_500;
/// Candidate starts drawn per restart; the climb begins at the best of them.
const SCREEN: usize = 32;
const INITIAL_STEP: f64 = 0.1;
const MIN_STEP: f64 = 1e-4;
const FAILS_BEFORE_HALVING: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchTarget {
    IqTriangleViolation,
    SsaTsallis,
    IqCIncrease,
    IqprimeNegative,
    IqprimeCoarseA,
    IqprimeCoarseB,
    IqprimeCoarseC,
    IqprimeTriangle,
    IqdprimeNegative,
}

impl SearchTarget {
    pub const ALL: [SearchTarget; 9] = [
        Self::IqTriangleViolation,
        Self::SsaTsallis,
        Self::IqCIncrease,
        Self::IqprimeNegative,
        Self::IqprimeCoarseA,
        Self::IqprimeCoarseB,
        Self::IqprimeCoarseC,
        Self::IqprimeTriangle,
        Self::IqdprimeNegative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::IqTriangleViolation => "iq-triangle-violation",
            Self::SsaTsallis => "ssa-tsallis",
            Self::IqCIncrease => "iq-c-increase",
            Self::IqprimeNegative => "iqprime-negative",
            Self::IqprimeCoarseA => "iqprime-coarse-a",
            Self::IqprimeCoarseB => "iqprime-coarse-b",
            Self::IqprimeCoarseC => "iqprime-coarse-c",
            Self::IqprimeTriangle => "iqprime-triangle",
            Self::IqdprimeNegative => "iqdprime-negative",
        }
    }

    pub fn kind(self) -> MqmiKind {
        match self {
            Self::IqTriangleViolation | Self::SsaTsallis | Self::IqCIncrease => MqmiKind::Iq,
            Self::IqdprimeNegative => MqmiKind::Iqdprime,
            _ => MqmiKind::Iqprime,
        }
    }

    pub fn check(self) -> SweepCheck {
        match self {
            Self::IqTriangleViolation | Self::IqprimeTriangle => SweepCheck::Triangle,
            Self::SsaTsallis => SweepCheck::Ssa,
            Self::IqCIncrease | Self::IqprimeCoarseC => SweepCheck::Monotone(PairScope::C),
            Self::IqprimeNegative | Self::IqdprimeNegative => SweepCheck::NonNegative,
            Self::IqprimeCoarseA => SweepCheck::Monotone(PairScope::A),
            Self::IqprimeCoarseB => SweepCheck::Monotone(PairScope::B),
        }
    }

    pub fn default_layout(self) -> SubsystemLayout {
        let n = match self.check() {
            SweepCheck::Triangle => 4,
            _ => 3,
        };
        SubsystemLayout::qubits(n).expect("small qubit layout")
    }
}

impl fmt::Display for SearchTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SearchTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownName(format!("search target {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub target: SearchTarget,
    pub q: f64,
    /// Total number of objective evaluations across restarts.
    pub budget: usize,
    pub seed: u64,
    pub layout: SubsystemLayout,
}

impl SearchConfig {
    pub fn new(target: SearchTarget, q: f64) -> Self {
        Self {
            target,
            q,
            budget: DEFAULT_BUDGET,
            seed: DEFAULT_SEED,
            layout: target.default_layout(),
        }
    }

    pub fn budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn spec(&self) -> Result<MqmiSpec> {
        MqmiSpec::tsallis(self.target.kind(), self.q)
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best_margin: f64,
    pub state: DensityMatrix,
    pub partitions: Vec<Partition>,
    pub evaluations: usize,
    pub restarts: usize,
    pub found: bool,
}

struct Climb {
    margin: f64,
    state: DensityMatrix,
    parts: Vec<Partition>,
    evals: usize,
}

/// Clamps negative eigenvalues and renormalises.
fn project(layout: &SubsystemLayout, m: &ComplexMatrix) -> Result<DensityMatrix> {
    let eig = hermitian_eigh(m)?;
    let vals: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    if total <= 0.0 {
        return Err(Error::NotPsd(eig.values.last().copied().unwrap_or(0.0)));
    }
    let vals: Vec<f64> = vals.iter().map(|v| v / total).collect();
    let mut r = eig.reconstruct(&vals);
    let d = r.rows();
    for i in 0..d {
        r[(i, i)].im = 0.0;
        for j in i + 1..d {
            let z = (r[(i, j)] + r[(j, i)].conj()) * 0.5;
            r[(i, j)] = z;
            r[(j, i)] = z.conj();
        }
    }
    Ok(DensityMatrix::new_unchecked(layout.clone(), r))
}

/// One Hermitian direction: a diagonal unit, a real symmetric pair or an imaginary antisymmetric pair.
fn perturb<R: Rng + ?Sized>(m: &ComplexMatrix, step: f64, rng: &mut R) -> ComplexMatrix {
    let d = m.rows();
    let mut out = m.clone();
    let sign = if rng.random_bool(0.5) { step } else { -step };
    let i = rng.random_range(0..d);
    let j = rng.random_range(0..d);
    if i == j {
        out[(i, i)] += C64::new(sign, 0.0);
    } else if rng.random_bool(0.5) {
        out[(i, j)] += C64::new(sign, 0.0);
        out[(j, i)] += C64::new(sign, 0.0);
    } else {
        out[(i, j)] += C64::new(0.0, sign);
        out[(j, i)] += C64::new(0.0, -sign);
    }
    out
}

/// Tensor product of random factors over a random grouping of the parties.
fn block_product_start<R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let n = layout.len();
    let mut groups = vec![0u64; n];
    for p in 0..n {
        groups[rng.random_range(0..n)] |= 1 << p;
    }
    let mut out: Option<DensityMatrix> = None;
    for &mask in groups.iter().filter(|&&m| m != 0) {
        let sub = layout.restrict(mask)?;
        let d = sub.total_dim();
        let rank = if rng.random_bool(0.5) { 1 } else { d };
        let f = states::random_mixed_with(&sub, rank, rng)?;
        out = Some(match out {
            None => f,
            Some(acc) => acc.tensor(&f)?,
        });
    }
    out.expect("layout is non-empty").permute(&layout.labels())
}

/// Restarts on a multi-form relation climb one form each, so a form that is tight on the start cannot mask the others.
fn objective(
    config: &SearchConfig,
    prep: &Prepared,
    rho: &DensityMatrix,
    spec: MqmiSpec,
    index: usize,
) -> Result<SampleResult> {
    match config.target.check() {
        SweepCheck::Triangle => {
            let (_, _, slacks) = triangle_slack(&Marginals::new(rho), spec)?;
            let at = index % slacks.len();
            let labels = config.layout.labels();
            Ok(SampleResult {
                margin: slacks[at],
                parts: form_partitions(labels.len(), at, &labels)?,
            })
        }
        check => evaluate(check, prep, rho, spec),
    }
}

fn climb(
    config: &SearchConfig,
    spec: MqmiSpec,
    prep: &Prepared,
    index: usize,
    evals: usize,
) -> Result<Climb> {
    let layout = &config.layout;
    let d = layout.total_dim();
    let mut rng = states::rng_from_seed(states::derive_seed(config.seed, index as u64));
    let mut best: Option<(DensityMatrix, SampleResult)> = None;
    for k in 0..SCREEN.min(evals) {
        let start = match (index * SCREEN + k) % 8 {
            0 => states::random_mixed_with(layout, 1, &mut rng)?,
            3 => states::random_mixed_with(layout, 2.min(d), &mut rng)?,
            6 => states::random_mixed_with(layout, d, &mut rng)?,
            _ => block_product_start(layout, &mut rng)?,
        };
        let r = objective(config, prep, &start, spec, index)?;
        if best.as_ref().is_none_or(|b| r.margin < b.1.margin) {
            best = Some((start, r));
        }
    }
    let (mut state, first) = best.expect("at least one start");
    let (mut margin, mut parts) = (first.margin, first.parts);
    let mut used = SCREEN.min(evals);
    let mut step = INITIAL_STEP;
    let mut fails = 0;
    while used < evals && margin >= STOP_MARGIN && step >= MIN_STEP {
        let trial = project(layout, &perturb(state.matrix(), step, &mut rng))?;
        let r = objective(config, prep, &trial, spec, index)?;
        used += 1;
        if r.margin < margin {
            margin = r.margin;
            parts = r.parts;
            state = trial;
            fails = 0;
        } else {
            fails += 1;
            if fails >= FAILS_BEFORE_HALVING {
                step *= 0.5;
                fails = 0;
            }
        }
    }
    Ok(Climb {
        margin,
        state,
        parts,
        evals: used,
    })
}

/// Random restarts with hill climbing, in fixed batches so that the outcome depends only on the config.
pub fn search(config: &SearchConfig) -> Result<SearchOutcome> {
    if config.budget == 0 {
        return Err(Error::Spec("search budget must be positive".into()));
    }
    let spec = config.spec()?;
    let prep = prepare(config.target.check(), &config.layout, spec)?;
    let restarts_max = config.budget.div_ceil(EVALS_PER_RESTART);
    let mut best: Option<Climb> = None;
    let mut used = 0;
    let mut restarts = 0;
    while restarts < restarts_max && used < config.budget {
        let n = BATCH.min(restarts_max - restarts);
        let left = config.budget - used;
        let per = (left / n).clamp(1, EVALS_PER_RESTART);
        let batch: Vec<Climb> = (restarts..restarts + n)
            .into_par_iter()
            .map(|i| climb(config, spec, &prep, i, per))
            .collect::<Result<_>>()?;
        restarts += n;
        for c in batch {
            used += c.evals;
            if best.as_ref().is_none_or(|b| c.margin < b.margin) {
                best = Some(c);
            }
        }
        if best.as_ref().is_some_and(|b| b.margin < STOP_MARGIN) {
            break;
        }
    }
    let b = best.expect("at least one restart");
    Ok(SearchOutcome {
        best_margin: b.margin,
        found: b.margin < FOUND_MARGIN,
        state: b.state,
        partitions: b.parts,
        evaluations: used,
        restarts,
    })
}

/// Runs the search and reports it against the claim that the relation holds.
pub fn search_report(config: &SearchConfig, asserted: Claim) -> Result<CheckReport> {
    let out = search(config)?;
    let spec = config.spec()?;
    let mut report = CheckReport::new(format!("search-{}", config.target), Some(spec))
        .value("evaluations", out.evaluations as f64)
        .value("restarts", out.restarts as f64);
    report.samples = out.evaluations;
    report.min_margin = out.best_margin;
    report.provenance.seed = Some(config.seed);
    report.provenance.tolerance = -FOUND_MARGIN;
    report.decide(out.found, asserted);
    if out.found {
        report.witness = Some(Witness::new(&out.state, out.partitions, out.best_margin));
    } else {
        report.note("no violation found within the budget");
    }
    Ok(report)
}
