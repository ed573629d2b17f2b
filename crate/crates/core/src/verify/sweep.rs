//! Seeded ensembles and the per-sample evaluation loop.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{ssa_margin, Marginals};
use crate::error::{Error, Result};
use crate::measure::{mqmi_masks, MqmiSpec};
use crate::partition::{all_partitions, Partition};
use crate::state::{DensityMatrix, SubsystemLayout};
use crate::states;
use crate::verify::bound::bound_terms;
use crate::verify::monotone::{MonotoneChecker, PairScope};
use crate::verify::triangle::{form_partitions, triangle_slack};
use crate::verify::{claim, claim_all, CheckReport, Claim, Property, Witness};
use crate::{CHECK_TOL, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Ensemble {
    HaarPure,
    HsMixed { rank: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ensemble: Ensemble,
    pub layout: SubsystemLayout,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl SweepConfig {
    pub fn new(
        ensemble: Ensemble,
        layout: SubsystemLayout,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        let c = Self {
            ensemble,
            layout,
            samples,
            seed,
            tol: CHECK_TOL,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        self.tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Spec("a sweep needs at least one sample".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Spec(format!(
                "tolerance must be finite and non-negative, got {}",
                self.tol
            )));
        }
        let d = self.layout.total_dim();
        if d > MAX_DIM {
            return Err(Error::DimensionGuard(d));
        }
        if let Ensemble::HsMixed { rank } = self.ensemble {
            if rank == 0 || rank > d {
                return Err(Error::Spec(format!("rank must lie in 1..={d}, got {rank}")));
            }
        }
        Ok(())
    }

    /// Sample `index`, a function of `(seed, index)` only.
    pub fn sample(&self, index: usize) -> Result<DensityMatrix> {
        let seed = states::derive_seed(self.seed, index as u64);
        match self.ensemble {
            Ensemble::HaarPure => states::random_pure(&self.layout, seed),
            Ensemble::HsMixed { rank } => states::random_mixed(&self.layout, rank, seed),
        }
    }

    fn ensemble_name(&self) -> String {
        match self.ensemble {
            Ensemble::HaarPure => "haar-pure".into(),
            Ensemble::HsMixed { rank } => format!("hs-mixed(rank={rank})"),
        }
    }
}

/// A per-sample check a sweep can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCheck {
    NonNegative,
    /// Relabelling the tensor factors and reordering blocks leaves every value unchanged.
    Symmetric,
    Monotone(PairScope),
    Triangle,
    EntropyBound,
    /// Strong subadditivity of the entropy on the first three parties.
    Ssa,
}

impl SweepCheck {
    pub fn name(self) -> String {
        match self {
            Self::NonNegative => "non-negative".into(),
            Self::Symmetric => "symmetric".into(),
            Self::Monotone(s) => format!("coarsening-monotone-{}", s.name()),
            Self::Triangle => "triangle".into(),
            Self::EntropyBound => "entropy-bound".into(),
            Self::Ssa => "ssa".into(),
        }
    }

    fn asserted(self, spec: MqmiSpec) -> Claim {
        match self {
            Self::NonNegative => claim(spec.kind, Property::NonNegative),
            Self::Symmetric => claim(spec.kind, Property::Symmetric),
            Self::Monotone(s) => claim_all(spec.kind, s.properties()),
            Self::Triangle => claim(spec.kind, Property::Triangle),
            Self::EntropyBound => Claim::Holds,
            Self::Ssa if spec.kind.is_tsallis() => Claim::Fails,
            Self::Ssa => Claim::Holds,
        }
    }
}

/// What one sample contributes: its smallest margin and a way to name the relation.
#[derive(Clone, Debug)]
pub(crate) struct SampleResult {
    pub(crate) margin: f64,
    pub(crate) parts: Vec<Partition>,
}

/// Precomputed per-layout data each check needs.
pub(crate) enum Prepared {
    Partitions(Vec<(Partition, Vec<u64>)>),
    Symmetric {
        parts: Vec<(Partition, Vec<u64>)>,
        order: Vec<String>,
    },
    Monotone(MonotoneChecker, PairScope),
    Plain,
}

fn partitions_for(layout: &SubsystemLayout, spec: MqmiSpec) -> Result<Vec<(Partition, Vec<u64>)>> {
    let mut out = Vec::new();
    for p in all_partitions(&layout.labels())? {
        let ok = if spec.kind.needs_three_blocks() {
            p.len() == 3
        } else {
            p.len() >= 2
        };
        if ok {
            let m = p.masks(layout)?;
            out.push((p, m));
        }
    }
    Ok(out)
}

pub(crate) fn prepare(
    check: SweepCheck,
    layout: &SubsystemLayout,
    spec: MqmiSpec,
) -> Result<Prepared> {
    Ok(match check {
        SweepCheck::NonNegative => Prepared::Partitions(partitions_for(layout, spec)?),
        SweepCheck::Symmetric => {
            // A fixed derangement-like reordering: rotate by one.
            let mut order: Vec<String> = layout.labels().iter().map(|s| s.to_string()).collect();
            order.rotate_left(1);
            Prepared::Symmetric {
                parts: partitions_for(layout, spec)?,
                order,
            }
        }
        SweepCheck::Monotone(scope) => {
            Prepared::Monotone(MonotoneChecker::new(layout, spec)?, scope)
        }
        SweepCheck::Triangle => {
            crate::verify::triangle::forms(layout.len())?;
            if spec.kind.needs_three_blocks() {
                return Err(Error::Spec(format!(
                    "{} has no triangle relation",
                    spec.kind
                )));
            }
            Prepared::Plain
        }
        SweepCheck::EntropyBound => {
            if spec.kind.needs_three_blocks() {
                return Err(Error::Spec(format!(
                    "the entropy bound is stated for the sum kind, not {}",
                    spec.kind
                )));
            }
            Prepared::Plain
        }
        SweepCheck::Ssa => {
            if layout.len() < 3 {
                return Err(Error::Layout(
                    "strong subadditivity needs three parties".into(),
                ));
            }
            Prepared::Plain
        }
    })
}

pub(crate) fn evaluate(
    check: SweepCheck,
    prep: &Prepared,
    rho: &DensityMatrix,
    spec: MqmiSpec,
) -> Result<SampleResult> {
    let m = Marginals::new(rho);
    let labels = rho.layout().labels();
    match (check, prep) {
        (SweepCheck::NonNegative, Prepared::Partitions(parts)) => {
            let mut best = SampleResult {
                margin: f64::INFINITY,
                parts: vec![],
            };
            for (p, masks) in parts {
                let v = mqmi_masks(&m, masks, spec)?;
                if v < best.margin {
                    best = SampleResult {
                        margin: v,
                        parts: vec![p.clone()],
                    };
                }
            }
            Ok(best)
        }
        (SweepCheck::Symmetric, Prepared::Symmetric { parts, order }) => {
            let moved = rho.permute(order)?;
            let mm = Marginals::new(&moved);
            let mut best = SampleResult {
                margin: f64::INFINITY,
                parts: vec![],
            };
            for (p, masks) in parts {
                let v = mqmi_masks(&m, masks, spec)?;
                let mut rev = masks.clone();
                rev.reverse();
                let w = mqmi_masks(&mm, &p.masks(moved.layout())?, spec)?;
                let r = mqmi_masks(&m, &rev, spec)?;
                let margin = -(v - w).abs().max((v - r).abs());
                if margin < best.margin {
                    best = SampleResult {
                        margin,
                        parts: vec![p.clone()],
                    };
                }
            }
            Ok(best)
        }
        (SweepCheck::Monotone(_), Prepared::Monotone(checker, scope)) => {
            let out = checker.evaluate(rho)?;
            let (margin, at) = out.min_in(*scope);
            let parts = at.map(|ij| {
                let (a, b) = checker.pair(ij);
                vec![a, b]
            });
            Ok(SampleResult {
                margin,
                parts: parts.unwrap_or_default(),
            })
        }
        (SweepCheck::Triangle, _) => {
            let (margin, at, _) = triangle_slack(&m, spec)?;
            Ok(SampleResult {
                margin,
                parts: form_partitions(labels.len(), at, &labels)?,
            })
        }
        (SweepCheck::EntropyBound, _) => {
            let t = bound_terms(rho, spec.entropy())?;
            Ok(SampleResult {
                margin: t.margin(),
                parts: vec![Partition::finest(rho.layout())],
            })
        }
        (SweepCheck::Ssa, _) => {
            let (a, b, c) = ([labels[0]], [labels[1]], [labels[2]]);
            let margin = ssa_margin(rho, &a, &b, &c, spec.entropy())?;
            Ok(SampleResult {
                margin,
                parts: vec![Partition::new(&[
                    vec![labels[0]],
                    vec![labels[1]],
                    vec![labels[2]],
                ])?],
            })
        }
        _ => unreachable!("prepared data matches its check"),
    }
}

/// Runs every check over the ensemble. Samples are evaluated in parallel; the fold keeps the
/// first index attaining the minimum, so reports do not depend on scheduling.
pub fn run_sweep(
    config: &SweepConfig,
    spec: MqmiSpec,
    checks: &[SweepCheck],
) -> Result<Vec<CheckReport>> {
    config.validate()?;
    spec.validate()?;
    let prepared: Vec<Prepared> = checks
        .iter()
        .map(|&c| prepare(c, &config.layout, spec))
        .collect::<Result<_>>()?;
    let per_sample: Vec<Vec<SampleResult>> = (0..config.samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<SampleResult>> {
            let rho = config.sample(i)?;
            checks
                .iter()
                .zip(&prepared)
                .map(|(&c, p)| evaluate(c, p, &rho, spec))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(checks.len());
    for (k, &check) in checks.iter().enumerate() {
        let mut min = f64::INFINITY;
        let mut at = None;
        for (i, row) in per_sample.iter().enumerate() {
            if row[k].margin < min {
                min = row[k].margin;
                at = Some(i);
            }
        }
        let mut report = CheckReport::new(check.name(), Some(spec));
        report.samples = config.samples;
        report.min_margin = min;
        report.provenance.seed = Some(config.seed);
        report.provenance.tolerance = config.tol;
        report.note(format!(
            "ensemble {} on {}",
            config.ensemble_name(),
            config.layout
        ));
        let violated = min < -config.tol;
        report.decide(violated, check.asserted(spec));
        if violated {
            let i = at.expect("a finite minimum has an index");
            report.values.insert("witness_sample".into(), i as f64);
            report.witness = Some(Witness::new(
                &config.sample(i)?,
                per_sample[i][k].parts.clone(),
                min,
            ));
        }
        reports.push(report);
    }
    Ok(reports)
}
