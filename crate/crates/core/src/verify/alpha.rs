//! Smallest exponent for which an α-power monogamy relation holds across an ensemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::Marginals;
use crate::error::{Error, Result};
use crate::measure::{mqmi_masks, MqmiSpec};
use crate::partition::Partition;
use crate::verify::sweep::{Ensemble, SweepConfig};
use crate::verify::{claim, AlphaCertificate, CheckReport, Claim, Property, Witness};

/// Upper end of the bisection range.
pub const ALPHA_MAX: f64 = 10.0;
/// Bisection stops once the bracket is this narrow.
pub const ALPHA_RESOLUTION: f64 = 1e-4;
/// Slack allowed in `lhs^α − Σ rhs^α ≥ 0`.
pub const ALPHA_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaInequality {
    /// `J(A:BC)^α ≥ J(A:B)^α + J(A:C)^α`
    Monogamy,
    /// `J(A:B:C)^α ≥ J(A:B)^α + J(A:C)^α + J(B:C)^α`
    Complete,
    /// `J(A:B:C)^α ≥ J(A:BC)^α + J(B:C)^α`
    Tight,
}

impl AlphaInequality {
    pub fn name(self) -> &'static str {
        match self {
            Self::Monogamy => "monogamy",
            Self::Complete => "complete",
            Self::Tight => "tight",
        }
    }

    fn property(self) -> Property {
        match self {
            Self::Monogamy => Property::Monogamous,
            Self::Complete => Property::CompletelyMonogamous,
            Self::Tight => Property::TightlyCompleteMonogamous,
        }
    }

    /// `(lhs, rhs terms)` as block bitmasks over the first three parties.
    fn masks(self) -> (Vec<u64>, Vec<Vec<u64>>) {
        let (a, b, c) = (1u64, 2u64, 4u64);
        match self {
            Self::Monogamy => (vec![a, b | c], vec![vec![a, b], vec![a, c]]),
            Self::Complete => (vec![a, b, c], vec![vec![a, b], vec![a, c], vec![b, c]]),
            Self::Tight => (vec![a, b, c], vec![vec![a, b | c], vec![b, c]]),
        }
    }

    fn partitions(self, labels: &[&str]) -> Result<Vec<Partition>> {
        let (l, r) = self.masks();
        std::iter::once(l)
            .chain(r)
            .map(|m| mask_partition(&m, labels))
            .collect()
    }
}

fn mask_partition(blocks: &[u64], labels: &[&str]) -> Result<Partition> {
    let b: Vec<Vec<&str>> = blocks
        .iter()
        .map(|&m| {
            (0..labels.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| labels[i])
                .collect()
        })
        .collect();
    Partition::new(&b)
}

/// `x^α` with `0^α = 0`.
fn pow0(x: f64, alpha: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.powf(alpha)
    }
}

/// One sample's terms with sub-tolerance values set to zero.
#[derive(Clone, Debug)]
struct Terms {
    lhs: f64,
    rhs: Vec<f64>,
}

impl Terms {
    fn margin(&self, alpha: f64) -> f64 {
        pow0(self.lhs, alpha) - self.rhs.iter().map(|&r| pow0(r, alpha)).sum::<f64>()
    }

    fn feasible(&self, alpha: f64) -> bool {
        self.margin(alpha) >= -ALPHA_SLACK
    }

    fn vacuous(&self) -> bool {
        self.lhs == 0.0
    }

    /// Smallest feasible α in `(0, ALPHA_MAX]` to bisection resolution; `Some(0)` when
    /// every α works, `None` when none does.
    fn min_alpha(&self) -> Option<f64> {
        if self.vacuous() {
            return self.rhs.iter().all(|&r| r == 0.0).then_some(0.0);
        }
        if !self.feasible(ALPHA_MAX) {
            return None;
        }
        if self.feasible(ALPHA_RESOLUTION) {
            return Some(0.0);
        }
        let (mut lo, mut hi) = (ALPHA_RESOLUTION, ALPHA_MAX);
        while hi - lo > ALPHA_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if self.feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

/// Fits the ensemble exponent and records a bracketing certificate at `α/2`.
pub fn fit_alpha(
    config: &SweepConfig,
    spec: MqmiSpec,
    inequality: AlphaInequality,
) -> Result<CheckReport> {
    config.validate()?;
    spec.validate()?;
    if spec.kind.needs_three_blocks() {
        return Err(Error::Spec(format!(
            "{} has no monogamy relation",
            spec.kind
        )));
    }
    if config.layout.len() < 3 {
        return Err(Error::Layout("α fitting needs three parties".into()));
    }
    if inequality == AlphaInequality::Monogamy && config.ensemble != Ensemble::HaarPure {
        return Err(Error::Precondition(
            "the monogamy exponent is fitted on pure states only".into(),
        ));
    }
    let tol = config.tol;
    let (lhs_m, rhs_m) = inequality.masks();
    let terms: Vec<Terms> = (0..config.samples)
        .into_par_iter()
        .map(|i| -> Result<Terms> {
            let rho = config.sample(i)?;
            let m = Marginals::new(&rho);
            let clean = |v: f64| -> Result<f64> {
                if v < -tol {
                    return Err(Error::Precondition(format!(
                        "negative term {v:.3e} in sample {i}: the α-power relation needs non-negative values"
                    )));
                }
                Ok(if v <= tol { 0.0 } else { v })
            };
            let lhs = clean(mqmi_masks(&m, &lhs_m, spec)?)?;
            let rhs = rhs_m.iter().map(|b| clean(mqmi_masks(&m, b, spec)?)).collect::<Result<_>>()?;
            Ok(Terms { lhs, rhs })
        })
        .collect::<Result<_>>()?;

    let mut report = CheckReport::new(format!("fit-alpha-{}", inequality.name()), Some(spec));
    report.samples = terms.len();
    report.provenance.seed = Some(config.seed);
    report.provenance.tolerance = tol;
    let pure = config.ensemble == Ensemble::HaarPure;
    let asserted = match claim(spec.kind, inequality.property()) {
        Claim::HoldsOnPure if pure => Claim::Holds,
        c => c,
    };

    let mut alpha = 0.0f64;
    let mut infeasible = None;
    let mut vacuous = 0usize;
    for (i, t) in terms.iter().enumerate() {
        if t.vacuous() {
            vacuous += 1;
        }
        match t.min_alpha() {
            Some(a) => alpha = alpha.max(a),
            None if infeasible.is_none() => infeasible = Some(i),
            None => {}
        }
    }
    report
        .values
        .insert("vacuous_samples".into(), vacuous as f64);
    let labels = config.layout.labels();

    if let Some(i) = infeasible {
        let margin = terms[i].margin(ALPHA_MAX);
        report.min_margin = margin;
        report.note(format!(
            "sample {i} is infeasible for every α in (0, {ALPHA_MAX}]"
        ));
        report.decide(true, asserted);
        report.witness = Some(Witness::new(
            &config.sample(i)?,
            inequality.partitions(&labels)?,
            margin,
        ));
        return Ok(report);
    }

    let worst_at = |a: f64| -> (f64, usize) {
        terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.margin(a), i))
            .fold(
                (f64::INFINITY, 0),
                |acc, x| if x.0 < acc.0 { x } else { acc },
            )
    };
    let (at_alpha, _) = worst_at(alpha);
    let (half, half_i) = worst_at(alpha / 2.0);
    let bracketed = alpha > 0.0 && half < -ALPHA_SLACK;
    if !bracketed {
        report.note("α/2 is not violated by any sample; the exponent is not bracketed");
    }
    report.alpha = Some(AlphaCertificate {
        alpha,
        min_margin_at_alpha: at_alpha,
        half_margin: half,
        half_violator: bracketed.then_some(half_i),
        bracketed,
    });
    report.min_margin = at_alpha;
    report.decide(false, asserted);
    report.values.insert("alpha".into(), alpha);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MqmiKind;
    use crate::state::SubsystemLayout;
    use crate::verify::Verdict;

    fn cfg(samples: usize, ensemble: Ensemble) -> SweepConfig {
        SweepConfig::new(ensemble, SubsystemLayout::qubits(3).unwrap(), samples, 5).unwrap()
    }

    #[test]
    fn per_sample_bisection() {
        // 2^α ≥ 1 + 1 exactly at α = 1.
        let t = Terms {
            lhs: 2.0,
            rhs: vec![1.0, 1.0],
        };
        let a = t.min_alpha().unwrap();
        assert!((a - 1.0).abs() <= 2.0 * ALPHA_RESOLUTION, "{a}");
        assert!(
            Terms {
                lhs: 0.0,
                rhs: vec![0.0]
            }
            .min_alpha()
                == Some(0.0)
        );
        assert!(Terms {
            lhs: 0.0,
            rhs: vec![0.5]
        }
        .min_alpha()
        .is_none());
        assert!(Terms {
            lhs: 1.0,
            rhs: vec![1.0, 0.5]
        }
        .min_alpha()
        .is_none());
        assert_eq!(
            Terms {
                lhs: 1.0,
                rhs: vec![0.0]
            }
            .min_alpha(),
            Some(0.0)
        );
    }

    #[test]
    fn pure_states_give_unit_exponent() {
        let r = fit_alpha(
            &cfg(60, Ensemble::HaarPure),
            MqmiSpec::von_neumann(MqmiKind::I),
            AlphaInequality::Monogamy,
        )
        .unwrap();
        let c = r.alpha.as_ref().unwrap();
        assert!((c.alpha - 1.0).abs() < 1e-3, "{}", c.alpha);
        assert!(c.bracketed && c.min_margin_at_alpha >= -1e-9);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn monogamy_needs_pure_ensemble() {
        let e = fit_alpha(
            &cfg(4, Ensemble::HsMixed { rank: 2 }),
            MqmiSpec::von_neumann(MqmiKind::I),
            AlphaInequality::Monogamy,
        );
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn deterministic() {
        let spec = MqmiSpec::tsallis(MqmiKind::Iq, 2.0).unwrap();
        let a = fit_alpha(
            &cfg(30, Ensemble::HaarPure),
            spec,
            AlphaInequality::Monogamy,
        )
        .unwrap();
        let b = fit_alpha(
            &cfg(30, Ensemble::HaarPure),
            spec,
            AlphaInequality::Monogamy,
        )
        .unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
