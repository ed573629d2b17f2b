//! Monotonicity of a functional along the coarsening preorder.

use serde::{Deserialize, Serialize};

use crate::entropy::Marginals;
use crate::error::{Error, Result};
use crate::measure::{mqmi_masks, MqmiSpec};
use crate::partition::{all_partitions, classify_masks, PairClass, Partition};
use crate::state::{DensityMatrix, SubsystemLayout};
use crate::verify::{claim_all, CheckReport, Property, Witness};
use crate::CHECK_TOL;

/// Largest layout the lattice sweep accepts.
pub const MAX_MONOTONE_PARTIES: usize = 5;

/// Which coarser pairs a check covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairScope {
    /// Discards only.
    A,
    /// Merges only.
    B,
    /// Discards and merges.
    AB,
    /// Pairs that need a party dropped from a block.
    C,
    All,
}

impl PairScope {
    pub fn includes(self, class: PairClass) -> bool {
        use PairClass::*;
        match self {
            Self::A => class == DiscardOnly,
            Self::B => class == MergeOnly,
            Self::AB => matches!(class, DiscardOnly | MergeOnly | DiscardMerge),
            Self::C => class == NeedsDrop,
            Self::All => class != Same,
        }
    }

    pub fn properties(self) -> &'static [Property] {
        match self {
            Self::A => &[Property::CoarseA],
            Self::B => &[Property::CoarseB],
            Self::AB => &[Property::CoarseA, Property::CoarseB],
            Self::C => &[Property::CoarseC],
            Self::All => &[Property::CoarseA, Property::CoarseB, Property::CoarseC],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::A => "a",
            Self::B => "b",
            Self::AB => "ab",
            Self::C => "c",
            Self::All => "all",
        }
    }
}

const CLASSES: [PairClass; 4] = [
    PairClass::DiscardOnly,
    PairClass::MergeOnly,
    PairClass::DiscardMerge,
    PairClass::NeedsDrop,
];

fn class_slot(c: PairClass) -> Option<usize> {
    CLASSES.iter().position(|&x| x == c)
}

/// Smallest `J(finer) − J(coarser)` per pair class for one state.
#[derive(Clone, Debug)]
pub struct MonotoneOutcome {
    pub per_class: [(f64, Option<(usize, usize)>); 4],
}

impl MonotoneOutcome {
    pub fn min_in(&self, scope: PairScope) -> (f64, Option<(usize, usize)>) {
        let mut best = (f64::INFINITY, None);
        for (i, &c) in CLASSES.iter().enumerate() {
            if scope.includes(c) && self.per_class[i].0 < best.0 {
                best = self.per_class[i];
            }
        }
        best
    }
}

/// The partition lattice of a layout with its coarser pairs, built once and reused across states.
pub struct MonotoneChecker {
    layout: SubsystemLayout,
    spec: MqmiSpec,
    parts: Vec<Partition>,
    masks: Vec<Vec<u64>>,
    pairs: Vec<(usize, usize, usize)>,
}

impl MonotoneChecker {
    pub fn new(layout: &SubsystemLayout, spec: MqmiSpec) -> Result<Self> {
        spec.validate()?;
        if spec.kind.needs_three_blocks() {
            return Err(Error::Spec(format!(
                "{} is defined on three blocks only, so monotonicity along coarsening is not meaningful",
                spec.kind
            )));
        }
        if layout.len() > MAX_MONOTONE_PARTIES {
            return Err(Error::Layout(format!(
                "monotonicity sweep supports at most {MAX_MONOTONE_PARTIES} parties, got {}",
                layout.len()
            )));
        }
        let parts = all_partitions(&layout.labels())?;
        let masks: Vec<Vec<u64>> = parts
            .iter()
            .map(|p| p.masks(layout))
            .collect::<Result<_>>()?;
        let mut pairs = Vec::new();
        // a one-block partition has J = 0, as does everything coarser than it
        for i in 0..parts.len() {
            if parts[i].len() < 2 {
                continue;
            }
            for j in 0..parts.len() {
                if i == j {
                    continue;
                }
                if let Some(slot) = classify_masks(&masks[i], &masks[j]).and_then(class_slot) {
                    pairs.push((i, j, slot));
                }
            }
        }
        Ok(Self {
            layout: layout.clone(),
            spec,
            parts,
            masks,
            pairs,
        })
    }

    pub fn spec(&self) -> MqmiSpec {
        self.spec
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.parts
    }

    pub fn pair_count(&self, scope: PairScope) -> usize {
        self.pairs
            .iter()
            .filter(|&&(_, _, s)| scope.includes(CLASSES[s]))
            .count()
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<MonotoneOutcome> {
        if rho.layout() != &self.layout {
            return Err(Error::Layout(format!(
                "checker built for {}, state has {}",
                self.layout,
                rho.layout()
            )));
        }
        let m = Marginals::new(rho);
        let values: Vec<f64> = self
            .masks
            .iter()
            .map(|b| mqmi_masks(&m, b, self.spec))
            .collect::<Result<_>>()?;
        let mut per_class = [(f64::INFINITY, None); 4];
        for &(i, j, s) in &self.pairs {
            let margin = values[i] - values[j];
            if margin < per_class[s].0 {
                per_class[s] = (margin, Some((i, j)));
            }
        }
        Ok(MonotoneOutcome { per_class })
    }

    pub fn pair(&self, idx: (usize, usize)) -> (Partition, Partition) {
        (self.parts[idx.0].clone(), self.parts[idx.1].clone())
    }
}

/// Smallest `J(finer) − J(coarser)` over every coarser pair in `scope` on one state.
pub fn check_coarsening_monotone(
    rho: &DensityMatrix,
    spec: MqmiSpec,
    scope: PairScope,
) -> Result<CheckReport> {
    let checker = MonotoneChecker::new(rho.layout(), spec)?;
    let outcome = checker.evaluate(rho)?;
    let mut report = CheckReport::new(format!("coarsening-monotone-{}", scope.name()), Some(spec));
    report.samples = 1;
    fill_monotone_report(&mut report, &checker, &outcome, scope, rho);
    Ok(report)
}

pub(crate) fn fill_monotone_report(
    report: &mut CheckReport,
    checker: &MonotoneChecker,
    outcome: &MonotoneOutcome,
    scope: PairScope,
    rho: &DensityMatrix,
) {
    for (i, c) in CLASSES.iter().enumerate() {
        let key = match c {
            PairClass::DiscardOnly => "min_margin_discard",
            PairClass::MergeOnly => "min_margin_merge",
            PairClass::DiscardMerge => "min_margin_discard_merge",
            _ => "min_margin_drop",
        };
        if outcome.per_class[i].0.is_finite() {
            report.values.insert(key.into(), outcome.per_class[i].0);
        }
    }
    let (margin, at) = outcome.min_in(scope);
    report.min_margin = margin;
    let violated = margin < -CHECK_TOL;
    report.decide(violated, claim_all(checker.spec().kind, scope.properties()));
    if violated {
        if let Some(idx) = at {
            let (f, c) = checker.pair(idx);
            report.witness = Some(Witness::new(rho, vec![f, c], margin));
        }
    }
    if scope == PairScope::All || scope == PairScope::C {
        return;
    }
    let (drop_margin, _) = outcome.min_in(PairScope::C);
    if drop_margin < -CHECK_TOL {
        report.note(format!(
            "pairs that need a party drop were excluded; their minimum margin is {drop_margin:.3e}"
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MqmiKind;
    use crate::states;
    use crate::verify::Verdict;

    #[test]
    fn pair_counts_on_three_parties() {
        let l = SubsystemLayout::qubits(3).unwrap();
        let c = MonotoneChecker::new(&l, MqmiSpec::von_neumann(MqmiKind::I)).unwrap();
        assert_eq!(c.partitions().len(), 14);
        // Brute force against the BFS preorder.
        let mut n = 0;
        for x in c.partitions() {
            for y in c.partitions() {
                if x != y && x.len() > 1 && crate::partition::is_coarser(x, y).is_some() {
                    n += 1;
                }
            }
        }
        assert_eq!(c.pair_count(PairScope::All), n);
    }

    #[test]
    fn von_neumann_is_monotone_on_ghz() {
        let rho = states::ghz(3).unwrap();
        for kind in [MqmiKind::I, MqmiKind::Iprime] {
            let r = check_coarsening_monotone(&rho, MqmiSpec::von_neumann(kind), PairScope::All)
                .unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{kind}");
            assert!(r.min_margin >= -1e-9);
        }
    }

    #[test]
    fn tsallis_drop_pair_margin_is_the_ssa_margin() {
        // Iq(A:BC) − Iq(A:B) = S(AB) + S(BC) − S(ABC) − S(B).
        let spec = MqmiSpec::tsallis(MqmiKind::Iq, 2.0).unwrap();
        let l = SubsystemLayout::qubits(3).unwrap();
        let rho = states::random_mixed(&l, 3, 4).unwrap();
        let m = Marginals::new(&rho);
        let d = mqmi_masks(&m, &[1, 6], spec).unwrap() - mqmi_masks(&m, &[1, 2], spec).unwrap();
        let ssa = crate::entropy::ssa_margin(&rho, &["A"], &["B"], &["C"], spec.entropy()).unwrap();
        assert!((d - ssa).abs() < 1e-12);
        let out = MonotoneChecker::new(&l, spec)
            .unwrap()
            .evaluate(&rho)
            .unwrap();
        assert!(out.min_in(PairScope::C).0 <= d + 1e-12);
    }

    #[test]
    fn three_block_kinds_rejected() {
        let l = SubsystemLayout::qubits(3).unwrap();
        assert!(MonotoneChecker::new(&l, MqmiSpec::von_neumann(MqmiKind::Idprime)).is_err());
        assert!(MonotoneChecker::new(
            &SubsystemLayout::qubits(6).unwrap(),
            MqmiSpec::von_neumann(MqmiKind::I)
        )
        .is_err());
    }
}
