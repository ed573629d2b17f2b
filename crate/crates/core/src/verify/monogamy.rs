//! Dis-correlated conditions: equality between a finer and a coarser value forces the
//! correlations the coarser one omits to vanish.

use rand::Rng;

use crate::entropy::Marginals;
use crate::error::{Error, Result};
use crate::measure::{mqmi_masks, MqmiSpec, PURE_TOL};
use crate::partition::{classify, xi_set, xi_set_whole_blocks, PairClass, Partition};
use crate::state::{DensityMatrix, SubsystemLayout};
use crate::states;
use crate::verify::{claim, CheckReport, Claim, Property, Witness};

/// Factor on `tol` within which a missed condition is logged as near.
pub const NEAR_FACTOR: f64 = 10.0;

fn is_pure(rho: &DensityMatrix) -> bool {
    rho.purity() >= 1.0 - PURE_TOL
}

fn on_inputs(c: Claim, pure: bool) -> Claim {
    match c {
        Claim::HoldsOnPure if pure => Claim::Holds,
        other => other,
    }
}

fn reject_three_block(spec: MqmiSpec) -> Result<()> {
    if spec.kind.needs_three_blocks() {
        return Err(Error::Spec(format!(
            "{} has no monogamy relation",
            spec.kind
        )));
    }
    Ok(())
}

/// Whether `J(A:BC) = J(A:B)` forces `J(A:C) = 0`, using the first three parties as `A`, `B`, `C`.
pub fn check_discorrelated(rho: &DensityMatrix, spec: MqmiSpec, tol: f64) -> Result<CheckReport> {
    spec.validate()?;
    reject_three_block(spec)?;
    let layout = rho.layout();
    if layout.len() < 3 {
        return Err(Error::Layout(format!(
            "need three parties, got {}",
            layout.len()
        )));
    }
    let labels = layout.labels();
    let (a, b, c) = (1u64, 2u64, 4u64);
    let m = Marginals::new(rho);
    let whole = mqmi_masks(&m, &[a, b | c], spec)?;
    let ab = mqmi_masks(&m, &[a, b], spec)?;
    let ac = mqmi_masks(&m, &[a, c], spec)?;
    let gap = (whole - ab).abs();

    let mut report = CheckReport::new("discorrelated", Some(spec))
        .value("j_a_bc", whole)
        .value("j_a_b", ab)
        .value("j_a_c", ac)
        .value("condition_gap", gap);
    report.samples = 1;
    report.provenance.tolerance = tol;
    let pure = is_pure(rho);
    let asserted = on_inputs(claim(spec.kind, Property::Monogamous), pure);
    let met = gap <= tol;
    if !met {
        if gap <= NEAR_FACTOR * tol {
            report.note(format!(
                "near condition: gap {gap:.3e} within {NEAR_FACTOR}·tol"
            ));
        } else {
            report.note("condition not met");
        }
        report.decide(false, asserted);
        return Ok(report);
    }
    report.min_margin = -ac;
    let violated = ac > tol;
    report.decide(violated, asserted);
    if violated {
        let (la, lb, lc) = (labels[0], labels[1], labels[2]);
        let parts = vec![
            Partition::new(&[vec![la], vec![lb, lc]])?,
            Partition::new(&[vec![la], vec![lb]])?,
            Partition::new(&[vec![la], vec![lc]])?,
        ];
        report.witness = Some(Witness::new(rho, parts, -ac));
    }
    Ok(report)
}

/// The Ξ members a functional is tested on: Tsallis kinds use only whole blocks of `finer`.
pub fn xi_for(spec: MqmiSpec, finer: &Partition, coarser: &Partition) -> Result<Vec<Partition>> {
    if spec.kind.is_tsallis() {
        xi_set_whole_blocks(finer, coarser)
    } else {
        xi_set(finer, coarser)
    }
}

/// If `J(finer) = J(coarser)` within `tol`, the largest `J(Γ)` over `Γ ∈ Ξ(finer − coarser)`.
/// `tight` selects the merge variant (`finer ≻ᵇ coarser`); otherwise `finer ≻ᵃ coarser`.
pub fn check_complete_monogamy(
    rho: &DensityMatrix,
    finer: &Partition,
    coarser: &Partition,
    spec: MqmiSpec,
    tol: f64,
    tight: bool,
) -> Result<CheckReport> {
    spec.validate()?;
    reject_three_block(spec)?;
    let want = if tight {
        PairClass::MergeOnly
    } else {
        PairClass::DiscardOnly
    };
    match classify(finer, coarser) {
        Some(c) if c == want => {}
        other => {
            return Err(Error::Precondition(format!(
                "{coarser} must follow from {finer} by {} only, found {:?}",
                if tight { "merges" } else { "discards" },
                other
            )))
        }
    }
    let layout = rho.layout();
    let m = Marginals::new(rho);
    let jf = mqmi_masks(&m, &finer.masks(layout)?, spec)?;
    let jc = mqmi_masks(&m, &coarser.masks(layout)?, spec)?;
    let gap = (jf - jc).abs();
    let id = if tight {
        "tight-complete-monogamy"
    } else {
        "complete-monogamy"
    };
    let mut report = CheckReport::new(id, Some(spec))
        .value("j_finer", jf)
        .value("j_coarser", jc)
        .value("condition_gap", gap);
    report.samples = 1;
    report.provenance.tolerance = tol;
    let prop = if tight {
        Property::TightlyCompleteMonogamous
    } else {
        Property::CompletelyMonogamous
    };
    let asserted = claim(spec.kind, prop);
    if gap > tol {
        if gap <= NEAR_FACTOR * tol {
            report.note(format!(
                "near condition: gap {gap:.3e} within {NEAR_FACTOR}·tol"
            ));
        } else {
            report.note("condition not met");
        }
        report.decide(false, asserted);
        return Ok(report);
    }
    let xi = xi_for(spec, finer, coarser)?;
    let mut worst: Option<(f64, &Partition)> = None;
    for g in &xi {
        let v = mqmi_masks(&m, &g.masks(layout)?, spec)?;
        if worst.is_none_or(|(w, _)| v > w) {
            worst = Some((v, g));
        }
    }
    report.values.insert("xi_size".into(), xi.len() as f64);
    let Some((max, at)) = worst else {
        report.note("empty Ξ set");
        report.decide(false, asserted);
        return Ok(report);
    };
    report.values.insert("xi_max".into(), max);
    report.min_margin = -max;
    let violated = max > tol;
    report.decide(violated, asserted);
    if violated {
        report.witness = Some(Witness::new(
            rho,
            vec![finer.clone(), coarser.clone(), at.clone()],
            -max,
        ));
    }
    Ok(report)
}

/// A state built to meet a dis-correlated condition, with the pair it is meant for.
#[derive(Clone, Debug)]
pub struct ConditionInstance {
    pub name: &'static str,
    pub state: DensityMatrix,
    pub finer: Partition,
    pub coarser: Partition,
    pub tight: bool,
}

fn part(text: &str) -> Partition {
    text.parse().expect("fixed partition text")
}

/// Random member of the `index`-th (mod 5) condition-satisfying family for the von Neumann
/// functional: products across the omitted cut, so every Ξ value vanishes. With
/// `pure_factor` the single-party factors are pure, which keeps the Tsallis condition exact too.
pub fn condition_family<R: Rng + ?Sized>(
    index: usize,
    pure_factor: bool,
    rng: &mut R,
) -> Result<ConditionInstance> {
    let q2 = || SubsystemLayout::qubits(2);
    let one = |label: &str| SubsystemLayout::new(vec![crate::state::Party::new(label, 2)]);
    let rank = |rng: &mut R, max: usize| {
        if pure_factor && max == 2 {
            1
        } else {
            rng.random_range(1..=max)
        }
    };
    let inst = match index % 5 {
        0 => {
            let r = rank(rng, 4);
            let ab = states::random_mixed_with(&q2()?, r, rng)?;
            let r = rank(rng, 2);
            let c = states::random_mixed_with(&one("C")?, r, rng)?;
            ConditionInstance {
                name: "rho_AB (x) rho_C, A|B|C > A|B",
                state: ab.tensor(&c)?,
                finer: part("A|B|C"),
                coarser: part("A|B"),
                tight: false,
            }
        }
        1 => {
            let r = rank(rng, 2);
            let a = states::random_mixed_with(&one("A")?, r, rng)?;
            let r = rank(rng, 4);
            let bc = states::random_mixed_with(&SubsystemLayout::parse("B:2,C:2")?, r, rng)?;
            ConditionInstance {
                name: "rho_A (x) rho_BC, A|B|C > B|C",
                state: a.tensor(&bc)?,
                finer: part("A|B|C"),
                coarser: part("B|C"),
                tight: false,
            }
        }
        2 => {
            let r = rank(rng, 8);
            let abc = states::random_mixed_with(&SubsystemLayout::qubits(3)?, r, rng)?;
            let r = rank(rng, 2);
            let d = states::random_mixed_with(&one("D")?, r, rng)?;
            ConditionInstance {
                name: "rho_ABC (x) rho_D, A|B|C|D > A|B|C",
                state: abc.tensor(&d)?,
                finer: part("A|B|C|D"),
                coarser: part("A|B|C"),
                tight: false,
            }
        }
        3 => {
            let r = rank(rng, 4);
            let ab = states::random_mixed_with(&q2()?, r, rng)?;
            let r = rank(rng, 2);
            let c = states::random_mixed_with(&one("C")?, r, rng)?;
            ConditionInstance {
                name: "rho_AB (x) rho_C, A|B|C > A|BC",
                state: ab.tensor(&c)?,
                finer: part("A|B|C"),
                coarser: part("A|BC"),
                tight: true,
            }
        }
        _ => {
            // Correlations only across the AB|CD cut: A–C and B–D.
            let r = rank(rng, 4);
            let ac = states::random_mixed_with(&SubsystemLayout::parse("A:2,C:2")?, r, rng)?;
            let r = rank(rng, 4);
            let bd = states::random_mixed_with(&SubsystemLayout::parse("B:2,D:2")?, r, rng)?;
            ConditionInstance {
                name: "rho_AC (x) rho_BD, A|B|C|D > AB|CD",
                state: ac.tensor(&bd)?.permute(&["A", "B", "C", "D"])?,
                finer: part("A|B|C|D"),
                coarser: part("AB|CD"),
                tight: true,
            }
        }
    };
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MqmiKind;
    use crate::verify::Verdict;

    const TOL: f64 = 1e-9;

    #[test]
    fn classical_state_breaks_discorrelation() {
        let rho = states::classical_two_term(0.5, 3).unwrap();
        let r = check_discorrelated(&rho, MqmiSpec::von_neumann(MqmiKind::I), TOL).unwrap();
        assert!((r.values["j_a_bc"] - 1.0).abs() < 1e-9 && (r.values["j_a_c"] - 1.0).abs() < 1e-9);
        assert_eq!(r.verdict, Verdict::CounterexampleFound);
        assert!(r.expected && r.witness.is_some());
    }

    #[test]
    fn product_is_trivially_discorrelated() {
        let l = SubsystemLayout::qubits(3).unwrap();
        let rho =
            states::random_product_with(&l, &[2, 2, 1], &mut states::rng_from_seed(3)).unwrap();
        let r = check_discorrelated(&rho, MqmiSpec::von_neumann(MqmiKind::I), TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.values["j_a_c"].abs() < 1e-9);
    }

    #[test]
    fn complement_functional_not_completely_monogamous() {
        let rho = states::classical_two_term(0.5, 3).unwrap();
        let r = check_complete_monogamy(
            &rho,
            &part("A|B|C"),
            &part("A|B"),
            MqmiSpec::von_neumann(MqmiKind::Iprime),
            TOL,
            false,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::CounterexampleFound);
        assert!((r.values["xi_max"] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn families_meet_their_condition() {
        let mut rng = states::rng_from_seed(11);
        for i in 0..15 {
            let f = condition_family(i, i % 2 == 0, &mut rng).unwrap();
            let r = check_complete_monogamy(
                &f.state,
                &f.finer,
                &f.coarser,
                MqmiSpec::von_neumann(MqmiKind::I),
                TOL,
                f.tight,
            )
            .unwrap();
            assert!(r.values["condition_gap"] <= TOL, "{}", f.name);
            assert_eq!(r.verdict, Verdict::Pass, "{}", f.name);
            assert!(r.values["xi_max"] <= TOL);
        }
    }

    #[test]
    fn wrong_move_kind_is_a_precondition_error() {
        let rho = states::ghz(3).unwrap();
        let spec = MqmiSpec::von_neumann(MqmiKind::I);
        let e = check_complete_monogamy(&rho, &part("A|B|C"), &part("A|BC"), spec, TOL, false);
        assert!(matches!(e, Err(Error::Precondition(_))));
        let e = check_complete_monogamy(&rho, &part("A|B|C"), &part("A|B"), spec, TOL, true);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn whole_block_xi_is_a_subset() {
        let (p, r) = (part("A|B|CD|E"), part("A|B"));
        let full = xi_set(&p, &r).unwrap();
        let whole = xi_set_whole_blocks(&p, &r).unwrap();
        assert!(whole.len() < full.len() && whole.iter().all(|t| full.contains(t)));
    }
}
