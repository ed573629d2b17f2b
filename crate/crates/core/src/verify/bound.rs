//! Lower bound of the total correlation plus entropy by twice the averaged pure-state
//! entanglement of an explicit decomposition.

use crate::entropy::{EntropySpec, Marginals};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigh;
use crate::measure::{mqmi_masks, MqmiKind, MqmiSpec, PURE_TOL};
use crate::partition::Partition;
use crate::state::DensityMatrix;
use crate::verify::{CheckReport, Claim, Witness};
use crate::{CHECK_TOL, CLAMP_TOL};

/// Parts of `I(ρ) + S(ρ) − 2 Σ pᵢ E(ψᵢ)` on the finest partition, with `{pᵢ, ψᵢ}` the eigendecomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundTerms {
    pub total: f64,
    pub entropy: f64,
    pub e_term: f64,
}

impl BoundTerms {
    pub fn margin(&self) -> f64 {
        self.total + self.entropy - 2.0 * self.e_term
    }
}

fn kind_for(entropy: EntropySpec) -> Result<MqmiSpec> {
    match entropy {
        EntropySpec::VonNeumann => Ok(MqmiSpec::von_neumann(MqmiKind::I)),
        EntropySpec::Tsallis { q } => MqmiSpec::tsallis(MqmiKind::Iq, q),
    }
}

pub fn bound_terms(rho: &DensityMatrix, entropy: EntropySpec) -> Result<BoundTerms> {
    let spec = kind_for(entropy)?;
    let layout = rho.layout();
    let singles: Vec<u64> = (0..layout.len()).map(|i| 1u64 << i).collect();
    let m = Marginals::new(rho);
    let total = mqmi_masks(&m, &singles, spec)?;
    let full = singles.iter().fold(0, |a, b| a | b);
    let s = m.entropy(full, entropy)?;
    let eig = hermitian_eigh(rho.matrix())?;
    let mut e_term = 0.0;
    for (k, &p) in eig.values.iter().enumerate() {
        if p <= CLAMP_TOL {
            continue;
        }
        let psi = DensityMatrix::from_pure(layout.clone(), &eig.vectors.column(k))?;
        let pm = Marginals::new(&psi);
        let mut half = 0.0;
        for &b in &singles {
            half += pm.entropy(b, entropy)?;
        }
        e_term += p * 0.5 * half;
    }
    Ok(BoundTerms {
        total,
        entropy: s,
        e_term,
    })
}

/// Margin of the bound; pure inputs must meet it with equality.
pub fn check_entropy_bound(rho: &DensityMatrix, entropy: EntropySpec) -> Result<CheckReport> {
    entropy.validate()?;
    if matches!(entropy, EntropySpec::Tsallis { q } if q <= 1.0) {
        return Err(Error::EntropyParameter(
            "the Tsallis bound needs q > 1".into(),
        ));
    }
    let t = bound_terms(rho, entropy)?;
    let spec = kind_for(entropy)?;
    let margin = t.margin();
    let pure = rho.purity() >= 1.0 - PURE_TOL;
    let mut report = CheckReport::new("entropy-bound", Some(spec))
        .value("total_correlation", t.total)
        .value("entropy", t.entropy)
        .value("e_term", t.e_term);
    report.samples = 1;
    report.min_margin = margin;
    let violated = margin < -CHECK_TOL || (pure && margin.abs() > CHECK_TOL);
    if pure {
        report.note(format!(
            "pure input: equality expected, |margin| = {:.3e}",
            margin.abs()
        ));
    }
    report.decide(violated, Claim::Holds);
    if violated {
        report.witness = Some(Witness::new(
            rho,
            vec![Partition::finest(rho.layout())],
            margin,
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::SubsystemLayout;
    use crate::states;
    use crate::verify::Verdict;

    #[test]
    fn ghz_saturates() {
        let t = bound_terms(&states::ghz(3).unwrap(), EntropySpec::VonNeumann).unwrap();
        assert!(
            (t.total - 3.0).abs() < 1e-9 && t.entropy.abs() < 1e-9 && (t.e_term - 1.5).abs() < 1e-9
        );
        assert!(t.margin().abs() < 1e-9);
    }

    #[test]
    fn maximally_mixed_is_strict() {
        let rho = states::ghz_mixture(0.0, 3).unwrap();
        let r = check_entropy_bound(&rho, EntropySpec::VonNeumann).unwrap();
        assert!((r.min_margin - 3.0).abs() < 1e-9);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn random_states_both_entropies() {
        let l = SubsystemLayout::qubits(3).unwrap();
        for s in 0..20 {
            for e in [EntropySpec::VonNeumann, EntropySpec::Tsallis { q: 2.0 }] {
                let mixed =
                    check_entropy_bound(&states::random_mixed(&l, 4, s).unwrap(), e).unwrap();
                assert_eq!(mixed.verdict, Verdict::Pass);
                let pure = check_entropy_bound(&states::random_pure(&l, s).unwrap(), e).unwrap();
                assert!(pure.min_margin.abs() < 1e-9);
            }
        }
    }
}
