//! The six mutual-information functionals and pure-state entanglement quantities.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::{EntropySpec, Marginals};
use crate::error::{Error, Result};
use crate::partition::{coarsenings, MoveKind, Partition};
use crate::state::DensityMatrix;

/// Purity below `1 - PURE_TOL` makes a state count as mixed.
pub const PURE_TOL: f64 = 1e-9;

/// Which functional:
///
/// * `I`: `Σ S(Xᵢ) − S(X₁…X_k)`
/// * `Iprime`: `Σ S(X̄ᵢ) − (k−1) S(X₁…X_k)`, complements within the partition's parties
/// * `Idprime`: inclusion–exclusion over exactly three blocks
///
/// The `q` variants use the Tsallis entropy in place of the von Neumann entropy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MqmiKind {
    I,
    Iprime,
    Idprime,
    Iq,
    Iqprime,
    Iqdprime,
}

impl MqmiKind {
    pub const ALL: [MqmiKind; 6] = [
        Self::I,
        Self::Iprime,
        Self::Idprime,
        Self::Iq,
        Self::Iqprime,
        Self::Iqdprime,
    ];

    pub fn is_tsallis(self) -> bool {
        matches!(self, Self::Iq | Self::Iqprime | Self::Iqdprime)
    }

    pub fn needs_three_blocks(self) -> bool {
        matches!(self, Self::Idprime | Self::Iqdprime)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::Iprime => "Iprime",
            Self::Idprime => "Idprime",
            Self::Iq => "Iq",
            Self::Iqprime => "Iqprime",
            Self::Iqdprime => "Iqdprime",
        }
    }

    /// Short mathematical symbol for tables.
    pub fn symbol(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::Iprime => "I'",
            Self::Idprime => "I''",
            Self::Iq => "Iq",
            Self::Iqprime => "Iq'",
            Self::Iqdprime => "Iq''",
        }
    }
}

impl fmt::Display for MqmiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MqmiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s) || k.symbol() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MqmiSpec {
    pub kind: MqmiKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<f64>,
}

impl MqmiSpec {
    /// Tsallis kinds need `q > 1`; the von Neumann kinds take no `q`.
    pub fn new(kind: MqmiKind, q: Option<f64>) -> Result<Self> {
        if kind.is_tsallis() {
            let q =
                q.ok_or_else(|| Error::Spec(format!("{kind} requires a Tsallis parameter q")))?;
            if !q.is_finite() || q <= 1.0 {
                return Err(Error::Spec(format!(
                    "{kind} requires q > 1, got {q}: for q <= 1 the Tsallis entropy is not subadditive, \
                     so the mutual information is undefined"
                )));
            }
            Ok(Self { kind, q: Some(q) })
        } else {
            if q.is_some() {
                return Err(Error::Spec(format!("{kind} takes no Tsallis parameter")));
            }
            Ok(Self { kind, q: None })
        }
    }

    pub fn von_neumann(kind: MqmiKind) -> Self {
        Self::new(kind, None).expect("von Neumann kind")
    }

    pub fn tsallis(kind: MqmiKind, q: f64) -> Result<Self> {
        Self::new(kind, Some(q))
    }

    pub fn entropy(&self) -> EntropySpec {
        match self.q {
            Some(q) => EntropySpec::Tsallis { q },
            None => EntropySpec::VonNeumann,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.kind, self.q).map(|_| ())
    }
}

impl fmt::Display for MqmiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q {
            Some(q) => write!(f, "{}(q={q})", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MqmiValue {
    pub value: f64,
    pub spec: MqmiSpec,
    pub partition: Partition,
}

/// Evaluates on bitmask blocks of an already-cached state. Blocks must be disjoint and nonempty.
pub fn mqmi_masks(m: &Marginals<'_>, blocks: &[u64], spec: MqmiSpec) -> Result<f64> {
    let s = spec.entropy();
    let k = blocks.len();
    let all = blocks.iter().fold(0u64, |a, &b| a | b);
    let value = match spec.kind {
        MqmiKind::I | MqmiKind::Iq => {
            let mut v = -m.entropy(all, s)?;
            for &b in blocks {
                v += m.entropy(b, s)?;
            }
            v
        }
        MqmiKind::Iprime | MqmiKind::Iqprime => {
            let mut v = -((k as f64) - 1.0) * m.entropy(all, s)?;
            for &b in blocks {
                v += m.entropy(all & !b, s)?;
            }
            v
        }
        MqmiKind::Idprime | MqmiKind::Iqdprime => {
            if k != 3 {
                return Err(Error::Spec(format!(
                    "{} needs exactly 3 blocks, got {k}",
                    spec.kind
                )));
            }
            let (x, y, z) = (blocks[0], blocks[1], blocks[2]);
            m.entropy(x, s)? + m.entropy(y, s)? + m.entropy(z, s)?
                - m.entropy(x | y, s)?
                - m.entropy(x | z, s)?
                - m.entropy(y | z, s)?
                + m.entropy(all, s)?
        }
    };
    Ok(value)
}

/// The functional on `partition`; parties outside it are traced out.
pub fn mqmi(rho: &DensityMatrix, partition: &Partition, spec: MqmiSpec) -> Result<MqmiValue> {
    spec.validate()?;
    let masks = partition.masks(rho.layout())?;
    let m = Marginals::new(rho);
    let value = mqmi_masks(&m, &masks, spec)?;
    Ok(MqmiValue {
        value,
        spec,
        partition: partition.clone(),
    })
}

/// Value on `partition` and every partition coarser than it. Three-block kinds skip
/// partitions with a different block count.
pub fn mqmi_all_coarsenings(
    rho: &DensityMatrix,
    partition: &Partition,
    spec: MqmiSpec,
) -> Result<BTreeMap<Partition, MqmiValue>> {
    spec.validate()?;
    let mut parts = coarsenings(partition, &[MoveKind::A, MoveKind::B, MoveKind::C])?;
    parts.push(partition.clone());
    let m = Marginals::new(rho);
    let mut out = BTreeMap::new();
    for p in parts {
        if spec.kind.needs_three_blocks() && p.len() != 3 {
            continue;
        }
        let value = mqmi_masks(&m, &p.masks(rho.layout())?, spec)?;
        out.insert(
            p.clone(),
            MqmiValue {
                value,
                spec,
                partition: p,
            },
        );
    }
    Ok(out)
}

fn require_pure(rho: &DensityMatrix) -> Result<()> {
    let purity = rho.purity();
    if purity < 1.0 - PURE_TOL {
        return Err(Error::NotPure(purity));
    }
    Ok(())
}

fn half_sum(rho: &DensityMatrix, partition: &Partition, s: EntropySpec) -> Result<f64> {
    let m = Marginals::new(rho);
    let mut total = 0.0;
    for b in partition.masks(rho.layout())? {
        total += m.entropy(b, s)?;
    }
    Ok(0.5 * total)
}

/// `½ Σ S(Xᵢ)` for a pure state.
pub fn pure_ef(rho: &DensityMatrix, partition: &Partition) -> Result<f64> {
    require_pure(rho)?;
    half_sum(rho, partition, EntropySpec::VonNeumann)
}

/// `½ Σ S_q(Xᵢ)` for a pure state, `q > 1`.
pub fn pure_eq(rho: &DensityMatrix, partition: &Partition, q: f64) -> Result<f64> {
    if !q.is_finite() || q <= 1.0 {
        return Err(Error::EntropyParameter(format!(
            "Tsallis entanglement needs q > 1, got {q}"
        )));
    }
    require_pure(rho)?;
    half_sum(rho, partition, EntropySpec::Tsallis { q })
}

/// `√(2(1 − tr ρ_X²))` across the cut `X | rest` of a pure state.
pub fn concurrence<S: AsRef<str>>(rho: &DensityMatrix, block: &[S]) -> Result<f64> {
    require_pure(rho)?;
    let x = rho.partial_trace(block)?;
    Ok((2.0 * (1.0 - x.purity())).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::SubsystemLayout;
    use crate::states;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn val(rho: &DensityMatrix, part: &str, kind: MqmiKind, q: Option<f64>) -> f64 {
        mqmi(rho, &p(part), MqmiSpec::new(kind, q).unwrap())
            .unwrap()
            .value
    }

    #[test]
    fn spec_validation() {
        assert!(MqmiSpec::new(MqmiKind::Iq, None).is_err());
        let e = MqmiSpec::new(MqmiKind::Iq, Some(0.5))
            .unwrap_err()
            .to_string();
        assert!(e.contains("subadditive"), "{e}");
        assert!(MqmiSpec::new(MqmiKind::Iq, Some(1.0)).is_err());
        assert!(MqmiSpec::new(MqmiKind::I, Some(2.0)).is_err());
        assert!(MqmiSpec::new(MqmiKind::Iqprime, Some(2.0)).is_ok());
        assert_eq!("iprime".parse::<MqmiKind>().unwrap(), MqmiKind::Iprime);
        assert!("J".parse::<MqmiKind>().is_err());
    }

    #[test]
    fn ghz_values() {
        let g = states::ghz(3).unwrap();
        assert!((val(&g, "A|B|C", MqmiKind::I, None) - 3.0).abs() < 1e-9);
        assert!((val(&g, "A|B|C", MqmiKind::Iprime, None) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_mixture_idprime() {
        let rho = states::ghz_mixture(0.5, 3).unwrap();
        // Pair marginal spectrum {3/8, 1/8, 1/8, 3/8}, singles {1/2, 1/2}.
        let pair = -2.0 * (0.375f64 * 0.375f64.log2()) - 2.0 * (0.125f64 * 0.125f64.log2());
        let triple = -(9.0f64 / 16.0) * (9.0f64 / 16.0).log2() + 7.0 / 16.0 * 4.0;
        let want = 3.0 - 3.0 * pair + triple;
        let got = val(&rho, "A|B|C", MqmiKind::Idprime, None);
        assert!((got - want).abs() < 1e-10);
        assert!((got + 0.21692).abs() < 1e-4);
    }

    #[test]
    fn three_block_kind_rejects_other_counts() {
        let rho = states::ghz(4).unwrap();
        let s = MqmiSpec::von_neumann(MqmiKind::Idprime);
        assert!(matches!(mqmi(&rho, &p("A|B|C|D"), s), Err(Error::Spec(_))));
    }

    #[test]
    fn product_states_vanish() {
        let l = SubsystemLayout::qubits(3).unwrap();
        let rho =
            states::random_product_with(&l, &[2, 2, 2], &mut states::rng_from_seed(4)).unwrap();
        for kind in [MqmiKind::I, MqmiKind::Iprime] {
            assert!(val(&rho, "A|B|C", kind, None).abs() < 1e-9);
        }
    }

    #[test]
    fn additivity_state_iqprime_two_blocks() {
        let rho = states::additivity_state().unwrap();
        for q in [1.5, 2.0, 3.0] {
            assert!(val(&rho, "AB|CD", MqmiKind::Iqprime, Some(q)).abs() < 1e-10);
        }
    }

    #[test]
    fn outside_parties_are_traced() {
        let rho = states::ghz(4).unwrap();
        let three = states::ghz(3).unwrap();
        // GHZ4 restricted to ABC is the classical GHZ mixture, unlike GHZ3.
        let v4 = val(&rho, "A|B|C", MqmiKind::I, None);
        let rho_abc = rho.partial_trace(&["A", "B", "C"]).unwrap();
        assert!((v4 - val(&rho_abc, "A|B|C", MqmiKind::I, None)).abs() < 1e-12);
        assert!((v4 - 2.0).abs() < 1e-9);
        assert!((val(&three, "A|B|C", MqmiKind::I, None) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_label() {
        let rho = states::ghz(3).unwrap();
        assert!(matches!(
            mqmi(&rho, &p("A|Z"), MqmiSpec::von_neumann(MqmiKind::I)),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn entanglement_of_pure_states() {
        let g = states::ghz(3).unwrap();
        assert!((pure_ef(&g, &p("A|B|C")).unwrap() - 1.5).abs() < 1e-12);
        assert!((pure_eq(&g, &p("A|B|C"), 2.0).unwrap() - 0.75).abs() < 1e-12);
        let bell_c = states::bell_pair().unwrap().tensor(&{
            let l = SubsystemLayout::parse("C:2").unwrap();
            DensityMatrix::from_pure(l, &[crate::C64::new(1.0, 0.0), crate::C64::new(0.0, 0.0)])
                .unwrap()
        });
        assert!((pure_ef(&bell_c.unwrap(), &p("A|B|C")).unwrap() - 1.0).abs() < 1e-12);
        let mixed = states::ghz_mixture(0.5, 3).unwrap();
        assert!(matches!(
            pure_ef(&mixed, &p("A|B|C")),
            Err(Error::NotPure(_))
        ));
        assert!(pure_eq(&g, &p("A|B|C"), 1.0).is_err());
    }

    #[test]
    fn bell_concurrence() {
        let b = states::bell_pair().unwrap();
        assert!((concurrence(&b, &["A"]).unwrap() - 1.0).abs() < 1e-12);
        let l = SubsystemLayout::qubits(2).unwrap();
        let z = crate::C64::new(0.0, 0.0);
        let prod = DensityMatrix::from_pure(l, &[crate::C64::new(1.0, 0.0), z, z, z]).unwrap();
        assert!(concurrence(&prod, &["A"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn all_coarsenings_covers_lattice() {
        let rho = states::ghz(3).unwrap();
        let vals =
            mqmi_all_coarsenings(&rho, &p("A|B|C"), MqmiSpec::von_neumann(MqmiKind::I)).unwrap();
        assert_eq!(vals.len(), 14);
        assert!((vals[&p("A|BC")].value - 2.0).abs() < 1e-9);
        let d = mqmi_all_coarsenings(&rho, &p("A|B|C"), MqmiSpec::von_neumann(MqmiKind::Idprime))
            .unwrap();
        assert_eq!(d.len(), 1);
    }
}
