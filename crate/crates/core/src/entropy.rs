//! Spectral entropies and a per-state cache of marginal spectra.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_eigh};
use crate::state::{clamp_spectrum, DensityMatrix};
use crate::CLAMP_TOL;

/// Which entropy functional to use. Von Neumann entropy is in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropySpec {
    VonNeumann,
    Tsallis { q: f64 },
}

impl EntropySpec {
    pub fn tsallis(q: f64) -> Result<Self> {
        check_tsallis_q(q)?;
        Ok(Self::Tsallis { q })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::VonNeumann => Ok(()),
            Self::Tsallis { q } => check_tsallis_q(q),
        }
    }

    /// Entropy of a clamped spectrum.
    pub fn of_spectrum(&self, values: &[f64]) -> f64 {
        match *self {
            Self::VonNeumann => shannon_bits(values),
            Self::Tsallis { q } => tsallis_of(values, q),
        }
    }
}

impl fmt::Display for EntropySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::VonNeumann => f.write_str("von Neumann"),
            Self::Tsallis { q } => write!(f, "Tsallis q={q}"),
        }
    }
}

fn check_tsallis_q(q: f64) -> Result<()> {
    if !q.is_finite() || q <= 0.0 || q == 1.0 {
        return Err(Error::EntropyParameter(format!(
            "Tsallis entropy needs q > 0 and q != 1, got {q}"
        )));
    }
    Ok(())
}

fn shannon_bits(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum();
    s.max(0.0)
}

fn tsallis_of(values: &[f64], q: f64) -> f64 {
    let power: f64 = values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v.powf(q))
        .sum();
    (1.0 - power) / (q - 1.0)
}

/// `−tr ρ log₂ ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon_bits(&rho.spectrum()?))
}

/// `(1 − tr ρ^q)/(q − 1)`. Any `q > 0`, `q ≠ 1` is accepted here.
pub fn tsallis_entropy(rho: &DensityMatrix, q: f64) -> Result<f64> {
    check_tsallis_q(q)?;
    Ok(tsallis_of(&rho.spectrum()?, q))
}

pub fn entropy(rho: &DensityMatrix, spec: EntropySpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.of_spectrum(&rho.spectrum()?))
}

/// Relative entropy in bits. Unbounded when the support of `ρ` leaves that of `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RelEntropy {
    Finite(f64),
    Infinite,
}

impl RelEntropy {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }
}

/// Weight of `ρ` outside `supp σ` above which the relative entropy is infinite.
pub const SUPPORT_TOL: f64 = 1e-8;

/// `tr ρ log₂ ρ − tr ρ log₂ σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelEntropy> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!(
            "relative entropy of {}-dim and {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let eig = hermitian_eigh(sigma.matrix())?;
    let r = rho.matrix();
    let d = rho.dim();
    let mut cross = 0.0;
    for (k, &mu) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(k);
        // ⟨v|ρ|v⟩
        let mut w = 0.0;
        for i in 0..d {
            let mut row = crate::linalg::C64::new(0.0, 0.0);
            for j in 0..d {
                row += r[(i, j)] * v[j];
            }
            w += (v[i].conj() * row).re;
        }
        if mu <= CLAMP_TOL {
            if w > SUPPORT_TOL {
                return Ok(RelEntropy::Infinite);
            }
            continue;
        }
        cross += w * mu.log2();
    }
    let neg_s = -shannon_bits(&rho.spectrum()?);
    Ok(RelEntropy::Finite((neg_s - cross).max(0.0)))
}

/// `S(AB) + S(BC) − S(ABC) − S(B)` for disjoint label sets.
pub fn ssa_margin<S: AsRef<str>>(
    rho: &DensityMatrix,
    a: &[S],
    b: &[S],
    c: &[S],
    spec: EntropySpec,
) -> Result<f64> {
    let layout = rho.layout();
    let (ma, mb, mc) = (layout.mask_of(a)?, layout.mask_of(b)?, layout.mask_of(c)?);
    if ma & mb != 0 || ma & mc != 0 || mb & mc != 0 {
        return Err(Error::Partition(
            "strong-subadditivity label sets overlap".into(),
        ));
    }
    if ma == 0 || mb == 0 || mc == 0 {
        return Err(Error::Partition(
            "strong-subadditivity label sets must be nonempty".into(),
        ));
    }
    spec.validate()?;
    let m = Marginals::new(rho);
    Ok(m.entropy(ma | mb, spec)? + m.entropy(mb | mc, spec)?
        - m.entropy(ma | mb | mc, spec)?
        - m.entropy(mb, spec)?)
}

/// Lazily computed clamped spectra of every marginal of one state, keyed by party bitmask.
pub struct Marginals<'a> {
    rho: &'a DensityMatrix,
    spectra: RefCell<HashMap<u64, Vec<f64>>>,
}

impl<'a> Marginals<'a> {
    pub fn new(rho: &'a DensityMatrix) -> Self {
        Self {
            rho,
            spectra: RefCell::new(HashMap::new()),
        }
    }

    pub fn state(&self) -> &'a DensityMatrix {
        self.rho
    }

    pub fn spectrum(&self, mask: u64) -> Result<Vec<f64>> {
        if let Some(s) = self.spectra.borrow().get(&mask) {
            return Ok(s.clone());
        }
        let s = if mask == 0 {
            vec![1.0]
        } else {
            clamp_spectrum(hermitian_eigenvalues(&self.rho.reduce_mask(mask))?)?
        };
        self.spectra.borrow_mut().insert(mask, s.clone());
        Ok(s)
    }

    /// Entropy of the marginal on `mask`; the empty marginal has entropy 0.
    pub fn entropy(&self, mask: u64, spec: EntropySpec) -> Result<f64> {
        if mask == 0 {
            return Ok(0.0);
        }
        if let Some(s) = self.spectra.borrow().get(&mask) {
            return Ok(spec.of_spectrum(s));
        }
        Ok(spec.of_spectrum(&self.spectrum(mask)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::state::SubsystemLayout;
    use crate::states;

    #[test]
    fn simple_values() {
        let pure = states::random_pure(&SubsystemLayout::qubits(2).unwrap(), 1).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-9);
        assert!(tsallis_entropy(&pure, 3.0).unwrap().abs() < 1e-9);
        let white = states::ghz_mixture(0.0, 3).unwrap();
        assert!((von_neumann_entropy(&white).unwrap() - 3.0).abs() < 1e-12);
        assert!((tsallis_entropy(&white, 2.0).unwrap() - 7.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_mixture_entropy() {
        let rho = states::ghz_mixture(0.5, 3).unwrap();
        // −(9/16) log₂(9/16) − 7·(1/16) log₂(1/16)
        let want = -(9.0f64 / 16.0) * (9.0f64 / 16.0).log2() + 7.0 / 16.0 * 4.0;
        assert!((von_neumann_entropy(&rho).unwrap() - want).abs() < 1e-12);
        assert!((want - 2.21692).abs() < 1e-4);
    }

    #[test]
    fn tsallis_two_level() {
        let rho = states::bell_pair().unwrap().partial_trace(&["A"]).unwrap();
        for q in [1.5, 2.0, 3.0] {
            let want = (1.0 - 2f64.powf(1.0 - q)) / (q - 1.0);
            assert!((tsallis_entropy(&rho, q).unwrap() - want).abs() < 1e-12);
        }
        assert!((tsallis_entropy(&rho, 2.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tsallis_domain() {
        let rho = states::bell_pair().unwrap();
        assert!(tsallis_entropy(&rho, 1.0).is_err());
        assert!(tsallis_entropy(&rho, 0.0).is_err());
        assert!(tsallis_entropy(&rho, 0.5).is_ok());
        assert!(EntropySpec::tsallis(-1.0).is_err());
    }

    #[test]
    fn linear_entropy_two_ways() {
        let rho = states::random_mixed(&SubsystemLayout::qubits(3).unwrap(), 3, 5).unwrap();
        let direct = 1.0 - rho.purity();
        assert!((tsallis_entropy(&rho, 2.0).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_cases() {
        let rho = states::random_mixed(&SubsystemLayout::qubits(2).unwrap(), 4, 9).unwrap();
        let self_rel = relative_entropy(&rho, &rho).unwrap().finite().unwrap();
        assert!(self_rel.abs() < 1e-9);

        let l = SubsystemLayout::qubits(1).unwrap();
        let zero =
            DensityMatrix::new(l.clone(), ComplexMatrix::from_diagonal(&[1.0, 0.0])).unwrap();
        let one = DensityMatrix::new(l, ComplexMatrix::from_diagonal(&[0.0, 1.0])).unwrap();
        assert_eq!(relative_entropy(&zero, &one).unwrap(), RelEntropy::Infinite);
        assert!(relative_entropy(&one, &one).unwrap().finite().is_some());
    }

    #[test]
    fn ssa_margin_rejects_overlap() {
        let rho = states::ghz(3).unwrap();
        let e = ssa_margin(&rho, &["A"], &["A"], &["C"], EntropySpec::VonNeumann);
        assert!(matches!(e, Err(Error::Partition(_))));
    }

    #[test]
    fn classical_state_saturates_tsallis_ssa() {
        let rho = states::classical_two_term(0.5, 3).unwrap();
        let s = EntropySpec::tsallis(2.0).unwrap();
        assert!(ssa_margin(&rho, &["A"], &["B"], &["C"], s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn marginal_cache_is_consistent() {
        let rho = states::random_mixed(&SubsystemLayout::qubits(3).unwrap(), 4, 2).unwrap();
        let m = Marginals::new(&rho);
        for mask in 1..8u64 {
            let direct = von_neumann_entropy(&rho.reduce_to_mask(mask).unwrap()).unwrap();
            assert_eq!(m.entropy(mask, EntropySpec::VonNeumann).unwrap(), direct);
            assert_eq!(m.entropy(mask, EntropySpec::VonNeumann).unwrap(), direct);
        }
        assert_eq!(m.entropy(0, EntropySpec::VonNeumann).unwrap(), 0.0);
    }
}
