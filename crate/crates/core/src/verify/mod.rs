//! Verification harness: checkers that turn inequalities about the functionals into
//! reproducible, seed-determined reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::measure::{MqmiKind, MqmiSpec};
use crate::partition::Partition;
use crate::state::{DensityMatrix, StateFile};
use crate::CHECK_TOL;

pub mod alpha;
pub mod bound;
pub mod monogamy;
pub mod monotone;
pub mod registry;
pub mod search;
pub mod sweep;
pub mod table;
pub mod triangle;

pub use alpha::{fit_alpha, AlphaInequality};
pub use bound::check_entropy_bound;
pub use monogamy::{check_complete_monogamy, check_discorrelated};
pub use monotone::{check_coarsening_monotone, MonotoneChecker, PairScope};
pub use registry::{reproduce_counterexample, CaseId};
pub use search::{search, SearchConfig, SearchOutcome, SearchTarget};
pub use sweep::{run_sweep, Ensemble, SweepCheck, SweepConfig};
pub use triangle::check_triangle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    CounterexampleFound,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::CounterexampleFound => "counterexample-found",
        })
    }
}

/// A state together with the partitions on which it violates (or saturates) a relation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub state: StateFile,
    pub partitions: Vec<Partition>,
    pub margin: f64,
}

impl Witness {
    pub fn new(rho: &DensityMatrix, partitions: Vec<Partition>, margin: f64) -> Self {
        Self {
            state: rho.to_state_file(),
            partitions,
            margin,
        }
    }
}

/// Bracketing evidence for a fitted exponent: every sample holds at `alpha`, and at
/// `alpha / 2` the worst sample's margin is `half_margin` (negative when bracketed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCertificate {
    pub alpha: f64,
    pub min_margin_at_alpha: f64,
    pub half_margin: f64,
    pub half_violator: Option<usize>,
    pub bracketed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub version: String,
}

impl Provenance {
    pub fn new(seed: Option<u64>, tolerance: f64) -> Self {
        Self {
            seed,
            tolerance,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub spec: Option<MqmiSpec>,
    pub samples: usize,
    pub min_margin: f64,
    pub witness: Option<Witness>,
    pub alpha: Option<AlphaCertificate>,
    pub verdict: Verdict,
    /// Whether the verdict is the outcome the claims table predicts.
    pub expected: bool,
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl CheckReport {
    pub fn new(check_id: impl Into<String>, spec: Option<MqmiSpec>) -> Self {
        Self {
            check_id: check_id.into(),
            spec,
            samples: 0,
            min_margin: f64::INFINITY,
            witness: None,
            alpha: None,
            verdict: Verdict::Pass,
            expected: true,
            values: BTreeMap::new(),
            notes: Vec::new(),
            provenance: Provenance::new(None, CHECK_TOL),
        }
    }

    pub fn value(mut self, key: impl Into<String>, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Sets verdict and `expected` from whether a violation was seen and what the claims say.
    pub fn decide(&mut self, violated: bool, claim: Claim) {
        let claimed = claim.holds_here();
        self.verdict = match (violated, claimed) {
            (true, true) => Verdict::Fail,
            (true, false) => Verdict::CounterexampleFound,
            (false, _) => Verdict::Pass,
        };
        self.expected = violated != claimed;
    }

    /// JSON with a stable field order; infinities become `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }

    pub fn summary_line(&self) -> String {
        let margin = if self.min_margin.is_finite() {
            format!("{:.3e}", self.min_margin)
        } else {
            "n/a".to_string()
        };
        let spec = self
            .spec
            .map(|s| s.to_string())
            .unwrap_or_else(|| "-".into());
        format!(
            "{} [{}] samples={} min_margin={} verdict={}{}",
            self.check_id,
            spec,
            self.samples,
            margin,
            self.verdict,
            if self.expected { "" } else { " (unexpected)" }
        )
    }
}

/// Columns of the comparison table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    NonNegative,
    Symmetric,
    Additive,
    CoarseA,
    CoarseB,
    CoarseC,
    Monogamous,
    CompletelyMonogamous,
    TightlyCompleteMonogamous,
    Triangle,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Self::NonNegative,
        Self::Symmetric,
        Self::Additive,
        Self::CoarseA,
        Self::CoarseB,
        Self::CoarseC,
        Self::Monogamous,
        Self::CompletelyMonogamous,
        Self::TightlyCompleteMonogamous,
        Self::Triangle,
    ];

    pub fn header(self) -> &'static str {
        match self {
            Self::NonNegative => "non-neg",
            Self::Symmetric => "symm",
            Self::Additive => "additive",
            Self::CoarseA => ">a",
            Self::CoarseB => ">b",
            Self::CoarseC => ">c",
            Self::Monogamous => "M",
            Self::CompletelyMonogamous => "CM",
            Self::TightlyCompleteMonogamous => "TCM",
            Self::Triangle => "TI",
        }
    }
}

/// Status of a property for one functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Holds,
    HoldsOnPure,
    Fails,
    Senseless,
}

impl Claim {
    /// Whether the relation is asserted on the inputs a checker is run on.
    /// Pure-only claims count as not asserted for general (mixed) inputs.
    pub fn holds_here(self) -> bool {
        matches!(self, Self::Holds)
    }

    pub fn mark(self) -> &'static str {
        match self {
            Self::Holds => "✓",
            Self::HoldsOnPure => "pure",
            Self::Fails => "×",
            Self::Senseless => "—",
        }
    }
}

/// The published comparison table, cell by cell.
pub fn published_mark(kind: MqmiKind, prop: Property) -> Claim {
    use Claim::*;
    use MqmiKind::*;
    use Property::*;
    match (kind, prop) {
        (_, Symmetric) => Holds,
        (_, Monogamous) if !kind.needs_three_blocks() => HoldsOnPure,
        (Idprime | Iqdprime, NonNegative) => Fails,
        (Idprime | Iqdprime, _) => Senseless,
        (I, _) => Holds,
        (Iprime, CompletelyMonogamous | TightlyCompleteMonogamous | Triangle) => Fails,
        (Iprime, _) => Holds,
        (Iq, CoarseC | Triangle) => Fails,
        (Iq, _) => Holds,
        (Iqprime, _) => Fails,
    }
}

/// What the checkers treat as asserted. Same as the published table except that the
/// four-party triangle relation for the complement-based functional is proven to hold.
pub fn claim(kind: MqmiKind, prop: Property) -> Claim {
    match (kind, prop) {
        (MqmiKind::Iprime, Property::Triangle) => Claim::Holds,
        _ => published_mark(kind, prop),
    }
}

/// Conjunction of claims, used when a check spans several columns.
pub fn claim_all(kind: MqmiKind, props: &[Property]) -> Claim {
    if props.iter().all(|&p| claim(kind, p) == Claim::Holds) {
        Claim::Holds
    } else {
        Claim::Fails
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decide_rules() {
        let mut r = CheckReport::new("x", None);
        r.decide(true, Claim::Holds);
        assert_eq!((r.verdict, r.expected), (Verdict::Fail, false));
        r.decide(true, Claim::Fails);
        assert_eq!(
            (r.verdict, r.expected),
            (Verdict::CounterexampleFound, true)
        );
        r.decide(false, Claim::Holds);
        assert_eq!((r.verdict, r.expected), (Verdict::Pass, true));
        r.decide(false, Claim::Fails);
        assert_eq!((r.verdict, r.expected), (Verdict::Pass, false));
        r.decide(true, Claim::HoldsOnPure);
        assert_eq!(r.verdict, Verdict::CounterexampleFound);
    }

    #[test]
    fn published_rows() {
        use MqmiKind::*;
        assert!(Property::ALL
            .iter()
            .all(|&p| p == Property::Monogamous || published_mark(I, p) == Claim::Holds));
        assert_eq!(published_mark(Iprime, Property::Triangle), Claim::Fails);
        assert_eq!(claim(Iprime, Property::Triangle), Claim::Holds);
        assert_eq!(published_mark(Iq, Property::CoarseC), Claim::Fails);
        assert_eq!(
            published_mark(Iq, Property::CompletelyMonogamous),
            Claim::Holds
        );
        assert_eq!(published_mark(Iqprime, Property::NonNegative), Claim::Fails);
        assert_eq!(published_mark(Iqprime, Property::Symmetric), Claim::Holds);
        assert_eq!(
            published_mark(Iqprime, Property::Monogamous),
            Claim::HoldsOnPure
        );
        assert_eq!(
            published_mark(Idprime, Property::Additive),
            Claim::Senseless
        );
        assert_eq!(
            published_mark(Iqdprime, Property::Monogamous),
            Claim::Senseless
        );
        assert_eq!(
            published_mark(Iqdprime, Property::NonNegative),
            Claim::Fails
        );
    }

    #[test]
    fn report_json_has_no_timestamp() {
        let r = CheckReport::new("x", Some(MqmiSpec::von_neumann(MqmiKind::I))).value("a", 1.0);
        let j = r.to_json();
        assert!(j.contains("\"check_id\": \"x\"") && j.contains("version") && !j.contains("time"));
    }
}
