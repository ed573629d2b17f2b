//! Evidence table: one row per functional, one cell per property, each mark backed by
//! sweeps, constructed families, fixtures or searches.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::measure::{mqmi, MqmiKind, MqmiSpec};
use crate::partition::Partition;
use crate::state::{DensityMatrix, SubsystemLayout};
use crate::states;
use crate::verify::alpha::{fit_alpha, AlphaInequality};
use crate::verify::monogamy::{check_complete_monogamy, check_discorrelated, condition_family};
use crate::verify::monotone::PairScope;
use crate::verify::registry::{reproduce_counterexample, CaseId};
use crate::verify::search::{search_report, SearchConfig, SearchTarget};
use crate::verify::sweep::{run_sweep, Ensemble, SweepCheck, SweepConfig};
use crate::verify::{claim, published_mark, CheckReport, Claim, Property, Verdict, Witness};
use crate::CHECK_TOL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    /// Samples per ensemble in each sweep.
    pub samples: usize,
    /// Instances per constructed family.
    pub family_instances: usize,
    pub q: f64,
    pub seed: u64,
    pub search_budget: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            family_instances: 40,
            q: 2.0,
            seed: 2024,
            search_budget: crate::verify::search::DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    /// No violation in any check.
    Holds,
    /// Holds on pure states, violated by a mixed state.
    PureOnly,
    Counterexample,
    OutOfScope,
}

impl CellStatus {
    pub fn mark(self) -> &'static str {
        match self {
            Self::Holds => "✓",
            Self::PureOnly => "pure",
            Self::Counterexample => "×",
            Self::OutOfScope => "—",
        }
    }

    /// The published mark this status reproduces.
    pub fn matches(self, published: Claim) -> bool {
        matches!(
            (self, published),
            (Self::Holds, Claim::Holds)
                | (Self::PureOnly, Claim::HoldsOnPure)
                | (Self::Counterexample, Claim::Fails)
                | (Self::OutOfScope, Claim::Senseless)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: MqmiKind,
    pub property: Property,
    pub status: CellStatus,
    pub published: Claim,
    pub agrees: bool,
    /// One summary line per check behind the mark.
    pub evidence: Vec<String>,
    /// First violating check, if any.
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceTable {
    pub config: TableConfig,
    pub cells: Vec<Cell>,
}

pub const LEGEND: &str = "✓ no violation in any sweep, family or fixture; × counterexample found; \
pure: holds on pure states, a mixed state violates it; — out of scope. \
Marks are evidence from finite checks, not proofs. * marks a cell that differs from the published table.";

impl EvidenceTable {
    pub fn cell(&self, kind: MqmiKind, prop: Property) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.kind == kind && c.property == prop)
    }

    pub fn disagreements(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| !c.agrees).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<10}", "MQMI"));
        for p in Property::ALL {
            out.push_str(&format!("{:>10}", p.header()));
        }
        out.push('\n');
        for kind in MqmiKind::ALL {
            out.push_str(&format!("{:<10}", kind.symbol()));
            for p in Property::ALL {
                let c = self.cell(kind, p).expect("full table");
                let m = format!("{}{}", c.status.mark(), if c.agrees { "" } else { "*" });
                // Pad by characters, not bytes.
                let pad = 10usize.saturating_sub(m.chars().count());
                out.push_str(&" ".repeat(pad));
                out.push_str(&m);
            }
            out.push('\n');
        }
        out.push('\n');
        out.push_str(LEGEND);
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,property,status,published,agrees,evidence\n");
        for c in &self.cells {
            let ev = c.evidence.join(" ; ").replace('"', "'");
            out.push_str(&format!(
                "{},{},{},{},{},\"{}\"\n",
                c.kind.name(),
                c.property.header(),
                c.status.mark(),
                c.published.mark(),
                c.agrees,
                ev
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialise")
    }
}

fn spec_for(kind: MqmiKind, q: f64) -> Result<MqmiSpec> {
    if kind.is_tsallis() {
        MqmiSpec::tsallis(kind, q)
    } else {
        Ok(MqmiSpec::von_neumann(kind))
    }
}

fn violated(r: &CheckReport) -> bool {
    r.verdict != Verdict::Pass
}

/// Evidence gathered for one cell.
#[derive(Default)]
struct Evidence {
    reports: Vec<CheckReport>,
}

impl Evidence {
    fn push(&mut self, r: CheckReport) {
        self.reports.push(r);
    }

    fn extend(&mut self, rs: impl IntoIterator<Item = CheckReport>) {
        self.reports.extend(rs);
    }

    fn any_violated(&self) -> bool {
        self.reports.iter().any(violated)
    }

    fn first_witness(&self) -> Option<Witness> {
        self.reports
            .iter()
            .find(|r| violated(r))
            .and_then(|r| r.witness.clone())
    }

    fn into_cell(self, kind: MqmiKind, property: Property, status: CellStatus) -> Cell {
        let published = published_mark(kind, property);
        Cell {
            kind,
            property,
            status,
            published,
            agrees: status.matches(published),
            witness: self.first_witness(),
            evidence: self.reports.iter().map(|r| r.summary_line()).collect(),
        }
    }
}

struct Ensembles {
    mixed3: SweepConfig,
    pure3: SweepConfig,
    mixed4: SweepConfig,
}

impl Ensembles {
    fn new(cfg: &TableConfig) -> Result<Self> {
        let l3 = SubsystemLayout::qubits(3)?;
        let l4 = SubsystemLayout::qubits(4)?;
        Ok(Self {
            mixed3: SweepConfig::new(
                Ensemble::HsMixed { rank: 4 },
                l3.clone(),
                cfg.samples,
                cfg.seed,
            )?,
            pure3: SweepConfig::new(
                Ensemble::HaarPure,
                l3,
                cfg.samples,
                cfg.seed.wrapping_add(1),
            )?,
            mixed4: SweepConfig::new(
                Ensemble::HsMixed { rank: 4 },
                l4,
                cfg.samples,
                cfg.seed.wrapping_add(2),
            )?,
        })
    }
}

fn search_cell(
    cfg: &TableConfig,
    target: SearchTarget,
    kind: MqmiKind,
    prop: Property,
) -> Result<CheckReport> {
    let sc = SearchConfig::new(target, cfg.q)
        .budget(cfg.search_budget)
        .seed(cfg.seed);
    search_report(&sc, claim(kind, prop))
}

fn search_target(kind: MqmiKind, prop: Property) -> Option<SearchTarget> {
    use Property::*;
    match (kind, prop) {
        (MqmiKind::Iq, CoarseC) => Some(SearchTarget::IqCIncrease),
        (MqmiKind::Iq, Triangle) => Some(SearchTarget::IqTriangleViolation),
        (MqmiKind::Iqprime, NonNegative) => Some(SearchTarget::IqprimeNegative),
        (MqmiKind::Iqprime, CoarseA) => Some(SearchTarget::IqprimeCoarseA),
        (MqmiKind::Iqprime, CoarseB) => Some(SearchTarget::IqprimeCoarseB),
        (MqmiKind::Iqprime, CoarseC) => Some(SearchTarget::IqprimeCoarseC),
        (MqmiKind::Iqprime, Triangle) => Some(SearchTarget::IqprimeTriangle),
        (MqmiKind::Iqdprime, NonNegative) => Some(SearchTarget::IqdprimeNegative),
        _ => None,
    }
}

/// `σ_AB ⊗ τ_CD` product check: `J(A:B:C:D) − J(A:B) − J(C:D)`.
pub fn additivity_report(
    kind: MqmiKind,
    q: f64,
    instances: usize,
    seed: u64,
) -> Result<CheckReport> {
    let spec = spec_for(kind, q)?;
    let mut rng = states::rng_from_seed(seed);
    let ab_l = SubsystemLayout::parse("A:2,B:2")?;
    let cd_l = SubsystemLayout::parse("C:2,D:2")?;
    let mut worst = 0.0f64;
    let mut worst_state = None;
    for i in 0..instances {
        let ab = states::random_mixed_with(&ab_l, 1 + i % 4, &mut rng)?;
        // Tsallis sums are additive only when one factor is pure.
        let cd_rank = if kind.is_tsallis() {
            1
        } else {
            1 + (i / 4) % 4
        };
        let cd = states::random_mixed_with(&cd_l, cd_rank, &mut rng)?;
        let rho = ab.tensor(&cd)?;
        let all = mqmi(&rho, &"A|B|C|D".parse()?, spec)?.value;
        let parts =
            mqmi(&rho, &"A|B".parse()?, spec)?.value + mqmi(&rho, &"C|D".parse()?, spec)?.value;
        let dev = (all - parts).abs();
        if dev > worst {
            worst = dev;
            worst_state = Some(rho);
        }
    }
    let mut r = CheckReport::new("additivity-products", Some(spec)).value("max_deviation", worst);
    r.samples = instances;
    r.min_margin = -worst;
    r.provenance.seed = Some(seed);
    let bad = worst > CHECK_TOL;
    r.decide(bad, claim(kind, Property::Additive));
    if kind.is_tsallis() {
        r.note("products with a pure CD factor");
    }
    if bad {
        let rho = worst_state.expect("recorded with the deviation");
        r.witness = Some(Witness::new(
            &rho,
            vec!["A|B|C|D".parse()?, "A|B".parse()?, "C|D".parse()?],
            -worst,
        ));
    }
    Ok(r)
}

/// `Φ⁺_AB ⊗ I/2_C`.
fn bell_with_noise() -> Result<DensityMatrix> {
    let c = DensityMatrix::new(
        SubsystemLayout::parse("C:2")?,
        ComplexMatrix::from_diagonal(&[0.5, 0.5]),
    )?;
    states::bell_pair()?.tensor(&c)
}

fn monogamy_fixtures() -> Result<Vec<DensityMatrix>> {
    Ok(vec![
        states::classical_two_term(0.5, 3)?,
        bell_with_noise()?,
        states::markov_demo()?,
    ])
}

fn complete_reports(cfg: &TableConfig, kind: MqmiKind, tight: bool) -> Result<Vec<CheckReport>> {
    let spec = spec_for(kind, cfg.q)?;
    let mut out = Vec::new();
    let mut rng = states::rng_from_seed(cfg.seed.wrapping_add(if tight { 11 } else { 10 }));
    let family: &[usize] = if tight { &[3, 4] } else { &[0, 1, 2] };
    for &f in family {
        for pure_factor in [false, true] {
            let id = format!(
                "{}-family-{f}{}",
                if tight { "tight" } else { "complete" },
                if pure_factor { "-pure-factor" } else { "" }
            );
            let mut agg = CheckReport::new(id, Some(spec));
            agg.samples = cfg.family_instances;
            let mut met = 0;
            let mut first_bad = None;
            for _ in 0..cfg.family_instances {
                let inst = condition_family(f, pure_factor, &mut rng)?;
                let r = check_complete_monogamy(
                    &inst.state,
                    &inst.finer,
                    &inst.coarser,
                    spec,
                    CHECK_TOL,
                    tight,
                )?;
                if r.values["condition_gap"] <= CHECK_TOL {
                    met += 1;
                }
                if r.min_margin < agg.min_margin {
                    agg.min_margin = r.min_margin;
                }
                if violated(&r) && first_bad.is_none() {
                    first_bad = Some(r);
                }
            }
            agg.values.insert("condition_met".into(), met as f64);
            match first_bad {
                Some(r) => {
                    agg.decide(
                        true,
                        claim(
                            kind,
                            if tight {
                                Property::TightlyCompleteMonogamous
                            } else {
                                Property::CompletelyMonogamous
                            },
                        ),
                    );
                    agg.witness = r.witness;
                }
                None => agg.decide(false, Claim::Holds),
            }
            out.push(agg);
        }
    }
    let pairs: &[(&str, &str)] = if tight {
        &[("A|B|C", "A|BC"), ("A|B|C", "AB|C")]
    } else {
        &[("A|B|C", "A|B"), ("A|B|C", "B|C")]
    };
    for rho in monogamy_fixtures()? {
        for (f, c) in pairs {
            let (f, c): (Partition, Partition) = (f.parse()?, c.parse()?);
            out.push(check_complete_monogamy(
                &rho, &f, &c, spec, CHECK_TOL, tight,
            )?);
        }
    }
    if kind == MqmiKind::Iprime && !tight {
        out.push(reproduce_counterexample(CaseId::MarkovIprime)?);
    }
    Ok(out)
}

fn monogamy_cell(cfg: &TableConfig, ens: &Ensembles, kind: MqmiKind) -> Result<Cell> {
    let spec = spec_for(kind, cfg.q)?;
    let mut ev = Evidence::default();
    let fit = fit_alpha(&ens.pure3, spec, AlphaInequality::Monogamy)?;
    let pure_ok = !violated(&fit) && fit.alpha.as_ref().is_some_and(|a| a.bracketed);
    ev.push(fit);
    let mut mixed_violation = false;
    for rho in monogamy_fixtures()? {
        let r = check_discorrelated(&rho, spec, CHECK_TOL)?;
        mixed_violation |= violated(&r);
        ev.push(r);
    }
    let status = match (pure_ok, mixed_violation) {
        (true, true) => CellStatus::PureOnly,
        (true, false) => CellStatus::Holds,
        (false, _) => CellStatus::Counterexample,
    };
    Ok(ev.into_cell(kind, Property::Monogamous, status))
}

fn verdict_cell(ev: Evidence, kind: MqmiKind, prop: Property) -> Cell {
    let status = if ev.any_violated() {
        CellStatus::Counterexample
    } else {
        CellStatus::Holds
    };
    ev.into_cell(kind, prop, status)
}

fn row(cfg: &TableConfig, ens: &Ensembles, kind: MqmiKind) -> Result<Vec<Cell>> {
    let spec = spec_for(kind, cfg.q)?;
    let three_block = kind.needs_three_blocks();
    let mut cells = Vec::new();

    // Per-sample sweeps shared by several columns.
    let checks: Vec<SweepCheck> = if three_block {
        vec![SweepCheck::NonNegative, SweepCheck::Symmetric]
    } else {
        vec![
            SweepCheck::NonNegative,
            SweepCheck::Symmetric,
            SweepCheck::Monotone(PairScope::A),
            SweepCheck::Monotone(PairScope::B),
            SweepCheck::Monotone(PairScope::C),
            SweepCheck::Triangle,
        ]
    };
    let mut sweeps: Vec<Vec<CheckReport>> = vec![Vec::new(); checks.len()];
    for c in [&ens.mixed3, &ens.pure3, &ens.mixed4] {
        for (k, r) in run_sweep(c, spec, &checks)?.into_iter().enumerate() {
            sweeps[k].push(r);
        }
    }
    let column = |prop: Property| -> Option<usize> {
        checks.iter().position(|c| {
            matches!(
                (c, prop),
                (SweepCheck::NonNegative, Property::NonNegative)
                    | (SweepCheck::Symmetric, Property::Symmetric)
                    | (SweepCheck::Monotone(PairScope::A), Property::CoarseA)
                    | (SweepCheck::Monotone(PairScope::B), Property::CoarseB)
                    | (SweepCheck::Monotone(PairScope::C), Property::CoarseC)
                    | (SweepCheck::Triangle, Property::Triangle)
            )
        })
    };

    for prop in Property::ALL {
        if three_block && !matches!(prop, Property::NonNegative | Property::Symmetric) {
            cells.push(Evidence::default().into_cell(kind, prop, CellStatus::OutOfScope));
            continue;
        }
        let mut ev = Evidence::default();
        if let Some(k) = column(prop) {
            ev.extend(sweeps[k].iter().cloned());
        }
        match prop {
            Property::Monogamous => {
                cells.push(monogamy_cell(cfg, ens, kind)?);
                continue;
            }
            Property::Additive => {
                ev.push(additivity_report(
                    kind,
                    cfg.q,
                    cfg.family_instances,
                    cfg.seed.wrapping_add(5),
                )?);
                if kind == MqmiKind::Iqprime {
                    ev.push(reproduce_counterexample(CaseId::IqprimeAdditivity)?);
                }
            }
            Property::CompletelyMonogamous => ev.extend(complete_reports(cfg, kind, false)?),
            Property::TightlyCompleteMonogamous => ev.extend(complete_reports(cfg, kind, true)?),
            Property::NonNegative if kind == MqmiKind::Idprime => {
                ev.push(reproduce_counterexample(CaseId::GhzIdprime)?)
            }
            _ => {}
        }
        if let Some(t) = search_target(kind, prop) {
            if !ev.any_violated() {
                ev.push(search_cell(cfg, t, kind, prop)?);
            }
        }
        if kind == MqmiKind::Iqdprime && prop == Property::NonNegative && !ev.any_violated() {
            // Negative values sit close to q = 1 on the GHZ mixture.
            ev.push(reproduce_counterexample(CaseId::GhzIdprime)?);
        }
        cells.push(verdict_cell(ev, kind, prop));
    }
    Ok(cells)
}

/// Runs the whole suite. Rows come out in the fixed kind order.
pub fn run_table(cfg: &TableConfig) -> Result<EvidenceTable> {
    let ens = Ensembles::new(cfg)?;
    let mut cells = Vec::new();
    for kind in MqmiKind::ALL {
        cells.extend(row(cfg, &ens, kind)?);
    }
    Ok(EvidenceTable {
        config: cfg.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_matching() {
        assert!(CellStatus::Holds.matches(Claim::Holds));
        assert!(CellStatus::PureOnly.matches(Claim::HoldsOnPure));
        assert!(!CellStatus::Holds.matches(Claim::Fails));
        assert!(CellStatus::OutOfScope.matches(Claim::Senseless));
    }

    #[test]
    fn additivity_constructions() {
        for kind in [MqmiKind::I, MqmiKind::Iprime, MqmiKind::Iq] {
            let r = additivity_report(kind, 2.0, 12, 1).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{kind} {}", r.min_margin);
        }
    }

    #[test]
    fn noisy_bell_breaks_tsallis_complete_monogamy() {
        let spec = MqmiSpec::tsallis(MqmiKind::Iq, 2.0).unwrap();
        let r = check_complete_monogamy(
            &bell_with_noise().unwrap(),
            &"A|B|C".parse().unwrap(),
            &"A|B".parse().unwrap(),
            spec,
            CHECK_TOL,
            false,
        )
        .unwrap();
        assert!(
            (r.values["j_finer"] - 1.0).abs() < 1e-12 && (r.values["xi_max"] - 0.25).abs() < 1e-12
        );
    }
}
