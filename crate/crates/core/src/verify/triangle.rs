//! Triangle relations between values on related partitions.

use crate::entropy::Marginals;
use crate::error::{Error, Result};
use crate::measure::{mqmi_masks, MqmiSpec};
use crate::partition::Partition;
use crate::state::DensityMatrix;
use crate::verify::{claim, CheckReport, Property, Witness};
use crate::CHECK_TOL;

/// One relation `J(lhs) ≤ J(r1) + J(r2)`, as block masks over party positions.
#[derive(Clone, Debug)]
pub struct TriangleForm {
    pub name: &'static str,
    pub lhs: Vec<u64>,
    pub rhs: [Vec<u64>; 2],
}

/// Relations that apply to a layout with `n` parties.
pub fn forms(n: usize) -> Result<Vec<TriangleForm>> {
    let (a, b, c, d) = (1u64, 2u64, 4u64, 8u64);
    match n {
        3 => Ok(vec![TriangleForm {
            name: "A:BC <= B:AC + AB:C",
            lhs: vec![a, b | c],
            rhs: [vec![b, a | c], vec![a | b, c]],
        }]),
        4 => Ok(vec![
            TriangleForm {
                name: "AB:CD <= AC:BD + AD:BC",
                lhs: vec![a | b, c | d],
                rhs: [vec![a | c, b | d], vec![a | d, b | c]],
            },
            TriangleForm {
                name: "A:B:CD <= A:BD:C + AD:B:C",
                lhs: vec![a, b, c | d],
                rhs: [vec![a, b | d, c], vec![a | d, b, c]],
            },
        ]),
        _ => Err(Error::Layout(format!(
            "triangle relations are stated for 3 or 4 parties, got {n}"
        ))),
    }
}

fn to_partition(blocks: &[u64], labels: &[&str]) -> Result<Partition> {
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

/// Smallest slack over the applicable relations, with the index of the tightest one.
pub fn triangle_slack(m: &Marginals<'_>, spec: MqmiSpec) -> Result<(f64, usize, Vec<f64>)> {
    let fs = forms(m.state().layout().len())?;
    let mut slacks = Vec::with_capacity(fs.len());
    for f in &fs {
        let l = mqmi_masks(m, &f.lhs, spec)?;
        let r = mqmi_masks(m, &f.rhs[0], spec)? + mqmi_masks(m, &f.rhs[1], spec)?;
        slacks.push(r - l);
    }
    let (i, &s) =
        slacks.iter().enumerate().fold(
            (0, &f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    Ok((s, i, slacks))
}

pub fn form_partitions(n: usize, index: usize, labels: &[&str]) -> Result<Vec<Partition>> {
    let f = &forms(n)?[index];
    [&f.lhs, &f.rhs[0], &f.rhs[1]]
        .iter()
        .map(|b| to_partition(b, labels))
        .collect()
}

/// Minimum slack of the triangle relations on one state.
pub fn check_triangle(rho: &DensityMatrix, spec: MqmiSpec) -> Result<CheckReport> {
    spec.validate()?;
    if spec.kind.needs_three_blocks() {
        return Err(Error::Spec(format!(
            "{} has no triangle relation",
            spec.kind
        )));
    }
    let n = rho.layout().len();
    let m = Marginals::new(rho);
    let (slack, at, all) = triangle_slack(&m, spec)?;
    let mut report = CheckReport::new("triangle", Some(spec));
    report.samples = 1;
    for (f, s) in forms(n)?.iter().zip(&all) {
        report.values.insert(format!("slack {}", f.name), *s);
    }
    report.min_margin = slack;
    let violated = slack < -CHECK_TOL;
    report.decide(violated, claim(spec.kind, Property::Triangle));
    if violated {
        let labels = rho.layout().labels();
        report.witness = Some(Witness::new(rho, form_partitions(n, at, &labels)?, slack));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MqmiKind;
    use crate::state::SubsystemLayout;
    use crate::states;
    use crate::verify::Verdict;

    #[test]
    fn von_neumann_forms_hold() {
        for n in [3, 4] {
            let l = SubsystemLayout::qubits(n).unwrap();
            for s in 0..20 {
                let rho = states::random_mixed(&l, 3, s).unwrap();
                for kind in [MqmiKind::I, MqmiKind::Iprime] {
                    let r = check_triangle(&rho, MqmiSpec::von_neumann(kind)).unwrap();
                    assert_eq!(r.verdict, Verdict::Pass, "{n} {kind} {}", r.min_margin);
                }
            }
        }
    }

    #[test]
    fn third_form_in_entropies() {
        // J(A:BD:C)+J(AD:B:C)−J(A:B:CD) = S_AD + S_BD + 2S_C − S_ABCD − S_CD for the sum form.
        let l = SubsystemLayout::qubits(4).unwrap();
        let rho = states::random_mixed(&l, 2, 8).unwrap();
        let spec = MqmiSpec::tsallis(MqmiKind::Iq, 2.0).unwrap();
        let m = Marginals::new(&rho);
        let s = |x: u64| m.entropy(x, spec.entropy()).unwrap();
        let want = s(9) + s(10) + 2.0 * s(4) - s(15) - s(12);
        let (_, _, all) = triangle_slack(&m, spec).unwrap();
        assert!((all[1] - want).abs() < 1e-12);
    }

    #[test]
    fn tsallis_third_form_fails_on_fixture() {
        // I/2 on A, |0⟩ on C, a Bell pair on BD.
        let a = DensityMatrix::new(
            SubsystemLayout::parse("A:2").unwrap(),
            crate::linalg::ComplexMatrix::from_diagonal(&[0.5, 0.5]),
        )
        .unwrap();
        let c = DensityMatrix::new(
            SubsystemLayout::parse("C:2").unwrap(),
            states::basis_projector(2, 0),
        )
        .unwrap();
        let bd = states::bell_pair()
            .unwrap()
            .relabel(SubsystemLayout::parse("B:2,D:2").unwrap())
            .unwrap();
        let rho = a
            .tensor(&bd)
            .unwrap()
            .tensor(&c)
            .unwrap()
            .permute(&["A", "B", "C", "D"])
            .unwrap();
        let r = check_triangle(&rho, MqmiSpec::tsallis(MqmiKind::Iq, 2.0).unwrap()).unwrap();
        assert!((r.min_margin + 0.25).abs() < 1e-12, "{}", r.min_margin);
        assert_eq!(r.verdict, Verdict::CounterexampleFound);
    }

    #[test]
    fn wrong_party_count() {
        let rho = states::bell_pair().unwrap();
        assert!(check_triangle(&rho, MqmiSpec::von_neumann(MqmiKind::I)).is_err());
    }
}
