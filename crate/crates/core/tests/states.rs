use mqmi::linalg::{ComplexMatrix, C64};
use mqmi::states::{random_mixed, random_pure};
use mqmi::{DensityMatrix, SubsystemLayout};
use proptest::prelude::*;

/// Partial trace by explicit index sums, independent of the library's stride-based version.
fn naive_reduce(rho: &DensityMatrix, keep: &[bool]) -> ComplexMatrix {
    let dims = rho.layout().dims();
    let n = dims.len();
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; n];
        for p in (0..n).rev() {
            out[p] = idx % dims[p];
            idx /= dims[p];
        }
        out
    };
    let kept_dim: usize = (0..n).filter(|&p| keep[p]).map(|p| dims[p]).product();
    let kept_index = |d: &[usize]| {
        (0..n)
            .filter(|&p| keep[p])
            .fold(0, |acc, p| acc * dims[p] + d[p])
    };
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    let total = rho.dim();
    for i in 0..total {
        let di = digits(i);
        for j in 0..total {
            let dj = digits(j);
            if (0..n).any(|p| !keep[p] && di[p] != dj[p]) {
                continue;
            }
            out[(kept_index(&di), kept_index(&dj))] += rho.matrix()[(i, j)];
        }
    }
    out
}

fn layout_strategy() -> impl Strategy<Value = SubsystemLayout> {
    prop::collection::vec(2usize..=3, 2..=4).prop_filter_map("too large", |dims| {
        let text: Vec<String> = dims
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{}:{d}", (b'A' + i as u8) as char))
            .collect();
        let l = SubsystemLayout::parse(&text.join(",")).ok()?;
        (l.total_dim() <= 36).then_some(l)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 120, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn partial_trace_matches_index_sums(l in layout_strategy(), seed in any::<u64>(), mask in 1u64..16, rank in 1usize..4) {
        let n = l.len();
        let mask = mask & ((1 << n) - 1);
        prop_assume!(mask != 0);
        let rho = random_mixed(&l, rank, seed).unwrap();
        let keep: Vec<bool> = (0..n).map(|p| mask >> p & 1 == 1).collect();
        let want = naive_reduce(&rho, &keep);
        let got = rho.reduce_mask(mask);
        prop_assert!(got.max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn permute_round_trips(l in layout_strategy(), seed in any::<u64>(), shift in 0usize..4) {
        let rho = random_mixed(&l, 2, seed).unwrap();
        let labels = l.labels();
        let n = labels.len();
        let order: Vec<&str> = (0..n).map(|i| labels[(i + shift) % n]).rev().collect();
        let moved = rho.permute(&order).unwrap();
        prop_assert_eq!(moved.layout().labels(), order.clone());
        let back = moved.permute(&labels).unwrap();
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn tensor_factors_are_recovered(seed in any::<u64>()) {
        let a = random_mixed(&SubsystemLayout::parse("A:2,B:3").unwrap(), 2, seed).unwrap();
        let c = random_pure(&SubsystemLayout::parse("C:2").unwrap(), seed ^ 1).unwrap();
        let joint = a.tensor(&c).unwrap();
        prop_assert!(joint.partial_trace(&["A", "B"]).unwrap().matrix().max_abs_diff(a.matrix()).unwrap() < 1e-12);
        prop_assert!(joint.partial_trace(&["C"]).unwrap().matrix().max_abs_diff(c.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn samples_are_valid_states(l in layout_strategy(), seed in any::<u64>(), rank in 1usize..6) {
        let rank = rank.min(l.total_dim());
        let rho = random_mixed(&l, rank, seed).unwrap();
        DensityMatrix::new(l.clone(), rho.matrix().clone()).unwrap();
        let spectrum = rho.spectrum().unwrap();
        let positive = spectrum.iter().filter(|&&v| v > 1e-10).count();
        prop_assert_eq!(positive, rank);
        let trace: C64 = rho.matrix().trace();
        prop_assert!((trace.re - 1.0).abs() < 1e-12 && trace.im.abs() < 1e-12);
    }
}

#[test]
fn seeded_samples_repeat() {
    let l = SubsystemLayout::qubits(3).unwrap();
    assert_eq!(
        random_mixed(&l, 4, 99).unwrap().matrix(),
        random_mixed(&l, 4, 99).unwrap().matrix()
    );
    assert_ne!(
        random_mixed(&l, 4, 99).unwrap().matrix(),
        random_mixed(&l, 4, 100).unwrap().matrix()
    );
}
