//! Named fixtures and seeded random ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::state::{DensityMatrix, Party, SubsystemLayout};
use crate::{CLAMP_TOL, STATE_TOL};

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Spec(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn at_least_two(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Layout(format!("need at least 2 parties, got {n}")));
    }
    Ok(())
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz(n: usize) -> Result<DensityMatrix> {
    at_least_two(n)?;
    let layout = SubsystemLayout::qubits(n)?;
    let d = layout.total_dim();
    let mut psi = vec![C64::new(0.0, 0.0); d];
    psi[0] = C64::new(1.0, 0.0);
    psi[d - 1] = C64::new(1.0, 0.0);
    DensityMatrix::from_pure(layout, &psi)
}

/// `p·|GHZ⟩⟨GHZ| + (1−p)·I/2ⁿ`.
pub fn ghz_mixture(p: f64, n: usize) -> Result<DensityMatrix> {
    check_probability(p, "visibility")?;
    let g = ghz(n)?;
    let d = g.dim();
    let noise = ComplexMatrix::identity(d).scale((1.0 - p) / d as f64);
    let m = g.matrix().scale(p).add(&noise)?;
    Ok(DensityMatrix::new_unchecked(g.layout().clone(), m))
}

/// `p|0…0⟩⟨0…0| + (1−p)|1…1⟩⟨1…1|`.
pub fn classical_two_term(p: f64, n: usize) -> Result<DensityMatrix> {
    check_probability(p, "weight")?;
    at_least_two(n)?;
    let layout = SubsystemLayout::qubits(n)?;
    let d = layout.total_dim();
    let mut diag = vec![0.0; d];
    diag[0] = p;
    diag[d - 1] = 1.0 - p;
    Ok(DensityMatrix::new_unchecked(
        layout,
        ComplexMatrix::from_diagonal(&diag),
    ))
}

/// `(|00⟩ + |11⟩)/√2` on parties `A`, `B`.
pub fn bell_pair() -> Result<DensityMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    DensityMatrix::from_pure(
        SubsystemLayout::qubits(2)?,
        &[C64::new(s, 0.0), z, z, C64::new(s, 0.0)],
    )
}

/// Computational-basis projector `|k⟩⟨k|` of dimension `d`.
pub fn basis_projector(d: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(k, k)] = C64::new(1.0, 0.0);
    m
}

/// `Ψ⁺_AB ⊗ I/2_C ⊗ I/2_D`: an AB-pure, otherwise pairwise maximally mixed 4-qubit state.
pub fn additivity_state() -> Result<DensityMatrix> {
    let mut abc = ComplexMatrix::zeros(8, 8);
    for (i, j) in [
        (2, 2),
        (2, 4),
        (4, 2),
        (4, 4),
        (3, 3),
        (3, 5),
        (5, 3),
        (5, 5),
    ] {
        abc[(i, j)] = C64::new(0.25, 0.0);
    }
    let abc = DensityMatrix::new(SubsystemLayout::qubits(3)?, abc)?;
    let d = DensityMatrix::new_unchecked(
        SubsystemLayout::new(vec![Party::new("D", 2)])?,
        ComplexMatrix::identity(2).scale(0.5),
    );
    abc.tensor(&d)
}

/// One summand `q_j · ρ^{A B_L} ⊗ ρ^{B_R C}` of a block-diagonal tripartite state.
#[derive(Clone, Debug)]
pub struct MarkovBlock {
    pub weight: f64,
    /// State on `A ⊗ B_L`, side `dim(A)·left_dim`.
    pub left: ComplexMatrix,
    /// State on `B_R ⊗ C`, side `right_dim·dim(C)`.
    pub right: ComplexMatrix,
    pub left_dim: usize,
    pub right_dim: usize,
}

/// `B = ⊕_j B_L^j ⊗ B_R^j`, with the state block-diagonal over `j`.
#[derive(Clone, Debug)]
pub struct MarkovSpec {
    pub a_dim: usize,
    pub c_dim: usize,
    pub blocks: Vec<MarkovBlock>,
}

impl MarkovSpec {
    pub fn b_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.left_dim * b.right_dim).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Spec("Markov spec has no blocks".into()));
        }
        let total: f64 = self.blocks.iter().map(|b| b.weight).sum();
        if (total - 1.0).abs() > 1e-12 || self.blocks.iter().any(|b| b.weight < 0.0) {
            return Err(Error::Spec(format!(
                "block weights must be a distribution (sum {total})"
            )));
        }
        for (j, b) in self.blocks.iter().enumerate() {
            if b.left_dim == 0 || b.right_dim == 0 {
                return Err(Error::Spec(format!(
                    "block {j} has a zero-dimensional factor"
                )));
            }
            let ld = self.a_dim * b.left_dim;
            let rd = b.right_dim * self.c_dim;
            if b.left.rows() != ld || b.left.cols() != ld {
                return Err(Error::Spec(format!(
                    "block {j}: left factor must be {ld}x{ld}"
                )));
            }
            if b.right.rows() != rd || b.right.cols() != rd {
                return Err(Error::Spec(format!(
                    "block {j}: right factor must be {rd}x{rd}"
                )));
            }
            validate_state_matrix(&b.left)
                .map_err(|e| Error::Spec(format!("block {j} left factor: {e}")))?;
            validate_state_matrix(&b.right)
                .map_err(|e| Error::Spec(format!("block {j} right factor: {e}")))?;
        }
        Ok(())
    }
}

fn validate_state_matrix(m: &ComplexMatrix) -> Result<()> {
    let dev = m.hermitian_deviation().unwrap_or(f64::INFINITY);
    if dev > STATE_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidTrace(tr));
    }
    let ev = crate::linalg::hermitian_eigenvalues(m)?;
    match ev.first() {
        Some(&min) if min < -CLAMP_TOL => Err(Error::NotPsd(min)),
        _ => Ok(()),
    }
}

/// Assembles the block-diagonal state on `A ⊗ B ⊗ C` (labels `A`, `B`, `C`).
pub fn markov_state(spec: &MarkovSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let (da, dc, db) = (spec.a_dim, spec.c_dim, spec.b_dim());
    let layout = SubsystemLayout::new(vec![
        Party::new("A", da),
        Party::new("B", db),
        Party::new("C", dc),
    ])?;
    let d = layout.total_dim();
    let mut m = ComplexMatrix::zeros(d, d);
    let idx = |a: usize, b: usize, c: usize| (a * db + b) * dc + c;
    let mut offset = 0;
    for blk in &spec.blocks {
        let (bl, br) = (blk.left_dim, blk.right_dim);
        for a in 0..da {
            for l in 0..bl {
                for a2 in 0..da {
                    for l2 in 0..bl {
                        let lv = blk.left[(a * bl + l, a2 * bl + l2)];
                        if lv.re == 0.0 && lv.im == 0.0 {
                            continue;
                        }
                        for r in 0..br {
                            for c in 0..dc {
                                for r2 in 0..br {
                                    for c2 in 0..dc {
                                        let rv = blk.right[(r * dc + c, r2 * dc + c2)];
                                        let i = idx(a, offset + l * br + r, c);
                                        let j = idx(a2, offset + l2 * br + r2, c2);
                                        m[(i, j)] += lv * rv * blk.weight;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        offset += bl * br;
    }
    Ok(DensityMatrix::new_unchecked(layout, m))
}

/// Two-block Markov state with `B` of dimension 4: a Bell pair on `A B_L` in one block
/// and a Bell pair on `B_R C` in the other.
pub fn markov_demo() -> Result<DensityMatrix> {
    let bell = bell_pair()?.matrix().clone();
    markov_state(&MarkovSpec {
        a_dim: 2,
        c_dim: 2,
        blocks: vec![
            MarkovBlock {
                weight: 0.5,
                left: bell.clone(),
                right: basis_projector(2, 0),
                left_dim: 2,
                right_dim: 1,
            },
            MarkovBlock {
                weight: 0.5,
                left: basis_projector(2, 1),
                right: bell,
                left_dim: 1,
                right_dim: 2,
            },
        ],
    })
}

/// SplitMix64 finaliser applied to `(master, index)`; used for per-sample seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_pure_with<R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let psi: Vec<C64> = (0..layout.total_dim()).map(|_| gaussian(rng)).collect();
    DensityMatrix::from_pure(layout.clone(), &psi)
}

/// `GG† / tr(GG†)` with `G` a `d × rank` complex Ginibre matrix.
pub fn random_mixed_with<R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let d = layout.total_dim();
    if rank == 0 || rank > d {
        return Err(Error::Spec(format!("rank must lie in 1..={d}, got {rank}")));
    }
    let g = ComplexMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let m = g.matmul(&g.adjoint())?;
    let tr = m.trace().re;
    let mut m = m.scale(1.0 / tr);
    // Exact Hermiticity; the product is Hermitian only up to rounding.
    for i in 0..d {
        m[(i, i)].im = 0.0;
        for j in i + 1..d {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Ok(DensityMatrix::new_unchecked(layout.clone(), m))
}

/// Haar-random pure state, deterministic in `seed`.
pub fn random_pure(layout: &SubsystemLayout, seed: u64) -> Result<DensityMatrix> {
    random_pure_with(layout, &mut rng_from_seed(seed))
}

/// Hilbert–Schmidt-type mixed state of the given rank, deterministic in `seed`.
pub fn random_mixed(layout: &SubsystemLayout, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_mixed_with(layout, rank, &mut rng_from_seed(seed))
}

/// Tensor product of independent random factors, one per party, each of the given rank.
pub fn random_product_with<R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    ranks: &[usize],
    rng: &mut R,
) -> Result<DensityMatrix> {
    if ranks.len() != layout.len() {
        return Err(Error::Spec("one rank per party is required".into()));
    }
    let mut out: Option<DensityMatrix> = None;
    for (p, &r) in layout.parties().iter().zip(ranks) {
        let l = SubsystemLayout::new(vec![p.clone()])?;
        let f = random_mixed_with(&l, r, rng)?;
        out = Some(match out {
            None => f,
            Some(acc) => acc.tensor(&f)?,
        });
    }
    Ok(out.expect("layout is non-empty"))
}
