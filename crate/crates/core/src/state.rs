//! Subsystem layouts, validated density matrices and the JSON state-file format.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, kron, ComplexMatrix, C64};
use crate::{CLAMP_TOL, MAX_DIM, STATE_TOL};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub label: String,
    pub dim: usize,
}

impl Party {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

/// Ordered parties. The order fixes the tensor-factor order of the Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Party>", into = "Vec<Party>")]
pub struct SubsystemLayout {
    parties: Vec<Party>,
}

impl SubsystemLayout {
    pub fn new(parties: Vec<Party>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::Layout("no parties".into()));
        }
        let mut total: usize = 1;
        for (i, p) in parties.iter().enumerate() {
            if p.label.is_empty() {
                return Err(Error::Layout(format!("party {i} has an empty label")));
            }
            if p.label.contains('|') || p.label.contains(char::is_whitespace) {
                return Err(Error::Layout(format!(
                    "label `{}` contains a reserved character",
                    p.label
                )));
            }
            if p.dim < 2 {
                return Err(Error::Layout(format!(
                    "party `{}` has dimension {} (< 2)",
                    p.label, p.dim
                )));
            }
            if parties[..i].iter().any(|q| q.label == p.label) {
                return Err(Error::Layout(format!("duplicate label `{}`", p.label)));
            }
            total = total
                .checked_mul(p.dim)
                .filter(|&t| t <= MAX_DIM)
                .ok_or(Error::DimensionGuard(total.saturating_mul(p.dim)))?;
        }
        Ok(Self { parties })
    }

    /// `n` qubits labelled `A`, `B`, `C`, ...
    pub fn qubits(n: usize) -> Result<Self> {
        Self::uniform(n, 2)
    }

    pub fn uniform(n: usize, dim: usize) -> Result<Self> {
        if n > 26 {
            return Err(Error::Layout(format!(
                "{n} parties exceed the alphabetic label range"
            )));
        }
        Self::new((0..n).map(|i| Party::new(letter(i), dim)).collect())
    }

    /// Parses `A:2,B:2,C:3`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parties = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (label, dim) = item
                .split_once(':')
                .ok_or_else(|| Error::Layout(format!("expected label:dim, got `{item}`")))?;
            let dim = dim
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Layout(format!("bad dimension in `{item}`")))?;
            parties.push(Party::new(label.trim(), dim));
        }
        Self::new(parties)
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parties.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parties.iter().map(|p| p.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.parties.iter().map(|p| p.dim).product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.parties
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Bitmask over layout positions for a set of labels.
    pub fn mask_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<u64> {
        let mut mask = 0u64;
        for l in labels {
            mask |= 1 << self.index_of(l.as_ref())?;
        }
        Ok(mask)
    }

    /// Sub-layout of the parties selected by `mask`, in layout order.
    pub fn restrict(&self, mask: u64) -> Result<Self> {
        Self::new(
            self.parties
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect(),
        )
    }
}

impl TryFrom<Vec<Party>> for SubsystemLayout {
    type Error = Error;

    fn try_from(parties: Vec<Party>) -> Result<Self> {
        Self::new(parties)
    }
}

impl From<SubsystemLayout> for Vec<Party> {
    fn from(l: SubsystemLayout) -> Self {
        l.parties
    }
}

impl fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .parties
            .iter()
            .map(|p| format!("{}:{}", p.label, p.dim))
            .collect();
        f.write_str(&items.join(","))
    }
}

pub(crate) fn letter(i: usize) -> String {
    char::from(b'A' + i as u8).to_string()
}

/// Eigenvalues of a state with rounding noise clamped; genuinely negative ones are an error.
pub fn clamp_spectrum(mut values: Vec<f64>) -> Result<Vec<f64>> {
    for v in &mut values {
        if *v < -CLAMP_TOL {
            return Err(Error::NotPsd(*v));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: SubsystemLayout,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates shape, Hermiticity, unit trace and positivity.
    pub fn new(layout: SubsystemLayout, matrix: ComplexMatrix) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::Shape(format!(
                "layout {layout} has dimension {d} but the matrix is {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation().unwrap_or(f64::INFINITY);
        if dev > STATE_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let ev = hermitian_eigenvalues(&matrix)?;
        if let Some(&min) = ev.first() {
            if min < -CLAMP_TOL {
                return Err(Error::NotPsd(min));
            }
        }
        Ok(Self { layout, matrix })
    }

    /// Skips validation. Callers guarantee the matrix is a state on `layout`.
    pub(crate) fn new_unchecked(layout: SubsystemLayout, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), layout.total_dim());
        Self { layout, matrix }
    }

    /// Normalises a pure-state vector and returns its projector.
    pub fn from_pure(layout: SubsystemLayout, psi: &[C64]) -> Result<Self> {
        if psi.len() != layout.total_dim() {
            return Err(Error::Shape(format!(
                "state vector has {} amplitudes, layout {layout} needs {}",
                psi.len(),
                layout.total_dim()
            )));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::Shape(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::new_unchecked(layout, ComplexMatrix::outer(&v)))
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_of_square().re
    }

    /// Clamped eigenvalues, ascending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        clamp_spectrum(hermitian_eigenvalues(&self.matrix)?)
    }

    /// Reduced matrix on the parties selected by `mask` (layout positions), kept in layout order.
    pub fn reduce_mask(&self, mask: u64) -> ComplexMatrix {
        let dims = self.layout.dims();
        let n = dims.len();
        let full = self.dim();
        let mask = mask & ((1u64 << n) - 1);
        if mask == (1u64 << n) - 1 {
            return self.matrix.clone();
        }
        let kept_dim: usize = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| dims[i])
            .product();
        let traced_dim = full / kept_dim;

        // Each full index splits into (kept, traced) mixed-radix coordinates.
        let mut groups = vec![0usize; full];
        for idx in 0..full {
            let mut rem = idx;
            let (mut k, mut t) = (0usize, 0usize);
            let (mut kmul, mut tmul) = (1usize, 1usize);
            for p in (0..n).rev() {
                let digit = rem % dims[p];
                rem /= dims[p];
                if mask >> p & 1 == 1 {
                    k += digit * kmul;
                    kmul *= dims[p];
                } else {
                    t += digit * tmul;
                    tmul *= dims[p];
                }
            }
            groups[t * kept_dim + k] = idx;
        }

        let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
        for t in 0..traced_dim {
            let g = &groups[t * kept_dim..(t + 1) * kept_dim];
            for (a, &ia) in g.iter().enumerate() {
                for (b, &ib) in g.iter().enumerate() {
                    out[(a, b)] += self.matrix[(ia, ib)];
                }
            }
        }
        out
    }

    pub fn reduce_to_mask(&self, mask: u64) -> Result<Self> {
        if mask & ((1u64 << self.layout.len()) - 1) == 0 {
            return Err(Error::Layout(
                "cannot reduce to an empty set of parties".into(),
            ));
        }
        let layout = self.layout.restrict(mask)?;
        Ok(Self::new_unchecked(layout, self.reduce_mask(mask)))
    }

    /// Reduced state on `keep`; other parties are traced out.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Layout("keep set is empty".into()));
        }
        let mask = self.layout.mask_of(keep)?;
        self.reduce_to_mask(mask)
    }

    /// Reorders tensor factors so that the layout reads `order`.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let n = self.layout.len();
        if order.len() != n {
            return Err(Error::Layout(format!(
                "permutation lists {} of {n} parties",
                order.len()
            )));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.layout.index_of(l.as_ref()))
            .collect::<Result<_>>()?;
        let mut seen = vec![false; n];
        for &p in &perm {
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Layout("permutation repeats a party".into()));
            }
        }
        let old_dims = self.layout.dims();
        let layout = SubsystemLayout::new(
            perm.iter()
                .map(|&p| self.layout.parties[p].clone())
                .collect(),
        )?;
        let new_dims = layout.dims();
        let d = self.dim();
        // map[new index] = old index
        let mut old_strides = vec![1usize; n];
        for p in (0..n.saturating_sub(1)).rev() {
            old_strides[p] = old_strides[p + 1] * old_dims[p + 1];
        }
        let map: Vec<usize> = (0..d)
            .map(|idx| {
                let mut rem = idx;
                let mut old = 0;
                for q in (0..n).rev() {
                    let digit = rem % new_dims[q];
                    rem /= new_dims[q];
                    old += digit * old_strides[perm[q]];
                }
                old
            })
            .collect();
        let m = ComplexMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self::new_unchecked(layout, m))
    }

    /// `self ⊗ other`; labels must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut parties = self.layout.parties.clone();
        parties.extend(other.layout.parties.iter().cloned());
        let layout = SubsystemLayout::new(parties)?;
        let m = kron(&self.matrix, &other.matrix)?;
        Ok(Self::new_unchecked(layout, m))
    }

    /// Same matrix, new labels (dimensions must agree position by position).
    pub fn relabel(&self, layout: SubsystemLayout) -> Result<Self> {
        if layout.dims() != self.layout.dims() {
            return Err(Error::Layout(format!(
                "cannot relabel {} as {layout}",
                self.layout
            )));
        }
        Ok(Self::new_unchecked(layout, self.matrix.clone()))
    }

    pub fn mix(weights: &[f64], states: &[Self]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::Shape("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::Shape("weights and states differ in length".into()));
        }
        let mut m = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, s) in weights.iter().zip(states) {
            if s.layout != first.layout {
                return Err(Error::Layout(
                    "mixture components have different layouts".into(),
                ));
            }
            m = m.add(&s.matrix.scale(*w))?;
        }
        Self::new(first.layout.clone(), m)
    }

    pub fn to_state_file(&self) -> StateFile {
        StateFile {
            parties: self.layout.parties.clone(),
            matrix: self
                .matrix
                .as_slice()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
    }

    pub fn from_state_file(file: StateFile) -> Result<Self> {
        let layout = SubsystemLayout::new(file.parties)
            .map_err(|e| Error::StateFile(format!("parties: {e}")))?;
        let d = layout.total_dim();
        if file.matrix.len() != d * d {
            return Err(Error::StateFile(format!(
                "matrix has {} entries, layout {layout} needs {}",
                file.matrix.len(),
                d * d
            )));
        }
        let data = file
            .matrix
            .into_iter()
            .map(|[re, im]| C64::new(re, im))
            .collect();
        let m = ComplexMatrix::from_vec(d, d, data).map_err(|e| Error::StateFile(e.to_string()))?;
        Self::new(layout, m).map_err(|e| Error::StateFile(e.to_string()))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: StateFile =
            serde_json::from_str(&text).map_err(|e| Error::StateFile(e.to_string()))?;
        Self::from_state_file(file)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_state_file())?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// On-disk form: `{ "parties": [{"label":"A","dim":2}, ...], "matrix": [[re, im], ...] }`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub parties: Vec<Party>,
    pub matrix: Vec<[f64; 2]>,
}
