//! Partitions of party sets and the coarsening preorder generated by three moves:
//! discarding a block, merging two blocks, and dropping a party from a multi-party block.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::SubsystemLayout;

/// Largest label set accepted by the enumerators.
pub const MAX_PARTITION_LABELS: usize = 6;

/// Disjoint nonempty blocks of party labels in canonical order: labels ascending inside a
/// block, blocks ordered by their smallest label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Partition {
    blocks: Vec<Vec<String>>,
}

impl Partition {
    pub fn new<S: AsRef<str>>(blocks: &[Vec<S>]) -> Result<Self> {
        let blocks: Vec<Vec<String>> = blocks
            .iter()
            .map(|b| b.iter().map(|s| s.as_ref().to_string()).collect())
            .collect();
        Self::from_owned(blocks)
    }

    fn from_owned(mut blocks: Vec<Vec<String>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Partition(
                "a partition needs at least one block".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::Partition("empty block".into()));
            }
            for l in b.iter() {
                if l.is_empty() || l.contains('|') {
                    return Err(Error::Partition(format!("invalid label `{l}`")));
                }
                if !seen.insert(l.clone()) {
                    return Err(Error::Partition(format!(
                        "label `{l}` appears more than once"
                    )));
                }
            }
            b.sort();
        }
        blocks.sort();
        Ok(Self { blocks })
    }

    /// All parties as singleton blocks, in layout order.
    pub fn finest(layout: &SubsystemLayout) -> Self {
        let blocks: Vec<Vec<&str>> = layout.labels().into_iter().map(|l| vec![l]).collect();
        Self::new(&blocks).expect("layout labels are unique")
    }

    /// Parses `AB|CD|E` where every label is one character.
    pub fn parse(text: &str) -> Result<Self> {
        let blocks: Vec<Vec<String>> = split_blocks(text)?
            .into_iter()
            .map(|b| b.chars().map(String::from).collect())
            .collect();
        Self::from_owned(blocks)
    }

    /// Parses block text against a known label set, matching the longest label first.
    pub fn parse_with_labels<S: AsRef<str>>(text: &str, labels: &[S]) -> Result<Self> {
        let mut sorted: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
        sorted.sort_by_key(|l| std::cmp::Reverse(l.len()));
        let mut blocks = Vec::new();
        for raw in split_blocks(text)? {
            let mut rest = raw;
            let mut block = Vec::new();
            while !rest.is_empty() {
                let hit = sorted
                    .iter()
                    .find(|l| rest.starts_with(**l))
                    .ok_or_else(|| Error::UnknownLabel(rest.to_string()))?;
                block.push(hit.to_string());
                rest = &rest[hit.len()..];
            }
            blocks.push(block);
        }
        Self::from_owned(blocks)
    }

    pub fn blocks(&self) -> &[Vec<String>] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Union of all blocks, sorted.
    pub fn parties(&self) -> Vec<String> {
        let mut all: Vec<String> = self.blocks.iter().flatten().cloned().collect();
        all.sort();
        all
    }

    pub fn contains_block<S: AsRef<str>>(&self, block: &[S]) -> bool {
        let mut b: Vec<&str> = block.iter().map(AsRef::as_ref).collect();
        b.sort();
        self.blocks
            .iter()
            .any(|x| x.iter().map(String::as_str).eq(b.iter().copied()))
    }

    /// Block bitmasks over the layout's party positions, in canonical block order.
    pub fn masks(&self, layout: &SubsystemLayout) -> Result<Vec<u64>> {
        self.blocks.iter().map(|b| layout.mask_of(b)).collect()
    }

    /// Same partition with blocks listed in the given order (used to test symmetry).
    pub fn block_order_permuted(&self, order: &[usize]) -> Vec<Vec<String>> {
        order.iter().map(|&i| self.blocks[i].clone()).collect()
    }
}

fn split_blocks(text: &str) -> Result<Vec<&str>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Partition("empty partition text".into()));
    }
    let parts: Vec<&str> = text.split('|').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Partition(format!("empty block in `{text}`")));
    }
    Ok(parts)
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl TryFrom<String> for Partition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::parse(&s)
    }
}

impl From<Partition> for String {
    fn from(p: Partition) -> Self {
        p.to_string()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self.blocks.iter().map(|b| b.concat()).collect();
        f.write_str(&blocks.join("|"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    /// Discard a whole block.
    A,
    /// Merge two blocks.
    B,
    /// Drop one party from a block of two or more.
    C,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::A => "a",
            Self::B => "b",
            Self::C => "c",
        })
    }
}

/// A single coarsening step. Block indices refer to the canonical order of the source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum CoarseningMove {
    Discard { block: usize },
    Merge { first: usize, second: usize },
    DropParty { party: String },
}

impl CoarseningMove {
    pub fn kind(&self) -> MoveKind {
        match self {
            Self::Discard { .. } => MoveKind::A,
            Self::Merge { .. } => MoveKind::B,
            Self::DropParty { .. } => MoveKind::C,
        }
    }
}

impl fmt::Display for CoarseningMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Discard { block } => write!(f, "discard block {block}"),
            Self::Merge { first, second } => write!(f, "merge blocks {first} and {second}"),
            Self::DropParty { party } => write!(f, "drop party {party}"),
        }
    }
}

/// Every move that is valid on `p`.
pub fn moves(p: &Partition) -> Vec<CoarseningMove> {
    let k = p.len();
    let mut out = Vec::new();
    if k >= 2 {
        out.extend((0..k).map(|block| CoarseningMove::Discard { block }));
        for first in 0..k {
            for second in first + 1..k {
                out.push(CoarseningMove::Merge { first, second });
            }
        }
    }
    for b in p.blocks() {
        if b.len() >= 2 {
            out.extend(
                b.iter()
                    .map(|l| CoarseningMove::DropParty { party: l.clone() }),
            );
        }
    }
    out
}

pub fn apply_move(p: &Partition, m: &CoarseningMove) -> Result<Partition> {
    let k = p.len();
    let mut blocks = p.blocks.clone();
    match m {
        CoarseningMove::Discard { block } => {
            if *block >= k {
                return Err(Error::InvalidMove(format!("no block {block} in {p}")));
            }
            if k < 2 {
                return Err(Error::InvalidMove(format!(
                    "cannot discard the only block of {p}"
                )));
            }
            blocks.remove(*block);
        }
        CoarseningMove::Merge { first, second } => {
            if *first >= k || *second >= k || first == second {
                return Err(Error::InvalidMove(format!(
                    "cannot merge blocks {first} and {second} of {p}"
                )));
            }
            let (lo, hi) = if first < second {
                (*first, *second)
            } else {
                (*second, *first)
            };
            let moved = blocks.remove(hi);
            blocks[lo].extend(moved);
        }
        CoarseningMove::DropParty { party } => {
            let idx = blocks
                .iter()
                .position(|b| b.contains(party))
                .ok_or_else(|| Error::InvalidMove(format!("party {party} is not in {p}")))?;
            if blocks[idx].len() < 2 {
                return Err(Error::InvalidMove(format!(
                    "party {party} is a singleton block of {p}"
                )));
            }
            blocks[idx].retain(|l| l != party);
        }
    }
    Partition::from_owned(blocks)
}

/// Partitions as sorted block bitmasks over a fixed label universe.
type MaskPartition = Vec<u64>;

struct Universe {
    labels: Vec<String>,
}

impl Universe {
    fn of(p: &Partition) -> Self {
        Self {
            labels: p.parties(),
        }
    }

    fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut v: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        v.sort();
        let n = v.len();
        v.dedup();
        if v.len() != n {
            return Err(Error::Partition("duplicate labels".into()));
        }
        Ok(Self { labels: v })
    }

    fn encode(&self, p: &Partition) -> Option<MaskPartition> {
        let mut out = Vec::with_capacity(p.len());
        for b in p.blocks() {
            let mut m = 0u64;
            for l in b {
                m |= 1 << self.labels.binary_search(l).ok()?;
            }
            out.push(m);
        }
        out.sort_unstable();
        Some(out)
    }

    fn decode(&self, masks: &[u64]) -> Partition {
        let blocks: Vec<Vec<String>> = masks
            .iter()
            .map(|&m| {
                (0..self.labels.len())
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| self.labels[i].clone())
                    .collect()
            })
            .collect();
        Partition::from_owned(blocks).expect("masks are disjoint and nonempty")
    }
}

fn mask_successors(p: &[u64], kinds: &[MoveKind]) -> Vec<MaskPartition> {
    let k = p.len();
    let mut out = Vec::new();
    if k >= 2 && kinds.contains(&MoveKind::A) {
        for i in 0..k {
            let mut q = p.to_vec();
            q.remove(i);
            out.push(q);
        }
    }
    if k >= 2 && kinds.contains(&MoveKind::B) {
        for i in 0..k {
            for j in i + 1..k {
                let mut q: Vec<u64> = p
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| t != i && t != j)
                    .map(|(_, &m)| m)
                    .collect();
                q.push(p[i] | p[j]);
                q.sort_unstable();
                out.push(q);
            }
        }
    }
    if kinds.contains(&MoveKind::C) {
        for (i, &b) in p.iter().enumerate() {
            if b.count_ones() < 2 {
                continue;
            }
            let mut rest = b;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest ^= bit;
                let mut q = p.to_vec();
                q[i] = b ^ bit;
                q.sort_unstable();
                out.push(q);
            }
        }
    }
    out
}

/// BFS over the move graph from `start`; returns parent links keyed by reached node.
fn explore(
    start: &MaskPartition,
    kinds: &[MoveKind],
) -> HashMap<MaskPartition, Option<MaskPartition>> {
    let mut parent = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(cur) = queue.pop_front() {
        for next in mask_successors(&cur, kinds) {
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some(cur.clone()));
                queue.push_back(next);
            }
        }
    }
    parent
}

fn find_move(from: &Partition, to: &Partition) -> CoarseningMove {
    moves(from)
        .into_iter()
        .find(|m| apply_move(from, m).is_ok_and(|x| &x == to))
        .expect("BFS edge corresponds to a move")
}

const ALL_KINDS: [MoveKind; 3] = [MoveKind::A, MoveKind::B, MoveKind::C];

/// `Some(witness)` iff `r` is reachable from `p` by zero or more moves of the given kinds.
pub fn is_coarser_by(
    p: &Partition,
    r: &Partition,
    kinds: &[MoveKind],
) -> Option<Vec<CoarseningMove>> {
    let u = Universe::of(p);
    let start = u.encode(p)?;
    let goal = u.encode(r)?;
    let parent = explore(&start, kinds);
    if !parent.contains_key(&goal) {
        return None;
    }
    let mut chain = vec![goal.clone()];
    let mut cur = goal;
    while let Some(Some(prev)) = parent.get(&cur) {
        chain.push(prev.clone());
        cur = prev.clone();
    }
    chain.reverse();
    let parts: Vec<Partition> = chain.iter().map(|m| u.decode(m)).collect();
    Some(parts.windows(2).map(|w| find_move(&w[0], &w[1])).collect())
}

/// `Some(witness)` iff `p ≻ r` (reflexive-transitive closure of all moves).
/// Partitions mentioning a party that `p` lacks are never coarser.
pub fn is_coarser(p: &Partition, r: &Partition) -> Option<Vec<CoarseningMove>> {
    is_coarser_by(p, r, &ALL_KINDS)
}

/// All partitions strictly coarser than `p` using only the given kinds, sorted.
pub fn coarsenings(p: &Partition, kinds: &[MoveKind]) -> Result<Vec<Partition>> {
    let u = Universe::of(p);
    if u.labels.len() > MAX_PARTITION_LABELS {
        return Err(Error::Partition(format!(
            "{} parties exceed the enumeration guard of {MAX_PARTITION_LABELS}",
            u.labels.len()
        )));
    }
    let start = u.encode(p).expect("own labels");
    let mut out: Vec<Partition> = explore(&start, kinds)
        .into_keys()
        .filter(|m| *m != start)
        .map(|m| u.decode(&m))
        .collect();
    out.sort();
    Ok(out)
}

/// How a coarser partition is reached from a finer one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    /// Identical partitions.
    Same,
    /// Discarding blocks suffices.
    DiscardOnly,
    /// Merging blocks suffices (same party set).
    MergeOnly,
    /// Discards and merges, no party dropped from a block.
    DiscardMerge,
    /// At least one party must be dropped from inside a block.
    NeedsDrop,
}

impl PairClass {
    /// Reachable using discard and merge moves only.
    pub fn without_drop(self) -> bool {
        !matches!(self, Self::NeedsDrop)
    }
}

/// Classifies the pair in terms of block structure, on bitmask partitions.
/// `None` when `r` is not coarser than `p`.
pub fn classify_masks(p: &[u64], r: &[u64]) -> Option<PairClass> {
    let pu = p.iter().fold(0, |a, &b| a | b);
    let ru = r.iter().fold(0, |a, &b| a | b);
    if ru & !pu != 0 {
        return None;
    }
    // Each nonempty piece p_i ∩ R must sit inside one block of r.
    for &pb in p {
        let piece = pb & ru;
        if piece != 0 && !r.iter().any(|&rb| piece & !rb == 0) {
            return None;
        }
    }
    let mut ps = p.to_vec();
    let mut rs = r.to_vec();
    ps.sort_unstable();
    rs.sort_unstable();
    if ps == rs {
        return Some(PairClass::Same);
    }
    let unions = p.iter().all(|&pb| pb & ru == 0 || pb & !ru == 0);
    if !unions {
        return Some(PairClass::NeedsDrop);
    }
    if r.iter().all(|rb| p.contains(rb)) {
        Some(PairClass::DiscardOnly)
    } else if pu == ru {
        Some(PairClass::MergeOnly)
    } else {
        Some(PairClass::DiscardMerge)
    }
}

pub fn classify(p: &Partition, r: &Partition) -> Option<PairClass> {
    let u = Universe::of(p);
    let pm = u.encode(p)?;
    let rm = u.encode(r)?;
    classify_masks(&pm, &rm)
}

/// Partitions `T` obtained from `p` by discarding blocks and dropping parties (never merging),
/// with at least two blocks, whose parties meet at most one block of `r`.
///
/// `r` must be reachable from `p` without dropping parties from blocks.
pub fn xi_set(p: &Partition, r: &Partition) -> Result<Vec<Partition>> {
    match classify(p, r) {
        Some(c) if c.without_drop() => {}
        Some(_) => {
            return Err(Error::Precondition(format!(
                "{r} is coarser than {p} only through party drops"
            )))
        }
        None => return Err(Error::Precondition(format!("{r} is not coarser than {p}"))),
    }
    let u = Universe::of(p);
    if u.labels.len() > MAX_PARTITION_LABELS {
        return Err(Error::Partition(format!(
            "{} parties exceed the enumeration guard of {MAX_PARTITION_LABELS}",
            u.labels.len()
        )));
    }
    let pm = u.encode(p).expect("own labels");
    let rm = u.encode(r).expect("checked above");
    let mut out = Vec::new();
    // Choose, for every block of p, one of its subsets (possibly empty) to keep as a block.
    let mut choice: Vec<u64> = vec![0; pm.len()];
    fn walk(i: usize, pm: &[u64], rm: &[u64], choice: &mut Vec<u64>, out: &mut Vec<MaskPartition>) {
        if i == pm.len() {
            let blocks: Vec<u64> = choice.iter().copied().filter(|&m| m != 0).collect();
            if blocks.len() < 2 {
                return;
            }
            let all = blocks.iter().fold(0, |a, &b| a | b);
            if rm.iter().filter(|&&rb| rb & all != 0).count() <= 1 {
                let mut b = blocks;
                b.sort_unstable();
                out.push(b);
            }
            return;
        }
        let full = pm[i];
        // Enumerate all submasks of `full`, including 0.
        let mut sub = full;
        loop {
            choice[i] = sub;
            walk(i + 1, pm, rm, choice, out);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & full;
        }
    }
    let mut raw = Vec::new();
    walk(0, &pm, &rm, &mut choice, &mut raw);
    out.extend(raw.iter().map(|m| u.decode(m)));
    out.sort();
    out.dedup();
    Ok(out)
}

/// The members of [`xi_set`] built from whole blocks of `p` only: no party is dropped
/// from a kept block.
pub fn xi_set_whole_blocks(p: &Partition, r: &Partition) -> Result<Vec<Partition>> {
    Ok(xi_set(p, r)?
        .into_iter()
        .filter(|t| t.blocks().iter().all(|b| p.contains_block(b)))
        .collect())
}

/// All partitions of every nonempty subset of `labels`, sorted.
pub fn all_partitions<S: AsRef<str>>(labels: &[S]) -> Result<Vec<Partition>> {
    if labels.len() > MAX_PARTITION_LABELS {
        return Err(Error::Partition(format!(
            "{} labels exceed the enumeration guard of {MAX_PARTITION_LABELS}",
            labels.len()
        )));
    }
    let u = Universe::from_labels(labels)?;
    let n = u.labels.len();
    let mut out = Vec::new();
    for subset in 1u64..(1 << n) {
        let members: Vec<u64> = (0..n as u64)
            .filter(|i| subset >> i & 1 == 1)
            .map(|i| 1 << i)
            .collect();
        for blocks in set_partitions(&members) {
            out.push(u.decode(&blocks));
        }
    }
    out.sort();
    Ok(out)
}

/// Set partitions of singleton masks via restricted growth strings.
fn set_partitions(members: &[u64]) -> Vec<MaskPartition> {
    let n = members.len();
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let k = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![0u64; k];
        for (i, &g) in rgs.iter().enumerate() {
            blocks[g] |= members[i];
        }
        blocks.sort_unstable();
        out.push(blocks);
        // Advance to the next restricted growth string.
        let mut i = n;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let cap = rgs[..i].iter().max().copied().unwrap_or(0) + 1;
            if rgs[i] < cap {
                rgs[i] += 1;
                for x in &mut rgs[i + 1..] {
                    *x = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("CD|AB|E").to_string(), "AB|CD|E");
        assert_eq!(p("BA|C").to_string(), "AB|C");
        assert!(Partition::parse("A|A").is_err());
        assert!(Partition::parse("AB||C").is_err());
        assert!(Partition::parse("").is_err());
        let q = Partition::parse_with_labels("A1A2|B", &["A1", "A2", "B"]).unwrap();
        assert_eq!(
            q.blocks(),
            &[
                vec!["A1".to_string(), "A2".to_string()],
                vec!["B".to_string()]
            ]
        );
        assert!(Partition::parse_with_labels("AX", &["A"]).is_err());
    }

    #[test]
    fn move_examples() {
        assert_eq!(
            apply_move(&p("A|B|C|D"), &CoarseningMove::Discard { block: 3 }).unwrap(),
            p("A|B|C")
        );
        assert_eq!(
            apply_move(
                &p("A|B|C|D"),
                &CoarseningMove::Merge {
                    first: 0,
                    second: 2
                }
            )
            .unwrap(),
            p("AC|B|D")
        );
        assert_eq!(
            apply_move(&p("A|BC"), &CoarseningMove::DropParty { party: "C".into() }).unwrap(),
            p("A|B")
        );
    }

    #[test]
    fn invalid_moves() {
        assert!(apply_move(&p("A|BC"), &CoarseningMove::DropParty { party: "A".into() }).is_err());
        assert!(apply_move(&p("A|B"), &CoarseningMove::Discard { block: 5 }).is_err());
        assert!(apply_move(&p("AB"), &CoarseningMove::Discard { block: 0 }).is_err());
        assert!(apply_move(
            &p("A|B"),
            &CoarseningMove::Merge {
                first: 1,
                second: 1
            }
        )
        .is_err());
    }

    #[test]
    fn coarser_examples() {
        let w = is_coarser(&p("A|B|C|D|E"), &p("AB|CD")).unwrap();
        let mut cur = p("A|B|C|D|E");
        for m in &w {
            cur = apply_move(&cur, m).unwrap();
        }
        assert_eq!(cur, p("AB|CD"));
        assert!(is_coarser(&p("A|B"), &p("A|B|C")).is_none());
        assert_eq!(is_coarser(&p("A|B"), &p("A|B")).unwrap(), vec![]);
        // A chain mixing all three move kinds.
        for (x, y) in [
            ("A|B|C|D|E", "A|B|C|DE"),
            ("A|B|C|DE", "A|B|C|D"),
            ("A|B|C|D", "AB|C|D"),
            ("A|B|C|DE", "A|B|DE"),
        ] {
            assert!(is_coarser(&p(x), &p(y)).is_some(), "{x} -> {y}");
        }
    }

    #[test]
    fn classes() {
        assert_eq!(
            classify(&p("A|B|C|D"), &p("A|B|D")),
            Some(PairClass::DiscardOnly)
        );
        assert_eq!(
            classify(&p("A|B|C|D"), &p("AC|B|D")),
            Some(PairClass::MergeOnly)
        );
        assert_eq!(
            classify(&p("A|B|C|D"), &p("AB|C")),
            Some(PairClass::DiscardMerge)
        );
        assert_eq!(classify(&p("A|BC"), &p("A|B")), Some(PairClass::NeedsDrop));
        assert_eq!(classify(&p("A|B"), &p("AB|C")), None);
        assert_eq!(classify(&p("AB|C"), &p("A|B")), None);
    }

    #[test]
    fn xi_example() {
        let got: Vec<String> = xi_set(&p("A|B|CD|E"), &p("A|B"))
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect();
        let mut want: Vec<String> = [
            "CD|E", "A|CD|E", "B|CD|E", "A|CD", "B|CD", "B|C|E", "B|D|E", "A|D|E", "A|C|E", "A|E",
            "B|E", "A|C", "A|D", "B|C", "B|D", "C|E", "D|E",
        ]
        .iter()
        .map(|s| p(s).to_string())
        .collect();
        want.sort_by_key(|s| p(s));
        assert_eq!(got, want);
    }

    #[test]
    fn xi_small_cases() {
        let x = xi_set(&p("A|B|C"), &p("A|B")).unwrap();
        assert_eq!(x, vec![p("A|C"), p("B|C")]);
        assert!(xi_set(&p("A|B|C"), &p("A|B|C")).unwrap().is_empty());
        assert_eq!(xi_set(&p("A|B|C"), &p("A|BC")).unwrap(), vec![p("B|C")]);
        assert!(matches!(
            xi_set(&p("A|BC"), &p("A|B")),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            xi_set(&p("A|B"), &p("A|C")),
            Err(Error::Precondition(_))
        ));
    }

    fn bell(n: usize) -> usize {
        // Bell triangle.
        let mut row = vec![1usize];
        for _ in 0..n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                next.push(next.last().unwrap() + x);
            }
            row = next;
        }
        row[0]
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn all_partitions_counts() {
        let two = all_partitions(&["A", "B"]).unwrap();
        assert_eq!(two, vec![p("A"), p("A|B"), p("AB"), p("B")]);
        assert_eq!(all_partitions(&["A", "B", "C"]).unwrap().len(), 14);
        for n in 1..=6 {
            let labels: Vec<String> = (0..n).map(crate::state::letter).collect();
            let want: usize = (1..=n).map(|k| binom(n, k) * bell(k)).sum();
            assert_eq!(all_partitions(&labels).unwrap().len(), want, "n={n}");
        }
        assert_eq!(
            all_partitions(&["A", "B", "C", "D", "E"]).unwrap().len(),
            202
        );
        let seven: Vec<String> = (0..7).map(crate::state::letter).collect();
        assert!(all_partitions(&seven).is_err());
    }

    #[test]
    fn bfs_matches_structure_on_four_parties() {
        let all = all_partitions(&["A", "B", "C", "D"]).unwrap();
        for x in &all {
            for y in &all {
                let reach = is_coarser(x, y).is_some();
                assert_eq!(reach, classify(x, y).is_some(), "{x} -> {y}");
                if let Some(c) = classify(x, y) {
                    let ab = is_coarser_by(x, y, &[MoveKind::A, MoveKind::B]).is_some();
                    assert_eq!(ab, c.without_drop(), "{x} -> {y}");
                    let a = is_coarser_by(x, y, &[MoveKind::A]).is_some();
                    assert_eq!(
                        a,
                        matches!(c, PairClass::Same | PairClass::DiscardOnly),
                        "{x} -> {y}"
                    );
                    let b = is_coarser_by(x, y, &[MoveKind::B]).is_some();
                    assert_eq!(
                        b,
                        matches!(c, PairClass::Same | PairClass::MergeOnly),
                        "{x} -> {y}"
                    );
                }
            }
        }
    }

    #[test]
    fn coarsenings_of_three() {
        let c = coarsenings(&p("A|B|C"), &ALL_KINDS).unwrap();
        // Everything except A|B|C itself.
        assert_eq!(c.len(), 13);
        let ab = coarsenings(&p("A|B|C"), &[MoveKind::A, MoveKind::B]).unwrap();
        assert!(ab.contains(&p("AB|C")) && ab.contains(&p("A")) && !ab.is_empty());
    }

    #[test]
    fn serde_uses_text_form() {
        let x = p("AB|C");
        assert_eq!(serde_json::to_string(&x).unwrap(), "\"AB|C\"");
        let back: Partition = serde_json::from_str("\"C|BA\"").unwrap();
        assert_eq!(back, x);
    }
}
