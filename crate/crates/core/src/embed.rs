//! Minor embedding of small logical Ising problems onto the FG lattice.
//!
//! Each logical spin becomes a path of physical sites (a chain) held together
//! by strong antiferromagnetic couplings. Data signs alternate along a chain,
//! so an intact chain has all sign-corrected spins equal. Every logical edge
//! is realised at one contact gap between two chains, the only place a
//! programmable (tunable) coupling sits. All hardware couplings are ≥ 0; the
//! sign of a logical coupling comes from the data signs at the contact.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capnet::{Gap, GapKind, GapMap, GapMaterial, Site};
use crate::ising::{ground_states_bruteforce, IsingModel, Spin, BRUTE_FORCE_LIMIT};
use crate::{Error, Result};

/// Search nodes allowed per layout attempt before giving up.
const SEARCH_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BondType {
    /// Consecutive sites of one chain, coupled at the chain strength.
    Fixed { chain: usize },
    /// No coupling.
    Absent,
    /// Programmable coupling realising logical edge `(a, b)`, `a < b`.
    Tunable { a: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub gap: Gap,
    pub bond: BondType,
}

/// Fabrication directive for a gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Directive {
    Oxide,
    AirGap,
    ControlQubit,
}

impl From<BondType> for Directive {
    fn from(b: BondType) -> Self {
        match b {
            BondType::Fixed { .. } => Directive::Oxide,
            BondType::Absent => Directive::AirGap,
            BondType::Tunable { .. } => Directive::ControlQubit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskEntry {
    pub kind: GapKind,
    pub row: usize,
    pub col: usize,
    pub directive: Directive,
}

/// Per-gap directives for every gap of the lattice. The JSON form is also a
/// valid capacitance gap map (control-qubit gaps read as oxide).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutMask {
    pub lateral: Directive,
    pub diagonal: Directive,
    pub gaps: Vec<MaskEntry>,
}

impl LayoutMask {
    pub fn from_bonds(bonds: &[Bond]) -> Self {
        LayoutMask {
            lateral: Directive::AirGap,
            diagonal: Directive::AirGap,
            gaps: bonds
                .iter()
                .map(|b| MaskEntry { kind: b.gap.kind, row: b.gap.row, col: b.gap.col, directive: b.bond.into() })
                .collect(),
        }
    }

    pub fn directive(&self, gap: Gap) -> Option<Directive> {
        self.gaps.iter().find(|e| e.kind == gap.kind && e.row == gap.row && e.col == gap.col).map(|e| e.directive)
    }

    pub fn to_gap_map(&self) -> GapMap {
        let material = |d: Directive| match d {
            Directive::Oxide | Directive::ControlQubit => GapMaterial::Oxide,
            Directive::AirGap => GapMaterial::Air,
        };
        GapMap {
            lateral: material(self.lateral),
            diagonal: material(self.diagonal),
            gaps: self
                .gaps
                .iter()
                .map(|e| crate::capnet::GapAssignment { kind: e.kind, row: e.row, col: e.col, material: material(e.directive) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub rows: usize,
    pub cols: usize,
    /// Ordered path of sites per logical spin.
    pub chains: Vec<Vec<Site>>,
    /// Data sign of each chain site, aligned with `chains`.
    pub signs: Vec<Vec<Spin>>,
    /// One entry per gap of the lattice, in `Gap::all` order.
    pub bonds: Vec<Bond>,
    /// `J_F` per logical spin.
    pub chain_strengths: Vec<f64>,
}

impl Embedding {
    pub fn logical_count(&self) -> usize {
        self.chains.len()
    }

    /// Used sites in raster order; position in this list is the physical
    /// qubit index.
    pub fn sites(&self) -> Vec<Site> {
        let set: BTreeSet<Site> = self.chains.iter().flatten().copied().collect();
        set.into_iter().collect()
    }

    pub fn physical_count(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn physical_index(&self) -> BTreeMap<Site, usize> {
        self.sites().into_iter().enumerate().map(|(k, s)| (s, k)).collect()
    }

    /// `(chain, position)` of every used site.
    pub fn owner(&self) -> BTreeMap<Site, (usize, usize)> {
        let mut out = BTreeMap::new();
        for (a, chain) in self.chains.iter().enumerate() {
            for (k, s) in chain.iter().enumerate() {
                out.insert(*s, (a, k));
            }
        }
        out
    }

    pub fn sign(&self, site: Site) -> Option<Spin> {
        self.owner().get(&site).map(|&(a, k)| self.signs[a][k])
    }

    pub fn bond(&self, gap: Gap) -> Option<BondType> {
        self.bonds.iter().find(|b| b.gap == gap).map(|b| b.bond)
    }

    pub fn tunable_gaps(&self) -> Vec<(Gap, usize, usize)> {
        self.bonds
            .iter()
            .filter_map(|b| match b.bond {
                BondType::Tunable { a, b: c } => Some((b.gap, a, c)),
                _ => None,
            })
            .collect()
    }

    pub fn layout_mask(&self) -> LayoutMask {
        LayoutMask::from_bonds(&self.bonds)
    }
}

/// Lower bound `|h_i| + Σ_j |J_ij|` of the chain condition per logical spin.
pub fn chain_bounds(logical: &IsingModel) -> Vec<f64> {
    let mut out: Vec<f64> = logical.fields().iter().map(|h| h.abs()).collect();
    for (&(i, j), &v) in logical.couplings() {
        out[i] += v.abs();
        out[j] += v.abs();
    }
    out
}

/// `J_F(i) = (1 + margin)(|h_i| + Σ_j |J_ij|)`. A zero value marks a
/// degenerate chain (isolated, field-free logical spin).
pub fn chain_strengths(logical: &IsingModel, margin: f64) -> Result<Vec<f64>> {
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(Error::InvalidParameter(format!("margin must be finite and >= 0, got {margin}")));
    }
    Ok(chain_bounds(logical).into_iter().map(|b| (1.0 + margin) * b).collect())
}

fn alternating(len: usize, head: Spin) -> Vec<Spin> {
    (0..len).map(|k| if k % 2 == 0 { head } else { -head }).collect()
}

fn sign_of(v: f64) -> Spin {
    if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Straight and once-bent lateral paths of 1..=max_len sites inside the
/// `rows × cols` region, longest first, each listed once.
fn candidate_paths(rows: usize, cols: usize, max_len: usize) -> Vec<Vec<Site>> {
    const DIRS: [(isize, isize); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
    let inside = |r: isize, c: isize| r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols;
    let mut set = BTreeSet::new();
    for r0 in 0..rows as isize {
        for c0 in 0..cols as isize {
            set.insert(vec![Site::new(r0 as usize, c0 as usize)]);
            for d1 in DIRS {
                for d2 in DIRS.iter().filter(|d| d.0 * d1.0 + d.1 * d1.1 == 0).copied().chain([d1]) {
                    for a in 1..max_len {
                        for b in 0..max_len - a {
                            if b > 0 && d2 == d1 {
                                continue;
                            }
                            let mut path = vec![(r0, c0)];
                            for s in 1..=a {
                                path.push((r0 + d1.0 * s as isize, c0 + d1.1 * s as isize));
                            }
                            let (re, ce) = *path.last().unwrap();
                            for s in 1..=b {
                                path.push((re + d2.0 * s as isize, ce + d2.1 * s as isize));
                            }
                            if path.iter().all(|&(r, c)| inside(r, c)) {
                                let fwd: Vec<Site> = path.iter().map(|&(r, c)| Site::new(r as usize, c as usize)).collect();
                                let mut rev = fwd.clone();
                                rev.reverse();
                                set.insert(fwd.min(rev));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut out: Vec<Vec<Site>> = set.into_iter().collect();
    out.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x.cmp(y)));
    out
}

/// Sign product required at the contact of logical spins `a, b`, or `None`
/// when they are uncoupled.
fn required_sign(logical: &IsingModel, a: usize, b: usize) -> Option<Spin> {
    let j = logical.coupling(a, b);
    (j != 0.0).then(|| sign_of(j))
}

fn contacts(chain_a: &[Site], signs_a: &[Spin], chain_b: &[Site], signs_b: &[Spin]) -> Vec<(Site, Site, Spin)> {
    let mut out = Vec::new();
    for (p, &sa) in chain_a.iter().zip(signs_a) {
        for (q, &sb) in chain_b.iter().zip(signs_b) {
            if p.is_adjacent(q) {
                out.push((*p, *q, sa * sb));
            }
        }
    }
    out
}

struct Search<'a> {
    logical: &'a IsingModel,
    candidates: Vec<Vec<Site>>,
    sign_aware: bool,
    occupied: BTreeSet<Site>,
    chains: Vec<Vec<Site>>,
    signs: Vec<Vec<Spin>>,
    nodes: usize,
}

impl Search<'_> {
    fn place(&mut self, k: usize) -> bool {
        let n = self.logical.n();
        if k == n {
            return true;
        }
        for ci in 0..self.candidates.len() {
            if self.candidates[ci].iter().any(|s| self.occupied.contains(s)) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > SEARCH_BUDGET {
                return false;
            }
            let cand = self.candidates[ci].clone();
            let heads: &[Spin] = if self.sign_aware { &[1, -1] } else { &[1] };
            for &head in heads {
                let signs = alternating(cand.len(), head);
                let ok = (0..k).all(|b| match required_sign(self.logical, b, k) {
                    None => true,
                    Some(want) => contacts(&self.chains[b], &self.signs[b], &cand, &signs)
                        .iter().any(|&(_, _, s)| !self.sign_aware || s == want),
                });
                if !ok {
                    continue;
                }
                self.occupied.extend(cand.iter().copied());
                self.chains.push(cand.clone());
                self.signs.push(signs);
                if self.place(k + 1) {
                    return true;
                }
                self.chains.pop();
                self.signs.pop();
                for s in &cand {
                    self.occupied.remove(s);
                }
            }
        }
        false
    }
}

fn search_layout(
    logical: &IsingModel,
    region: (usize, usize),
    sign_aware: bool,
) -> Option<(Vec<Vec<Site>>, Vec<Vec<Spin>>)> {
    let n = logical.n();
    let mut s = Search {
        logical,
        candidates: candidate_paths(region.0, region.1, n),
        sign_aware,
        occupied: BTreeSet::new(),
        chains: Vec::new(),
        signs: Vec::new(),
        nodes: 0,
    };
    s.place(0).then_some((s.chains, s.signs))
}

/// Embeds a logical problem on the complete-graph layout: every coupled pair
/// of chains touches at a gap with the data-sign product the coupling needs.
///
/// Layouts are searched deterministically over straight and once-bent
/// lateral paths of at most `n` sites, longest first, within the top-left
/// `min(rows, n) × min(cols, n)` block and then the whole lattice. When no
/// layout satisfies every sign, the sign-blind layout is repaired by one-site
/// chain extensions.
pub fn embed_complete_graph(logical: &IsingModel, rows: usize, cols: usize, margin: f64) -> Result<Embedding> {
    let n = logical.n();
    if n == 0 {
        return Err(Error::InvalidParameter("logical problem has no spins".into()));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidLattice(format!("lattice must be at least 1x1, got {rows}x{cols}")));
    }
    let strengths = chain_strengths(logical, margin)?;
    let mut regions = vec![(rows.min(n), cols.min(n))];
    if regions[0] != (rows, cols) {
        regions.push((rows, cols));
    }
    for &region in &regions {
        if let Some((chains, signs)) = search_layout(logical, region, true) {
            return assemble(logical, rows, cols, chains, signs, strengths);
        }
    }
    let mut blind = false;
    for &region in &regions {
        if let Some((chains, signs)) = search_layout(logical, region, false) {
            blind = true;
            if let Ok(e) = embed_with_chains(logical, rows, cols, chains, signs, margin) {
                return Ok(e);
            }
        }
    }
    if blind {
        Err(Error::EmbeddingIncomplete("no layout realises every coupling sign, even with chain extensions".into()))
    } else {
        Err(Error::Capacity { n, rows, cols, need: n })
    }
}

/// Embeds on caller-supplied chains and data signs. Couplings whose sign is
/// not available at any contact get a one-site extension at a chain end.
pub fn embed_with_chains(
    logical: &IsingModel,
    rows: usize,
    cols: usize,
    mut chains: Vec<Vec<Site>>,
    mut signs: Vec<Vec<Spin>>,
    margin: f64,
) -> Result<Embedding> {
    let n = logical.n();
    if chains.len() != n || signs.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: chains.len().min(signs.len()) });
    }
    let strengths = chain_strengths(logical, margin)?;
    for a in 0..n {
        for b in a + 1..n {
            let Some(want) = required_sign(logical, a, b) else { continue };
            if contacts(&chains[a], &signs[a], &chains[b], &signs[b]).iter().any(|&(_, _, s)| s == want) {
                continue;
            }
            if !extend_for(&mut chains, &mut signs, rows, cols, a, b, want) {
                return Err(Error::EmbeddingIncomplete(format!(
                    "logical edge ({a}, {b}) needs sign {want} at a contact and no extension site is free"
                )));
            }
        }
    }
    assemble(logical, rows, cols, chains, signs, strengths)
}

/// Adds one free site at the tail or head of chain `a` (then `b`) that
/// touches the other chain with the wanted sign product.
fn extend_for(
    chains: &mut [Vec<Site>],
    signs: &mut [Vec<Spin>],
    rows: usize,
    cols: usize,
    a: usize,
    b: usize,
    want: Spin,
) -> bool {
    let used: BTreeSet<Site> = chains.iter().flatten().copied().collect();
    for (grow, other) in [(a, b), (b, a)] {
        for at_tail in [true, false] {
            let chain = &chains[grow];
            let (end, end_sign) = if at_tail {
                (*chain.last().unwrap(), *signs[grow].last().unwrap())
            } else {
                (chain[0], signs[grow][0])
            };
            let new_sign = -end_sign;
            let mut options = Vec::new();
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    if (dr, dc) == (0, 0) || (dr != 0 && dc != 0) {
                        continue;
                    }
                    let (r, c) = (end.row as isize + dr, end.col as isize + dc);
                    if r < 0 || c < 0 || r as usize >= rows || c as usize >= cols {
                        continue;
                    }
                    options.push(Site::new(r as usize, c as usize));
                }
            }
            options.sort();
            for x in options {
                if used.contains(&x) {
                    continue;
                }
                let hit = chains[other].iter().zip(&signs[other]).any(|(q, &sq)| x.is_adjacent(q) && new_sign * sq == want);
                if hit {
                    if at_tail {
                        chains[grow].push(x);
                        signs[grow].push(new_sign);
                    } else {
                        chains[grow].insert(0, x);
                        signs[grow].insert(0, new_sign);
                    }
                    return true;
                }
            }
        }
    }
    false
}

fn assemble(
    logical: &IsingModel,
    rows: usize,
    cols: usize,
    chains: Vec<Vec<Site>>,
    signs: Vec<Vec<Spin>>,
    strengths: Vec<f64>,
) -> Result<Embedding> {
    let n = logical.n();
    let mut chosen: BTreeMap<Gap, (usize, usize)> = BTreeMap::new();
    for a in 0..n {
        for b in a + 1..n {
            let Some(want) = required_sign(logical, a, b) else { continue };
            let (p, q, _) = contacts(&chains[a], &signs[a], &chains[b], &signs[b])
                .into_iter()
                .find(|&(_, _, s)| s == want)
                .ok_or_else(|| Error::EmbeddingIncomplete(format!("chains {a} and {b} have no usable contact")))?;
            chosen.insert(Gap::between(p, q).expect("contact sites are adjacent"), (a, b));
        }
    }
    let mut owner = BTreeMap::new();
    for (a, chain) in chains.iter().enumerate() {
        for (k, s) in chain.iter().enumerate() {
            owner.insert(*s, (a, k));
        }
    }
    let bonds = Gap::all(rows, cols)
        .into_iter()
        .map(|gap| {
            let (p, q) = gap.endpoints();
            let bond = if let Some(&(a, b)) = chosen.get(&gap) {
                BondType::Tunable { a, b }
            } else {
                match (owner.get(&p), owner.get(&q)) {
                    (Some(&(a, k)), Some(&(b, l))) if a == b && k.abs_diff(l) == 1 => BondType::Fixed { chain: a },
                    _ => BondType::Absent,
                }
            };
            Bond { gap, bond }
        })
        .collect();
    Ok(Embedding { rows, cols, chains, signs, bonds, chain_strengths: strengths })
}

/// Physical model over the used sites (raster order) and its layout mask.
pub fn compile_physical(emb: &Embedding, logical: &IsingModel) -> Result<(IsingModel, LayoutMask)> {
    let n = logical.n();
    if emb.logical_count() != n || emb.chain_strengths.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: emb.logical_count() });
    }
    let index = emb.physical_index();
    let owner = emb.owner();
    let mut phys = IsingModel::new(index.len()).with_unit(logical.unit());
    for (a, chain) in emb.chains.iter().enumerate() {
        let share = logical.field(a) / chain.len() as f64;
        for (k, s) in chain.iter().enumerate() {
            phys.set_field(index[s], emb.signs[a][k] as f64 * share)?;
        }
    }
    let mut realised = BTreeSet::new();
    for bond in &emb.bonds {
        let (p, q) = bond.gap.endpoints();
        match bond.bond {
            BondType::Absent => {}
            BondType::Fixed { chain } => {
                phys.set_coupling(index[&p], index[&q], emb.chain_strengths[chain])?;
            }
            BondType::Tunable { a, b } => {
                let (&(ca, ka), &(cb, kb)) = match (owner.get(&p), owner.get(&q)) {
                    (Some(x), Some(y)) => (x, y),
                    _ => return Err(Error::EmbeddingIncomplete(format!("tunable gap {:?} touches an unused site", bond.gap))),
                };
                let product = (emb.signs[ca][ka] * emb.signs[cb][kb]) as f64;
                let value = logical.coupling(a, b) * product;
                if value < 0.0 || !((ca, cb) == (a, b) || (ca, cb) == (b, a)) {
                    return Err(Error::EmbeddingIncomplete(format!("tunable gap {:?} cannot realise edge ({a}, {b})", bond.gap)));
                }
                phys.set_coupling(index[&p], index[&q], value)?;
                realised.insert((a.min(b), a.max(b)));
            }
        }
    }
    if let Some((&(a, b), _)) = logical.couplings().iter().find(|(k, _)| !realised.contains(k)) {
        return Err(Error::EmbeddingIncomplete(format!("logical edge ({a}, {b}) has no tunable gap")));
    }
    Ok((phys, emb.layout_mask()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    pub spins: Vec<Spin>,
    pub intact: Vec<bool>,
}

impl Decoded {
    pub fn all_intact(&self) -> bool {
        self.intact.iter().all(|&x| x)
    }
}

/// Majority vote of sign-corrected spins per chain; ties give `+1` and a
/// broken flag.
pub fn decode(emb: &Embedding, physical: &[Spin]) -> Result<Decoded> {
    let index = emb.physical_index();
    if physical.len() != index.len() {
        return Err(Error::SizeMismatch { expected: index.len(), got: physical.len() });
    }
    let mut spins = Vec::with_capacity(emb.logical_count());
    let mut intact = Vec::with_capacity(emb.logical_count());
    for (chain, signs) in emb.chains.iter().zip(&emb.signs) {
        let values: Vec<i32> = chain.iter().zip(signs).map(|(s, &g)| (g * physical[index[s]]) as i32).collect();
        let vote: i32 = values.iter().sum();
        spins.push(if vote >= 0 { 1 } else { -1 });
        intact.push(values.iter().all(|&v| v == values[0]));
    }
    Ok(Decoded { spins, intact })
}

/// Result of the exhaustive ground-state check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateCheck {
    pub physical_ground_states: usize,
    pub broken: usize,
    /// Decoded states that are not logical ground states.
    pub mismatched: usize,
    /// Decoded set equals the logical ground-state set.
    pub sets_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub violations: Vec<String>,
    /// Chains whose strength sits exactly on the bound.
    pub non_strict: Vec<usize>,
    /// Chains with a zero bound (isolated, field-free logical spins).
    pub degenerate: Vec<usize>,
    pub ground_states: Option<GroundStateCheck>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn structural_violations(emb: &Embedding, logical: &IsingModel) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (a, (chain, signs)) in emb.chains.iter().zip(&emb.signs).enumerate() {
        if chain.is_empty() || chain.len() != signs.len() {
            out.push(format!("chain {a} is empty or its signs are misaligned"));
            continue;
        }
        for s in chain {
            if s.row >= emb.rows || s.col >= emb.cols {
                out.push(format!("chain {a} site {s:?} lies outside the lattice"));
            }
            if !seen.insert(*s) {
                out.push(format!("site {s:?} belongs to more than one chain"));
            }
        }
        for k in 1..chain.len() {
            if !chain[k - 1].is_adjacent(&chain[k]) {
                out.push(format!("chain {a} is not connected between positions {} and {k}", k - 1));
            }
        }
        for (k, &g) in signs.iter().enumerate() {
            let want = if k % 2 == 0 { signs[0] } else { -signs[0] };
            if g != want || g.abs() != 1 {
                out.push(format!("chain {a} sign at position {k} does not alternate"));
            }
        }
    }
    let all = Gap::all(emb.rows, emb.cols);
    let listed: Vec<Gap> = emb.bonds.iter().map(|b| b.gap).collect();
    if listed != all {
        out.push("bond list does not cover every gap exactly once".into());
    }
    let owner = emb.owner();
    let mut tunable: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for b in &emb.bonds {
        let (p, q) = b.gap.endpoints();
        let (op, oq) = (owner.get(&p).copied(), owner.get(&q).copied());
        let consecutive = matches!((op, oq), (Some((x, k)), Some((y, l))) if x == y && k.abs_diff(l) == 1);
        match b.bond {
            BondType::Fixed { chain } => {
                if !consecutive || op.map(|o| o.0) != Some(chain) {
                    out.push(format!("fixed bond at {:?} does not join consecutive sites of chain {chain}", b.gap));
                }
            }
            BondType::Tunable { a, b: c } => {
                let ends = (op.map(|o| o.0), oq.map(|o| o.0));
                if ends != (Some(a), Some(c)) && ends != (Some(c), Some(a)) {
                    out.push(format!("tunable bond at {:?} does not join chains {a} and {c}", b.gap));
                } else {
                    let product = emb.signs[op.unwrap().0][op.unwrap().1] * emb.signs[oq.unwrap().0][oq.unwrap().1];
                    if logical.coupling(a, c) * product as f64 <= 0.0 {
                        out.push(format!("tunable bond at {:?} has the wrong sign product for ({a}, {c})", b.gap));
                    }
                }
                *tunable.entry((a.min(c), a.max(c))).or_default() += 1;
            }
            BondType::Absent => {
                if consecutive {
                    out.push(format!("consecutive chain sites at {:?} are not bonded", b.gap));
                }
            }
        }
    }
    for (&(a, b), &v) in logical.couplings() {
        if v != 0.0 && tunable.get(&(a, b)).copied() != Some(1) {
            out.push(format!("logical edge ({a}, {b}) has {} tunable gaps", tunable.get(&(a, b)).copied().unwrap_or(0)));
        }
    }
    for &(a, b) in tunable.keys() {
        if logical.coupling(a, b) == 0.0 {
            out.push(format!("tunable gap between uncoupled chains {a} and {b}"));
        }
    }
    out
}

/// Checks the chain condition, the structural invariants, consistency of the
/// physical model with the compiled one, and (when small enough) that every
/// physical ground state decodes to a logical ground state.
pub fn verify_embedding(emb: &Embedding, logical: &IsingModel, physical: &IsingModel) -> Result<VerificationReport> {
    let n = logical.n();
    if emb.logical_count() != n {
        return Err(Error::SizeMismatch { expected: n, got: emb.logical_count() });
    }
    let mut violations = structural_violations(emb, logical);
    let bounds = chain_bounds(logical);
    let mut non_strict = Vec::new();
    let mut degenerate = Vec::new();
    for (a, (&jf, &bound)) in emb.chain_strengths.iter().zip(&bounds).enumerate() {
        let tol = 1e-12 * bound.max(f64::MIN_POSITIVE);
        if bound == 0.0 {
            degenerate.push(a);
        } else if (jf - bound).abs() <= tol {
            non_strict.push(a);
        } else if jf < bound {
            violations.push(format!("chain {a}: J_F = {jf} is below the bound {bound}"));
        }
    }
    match compile_physical(emb, logical) {
        Ok((expected, _)) => {
            if expected.n() != physical.n() {
                violations.push(format!("physical model has {} spins, embedding uses {}", physical.n(), expected.n()));
            } else {
                let scale = 1e-12 * (1.0 + expected.magnitude());
                let keys: BTreeSet<(usize, usize)> =
                    expected.couplings().keys().chain(physical.couplings().keys()).copied().collect();
                if keys.iter().any(|&(i, j)| (expected.coupling(i, j) - physical.coupling(i, j)).abs() > scale)
                    || (0..expected.n()).any(|i| (expected.field(i) - physical.field(i)).abs() > scale)
                {
                    violations.push("physical model differs from the compiled model".into());
                }
            }
        }
        Err(e) => violations.push(e.to_string()),
    }
    let ground_states = if physical.n() <= BRUTE_FORCE_LIMIT && violations.is_empty() {
        let phys = ground_states_bruteforce(physical)?;
        let logical_set: BTreeSet<Vec<Spin>> = ground_states_bruteforce(logical)?.states.into_iter().collect();
        let decoded: Vec<Decoded> = phys.states.par_iter().map(|s| decode(emb, s)).collect::<Result<_>>()?;
        let broken = decoded.iter().filter(|d| !d.all_intact()).count();
        let mismatched = decoded.iter().filter(|d| !logical_set.contains(&d.spins)).count();
        let decoded_set: BTreeSet<Vec<Spin>> = decoded.into_iter().map(|d| d.spins).collect();
        Some(GroundStateCheck {
            physical_ground_states: phys.states.len(),
            broken,
            mismatched,
            sets_equal: decoded_set == logical_set,
        })
    } else {
        None
    };
    if let Some(g) = &ground_states {
        if g.broken > 0 {
            violations.push(format!("{} physical ground states have broken chains", g.broken));
        }
        if g.mismatched > 0 || !g.sets_equal {
            violations.push("decoded physical ground states differ from the logical ground states".into());
        }
    }
    Ok(VerificationReport { violations, non_strict, degenerate, ground_states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_logical(n: usize, seed: u64) -> IsingModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = IsingModel::new(n);
        for i in 0..n {
            m.set_field(i, rng.gen_range(-0.3..0.3)).unwrap();
            for j in i + 1..n {
                m.set_coupling(i, j, rng.gen_range(-0.3..0.3)).unwrap();
            }
        }
        m
    }

    /// Pairwise adjacency found by scanning every gap of the lattice.
    fn adjacent_pairs(emb: &Embedding) -> BTreeSet<(usize, usize)> {
        let owner = emb.owner();
        let mut out = BTreeSet::new();
        for g in Gap::all(emb.rows, emb.cols) {
            let (p, q) = g.endpoints();
            if let (Some(&(a, _)), Some(&(b, _))) = (owner.get(&p), owner.get(&q)) {
                if a != b {
                    out.insert((a.min(b), a.max(b)));
                }
            }
        }
        out
    }

    #[test]
    fn single_spin_uses_one_site() {
        let mut m = IsingModel::new(1);
        m.set_field(0, 0.2).unwrap();
        let e = embed_complete_graph(&m, 3, 3, 0.25).unwrap();
        assert_eq!(e.chains, vec![vec![Site::new(0, 0)]]);
        assert!(e.bonds.iter().all(|b| b.bond == BondType::Absent));
    }

    #[test]
    fn pair_on_two_sites() {
        let mut m = IsingModel::new(2);
        m.set_coupling(0, 1, -0.2).unwrap();
        let e = embed_complete_graph(&m, 1, 2, 0.25).unwrap();
        assert_eq!(e.physical_count(), 2);
        assert_eq!(e.tunable_gaps().len(), 1);
    }

    #[test]
    fn k4_on_4x4_structure() {
        for seed in 0..10 {
            let m = random_logical(4, seed);
            let e = embed_complete_graph(&m, 4, 4, 0.25).unwrap();
            assert_eq!(e.chains.len(), 4);
            assert_eq!(e.tunable_gaps().len(), 6);
            assert_eq!(adjacent_pairs(&e).len(), 6);
            assert!(e.chains.iter().all(|c| c.len() <= 4));
            assert!(structural_violations(&e, &m).is_empty(), "{:?}", structural_violations(&e, &m));
        }
    }

    #[test]
    fn capacity_error_reports_dims() {
        let m = random_logical(4, 1);
        match embed_complete_graph(&m, 1, 3, 0.25) {
            Err(Error::Capacity { need, .. }) => assert_eq!(need, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chain_strength_arithmetic() {
        let mut m = IsingModel::new(3);
        m.set_field(0, 0.5).unwrap();
        m.set_coupling(0, 1, 0.3).unwrap();
        m.set_coupling(0, 2, -0.2).unwrap();
        let s = chain_strengths(&m, 0.1).unwrap();
        assert!((s[0] - 1.1).abs() < 1e-12);
        let iso = IsingModel::new(1);
        assert_eq!(chain_strengths(&iso, 0.1).unwrap(), vec![0.0]);
        assert!(chain_strengths(&m, -0.1).is_err());
    }

    #[test]
    fn fields_split_with_signs() {
        let mut m = IsingModel::new(1);
        m.set_field(0, 0.3).unwrap();
        let chain = vec![Site::new(0, 0), Site::new(0, 1), Site::new(0, 2)];
        let e = embed_with_chains(&m, 1, 3, vec![chain], vec![vec![1, -1, 1]], 0.25).unwrap();
        let (p, _) = compile_physical(&e, &m).unwrap();
        for (k, want) in [0.1, -0.1, 0.1].iter().enumerate() {
            assert!((p.field(k) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn af_chain_ground_states_alternate() {
        let mut m = IsingModel::new(1);
        m.set_field(0, 0.0).unwrap();
        let chain = vec![Site::new(0, 0), Site::new(0, 1), Site::new(0, 2)];
        let mut e = embed_with_chains(&m, 1, 3, vec![chain], vec![vec![1, -1, 1]], 0.25).unwrap();
        e.chain_strengths = vec![1.0];
        let (p, _) = compile_physical(&e, &m).unwrap();
        let g = ground_states_bruteforce(&p).unwrap();
        assert_eq!(g.states, vec![vec![-1, 1, -1], vec![1, -1, 1]]);
    }

    #[test]
    fn unrealisable_sign_gets_an_extension() {
        let mut m = IsingModel::new(2);
        m.set_coupling(0, 1, -0.2).unwrap();
        let chains = vec![vec![Site::new(0, 0)], vec![Site::new(0, 1)]];
        let e = embed_with_chains(&m, 2, 2, chains, vec![vec![1], vec![1]], 0.25).unwrap();
        assert_eq!(e.physical_count(), 3);
        let (p, _) = compile_physical(&e, &m).unwrap();
        let report = verify_embedding(&e, &m, &p).unwrap();
        assert!(report.is_clean(), "{report:?}");
        let none_free = embed_with_chains(&m, 1, 2, vec![vec![Site::new(0, 0)], vec![Site::new(0, 1)]], vec![vec![1], vec![1]], 0.25);
        assert!(matches!(none_free, Err(Error::EmbeddingIncomplete(_))));
    }

    #[test]
    fn decode_examples() {
        let mut m = IsingModel::new(1);
        m.set_field(0, 0.1).unwrap();
        let e = embed_with_chains(&m, 1, 3, vec![vec![Site::new(0, 0), Site::new(0, 1), Site::new(0, 2)]], vec![vec![1, -1, 1]], 0.25).unwrap();
        let d = decode(&e, &[1, -1, 1]).unwrap();
        assert_eq!((d.spins, d.intact), (vec![1], vec![true]));
        let e2 = embed_with_chains(&m, 1, 2, vec![vec![Site::new(0, 0), Site::new(0, 1)]], vec![vec![1, -1]], 0.25).unwrap();
        let d = decode(&e2, &[1, 1]).unwrap();
        assert_eq!((d.spins, d.intact), (vec![1], vec![false]));
        assert!(decode(&e2, &[1]).is_err());
    }

    #[test]
    fn compiled_models_verify_cleanly() {
        for (n, seed) in [(2, 3), (3, 4), (4, 5)] {
            let m = random_logical(n, seed);
            let e = embed_complete_graph(&m, n, n, 0.25).unwrap();
            let (p, mask) = compile_physical(&e, &m).unwrap();
            assert!(p.couplings().values().all(|&v| v >= 0.0));
            assert_eq!(mask.gaps.len(), e.bonds.len());
            let r = verify_embedding(&e, &m, &p).unwrap();
            assert!(r.is_clean(), "{r:?}");
            assert!(r.ground_states.unwrap().sets_equal);
        }
    }

    #[test]
    fn lowered_chain_strength_is_reported() {
        let m = random_logical(3, 9);
        let mut e = embed_complete_graph(&m, 3, 3, 0.25).unwrap();
        let (p, _) = compile_physical(&e, &m).unwrap();
        e.chain_strengths[0] *= 0.5;
        let r = verify_embedding(&e, &m, &p).unwrap();
        assert!(r.violations.iter().any(|v| v.contains("below the bound")));
    }

    #[test]
    fn margin_zero_is_non_strict() {
        let m = random_logical(3, 11);
        let e = embed_complete_graph(&m, 3, 3, 0.0).unwrap();
        let (p, _) = compile_physical(&e, &m).unwrap();
        let r = verify_embedding(&e, &m, &p).unwrap();
        assert_eq!(r.non_strict, vec![0, 1, 2]);
    }

    #[test]
    fn mask_matches_bonds_and_reads_as_gap_map() {
        let m = random_logical(3, 2);
        let e = embed_complete_graph(&m, 3, 3, 0.25).unwrap();
        let mask = e.layout_mask();
        for b in &e.bonds {
            assert_eq!(mask.directive(b.gap), Some(Directive::from(b.bond)));
        }
        let text = serde_json::to_string(&mask).unwrap();
        let map: GapMap = serde_json::from_str(&text).unwrap();
        assert_eq!(map, mask.to_gap_map());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn planted_states_round_trip(seed in 0u64..1000, planted in proptest::collection::vec(prop_oneof![Just(-1i8), Just(1i8)], 3)) {
            let m = random_logical(3, seed);
            let e = embed_complete_graph(&m, 3, 3, 0.25).unwrap();
            let index = e.physical_index();
            let mut phys = vec![0i8; index.len()];
            for (a, chain) in e.chains.iter().enumerate() {
                for (k, s) in chain.iter().enumerate() {
                    phys[index[s]] = e.signs[a][k] * planted[a];
                }
            }
            let d = decode(&e, &phys).unwrap();
            prop_assert!(d.all_intact());
            prop_assert_eq!(d.spins, planted);
        }

        #[test]
        fn signs_alternate_from_head(seed in 0u64..200) {
            let m = random_logical(4, seed);
            let e = embed_complete_graph(&m, 4, 4, 0.25).unwrap();
            for signs in &e.signs {
                for k in 0..signs.len() {
                    prop_assert_eq!(signs[k], if k % 2 == 0 { signs[0] } else { -signs[0] });
                }
            }
        }
    }
}
