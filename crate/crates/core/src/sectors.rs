//! Fixed-magnon occupation bases and sector-restricted Hamiltonians.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;
use nalgebra::{DMatrix, DVector};

use crate::spin_model::{Spin, Term};
use crate::{Error, Result, C64};

/// Blocks at or above this dimension are stored as sparse rows.
pub const DENSE_LIMIT: usize = 512;

/// Ordered basis of occupation tuples `(n_0, …, n_{sites-1})` with a fixed
/// sum and a per-site cap. Tuples are in descending lexicographic order, so
/// `(1,0,0)` precedes `(0,1,0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    sites: usize,
    cap: usize,
    magnons: usize,
    occupations: Vec<u16>,
}

impl SectorBasis {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn magnons(&self) -> usize {
        self.magnons
    }

    pub fn len(&self) -> usize {
        self.occupations.len().checked_div(self.sites).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, i: usize) -> &[u16] {
        &self.occupations[i * self.sites..(i + 1) * self.sites]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u16]> + '_ {
        self.occupations.chunks_exact(self.sites)
    }

    /// Position of a tuple, or `None` if it is not in this sector.
    pub fn index_of(&self, tuple: &[u16]) -> Option<usize> {
        if tuple.len() != self.sites {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            // descending order
            match tuple.cmp(self.state(mid)) {
                Ordering::Equal => return Some(mid),
                Ordering::Greater => hi = mid,
                Ordering::Less => lo = mid + 1,
            }
        }
        None
    }

    /// One `tuple : row` line per basis state; rows list the nonzero
    /// `column=value` entries of `matrix` (or nothing when `None`).
    pub fn dump(&self, matrix: Option<&OperatorMatrix>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# sites={} cap={} magnons={} dim={}", self.sites, self.cap, self.magnons, self.len());
        for (i, tuple) in self.states().enumerate() {
            out.push('(');
            for (k, n) in tuple.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{n}");
            }
            out.push_str(") :");
            if let Some(m) = matrix {
                for (j, v) in m.row_entries(i) {
                    let _ = write!(out, " {j}={v:.12e}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Enumerates all tuples of `sites` entries in `0..=cap` summing to `magnons`.
pub fn enumerate_sector(sites: usize, cap: usize, magnons: usize) -> Result<SectorBasis> {
    if sites == 0 || cap == 0 || magnons > sites * cap {
        return Err(Error::EmptySector { sites, cap, magnons });
    }
    let mut occupations = Vec::new();
    let mut scratch = alloc::vec![0u16; sites];
    fill(&mut scratch, 0, cap, magnons, &mut occupations);
    Ok(SectorBasis { sites, cap, magnons, occupations })
}

fn fill(scratch: &mut [u16], pos: usize, cap: usize, left: usize, out: &mut Vec<u16>) {
    let remaining_sites = scratch.len() - pos - 1;
    if remaining_sites == 0 {
        scratch[pos] = left as u16;
        out.extend_from_slice(scratch);
        return;
    }
    let hi = cap.min(left);
    let lo = left.saturating_sub(remaining_sites * cap);
    for n in (lo..=hi).rev() {
        scratch[pos] = n as u16;
        fill(scratch, pos + 1, cap, left - n, out);
    }
}

/// How spin operators act on occupation numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    /// Exact spin matrix elements `√(n(2S−n+1))`.
    Spin(Spin),
    /// Linearized Holstein–Primakoff bosons: `S+ = √(2S) a`, `Sz = S − a†a`,
    /// with `Sz Sz` reduced to its part linear in boson numbers.
    Boson(Spin),
}

impl Ladder {
    fn spin(self) -> Spin {
        match self {
            Ladder::Spin(s) | Ladder::Boson(s) => s,
        }
    }

    /// Matrix element of moving one boson from a site holding `from` to a
    /// site holding `to`.
    fn hop(self, from: usize, to: usize) -> f64 {
        match self {
            Ladder::Spin(s) => s.raise_element(from) * s.lower_element(to),
            Ladder::Boson(s) => 2.0 * s.value() * ((from * (to + 1)) as f64).sqrt(),
        }
    }

    fn ising(self, na: usize, nb: usize) -> f64 {
        let s = self.spin();
        match self {
            Ladder::Spin(_) => s.sz(na) * s.sz(nb),
            Ladder::Boson(_) => {
                let sv = s.value();
                sv * sv - sv * (na + nb) as f64
            }
        }
    }
}

/// Compressed sparse rows of a real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col) → value` entries; duplicates must already be
    /// merged, which the map guarantees.
    pub fn from_entries(dim: usize, entries: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut row_ptr = alloc::vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (&(r, c), &v) in entries {
            if v == 0.0 {
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix { dim, row_ptr, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim);
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for (c, v) in self.row(r) {
                acc += x[c] * v;
            }
            y[r] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    Dense(DMatrix<f64>),
    Sparse(SparseMatrix),
}

/// A real symmetric (hence Hermitian) Hamiltonian block over a sector.
///
/// All Hamiltonians built here are real in the occupation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub basis: Option<Arc<SectorBasis>>,
    pub data: MatrixData,
}

impl OperatorMatrix {
    pub fn from_entries(basis: Option<Arc<SectorBasis>>, dim: usize, entries: &BTreeMap<(usize, usize), f64>) -> Self {
        let data = if dim < DENSE_LIMIT {
            let mut m = DMatrix::zeros(dim, dim);
            for (&(r, c), &v) in entries {
                m[(r, c)] = v;
            }
            MatrixData::Dense(m)
        } else {
            MatrixData::Sparse(SparseMatrix::from_entries(dim, entries))
        };
        OperatorMatrix { basis, data }
    }

    pub fn from_dense(basis: Option<Arc<SectorBasis>>, m: DMatrix<f64>) -> Self {
        OperatorMatrix { basis, data: MatrixData::Dense(m) }
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            MatrixData::Dense(m) => m.nrows(),
            MatrixData::Sparse(s) => s.dim(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.data, MatrixData::Dense(_))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        match &self.data {
            MatrixData::Dense(m) => m[(r, c)],
            MatrixData::Sparse(s) => s.get(r, c),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.data {
            MatrixData::Dense(m) => m.clone(),
            MatrixData::Sparse(s) => s.to_dense(),
        }
    }

    pub fn row_entries(&self, r: usize) -> Vec<(usize, f64)> {
        match &self.data {
            MatrixData::Dense(m) => (0..m.ncols()).filter(|&c| m[(r, c)] != 0.0).map(|c| (c, m[(r, c)])).collect(),
            MatrixData::Sparse(s) => s.row(r).collect(),
        }
    }

    /// `max |H − H†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        match &self.data {
            MatrixData::Dense(m) => {
                let mut worst: f64 = 0.0;
                for r in 0..m.nrows() {
                    for c in 0..r {
                        worst = worst.max((m[(r, c)] - m[(c, r)]).abs());
                    }
                }
                worst
            }
            MatrixData::Sparse(s) => s.symmetry_residual(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.data {
            MatrixData::Dense(m) => m.iter().fold(0.0, |a, v| a.max(v.abs())),
            MatrixData::Sparse(s) => s.max_abs(),
        }
    }
}

/// Accumulates `⟨tuple'|H|tuple⟩` for every term into a `(row, col)` map.
fn accumulate(terms: &[Term], basis: &SectorBasis, ladder: Ladder) -> Result<BTreeMap<(usize, usize), f64>> {
    let sites = basis.sites();
    for t in terms {
        if t.max_site() >= sites {
            return Err(Error::SiteOutOfRange { site: t.max_site(), sites });
        }
    }
    let cap = basis.cap();
    let spin = ladder.spin();
    let mut entries = BTreeMap::new();
    let mut moved = alloc::vec![0u16; sites];
    for (col, tuple) in basis.states().enumerate() {
        let mut diag = 0.0;
        for t in terms {
            match *t {
                Term::Zeeman { site, amp } => diag += amp * spin.sz(tuple[site] as usize),
                Term::Ising { a, b, amp } => diag += amp * ladder.ising(tuple[a] as usize, tuple[b] as usize),
                Term::Hop { a, b, amp } => {
                    if amp == 0.0 {
                        continue;
                    }
                    for (from, to) in [(a, b), (b, a)] {
                        let (nf, nt) = (tuple[from] as usize, tuple[to] as usize);
                        if nf == 0 || nt >= cap {
                            continue;
                        }
                        let element = ladder.hop(nf, nt);
                        if element == 0.0 {
                            continue;
                        }
                        moved.copy_from_slice(tuple);
                        moved[from] -= 1;
                        moved[to] += 1;
                        let row = basis.index_of(&moved).expect("hop stays in sector");
                        *entries.entry((row, col)).or_insert(0.0) += amp * element;
                    }
                }
            }
        }
        if diag != 0.0 {
            *entries.entry((col, col)).or_insert(0.0) += diag;
        }
    }
    Ok(entries)
}

/// Restriction of the exact spin Hamiltonian to one magnon sector.
pub fn assemble_sector_hamiltonian(terms: &[Term], basis: &Arc<SectorBasis>, spin: Spin) -> Result<OperatorMatrix> {
    assemble_with(terms, basis, Ladder::Spin(spin))
}

/// Sector matrix with an explicit choice of ladder representation.
pub fn assemble_with(terms: &[Term], basis: &Arc<SectorBasis>, ladder: Ladder) -> Result<OperatorMatrix> {
    let entries = accumulate(terms, basis, ladder)?;
    Ok(OperatorMatrix::from_entries(Some(basis.clone()), basis.len(), &entries))
}

/// Amplitudes on one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub basis: Arc<SectorBasis>,
    pub amps: DVector<C64>,
}

/// A pure state stored as a direct sum over magnon sectors, sorted by
/// magnon number.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    blocks: Vec<Block>,
}

impl BlockState {
    /// Joins per-sector amplitude vectors. The joint norm must be one.
    pub fn embed(parts: Vec<(Arc<SectorBasis>, DVector<C64>)>) -> Result<Self> {
        let state = Self::embed_unnormalized(parts)?;
        let norm = state.norm_squared();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// As [`BlockState::embed`] without the norm check.
    pub fn embed_unnormalized(parts: Vec<(Arc<SectorBasis>, DVector<C64>)>) -> Result<Self> {
        let mut blocks: Vec<Block> = Vec::with_capacity(parts.len());
        for (basis, amps) in parts {
            if amps.len() != basis.len() {
                return Err(Error::DimensionMismatch { expected: basis.len(), found: amps.len() });
            }
            if let Some(first) = blocks.first() {
                if first.basis.sites() != basis.sites() {
                    return Err(Error::DimensionMismatch { expected: first.basis.sites(), found: basis.sites() });
                }
            }
            if blocks.iter().any(|b| b.basis.magnons() == basis.magnons()) {
                return Err(Error::Invalid(alloc::format!("sector {} given twice", basis.magnons())));
            }
            blocks.push(Block { basis, amps });
        }
        blocks.sort_by_key(|b| b.basis.magnons());
        Ok(BlockState { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, magnons: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.basis.magnons() == magnons)
    }

    pub fn sites(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.basis.sites())
    }

    pub fn norm_squared(&self) -> f64 {
        self.blocks.iter().map(|b| b.amps.norm_squared()).sum()
    }

    /// Weight carried by each sector.
    pub fn sector_weights(&self) -> Vec<(usize, f64)> {
        self.blocks.iter().map(|b| (b.basis.magnons(), b.amps.norm_squared())).collect()
    }

    /// Amplitude of an occupation tuple, zero if absent.
    pub fn amplitude(&self, tuple: &[u16]) -> C64 {
        let n: usize = tuple.iter().map(|&x| x as usize).sum();
        self.block(n)
            .and_then(|b| b.basis.index_of(tuple).map(|i| b.amps[i]))
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn map_blocks<F>(&self, mut f: F) -> Result<BlockState>
    where
        F: FnMut(&Block) -> Result<DVector<C64>>,
    {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            blocks.push(Block { basis: b.basis.clone(), amps: f(b)? });
        }
        Ok(BlockState { blocks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_model::{build_hamiltonian_terms, field_profile, ChainParams};

    fn brute_count(sites: usize, cap: usize, n: usize) -> usize {
        let total = (cap + 1).pow(sites as u32);
        (0..total)
            .filter(|&code| {
                let mut c = code;
                let mut sum = 0;
                for _ in 0..sites {
                    sum += c % (cap + 1);
                    c /= cap + 1;
                }
                sum == n
            })
            .count()
    }

    #[test]
    fn one_magnon_three_sites() {
        let b = enumerate_sector(3, 2, 1).unwrap();
        let states: Vec<&[u16]> = b.states().collect();
        assert_eq!(states, alloc::vec![&[1u16, 0, 0][..], &[0, 1, 0], &[0, 0, 1]]);
    }

    #[test]
    fn five_sites_two_magnons() {
        assert_eq!(enumerate_sector(5, 2, 2).unwrap().len(), 15);
        assert_eq!(enumerate_sector(5, 7, 2).unwrap().len(), 15);
    }

    #[test]
    fn cap_binds() {
        let b = enumerate_sector(2, 1, 2).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.state(0), &[1, 1]);
    }

    #[test]
    fn out_of_range_sector() {
        assert!(matches!(enumerate_sector(2, 1, 3), Err(Error::EmptySector { .. })));
        assert!(enumerate_sector(0, 1, 0).is_err());
    }

    #[test]
    fn counts_match_brute_force() {
        for sites in 1..=6 {
            for cap in 1..=4 {
                for n in 0..=6.min(sites * cap) {
                    let b = enumerate_sector(sites, cap, n).unwrap();
                    assert_eq!(b.len(), brute_count(sites, cap, n), "sites={sites} cap={cap} n={n}");
                }
            }
        }
    }

    #[test]
    fn ordering_and_index_are_consistent() {
        let b = enumerate_sector(5, 3, 4).unwrap();
        for (i, t) in b.states().enumerate() {
            assert_eq!(b.index_of(t), Some(i));
            assert_eq!(t.iter().map(|&x| x as usize).sum::<usize>(), 4);
            assert!(t.iter().all(|&x| x <= 3));
            if i > 0 {
                assert!(b.state(i - 1) > t);
            }
        }
        assert_eq!(b.index_of(&[4, 0, 0, 0, 0]), None);
    }

    fn chain(n: usize, s: f64) -> (ChainParams, Vec<Term>) {
        let p = ChainParams {
            bus_sites: n,
            spin: Spin::new(s).unwrap(),
            levels: 2,
            bus_xy: 1.0,
            bus_z: 0.7,
            reg_xy: 0.2,
            reg_z: 0.3,
            field_offset: 0.4,
        };
        let terms = build_hamiltonian_terms(&p, &field_profile(&p).unwrap()).unwrap();
        (p, terms)
    }

    #[test]
    fn vacuum_energy() {
        let (p, terms) = chain(3, 1.5);
        let b = Arc::new(enumerate_sector(5, 3, 0).unwrap());
        let h = assemble_sector_hamiltonian(&terms, &b, p.spin).unwrap();
        assert_eq!(h.dim(), 1);
        let s = 1.5;
        let f = field_profile(&p).unwrap();
        let fields: f64 = f.site_fields().iter().sum();
        let expected = -p.bus_z * s * s * 2.0 - p.reg_z * s * s * 2.0 - fields * s;
        assert!((h.get(0, 0) - expected).abs() < 1e-12);
    }

    #[test]
    fn hopping_uses_exact_ladder_factors() {
        let (p, terms) = chain(3, 2.0);
        let b = Arc::new(enumerate_sector(5, 4, 3).unwrap());
        let h = assemble_sector_hamiltonian(&terms, &b, p.spin).unwrap();
        // move one boson from bus site 1 (holding 2) to bus site 2 (holding 1)
        let from = b.index_of(&[0, 2, 1, 0, 0]).unwrap();
        let to = b.index_of(&[0, 1, 2, 0, 0]).unwrap();
        let s2 = 4.0;
        let expected = -p.bus_xy * (2.0f64 * (s2 - 2.0 + 1.0)).sqrt() * (2.0f64 * (s2 - 1.0)).sqrt();
        assert!((h.get(to, from) - expected).abs() < 1e-12);
        assert!((h.get(from, to) - expected).abs() < 1e-12);
    }

    #[test]
    fn assembled_blocks_are_hermitian() {
        for (n, s) in [(1, 0.5), (3, 1.0), (5, 1.5)] {
            let (p, terms) = chain(n, s);
            for m in 0..=4.min((n + 2) * p.spin.twice() as usize) {
                let b = Arc::new(enumerate_sector(n + 2, p.spin.twice() as usize, m).unwrap());
                let h = assemble_sector_hamiltonian(&terms, &b, p.spin).unwrap();
                assert!(h.hermiticity_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn assembly_is_linear_in_terms() {
        let (p, terms) = chain(3, 1.0);
        let b = Arc::new(enumerate_sector(5, 2, 2).unwrap());
        let whole = assemble_sector_hamiltonian(&terms, &b, p.spin).unwrap().to_dense();
        let (left, right) = terms.split_at(5);
        let sum = assemble_sector_hamiltonian(left, &b, p.spin).unwrap().to_dense()
            + assemble_sector_hamiltonian(right, &b, p.spin).unwrap().to_dense();
        assert!((whole - sum).abs().max() < 1e-12);
    }

    #[test]
    fn bad_site_rejected() {
        let b = Arc::new(enumerate_sector(3, 1, 1).unwrap());
        let terms = [Term::Zeeman { site: 3, amp: 1.0 }];
        assert_eq!(
            assemble_sector_hamiltonian(&terms, &b, Spin::new(0.5).unwrap()).unwrap_err(),
            Error::SiteOutOfRange { site: 3, sites: 3 }
        );
    }

    #[test]
    fn large_blocks_go_sparse() {
        let (p, terms) = chain(9, 0.5);
        let b = Arc::new(enumerate_sector(11, 1, 5).unwrap());
        assert_eq!(b.len(), 462);
        assert!(assemble_sector_hamiltonian(&terms, &b, p.spin).unwrap().is_dense());
        let (p, terms) = chain(11, 0.5);
        let b = Arc::new(enumerate_sector(13, 1, 6).unwrap());
        let h = assemble_sector_hamiltonian(&terms, &b, p.spin).unwrap();
        assert!(!h.is_dense());
        assert!(h.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn embed_preserves_norm() {
        let b0 = Arc::new(enumerate_sector(3, 2, 0).unwrap());
        let b1 = Arc::new(enumerate_sector(3, 2, 1).unwrap());
        let a0 = 0.6;
        let a1 = 0.8 / 3f64.sqrt();
        let st = BlockState::embed(alloc::vec![
            (b1.clone(), DVector::from_element(3, C64::new(a1, 0.0))),
            (b0.clone(), DVector::from_element(1, C64::new(a0, 0.0))),
        ])
        .unwrap();
        assert!((st.norm_squared() - 1.0).abs() < 1e-14);
        assert_eq!(st.blocks()[0].basis.magnons(), 0);
        let single = BlockState::embed(alloc::vec![(b0.clone(), DVector::from_element(1, C64::new(1.0, 0.0)))]).unwrap();
        assert_eq!(single.blocks()[0].amps[0], C64::new(1.0, 0.0));
        assert!(BlockState::embed(alloc::vec![(b1, DVector::zeros(2))]).is_err());
        assert!(matches!(
            BlockState::embed(alloc::vec![(b0, DVector::from_element(1, C64::new(0.5, 0.0)))]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn dump_format() {
        let (p, terms) = chain(1, 0.5);
        let b = Arc::new(enumerate_sector(3, 1, 1).unwrap());
        let h = assemble_sector_hamiltonian(&terms, &b, p.spin).unwrap();
        let text = b.dump(Some(&h));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("(1,0,0) : 0="));
        assert!(lines[1].contains(" 1=-2.000000000000e-1"));
    }
}
