//! Brute-force reference route over the full `(2S+1)^sites` tensor space.
//!
//! Nothing here uses magnon sectors: the Hamiltonian is built by applying
//! the local ladder matrices to tensor-product basis states, evolution is a
//! time-sliced Taylor series, and the partial trace is a plain index sum.
//! The sector machinery is checked against it.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::propagator::ReceiverState;
use crate::sectors::{BlockState, SectorBasis, SparseMatrix};
use crate::spin_model::{spin_operators, Spin, Term};
use crate::{Error, Result, C64};

/// Mixed-radix tensor basis; site 0 is the most significant digit and the
/// local digit is the boson number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorSpace {
    pub sites: usize,
    pub local: usize,
}

impl TensorSpace {
    pub fn new(sites: usize, spin: Spin) -> Self {
        TensorSpace { sites, local: spin.levels() }
    }

    pub fn dim(&self) -> usize {
        self.local.pow(self.sites as u32)
    }

    pub fn encode(&self, tuple: &[u16]) -> usize {
        tuple.iter().fold(0, |acc, &n| acc * self.local + n as usize)
    }

    pub fn decode(&self, mut index: usize, out: &mut [u16]) {
        for k in (0..self.sites).rev() {
            out[k] = (index % self.local) as u16;
            index /= self.local;
        }
    }
}

/// Full-space Hamiltonian assembled from the local `SpinOperators` matrices.
pub fn full_hamiltonian(terms: &[Term], sites: usize, spin: Spin) -> Result<SparseMatrix> {
    for t in terms {
        if t.max_site() >= sites {
            return Err(Error::SiteOutOfRange { site: t.max_site(), sites });
        }
    }
    let ops = spin_operators(spin);
    let space = TensorSpace::new(sites, spin);
    let l = space.local;
    let re = |m: &DMatrix<C64>, i: usize, j: usize| m[(i, j)].re;
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut tuple = alloc::vec![0u16; sites];
    let mut out = alloc::vec![0u16; sites];
    for col in 0..space.dim() {
        space.decode(col, &mut tuple);
        for t in terms {
            match *t {
                Term::Zeeman { site, amp } => {
                    let n = tuple[site] as usize;
                    *entries.entry((col, col)).or_insert(0.0) += amp * re(&ops.sz, n, n);
                }
                Term::Ising { a, b, amp } => {
                    let (na, nb) = (tuple[a] as usize, tuple[b] as usize);
                    *entries.entry((col, col)).or_insert(0.0) += amp * re(&ops.sz, na, na) * re(&ops.sz, nb, nb);
                }
                Term::Hop { a, b, amp } => {
                    let (na, nb) = (tuple[a] as usize, tuple[b] as usize);
                    for (left, right) in [(&ops.raise, &ops.lower), (&ops.lower, &ops.raise)] {
                        for ma in 0..l {
                            let ea = re(left, ma, na);
                            if ea == 0.0 {
                                continue;
                            }
                            for mb in 0..l {
                                let eb = re(right, mb, nb);
                                if eb == 0.0 {
                                    continue;
                                }
                                out.copy_from_slice(&tuple);
                                out[a] = ma as u16;
                                out[b] = mb as u16;
                                *entries.entry((space.encode(&out), col)).or_insert(0.0) += amp * ea * eb;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(SparseMatrix::from_entries(space.dim(), &entries))
}

/// Diagonal of `N_tot = Σ_i (S − Sz_i)`.
pub fn total_magnons(space: TensorSpace) -> Vec<f64> {
    let mut tuple = alloc::vec![0u16; space.sites];
    (0..space.dim())
        .map(|i| {
            space.decode(i, &mut tuple);
            tuple.iter().map(|&n| n as f64).sum()
        })
        .collect()
}

/// `max |[H, N_tot]|`.
pub fn number_commutator(h: &SparseMatrix, space: TensorSpace) -> f64 {
    let n = total_magnons(space);
    let mut worst: f64 = 0.0;
    for r in 0..h.dim() {
        for (c, v) in h.row(r) {
            worst = worst.max((v * (n[c] - n[r])).abs());
        }
    }
    worst
}

/// Restricts a full-space matrix to the rows and columns of one sector.
pub fn restrict(h: &SparseMatrix, space: TensorSpace, basis: &SectorBasis) -> DMatrix<f64> {
    let idx: Vec<usize> = basis.states().map(|t| space.encode(t)).collect();
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| h.get(idx[i], idx[j]))
}

pub fn embed(state: &BlockState, space: TensorSpace) -> DVector<C64> {
    let mut out = DVector::zeros(space.dim());
    for b in state.blocks() {
        for (i, t) in b.basis.states().enumerate() {
            out[space.encode(t)] = b.amps[i];
        }
    }
    out
}

/// `e^{−iHt} ψ` by Taylor series on slices with `‖H‖_∞ Δt ≤ 1/2`.
pub fn taylor_evolve(h: &SparseMatrix, psi: &DVector<C64>, t: f64) -> DVector<C64> {
    let norm = (0..h.dim()).map(|r| h.row(r).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let steps = ((norm * t.abs()) / 0.5).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut state = psi.clone();
    for _ in 0..steps {
        let mut term = state.clone();
        let mut acc = state.clone();
        for k in 1..80 {
            term = h.matvec(&term) * C64::new(0.0, -dt / k as f64);
            acc += &term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        state = acc;
    }
    state
}

/// Partial trace of a full-space density matrix onto the last site,
/// keeping `levels` receiver levels.
pub fn reduce_density(rho: &DMatrix<C64>, space: TensorSpace, levels: usize) -> ReceiverState {
    let l = space.local;
    let rest = space.dim() / l;
    let mut block = DMatrix::zeros(levels, levels);
    let mut leakage = 0.0;
    for r in 0..rest {
        for a in 0..l {
            if a >= levels {
                leakage += rho[(r * l + a, r * l + a)].re;
                continue;
            }
            for b in 0..levels {
                block[(a, b)] += rho[(r * l + a, r * l + b)];
            }
        }
    }
    ReceiverState { block, leakage }
}

/// Partial trace of a full-space pure state onto the last site.
pub fn reduce_pure(psi: &DVector<C64>, space: TensorSpace, levels: usize) -> ReceiverState {
    let l = space.local;
    let rest = space.dim() / l;
    let mut block = DMatrix::zeros(levels, levels);
    let mut leakage = 0.0;
    for r in 0..rest {
        for a in 0..l {
            let x = psi[r * l + a];
            if a >= levels {
                leakage += x.norm_sqr();
                continue;
            }
            for b in 0..levels {
                block[(a, b)] += x * psi[r * l + b].conj();
            }
        }
    }
    ReceiverState { block, leakage }
}
