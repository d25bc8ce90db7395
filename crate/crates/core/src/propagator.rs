//! Spectral time evolution and reduction to the receiver site.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::sectors::{assemble_sector_hamiltonian, enumerate_sector, BlockState, OperatorMatrix, SectorBasis};
use crate::spin_model::{Spin, Term};
use crate::{Error, Result, C64};

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// (columns) of a real symmetric block.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub basis: Option<Arc<SectorBasis>>,
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Diagonalizes a Hamiltonian block. Sparse blocks are densified.
pub fn eigendecompose(h: &OperatorMatrix) -> Result<EigenSystem> {
    let scale = h.max_abs().max(1.0);
    let residual = h.hermiticity_residual();
    if residual > 1e-12 * scale {
        return Err(Error::NotHermitian { residual });
    }
    Ok(eigendecompose_dense(h.basis.clone(), h.to_dense()))
}

/// Diagonalizes a dense symmetric matrix without checking symmetry.
pub fn eigendecompose_dense(basis: Option<Arc<SectorBasis>>, m: DMatrix<f64>) -> EigenSystem {
    let dim = m.nrows();
    if dim == 0 {
        return EigenSystem { basis, eigenvalues: DVector::zeros(0), eigenvectors: DMatrix::zeros(0, 0) };
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    EigenSystem { basis, eigenvalues, eigenvectors }
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |H V − V Λ|`.
    pub fn reconstruction_residual(&self, h: &DMatrix<f64>) -> f64 {
        let hv = h * &self.eigenvectors;
        let vl = &self.eigenvectors * DMatrix::from_diagonal(&self.eigenvalues);
        (hv - vl).abs().max()
    }

    /// `max |V†V − I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        (g - DMatrix::identity(self.dim(), self.dim())).abs().max()
    }

    /// The propagator `e^{−iHt}` as a dense matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let n = self.dim();
        let v = self.eigenvectors.map(|x| C64::new(x, 0.0));
        let phases = DVector::from_iterator(n, self.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * t)));
        let vp = DMatrix::from_fn(n, n, |i, k| v[(i, k)] * phases[k]);
        vp * v.transpose()
    }

    fn apply(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut coeffs = DVector::<C64>::zeros(n);
        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += psi[i] * v[(i, k)];
            }
            coeffs[k] = acc * C64::from_polar(1.0, -self.eigenvalues[k] * t);
        }
        let mut out = DVector::<C64>::zeros(n);
        for k in 0..n {
            let c = coeffs[k];
            for i in 0..n {
                out[i] += c * v[(i, k)];
            }
        }
        out
    }
}

/// `ψ(t) = V e^{−iΛt} V† ψ0`.
pub fn evolve_pure(es: &EigenSystem, psi0: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
    if psi0.len() != es.dim() {
        return Err(Error::DimensionMismatch { expected: es.dim(), found: psi0.len() });
    }
    Ok(es.apply(psi0, t))
}

/// A positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity(format!("{}x{} is not square", matrix.nrows(), matrix.ncols())));
        }
        let herm = (&matrix - matrix.adjoint()).iter().fold(0.0, |a: f64, z| a.max(z.norm()));
        if herm > 1e-10 {
            return Err(Error::InvalidDensity(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        DensityMatrix::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix { matrix: DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0) }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_spectrum(&self.matrix)
    }
}

/// Ascending eigenvalues of a complex Hermitian matrix.
pub fn hermitian_spectrum(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `ρ(t) = U ρ0 U†`.
pub fn evolve_density(es: &EigenSystem, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.dim() != es.dim() {
        return Err(Error::DimensionMismatch { expected: es.dim(), found: rho0.dim() });
    }
    let u = es.propagator(t);
    Ok(DensityMatrix { matrix: &u * rho0.matrix() * u.adjoint() })
}

/// Receiver state restricted to its lowest `d` levels. `leakage` is the
/// receiver population in levels `≥ d`; `trace(block) + leakage = 1` for a
/// normalized input.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverState {
    pub block: DMatrix<C64>,
    pub leakage: f64,
}

impl ReceiverState {
    pub fn levels(&self) -> usize {
        self.block.nrows()
    }
}

fn check_levels(state: &BlockState, levels: usize) -> Result<()> {
    if let Some(b) = state.blocks().first() {
        if levels > b.basis.cap() + 1 {
            return Err(Error::LevelsExceedLadder { levels, ladder: b.basis.cap() + 1 });
        }
    }
    Ok(())
}

/// `Tr_{not r} |ψ⟩⟨ψ|` on the lowest `levels` receiver levels; the receiver
/// is the last site.
pub fn reduce_to_receiver(state: &BlockState, levels: usize) -> Result<ReceiverState> {
    check_levels(state, levels)?;
    let block = reduce_pair(state, state, levels)?;
    let mut leakage = 0.0;
    for b in state.blocks() {
        let last = b.basis.sites() - 1;
        for (i, t) in b.basis.states().enumerate() {
            if t[last] as usize >= levels {
                leakage += b.amps[i].norm_sqr();
            }
        }
    }
    Ok(ReceiverState { block, leakage })
}

/// `Tr_{not r} |ket⟩⟨bra|` on the lowest `levels` receiver levels.
/// Coherences between different magnon sectors are included.
pub fn reduce_pair(ket: &BlockState, bra: &BlockState, levels: usize) -> Result<DMatrix<C64>> {
    check_levels(ket, levels)?;
    check_levels(bra, levels)?;
    if ket.sites() != bra.sites() && !ket.blocks().is_empty() && !bra.blocks().is_empty() {
        return Err(Error::DimensionMismatch { expected: ket.sites(), found: bra.sites() });
    }
    let mut out = DMatrix::<C64>::zeros(levels, levels);
    let mut probe: Vec<u16> = Vec::new();
    for kb in ket.blocks() {
        let sites = kb.basis.sites();
        let last = sites - 1;
        probe.resize(sites, 0);
        let n = kb.basis.magnons();
        for (i, t) in kb.basis.states().enumerate() {
            let a = t[last] as usize;
            let amp = kb.amps[i];
            if a >= levels || amp == C64::new(0.0, 0.0) {
                continue;
            }
            let rest = n - a;
            probe[..last].copy_from_slice(&t[..last]);
            for b in 0..levels {
                let Some(bb) = bra.block(rest + b) else { continue };
                probe[last] = b as u16;
                if let Some(j) = bb.basis.index_of(&probe) {
                    out[(a, b)] += amp * bb.amps[j].conj();
                }
            }
        }
    }
    Ok(out)
}

/// Eigen-decomposed Hamiltonian blocks for a range of magnon sectors of one
/// chain.
#[derive(Debug, Clone)]
pub struct SectorPropagator {
    sites: usize,
    spin: Spin,
    sectors: BTreeMap<usize, EigenSystem>,
}

impl SectorPropagator {
    /// Builds and diagonalizes every sector `0..=max_magnons` (clamped to the
    /// largest non-empty sector).
    pub fn new(terms: &[Term], sites: usize, spin: Spin, max_magnons: usize) -> Result<Self> {
        let cap = spin.twice() as usize;
        let top = max_magnons.min(sites * cap);
        let mut sectors = BTreeMap::new();
        for n in 0..=top {
            let basis = Arc::new(enumerate_sector(sites, cap, n)?);
            let h = assemble_sector_hamiltonian(terms, &basis, spin)?;
            sectors.insert(n, eigendecompose(&h)?);
        }
        Ok(SectorPropagator { sites, spin, sectors })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn max_magnons(&self) -> usize {
        self.sectors.keys().next_back().copied().unwrap_or(0)
    }

    pub fn sector(&self, n: usize) -> Result<&EigenSystem> {
        self.sectors.get(&n).ok_or(Error::MissingSector(n))
    }

    pub fn basis(&self, n: usize) -> Result<&Arc<SectorBasis>> {
        Ok(self.sector(n)?.basis.as_ref().expect("sector eigensystems carry their basis"))
    }

    /// Evolves every block with its own sector propagator.
    pub fn evolve(&self, state: &BlockState, t: f64) -> Result<BlockState> {
        state.map_blocks(|b| {
            let es = self.sector(b.basis.magnons())?;
            evolve_pure(es, &b.amps, t)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sectors::OperatorMatrix;
    use rand::{Rng, SeedableRng};

    fn rng() -> rand::rngs::SmallRng {
        rand::rngs::SmallRng::seed_from_u64(7)
    }

    #[test]
    fn one_by_one() {
        let h = OperatorMatrix::from_dense(None, DMatrix::from_element(1, 1, -2.5));
        let es = eigendecompose(&h).unwrap();
        assert_eq!(es.eigenvalues[0], -2.5);
    }

    #[test]
    fn two_level_hopping() {
        let t = 0.7;
        let h = OperatorMatrix::from_dense(None, DMatrix::from_row_slice(2, 2, &[0.0, t, t, 0.0]));
        let es = eigendecompose(&h).unwrap();
        assert!((es.eigenvalues[0] + t).abs() < 1e-14);
        assert!((es.eigenvalues[1] - t).abs() < 1e-14);
        let r = 1.0 / 2f64.sqrt();
        let v0 = es.eigenvectors.column(0);
        let v1 = es.eigenvectors.column(1);
        assert!((v0[0].abs() - r).abs() < 1e-14 && (v0[0] + v0[1]).abs() < 1e-14);
        assert!((v1[0].abs() - r).abs() < 1e-14 && (v1[0] - v1[1]).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = rng();
        let a = DMatrix::from_fn(50, 50, |_, _| rng.random::<f64>() - 0.5);
        let h = &a + a.transpose();
        let es = eigendecompose(&OperatorMatrix::from_dense(None, h.clone())).unwrap();
        let norm = h.abs().max();
        assert!(es.reconstruction_residual(&h) < 1e-10 * norm);
        assert!(es.orthogonality_residual() < 1e-10);
        assert!(es.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = OperatorMatrix::from_dense(None, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]));
        assert!(matches!(eigendecompose(&h), Err(Error::NotHermitian { .. })));
    }

    fn random_state(n: usize, rng: &mut impl Rng) -> DVector<C64> {
        let v = DVector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    }

    #[test]
    fn evolution_basics() {
        let mut rng = rng();
        let a = DMatrix::from_fn(8, 8, |_, _| rng.random::<f64>());
        let es = eigendecompose_dense(None, &a + a.transpose());
        let psi = random_state(8, &mut rng);
        let same = evolve_pure(&es, &psi, 0.0).unwrap();
        assert!((&same - &psi).norm() < 1e-13);

        let later = evolve_pure(&es, &psi, 3.1).unwrap();
        assert!((later.norm() - 1.0).abs() < 1e-12);

        let two_steps = evolve_pure(&es, &evolve_pure(&es, &psi, 1.2).unwrap(), 1.9).unwrap();
        assert!((two_steps - later).norm() < 1e-9);

        let eig = es.eigenvectors.column(3).map(|x| C64::new(x, 0.0));
        let rotated = evolve_pure(&es, &eig, 2.0).unwrap();
        for i in 0..8 {
            assert!((rotated[i].norm() - eig[i].norm()).abs() < 1e-12);
        }
        assert!(evolve_pure(&es, &DVector::zeros(3), 1.0).is_err());
    }

    #[test]
    fn rabi_transfer() {
        let g = 0.35;
        let es = eigendecompose_dense(None, DMatrix::from_row_slice(2, 2, &[0.0, -g, -g, 0.0]));
        let psi = DVector::from_vec(alloc::vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let out = evolve_pure(&es, &psi, core::f64::consts::PI / (2.0 * g)).unwrap();
        assert!(out[0].norm() < 1e-12);
        assert!((out[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_evolution_matches_pure() {
        let mut rng = rng();
        let a = DMatrix::from_fn(6, 6, |_, _| rng.random::<f64>());
        let es = eigendecompose_dense(None, &a + a.transpose());
        let psi = random_state(6, &mut rng);
        let rho = DensityMatrix::pure(&psi).unwrap();
        let t = 0.83;
        let from_rho = evolve_density(&es, &rho, t).unwrap();
        let from_psi = evolve_pure(&es, &psi, t).unwrap();
        let expected = &from_psi * from_psi.adjoint();
        assert!((from_rho.matrix() - expected).iter().all(|z| z.norm() < 1e-10));
        assert_eq!(evolve_density(&es, &rho, 0.0).unwrap().matrix().iter().zip(rho.matrix().iter()).filter(|(a, b)| (**a - **b).norm() > 1e-12).count(), 0);
        let mixed = DensityMatrix::maximally_mixed(6);
        let after = evolve_density(&es, &mixed, 5.0).unwrap();
        assert!((after.matrix() - mixed.matrix()).iter().all(|z| z.norm() < 1e-12));
        let before = rho.spectrum();
        let spec = from_rho.spectrum();
        assert!(before.iter().zip(&spec).all(|(x, y)| (x - y).abs() < 1e-8));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(DMatrix::identity(2, 2)).is_err());
        assert!(DensityMatrix::new(DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
    }

    fn basis(sites: usize, cap: usize, n: usize) -> Arc<SectorBasis> {
        Arc::new(enumerate_sector(sites, cap, n).unwrap())
    }

    #[test]
    fn vacuum_reduces_to_ground_level() {
        let b0 = basis(4, 2, 0);
        let st = BlockState::embed(alloc::vec![(b0, DVector::from_element(1, C64::new(1.0, 0.0)))]).unwrap();
        let r = reduce_to_receiver(&st, 3).unwrap();
        assert_eq!(r.block[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(r.block.iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert_eq!(r.leakage, 0.0);
        assert!(reduce_to_receiver(&st, 4).is_err());
    }

    #[test]
    fn bell_like_state_reduction() {
        // sites (bus, r): (|1,0⟩ + |0,1⟩)/√2
        let b1 = basis(2, 1, 1);
        let amp = C64::new(1.0 / 2f64.sqrt(), 0.0);
        let st = BlockState::embed(alloc::vec![(b1, DVector::from_element(2, amp))]).unwrap();
        let r = reduce_to_receiver(&st, 2).unwrap();
        assert!((r.block[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((r.block[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(r.block[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn cross_sector_coherence_and_leakage() {
        // (|0,0⟩ + |0,1⟩ + |0,2⟩)/√3 over (s, r): receiver coherent superposition
        let amp = C64::new(1.0 / 3f64.sqrt(), 0.0);
        let parts = (0..3).map(|n| {
            let b = basis(2, 2, n);
            let mut v = DVector::zeros(b.len());
            v[b.index_of(&[0, n as u16]).unwrap()] = amp;
            (b, v)
        });
        let st = BlockState::embed(parts.collect()).unwrap();
        let r = reduce_to_receiver(&st, 2).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((r.block[(a, b)].re - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert!((r.leakage - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.block.trace().re + r.leakage - 1.0).abs() < 1e-14);
    }
}
