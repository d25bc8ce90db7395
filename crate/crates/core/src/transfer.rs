//! Pure-state transfer: sender qudit, vacuum bus and receiver, exact
//! sector-wise dynamics, reduction to the receiver.

use alloc::sync::Arc;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::channel::{PureStateChannel, TransferChannel};
use crate::effective::{effective_spectrum, EffectiveSpectrum};
pub use crate::propagator::ReceiverState;
use crate::propagator::{reduce_pair, reduce_to_receiver, SectorPropagator};
use crate::qudit::QuditState;
use crate::sectors::BlockState;
use crate::spin_model::{build_hamiltonian_terms, field_profile, ChainParams, Term};
use crate::{Error, Result, C64};

/// Prepared transfer experiment at a fixed evolution time. Only sectors
/// `0..d` are built: the input never populates more magnons.
#[derive(Debug, Clone)]
pub struct TransferRun {
    params: ChainParams,
    terms: Vec<Term>,
    propagator: Arc<SectorPropagator>,
    time: f64,
}

impl TransferRun {
    pub fn new(p: &ChainParams, time: f64) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::Invalid(alloc::format!("evolution time must be finite and non-negative, got {time}")));
        }
        let terms = build_hamiltonian_terms(p, &field_profile(p)?)?;
        let propagator = Arc::new(SectorPropagator::new(&terms, p.sites(), p.spin, p.levels - 1)?);
        Ok(TransferRun { params: *p, terms, propagator, time })
    }

    /// Evolution to the optimal time of the effective model.
    pub fn at_optimal_time(p: &ChainParams) -> Result<Self> {
        let spectrum = effective_spectrum(p)?;
        TransferRun::new(p, spectrum.tau)
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn spectrum(&self) -> Result<EffectiveSpectrum> {
        effective_spectrum(&self.params)
    }

    pub fn propagator(&self) -> &SectorPropagator {
        &self.propagator
    }

    /// `|φ⟩_s |0…0⟩_bus |0⟩_r` spread over sectors `u = 0..d`.
    pub fn initial_state(&self, phi: &QuditState) -> Result<BlockState> {
        if phi.levels() != self.params.levels {
            return Err(Error::DimensionMismatch { expected: self.params.levels, found: phi.levels() });
        }
        let sites = self.params.sites();
        let mut tuple = alloc::vec![0u16; sites];
        let mut parts = Vec::with_capacity(phi.levels());
        for (u, &alpha) in phi.amplitudes().iter().enumerate() {
            if alpha == C64::new(0.0, 0.0) {
                continue;
            }
            let basis = self.propagator.basis(u)?.clone();
            tuple[0] = u as u16;
            let mut amps = DVector::zeros(basis.len());
            amps[basis.index_of(&tuple).expect("sender-only tuple")] = alpha;
            parts.push((basis, amps));
        }
        BlockState::embed(parts)
    }

    pub fn evolved_state(&self, phi: &QuditState) -> Result<BlockState> {
        self.propagator.evolve(&self.initial_state(phi)?, self.time)
    }

    pub fn receiver_state(&self, phi: &QuditState) -> Result<ReceiverState> {
        reduce_to_receiver(&self.evolved_state(phi)?, self.params.levels)
    }

    /// Reconstructs the channel from the `d` evolved basis kets:
    /// `Λ(|b⟩⟨c|) = Tr_{not r} |ψ_b(t)⟩⟨ψ_c(t)|`.
    pub fn channel(&self) -> Result<TransferChannel> {
        let d = self.params.levels;
        let evolved = (0..d).map(|u| self.evolved_state(&QuditState::basis(d, u))).collect::<Result<Vec<_>>>()?;
        let mut blocks = Vec::with_capacity(d * d);
        for b in 0..d {
            for c in 0..d {
                blocks.push(reduce_pair(&evolved[b], &evolved[c], d)?);
            }
        }
        TransferChannel::from_blocks(d, blocks)
    }
}

impl PureStateChannel for TransferRun {
    fn levels(&self) -> usize {
        self.params.levels
    }

    fn output(&self, input: &QuditState) -> Result<DMatrix<C64>> {
        Ok(self.receiver_state(input)?.block)
    }
}

/// Receiver state after evolving `|φ⟩_s|0…0⟩|0⟩_r` for time `t`.
pub fn run_transfer(p: &ChainParams, phi: &QuditState, t: f64) -> Result<ReceiverState> {
    TransferRun::new(p, t)?.receiver_state(phi)
}
