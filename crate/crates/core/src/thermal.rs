//! Thermal bus: Gibbs initial states and transfer from a mixed bus.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::channel::{average_fidelity_exact, average_fidelity_mc, FidelityEstimate, PureStateChannel, TransferChannel};
use crate::effective::effective_spectrum;
use crate::full_space::TensorSpace;
use crate::propagator::{eigendecompose, reduce_pair, reduce_to_receiver, ReceiverState, SectorPropagator};
use crate::qudit::{QuditState, Sampler};
use crate::sectors::{assemble_sector_hamiltonian, enumerate_sector, BlockState, SectorBasis};
use crate::spin_model::{build_hamiltonian_terms, field_profile, ChainParams, Spin, Term};
use crate::sum::CompensatedSum;
use crate::{Error, Result, C64};

/// Hamiltonian whose Gibbs state initializes the bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalChoice {
    /// Bus bonds only.
    BusOnly,
    /// Bus bonds plus the bus-site Zeeman terms.
    #[default]
    BusPlusField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalConfig {
    /// Temperature in energy units; `0` selects the ground-state projector.
    pub temperature: f64,
    pub choice: ThermalChoice,
    /// Largest bus dimension `(2S+1)^N` accepted.
    pub dim_cap: usize,
}

impl ThermalConfig {
    pub fn new(temperature: f64, choice: ThermalChoice) -> Self {
        ThermalConfig { temperature, choice, dim_cap: 4096 }
    }
}

/// One eigenvector of the thermal Hamiltonian with its Gibbs weight. Every
/// branch has a definite bus magnon number.
#[derive(Debug, Clone)]
pub struct ThermalBranch {
    pub weight: f64,
    pub energy: f64,
    pub basis: Arc<SectorBasis>,
    pub vector: DVector<f64>,
}

impl ThermalBranch {
    pub fn magnons(&self) -> usize {
        self.basis.magnons()
    }
}

/// `ρ_B = Σ_j p_j |v_j⟩⟨v_j|` over the `N` bus sites.
#[derive(Debug, Clone)]
pub struct ThermalBusState {
    pub sites: usize,
    pub spin: Spin,
    pub temperature: f64,
    pub branches: Vec<ThermalBranch>,
    /// `ln Z`; `None` at zero temperature.
    pub log_partition: Option<f64>,
}

impl ThermalBusState {
    pub fn space(&self) -> TensorSpace {
        TensorSpace::new(self.sites, self.spin)
    }

    pub fn trace(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).collect::<CompensatedSum>().value()
    }

    /// Dense `ρ_B` in the tensor basis of the bus.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let space = self.space();
        let mut rho = DMatrix::zeros(space.dim(), space.dim());
        for b in &self.branches {
            let idx: Vec<usize> = b.basis.states().map(|t| space.encode(t)).collect();
            for (i, &gi) in idx.iter().enumerate() {
                for (j, &gj) in idx.iter().enumerate() {
                    rho[(gi, gj)] += C64::new(b.weight * b.vector[i] * b.vector[j], 0.0);
                }
            }
        }
        rho
    }

    /// Total weight per bus magnon number.
    pub fn magnon_distribution(&self) -> Vec<f64> {
        let top = self.sites * self.spin.twice() as usize;
        let mut out = alloc::vec![0.0; top + 1];
        for b in &self.branches {
            out[b.magnons()] += b.weight;
        }
        out
    }
}

/// Terms of the thermal Hamiltonian, re-indexed to bus sites `0..N`.
pub fn thermal_terms(p: &ChainParams, choice: ThermalChoice) -> Result<Vec<Term>> {
    let all = build_hamiltonian_terms(p, &field_profile(p)?)?;
    let (first, last) = (1, p.bus_sites);
    let on_bus = |t: &Term| match *t {
        Term::Hop { a, b, .. } | Term::Ising { a, b, .. } => (first..=last).contains(&a) && (first..=last).contains(&b),
        Term::Zeeman { site, .. } => choice == ThermalChoice::BusPlusField && (first..=last).contains(&site),
    };
    Ok(all.iter().filter(|t| on_bus(t)).map(|t| t.shifted(1)).collect())
}

/// Gibbs state `e^{−H/T}/Z` of the chosen thermal Hamiltonian, built per
/// bus magnon sector. At `T = 0` it is the uniform mixture over the ground
/// level.
pub fn thermal_bus_state(p: &ChainParams, cfg: &ThermalConfig) -> Result<ThermalBusState> {
    p.validate()?;
    let t = cfg.temperature;
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTemperature(t));
    }
    let sites = p.bus_sites;
    let spin = p.spin;
    let dim = (spin.levels() as f64).powi(sites as i32);
    if dim > cfg.dim_cap as f64 {
        return Err(Error::DimensionCap { dim: dim.min(usize::MAX as f64) as usize, cap: cfg.dim_cap });
    }
    let terms = thermal_terms(p, cfg.choice)?;
    let cap = spin.twice() as usize;
    let mut branches = Vec::new();
    for m in 0..=sites * cap {
        let basis = Arc::new(enumerate_sector(sites, cap, m)?);
        let es = eigendecompose(&assemble_sector_hamiltonian(&terms, &basis, spin)?)?;
        for k in 0..es.dim() {
            branches.push(ThermalBranch {
                weight: 0.0,
                energy: es.eigenvalues[k],
                basis: basis.clone(),
                vector: es.eigenvectors.column(k).into_owned(),
            });
        }
    }
    let e0 = branches.iter().map(|b| b.energy).fold(f64::INFINITY, f64::min);
    let log_partition;
    if t == 0.0 {
        let tol = 1e-9 * e0.abs().max(1.0);
        let ground = branches.iter().filter(|b| b.energy - e0 <= tol).count() as f64;
        for b in &mut branches {
            b.weight = if b.energy - e0 <= tol { 1.0 / ground } else { 0.0 };
        }
        log_partition = None;
    } else {
        let z: CompensatedSum = branches.iter().map(|b| (-(b.energy - e0) / t).exp()).collect();
        let z = z.value();
        for b in &mut branches {
            b.weight = (-(b.energy - e0) / t).exp() / z;
        }
        log_partition = Some(z.ln() - e0 / t);
    }
    Ok(ThermalBusState { sites, spin, temperature: t, branches, log_partition })
}

/// Transfer with the bus initialized in a Gibbs state. Each bus eigenvector
/// is evolved as a pure branch and the receiver states are mixed with the
/// Gibbs weights.
#[derive(Debug, Clone)]
pub struct ThermalRun {
    params: ChainParams,
    bus: ThermalBusState,
    propagator: Arc<SectorPropagator>,
    time: f64,
    /// Branches with weight at or below this are skipped.
    min_weight: f64,
}

impl ThermalRun {
    /// Sectors up to `(d − 1) + N·2S` are diagonalized.
    pub fn propagator_for(p: &ChainParams) -> Result<Arc<SectorPropagator>> {
        let terms = build_hamiltonian_terms(p, &field_profile(p)?)?;
        let top = p.levels - 1 + p.bus_sites * p.spin.twice() as usize;
        Ok(Arc::new(SectorPropagator::new(&terms, p.sites(), p.spin, top)?))
    }

    pub fn new(p: &ChainParams, cfg: &ThermalConfig, time: f64) -> Result<Self> {
        ThermalRun::with_propagator(p, cfg, time, ThermalRun::propagator_for(p)?)
    }

    pub fn at_optimal_time(p: &ChainParams, cfg: &ThermalConfig) -> Result<Self> {
        ThermalRun::new(p, cfg, effective_spectrum(p)?.tau)
    }

    /// Reuses a propagator built by [`ThermalRun::propagator_for`] with the
    /// same parameters.
    pub fn with_propagator(p: &ChainParams, cfg: &ThermalConfig, time: f64, propagator: Arc<SectorPropagator>) -> Result<Self> {
        if propagator.sites() != p.sites() || propagator.spin() != p.spin {
            return Err(Error::Invalid("propagator built for a different chain".into()));
        }
        let bus = thermal_bus_state(p, cfg)?;
        Ok(ThermalRun { params: *p, bus, propagator, time, min_weight: 0.0 })
    }

    pub fn with_min_weight(mut self, min_weight: f64) -> Self {
        self.min_weight = min_weight;
        self
    }

    pub fn bus(&self) -> &ThermalBusState {
        &self.bus
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Total Gibbs weight of skipped branches.
    pub fn ignored_weight(&self) -> f64 {
        self.bus.branches.iter().filter(|b| b.weight <= self.min_weight).map(|b| b.weight).sum()
    }

    fn active(&self) -> impl Iterator<Item = &ThermalBranch> + '_ {
        self.bus.branches.iter().filter(move |b| b.weight > self.min_weight)
    }

    /// `Σ_u α_u |u⟩_s ⊗ |v⟩_bus ⊗ |0⟩_r`.
    pub fn branch_state(&self, phi: &QuditState, branch: &ThermalBranch) -> Result<BlockState> {
        if phi.levels() != self.params.levels {
            return Err(Error::DimensionMismatch { expected: self.params.levels, found: phi.levels() });
        }
        let sites = self.params.sites();
        let mut tuple = alloc::vec![0u16; sites];
        let mut parts = Vec::new();
        for (u, &alpha) in phi.amplitudes().iter().enumerate() {
            if alpha == C64::new(0.0, 0.0) {
                continue;
            }
            let basis = self.propagator.basis(u + branch.magnons())?.clone();
            let mut amps = DVector::zeros(basis.len());
            tuple[0] = u as u16;
            for (i, bus_tuple) in branch.basis.states().enumerate() {
                let v = branch.vector[i];
                if v == 0.0 {
                    continue;
                }
                tuple[1..sites - 1].copy_from_slice(bus_tuple);
                amps[basis.index_of(&tuple).expect("product tuple")] = alpha * v;
            }
            parts.push((basis, amps));
        }
        BlockState::embed(parts)
    }

    pub fn receiver_state(&self, phi: &QuditState) -> Result<ReceiverState> {
        let d = self.params.levels;
        let mut block = DMatrix::zeros(d, d);
        let mut leakage = 0.0;
        for br in self.active() {
            let evolved = self.propagator.evolve(&self.branch_state(phi, br)?, self.time)?;
            let r = reduce_to_receiver(&evolved, d)?;
            block += r.block * C64::new(br.weight, 0.0);
            leakage += br.weight * r.leakage;
        }
        Ok(ReceiverState { block, leakage })
    }

    pub fn channel(&self) -> Result<TransferChannel> {
        let d = self.params.levels;
        let mut blocks = alloc::vec![DMatrix::<C64>::zeros(d, d); d * d];
        for br in self.active() {
            let evolved = (0..d)
                .map(|u| self.propagator.evolve(&self.branch_state(&QuditState::basis(d, u), br)?, self.time))
                .collect::<Result<Vec<_>>>()?;
            for b in 0..d {
                for c in 0..d {
                    blocks[b * d + c] += reduce_pair(&evolved[b], &evolved[c], d)? * C64::new(br.weight, 0.0);
                }
            }
        }
        TransferChannel::from_blocks(d, blocks)
    }
}

impl PureStateChannel for ThermalRun {
    fn levels(&self) -> usize {
        self.params.levels
    }

    fn output(&self, input: &QuditState) -> Result<DMatrix<C64>> {
        Ok(self.receiver_state(input)?.block)
    }
}

pub fn thermal_transfer(p: &ChainParams, phi: &QuditState, cfg: &ThermalConfig, t: f64) -> Result<ReceiverState> {
    ThermalRun::new(p, cfg, t)?.receiver_state(phi)
}

/// One temperature of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub temperature: f64,
    pub estimate: FidelityEstimate,
    pub exact: f64,
    pub leakage: f64,
}

/// Average fidelity at the optimal time for each temperature. The same
/// sample stream is reused at every temperature.
pub fn temperature_sweep<R: Rng + Clone>(
    p: &ChainParams,
    choice: ThermalChoice,
    temperatures: &[f64],
    samples: usize,
    sampler: Sampler,
    rng: &R,
) -> Result<Vec<SweepPoint>> {
    let tau = effective_spectrum(p)?.tau;
    let prop = ThermalRun::propagator_for(p)?;
    temperatures
        .iter()
        .map(|&t| {
            let run = ThermalRun::with_propagator(p, &ThermalConfig::new(t, choice), tau, prop.clone())?;
            thermal_point(&run, samples, sampler, &mut rng.clone())
        })
        .collect()
}

/// Monte Carlo and exact average fidelity of one prepared run.
pub fn thermal_point<R: Rng + ?Sized>(run: &ThermalRun, samples: usize, sampler: Sampler, rng: &mut R) -> Result<SweepPoint> {
    let channel = run.channel()?;
    let d = channel.levels();
    let leakage = (0..d).map(|b| 1.0 - channel.output_trace(b)).sum::<f64>() / d as f64;
    Ok(SweepPoint {
        temperature: run.bus.temperature,
        estimate: average_fidelity_mc(run, samples, sampler, rng)?,
        exact: average_fidelity_exact(&channel).mean,
        leakage,
    })
}
