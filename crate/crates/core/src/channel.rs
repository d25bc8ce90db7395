//! Linear maps from sender to receiver states and their average fidelity.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::propagator::hermitian_spectrum;
use crate::qudit::{state_fidelity, QuditState, Sampler};
use crate::sum::CompensatedSum;
use crate::{Error, Result, C64};

/// Anything that turns a pure `d`-level input into a (possibly
/// sub-normalized) `d × d` output.
pub trait PureStateChannel {
    fn levels(&self) -> usize;
    fn output(&self, input: &QuditState) -> Result<DMatrix<C64>>;
}

/// A qudit channel stored through its action on the operator basis:
/// `blocks[b·d + c] = Λ(|b⟩⟨c|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferChannel {
    levels: usize,
    blocks: Vec<DMatrix<C64>>,
}

impl TransferChannel {
    pub fn from_blocks(levels: usize, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        if blocks.len() != levels * levels {
            return Err(Error::DimensionMismatch { expected: levels * levels, found: blocks.len() });
        }
        if let Some(bad) = blocks.iter().find(|m| m.nrows() != levels || m.ncols() != levels) {
            return Err(Error::DimensionMismatch { expected: levels, found: bad.nrows() });
        }
        Ok(TransferChannel { levels, blocks })
    }

    pub fn identity(levels: usize) -> Self {
        Self::unitary(&DMatrix::identity(levels, levels))
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(u: &DMatrix<C64>) -> Self {
        Self::from_kraus(core::slice::from_ref(u)).expect("square unitary")
    }

    /// `ρ ↦ Σ_k K_k ρ K_k†`.
    pub fn from_kraus(kraus: &[DMatrix<C64>]) -> Result<Self> {
        let d = kraus.first().map_or(0, |k| k.nrows());
        let mut blocks = Vec::with_capacity(d * d);
        for b in 0..d {
            for c in 0..d {
                let mut out = DMatrix::zeros(d, d);
                for k in kraus {
                    if k.nrows() != d || k.ncols() != d {
                        return Err(Error::DimensionMismatch { expected: d, found: k.nrows() });
                    }
                    out += k.column(b) * k.column(c).adjoint();
                }
                blocks.push(out);
            }
        }
        TransferChannel::from_blocks(d, blocks)
    }

    /// `ρ ↦ (1 − p) ρ + p Tr(ρ) I/d`.
    /// Random channel from a Haar-like isometry `C^d → C^d ⊗ C^env`,
    /// traced over the environment.
    pub fn random<R: Rng + ?Sized>(levels: usize, env: usize, rng: &mut R) -> Self {
        let rows = levels * env.max(1);
        let g = DMatrix::from_fn(rows, levels, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let q = g.qr().q();
        let kraus: Vec<DMatrix<C64>> = (0..env.max(1))
            .map(|k| DMatrix::from_fn(levels, levels, |a, b| q[(a * env.max(1) + k, b)]))
            .collect();
        Self::from_kraus(&kraus).expect("consistent Kraus shapes")
    }

    pub fn depolarizing(levels: usize, p: f64) -> Self {
        let d = levels;
        let mut blocks = Vec::with_capacity(d * d);
        for b in 0..d {
            for c in 0..d {
                let mut out = DMatrix::zeros(d, d);
                out[(b, c)] = C64::new(1.0 - p, 0.0);
                if b == c {
                    for a in 0..d {
                        out[(a, a)] += C64::new(p / d as f64, 0.0);
                    }
                }
                blocks.push(out);
            }
        }
        TransferChannel { levels, blocks }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `Λ(|b⟩⟨c|)`.
    pub fn block(&self, b: usize, c: usize) -> &DMatrix<C64> {
        &self.blocks[b * self.levels + c]
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let d = self.levels;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
        }
        let mut out = DMatrix::zeros(d, d);
        for b in 0..d {
            for c in 0..d {
                let w = rho[(b, c)];
                if w != C64::new(0.0, 0.0) {
                    out += self.block(b, c) * w;
                }
            }
        }
        Ok(out)
    }

    /// `d² × d²` matrix acting on row-major vectorized operators:
    /// `M[(a·d + a'), (b·d + c)] = Λ(|b⟩⟨c|)[a, a']`.
    pub fn process_matrix(&self) -> DMatrix<C64> {
        let d = self.levels;
        DMatrix::from_fn(d * d, d * d, |row, col| self.block(col / d, col % d)[(row / d, row % d)])
    }

    /// `C = Σ_{bc} |b⟩⟨c| ⊗ Λ(|b⟩⟨c|)`.
    pub fn choi(&self) -> DMatrix<C64> {
        let d = self.levels;
        DMatrix::from_fn(d * d, d * d, |row, col| self.block(row / d, col / d)[(row % d, col % d)])
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        hermitian_spectrum(&self.choi()).first().copied().unwrap_or(0.0)
    }

    /// Output trace for the input `|b⟩⟨b|`; below one by the leakage.
    pub fn output_trace(&self, b: usize) -> f64 {
        self.block(b, b).trace().re
    }

    /// `ρ ↦ U Λ(ρ) U†`.
    pub fn followed_by(&self, u: &DMatrix<C64>) -> Self {
        let blocks = self.blocks.iter().map(|m| u * m * u.adjoint()).collect();
        TransferChannel { levels: self.levels, blocks }
    }

    /// `ρ ↦ Λ(U ρ U†)`.
    pub fn preceded_by(&self, u: &DMatrix<C64>) -> Self {
        let d = self.levels;
        let mut blocks = Vec::with_capacity(d * d);
        for b in 0..d {
            for c in 0..d {
                let rho = u.column(b) * u.column(c).adjoint();
                blocks.push(self.apply(&rho).expect("matching dimension"));
            }
        }
        TransferChannel { levels: d, blocks }
    }
}

impl PureStateChannel for TransferChannel {
    fn levels(&self) -> usize {
        self.levels
    }

    fn output(&self, input: &QuditState) -> Result<DMatrix<C64>> {
        self.apply(&input.projector())
    }
}

/// Compares the output with `P φ` instead of `φ`, for a fixed diagonal
/// phase pattern `P = diag(phases)`.
#[derive(Debug, Clone)]
pub struct PhaseCorrected<C> {
    pub inner: C,
    pub phases: DVector<C64>,
}

impl<C: PureStateChannel> PureStateChannel for PhaseCorrected<C> {
    fn levels(&self) -> usize {
        self.inner.levels()
    }

    fn output(&self, input: &QuditState) -> Result<DMatrix<C64>> {
        let rho = self.inner.output(input)?;
        let d = rho.nrows();
        Ok(DMatrix::from_fn(d, d, |a, b| self.phases[a].conj() * rho[(a, b)] * self.phases[b]))
    }
}

/// Monte Carlo estimate of the average fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

#[derive(Default)]
struct Moments {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl Moments {
    fn add(&mut self, f: f64) {
        self.sum.add(f);
        self.sum_sq.add(f * f);
    }

    fn finish(&self, samples: usize) -> FidelityEstimate {
        let n = samples as f64;
        let mean = self.sum.value() / n;
        let std_err = if samples > 1 {
            let var = ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        FidelityEstimate { mean, std_err, samples }
    }
}

/// Samples `samples` inputs, returns the mean of `⟨φ|Λ(φ)|φ⟩` and its
/// standard error.
pub fn average_fidelity_mc<C, R>(channel: &C, samples: usize, sampler: Sampler, rng: &mut R) -> Result<FidelityEstimate>
where
    C: PureStateChannel + ?Sized,
    R: Rng + ?Sized,
{
    if samples == 0 {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    let d = channel.levels();
    let mut m = Moments::default();
    for _ in 0..samples {
        let phi = sampler.sample(d, rng);
        m.add(state_fidelity(&phi, &channel.output(&phi)?)?);
    }
    Ok(m.finish(samples))
}

/// Literal and phase-corrected estimates from one sample stream. The
/// literal part equals [`average_fidelity_mc`] for the same generator state.
pub fn average_fidelity_mc_corrected<C, R>(
    channel: &C,
    phases: &DVector<C64>,
    samples: usize,
    sampler: Sampler,
    rng: &mut R,
) -> Result<(FidelityEstimate, FidelityEstimate)>
where
    C: PureStateChannel + ?Sized,
    R: Rng + ?Sized,
{
    if samples == 0 {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    let d = channel.levels();
    if phases.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: phases.len() });
    }
    let (mut literal, mut corrected) = (Moments::default(), Moments::default());
    for _ in 0..samples {
        let phi = sampler.sample(d, rng);
        let rho = channel.output(&phi)?;
        literal.add(state_fidelity(&phi, &rho)?);
        let shifted = QuditState::new(phi.amplitudes().component_mul(phases))?;
        corrected.add(state_fidelity(&shifted, &rho)?);
    }
    Ok((literal.finish(samples), corrected.finish(samples)))
}

/// Exact Haar average plus the complete-positivity diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactAverage {
    pub mean: f64,
    pub choi_min_eigenvalue: f64,
}

impl ExactAverage {
    /// `Some(min eigenvalue)` when the reconstructed channel fails complete
    /// positivity beyond `-1e-8`.
    pub fn cp_violation(&self) -> Option<f64> {
        (self.choi_min_eigenvalue < -1e-8).then_some(self.choi_min_eigenvalue)
    }
}

/// Closed-form Haar average using
/// `E[|φ⟩⟨φ|^{⊗2}] = (I + SWAP) / (d(d+1))`:
///
/// `⟨F⟩ = (Σ_b Tr Λ(|b⟩⟨b|) + Σ_{bc} ⟨b|Λ(|b⟩⟨c|)|c⟩) / (d(d+1))`.
pub fn average_fidelity_exact(channel: &TransferChannel) -> ExactAverage {
    let d = channel.levels();
    let mut total = CompensatedSum::new();
    for b in 0..d {
        total.add(channel.output_trace(b));
        for c in 0..d {
            total.add(channel.block(b, c)[(b, c)].re);
        }
    }
    ExactAverage { mean: total.value() / (d * (d + 1)) as f64, choi_min_eigenvalue: channel.choi_min_eigenvalue() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z_rotation(chi: f64) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![C64::from_polar(1.0, -chi / 2.0), C64::from_polar(1.0, chi / 2.0)]))
    }

    #[test]
    fn identity_is_perfect() {
        for d in 2..6 {
            let ex = average_fidelity_exact(&TransferChannel::identity(d));
            assert!((ex.mean - 1.0).abs() < 1e-15);
            assert!(ex.cp_violation().is_none());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mc = average_fidelity_mc(&TransferChannel::identity(3), 100, Sampler::FubiniStudy, &mut rng).unwrap();
        assert!((mc.mean - 1.0).abs() < 1e-14);
        assert!(mc.std_err < 1e-7);
    }

    #[test]
    fn full_depolarization() {
        let ch = TransferChannel::depolarizing(3, 1.0);
        assert!((average_fidelity_exact(&ch).mean - 1.0 / 3.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mc = average_fidelity_mc(&ch, 1000, Sampler::FubiniStudy, &mut rng).unwrap();
        assert!((mc.mean - 1.0 / 3.0).abs() < 1e-12);
    }

    /// Bloch-sphere integral: `F(n) = cos²(χ/2) + sin²(χ/2) n_z²`, averaged
    /// over the sphere gives `(2 + cos χ)/3`.
    #[test]
    fn qubit_rotation_closed_form() {
        for chi in [0.0, 0.3, 1.0, 2.0, core::f64::consts::PI] {
            let ex = average_fidelity_exact(&TransferChannel::unitary(&z_rotation(chi)));
            assert!((ex.mean - (2.0 + chi.cos()) / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn kraus_and_matrix_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let k: Vec<DMatrix<C64>> = (0..2)
            .map(|_| DMatrix::from_fn(3, 3, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)))
            .collect();
        let ch = TransferChannel::from_kraus(&k).unwrap();
        let rho = DMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let direct: DMatrix<C64> = k.iter().map(|m| m * &rho * m.adjoint()).fold(DMatrix::zeros(3, 3), |a, b| a + b);
        assert!((ch.apply(&rho).unwrap() - &direct).iter().all(|z| z.norm() < 1e-12));
        let vec_rho = DVector::from_fn(9, |i, _| rho[(i / 3, i % 3)]);
        let vec_out = ch.process_matrix() * vec_rho;
        assert!((0..9).all(|i| (vec_out[i] - direct[(i / 3, i % 3)]).norm() < 1e-12));
        assert!(ch.choi_min_eigenvalue() > -1e-12);
    }

    #[test]
    fn phase_correction_undoes_a_diagonal_unitary() {
        let phases = DVector::from_vec(alloc::vec![C64::new(1.0, 0.0), C64::from_polar(1.0, 0.4), C64::from_polar(1.0, 0.8)]);
        let ch = TransferChannel::unitary(&DMatrix::from_diagonal(&phases));
        let fixed = PhaseCorrected { inner: ch.clone(), phases };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mc = average_fidelity_mc(&fixed, 200, Sampler::Hurwitz, &mut rng).unwrap();
        assert!((mc.mean - 1.0).abs() < 1e-12);
        assert!(average_fidelity_exact(&ch).mean < 0.99);
    }

    #[test]
    fn zero_samples_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(average_fidelity_mc(&TransferChannel::identity(2), 0, Sampler::FubiniStudy, &mut rng).is_err());
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (d, env) in [(2, 1), (2, 3), (3, 2), (3, 4)] {
            let ch = TransferChannel::random(d, env, &mut rng);
            for b in 0..d {
                assert!((ch.output_trace(b) - 1.0).abs() < 1e-12);
            }
            assert!(ch.choi_min_eigenvalue() > -1e-12);
        }
    }

    #[test]
    fn corrected_sampling_shares_the_stream() {
        let chi = 0.9;
        let ch = TransferChannel::unitary(&z_rotation(chi));
        let phases = DVector::from_vec(alloc::vec![C64::new(1.0, 0.0), C64::from_polar(1.0, chi)]);
        let plain = average_fidelity_mc(&ch, 500, Sampler::FubiniStudy, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let (lit, cor) =
            average_fidelity_mc_corrected(&ch, &phases, 500, Sampler::FubiniStudy, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(plain, lit);
        assert!((cor.mean - 1.0).abs() < 1e-12);
        assert!(cor.std_err < 1e-12);
    }
}
