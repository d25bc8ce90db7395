//! Pure qudit inputs: Hurwitz coordinates and samplers for the unitarily
//! invariant measure.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, C64};

/// Normalized amplitudes `α_0..α_{d−1}` of a pure `d`-level state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    amps: DVector<C64>,
}

impl QuditState {
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm_squared();
        if amps.len() < 2 {
            return Err(Error::Invalid(alloc::format!("a qudit needs at least 2 levels, got {}", amps.len())));
        }
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(QuditState { amps })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NotNormalized(norm * norm));
        }
        QuditState::new(amps / C64::new(norm, 0.0))
    }

    pub fn basis(d: usize, level: usize) -> Self {
        let mut amps = DVector::zeros(d);
        amps[level] = C64::new(1.0, 0.0);
        QuditState { amps }
    }

    pub fn levels(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn projector(&self) -> DMatrix<C64> {
        &self.amps * self.amps.adjoint()
    }
}

/// Hurwitz coordinates: `θ_1..θ_{d−1} ∈ [0, π/2]`, `φ_1..φ_{d−1} ∈ [0, 2π)`.
/// Index `i` of each vector holds `θ_{i+1}` / `φ_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HurwitzAngles {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
}

impl HurwitzAngles {
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        if thetas.len() != phis.len() || thetas.is_empty() {
            return Err(Error::Invalid(alloc::format!(
                "need d-1 >= 1 polar and azimuthal angles, got {} and {}",
                thetas.len(),
                phis.len()
            )));
        }
        if thetas.iter().any(|t| !(0.0..=FRAC_PI_2).contains(t)) {
            return Err(Error::Invalid("theta outside [0, pi/2]".into()));
        }
        if phis.iter().any(|p| !(0.0..2.0 * PI).contains(p)) {
            return Err(Error::Invalid("phi outside [0, 2pi)".into()));
        }
        Ok(HurwitzAngles { thetas, phis })
    }

    pub fn levels(&self) -> usize {
        self.thetas.len() + 1
    }
}

/// Amplitudes `(cos θ_{d−1}, sin θ_{d−1} cos θ_{d−2} e^{iφ_{d−1}}, …,
/// ∏ sin θ_i e^{iφ_1})`.
pub fn hurwitz_state(angles: &HurwitzAngles) -> QuditState {
    let d = angles.levels();
    let mut amps = DVector::zeros(d);
    let mut sin_prod = 1.0;
    for u in 0..d {
        // level u uses θ_{d−1−u} for its cosine and φ_{d−u} for its phase
        let magnitude = if u + 1 < d { sin_prod * angles.thetas[d - 2 - u].cos() } else { sin_prod };
        let phase = if u == 0 { 0.0 } else { angles.phis[d - 1 - u] };
        amps[u] = C64::from_polar(magnitude, phase);
        if u + 1 < d {
            sin_prod *= angles.thetas[d - 2 - u].sin();
        }
    }
    QuditState { amps }
}

/// Normalized vector of independent standard complex Gaussians.
pub fn sample_fubini_study<R: Rng + ?Sized>(d: usize, rng: &mut R) -> QuditState {
    loop {
        let v = DVector::from_fn(d, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        let norm = v.norm();
        if norm > 1e-150 {
            return QuditState { amps: v / C64::new(norm, 0.0) };
        }
    }
}

/// Draws Hurwitz angles from the volume element
/// `∏_p cos θ_p (sin θ_p)^{2p−1} dθ_p dφ_p` by inverting
/// `CDF_p(θ) = sin^{2p} θ`.
pub fn sample_hurwitz_angles<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HurwitzAngles {
    let mut thetas = Vec::with_capacity(d - 1);
    let mut phis = Vec::with_capacity(d - 1);
    for p in 1..d {
        let u: f64 = rng.random();
        thetas.push(u.powf(1.0 / (2 * p) as f64).asin());
        phis.push(2.0 * PI * rng.random::<f64>());
    }
    HurwitzAngles { thetas, phis }
}

pub fn sample_hurwitz<R: Rng + ?Sized>(d: usize, rng: &mut R) -> QuditState {
    hurwitz_state(&sample_hurwitz_angles(d, rng))
}

/// Which sampler draws the inputs of a Monte Carlo average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampler {
    #[default]
    FubiniStudy,
    Hurwitz,
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(self, d: usize, rng: &mut R) -> QuditState {
        match self {
            Sampler::FubiniStudy => sample_fubini_study(d, rng),
            Sampler::Hurwitz => sample_hurwitz(d, rng),
        }
    }
}

/// `F = ⟨φ|ρ|φ⟩`.
pub fn state_fidelity(phi: &QuditState, rho: &DMatrix<C64>) -> Result<f64> {
    if rho.nrows() != phi.levels() || rho.ncols() != phi.levels() {
        return Err(Error::DimensionMismatch { expected: phi.levels(), found: rho.nrows() });
    }
    let a = phi.amplitudes();
    Ok((a.adjoint() * rho * a)[(0, 0)].re)
}
