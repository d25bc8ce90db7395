//! Analytic track: linearized bosons, the sine transform that diagonalizes
//! the bus, the resonant three-mode model and its swap time.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};

use crate::qudit::QuditState;
use crate::sectors::{assemble_with, enumerate_sector, Ladder, OperatorMatrix};
use crate::spin_model::{build_hamiltonian_terms, ChainParams, FieldProfile};
use crate::{Error, Result, C64};

/// Collective-mode quantities of the linearized model.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSpectrum {
    /// `ε_k = −4 Ω0 S cos(kπ/(N+1))`, `k = 1..N` stored at `k − 1`.
    pub eps: Vec<f64>,
    /// `t_k = −2 ω0 S √(2/(N+1)) sin(kπ/(N+1))`.
    pub hop: Vec<f64>,
    /// Common single-magnon energy of registers and modes.
    pub gamma: f64,
    /// Resonant mode `κ = (N+1)/2`, 1-based.
    pub kappa: usize,
    /// `A = √((N+1)/2)`.
    pub a_factor: f64,
    /// Swap time `π / (√2 |t_κ|)`.
    pub tau: f64,
}

impl EffectiveSpectrum {
    pub fn eps_kappa(&self) -> f64 {
        self.eps[self.kappa - 1]
    }

    pub fn hop_kappa(&self) -> f64 {
        self.hop[self.kappa - 1]
    }

    /// `(−1)^κ e^{−iΓτ}`, picked up once per boson by a swapped state.
    pub fn swap_phase(&self) -> C64 {
        let sign = if self.kappa.is_multiple_of(2) { 1.0 } else { -1.0 };
        C64::from_polar(sign, -self.gamma * self.tau)
    }

    /// Per-level phases `λ^u`, `u = 0..levels`.
    pub fn level_phases(&self, levels: usize) -> DVector<C64> {
        let lambda = self.swap_phase();
        let mut out = DVector::from_element(levels, C64::new(1.0, 0.0));
        for u in 1..levels {
            out[u] = out[u - 1] * lambda;
        }
        out
    }
}

/// `ε_κ` is set to exactly zero for odd `N` (the cosine argument is `π/2`).
pub fn effective_spectrum(p: &ChainParams) -> Result<EffectiveSpectrum> {
    p.validate()?;
    let n = p.bus_sites;
    if n.is_multiple_of(2) {
        return Err(Error::EvenBusLength(n));
    }
    if p.reg_xy <= 0.0 {
        return Err(Error::InvalidParams("reg_xy must be positive for a finite swap time".into()));
    }
    let s = p.spin.value();
    let kappa = n.div_ceil(2);
    let norm = (2.0 / (n + 1) as f64).sqrt();
    let mut eps = Vec::with_capacity(n);
    let mut hop = Vec::with_capacity(n);
    for k in 1..=n {
        let angle = k as f64 * PI / (n + 1) as f64;
        eps.push(if k == kappa { 0.0 } else { -4.0 * p.bus_xy * s * angle.cos() });
        hop.push(-2.0 * p.reg_xy * s * norm * angle.sin());
    }
    let a_factor = ((n + 1) as f64 / 2.0).sqrt();
    // the resonant mode has sin(π/2) = 1 exactly
    hop[kappa - 1] = -2.0 * p.reg_xy * s / a_factor;
    let gamma = if n == 1 { 2.0 * p.reg_z * s + p.field_offset } else { (2.0 * p.bus_z + p.reg_z) * s };
    let tau = PI / (2f64.sqrt() * hop[kappa - 1].abs());
    Ok(EffectiveSpectrum { eps, hop, gamma, kappa, a_factor, tau })
}

/// `W[i][k] = √(2/(N+1)) sin(ikπ/(N+1))`, 1-based indices stored 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalTransform {
    pub matrix: DMatrix<f64>,
}

impl OrthogonalTransform {
    pub fn new(n: usize) -> Self {
        let norm = (2.0 / (n + 1) as f64).sqrt();
        let matrix = DMatrix::from_fn(n, n, |i, k| norm * (((i + 1) * (k + 1)) as f64 * PI / (n + 1) as f64).sin());
        OrthogonalTransform { matrix }
    }

    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        (&self.matrix * self.matrix.transpose() - DMatrix::identity(n, n)).abs().max()
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).abs().max()
    }
}

/// Linearized boson Hamiltonian on one magnon sector, with a per-site boson
/// cap. Hopping amplitudes are `2Ω0S` and `2ω0S` times bosonic factors.
pub fn bosonized_hamiltonian(p: &ChainParams, f: &FieldProfile, cap: usize, magnons: usize) -> Result<OperatorMatrix> {
    if cap + 1 < p.levels {
        return Err(Error::InvalidParams(alloc::format!("boson cap {cap} is below d - 1 = {}", p.levels - 1)));
    }
    let terms = build_hamiltonian_terms(p, f)?;
    let basis = Arc::new(enumerate_sector(p.sites(), cap, magnons)?);
    assemble_with(&terms, &basis, Ladder::Boson(p.spin))
}

/// Three-mode Hamiltonian over `(a_s, c_κ, a_r)` in the one-excitation
/// block: equal diagonal `Γ`, couplings `t_κ` and `(−1)^{κ−1} t_κ`.
pub fn three_mode_hamiltonian(spec: &EffectiveSpectrum) -> DMatrix<f64> {
    let t = spec.hop_kappa();
    let sign = if spec.kappa % 2 == 1 { 1.0 } else { -1.0 };
    let g = spec.gamma;
    DMatrix::from_row_slice(3, 3, &[g, t, 0.0, t, g, sign * t, 0.0, sign * t, g])
}

/// Receiver state predicted by the ideal swap: `α_u → α_u λ^u`.
pub fn effective_dynamics_prediction(p: &ChainParams, input: &QuditState) -> Result<QuditState> {
    let spec = effective_spectrum(p)?;
    let phases = spec.level_phases(input.levels());
    QuditState::new(input.amplitudes().component_mul(&phases))
}

/// Validity of dropping the off-resonant modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceReport {
    pub hop_kappa: f64,
    /// `min_{k≠κ} |ε_κ − ε_k|`; infinite when the bus has a single mode.
    pub gap: f64,
    pub ratio: f64,
    pub threshold: f64,
    pub resonant: bool,
}

pub fn resonance_check(p: &ChainParams, threshold: f64) -> Result<ResonanceReport> {
    let spec = effective_spectrum(p)?;
    let ek = spec.eps_kappa();
    let gap = spec
        .eps
        .iter()
        .enumerate()
        .filter(|&(k, _)| k + 1 != spec.kappa)
        .map(|(_, e)| (ek - e).abs())
        .fold(f64::INFINITY, f64::min);
    let hop_kappa = spec.hop_kappa();
    let ratio = hop_kappa.abs() / gap;
    Ok(ResonanceReport { hop_kappa, gap, ratio, threshold, resonant: ratio < threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::eigendecompose_dense;
    use crate::spin_model::{field_profile, Spin};

    fn params(n: usize, s: f64, reg_xy: f64) -> ChainParams {
        ChainParams {
            bus_sites: n,
            spin: Spin::new(s).unwrap(),
            levels: 2,
            bus_xy: 1.0,
            bus_z: 1.0,
            reg_xy,
            reg_z: 0.5,
            field_offset: 0.0,
        }
    }

    #[test]
    fn zero_mode_for_odd_chains() {
        for n in (1..=101).step_by(2) {
            let spec = effective_spectrum(&params(n, 2.0, 0.1)).unwrap();
            assert_eq!(spec.eps_kappa(), 0.0);
            assert!((spec.hop_kappa() + 2.0 * 0.1 * 2.0 / spec.a_factor).abs() < 1e-15);
            let k = spec.kappa - 1;
            for j in 1..=k.min(n - 1 - k) {
                assert!((spec.eps[k + j] + spec.eps[k - j]).abs() < 1e-12);
            }
        }
        assert_eq!(effective_spectrum(&params(4, 1.0, 0.1)).unwrap_err(), Error::EvenBusLength(4));
    }

    #[test]
    fn swap_time_example() {
        let spec = effective_spectrum(&params(3, 10.0, 0.1)).unwrap();
        assert!((spec.hop_kappa() + 2f64.sqrt()).abs() < 1e-14);
        assert!((spec.tau - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_example() {
        let mut p = params(3, 2.0, 0.1);
        p.bus_z = 1.0;
        p.reg_z = 0.5;
        assert!((effective_spectrum(&p).unwrap().gamma - 5.0).abs() < 1e-15);
    }

    #[test]
    fn transform_is_orthogonal_and_symmetric() {
        for n in 1..=101 {
            let w = OrthogonalTransform::new(n);
            assert!(w.orthogonality_residual() < 1e-12, "N={n}");
            assert!(w.symmetry_residual() < 1e-12);
        }
    }

    #[test]
    fn three_mode_swap_is_complete() {
        for n in [1, 3, 5, 7] {
            let spec = effective_spectrum(&params(n, 3.0, 0.05)).unwrap();
            let es = eigendecompose_dense(None, three_mode_hamiltonian(&spec));
            let u = es.propagator(spec.tau);
            assert!((u[(2, 0)].norm() - 1.0).abs() < 1e-12);
            assert!((u[(2, 0)] - spec.swap_phase()).norm() < 1e-12);
        }
    }

    #[test]
    fn prediction_phases() {
        let p = params(3, 2.0, 0.1);
        let spec = effective_spectrum(&p).unwrap();
        let zero = QuditState::basis(2, 0);
        assert_eq!(effective_dynamics_prediction(&p, &zero).unwrap(), zero);
        let r = 1.0 / 2f64.sqrt();
        let plus = QuditState::new(DVector::from_element(2, C64::new(r, 0.0))).unwrap();
        let out = effective_dynamics_prediction(&p, &plus).unwrap();
        // κ = 2 is even
        let expected = C64::from_polar(r, -spec.gamma * spec.tau);
        assert!((out.amplitudes()[1] - expected).norm() < 1e-14);

        let mut p3 = params(3, 2.0, 0.1);
        p3.levels = 3;
        let top = QuditState::basis(3, 2);
        let out = effective_dynamics_prediction(&p3, &top).unwrap();
        assert!((out.amplitudes()[2] - spec.swap_phase() * spec.swap_phase()).norm() < 1e-14);
    }

    #[test]
    fn resonance_ratio() {
        let rep = resonance_check(&params(3, 4.0, 0.1), 0.1).unwrap();
        assert!((rep.ratio - 0.05).abs() < 1e-14);
        assert!(rep.resonant);
        let rep = resonance_check(&params(3, 4.0, 1.0), 0.1).unwrap();
        assert!((rep.ratio - 0.5).abs() < 1e-14);
        assert!(!rep.resonant);
        let mut last = 0.0;
        let mut flipped = false;
        for n in (3..=201).step_by(2) {
            let rep = resonance_check(&params(n, 1.0, 0.1), 0.1).unwrap();
            assert!(rep.ratio > last);
            last = rep.ratio;
            flipped |= !rep.resonant;
        }
        assert!(flipped);
    }

    fn one_magnon(p: &ChainParams) -> (DMatrix<f64>, f64) {
        let f = field_profile(p).unwrap();
        let h1 = bosonized_hamiltonian(p, &f, 1, 1).unwrap().to_dense();
        let vac = bosonized_hamiltonian(p, &f, 1, 0).unwrap().get(0, 0);
        (h1, vac)
    }

    #[test]
    fn one_magnon_bus_spectrum() {
        for n in [3, 5, 7, 9] {
            let p = params(n, 2.5, 0.1);
            let spec = effective_spectrum(&p).unwrap();
            let (h1, vac) = one_magnon(&p);
            // sites 1..=n are the bus
            let bus = h1.view((1, 1), (n, n)).into_owned();
            let es = eigendecompose_dense(None, bus.clone());
            let mut expected: Vec<f64> = spec.eps.iter().map(|e| e + spec.gamma + vac).collect();
            expected.sort_by(|a, b| a.total_cmp(b));
            for (got, want) in es.eigenvalues.iter().zip(&expected) {
                assert!((got - want).abs() < 1e-10, "N={n}: {got} vs {want}");
            }
            // conjugation by W
            let w = OrthogonalTransform::new(n).matrix;
            let diag = w.transpose() * &bus * &w;
            for k in 0..n {
                for l in 0..n {
                    let want = if k == l { spec.eps[k] + spec.gamma + vac } else { 0.0 };
                    assert!((diag[(k, l)] - want).abs() < 1e-10);
                }
                let to_sender = (h1.view((0, 1), (1, n)) * &w)[(0, k)];
                let to_receiver = (h1.view((n + 1, 1), (1, n)) * &w)[(0, k)];
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert!((to_sender - spec.hop[k]).abs() < 1e-10);
                assert!((to_receiver - sign * spec.hop[k]).abs() < 1e-10);
            }
            assert!((h1[(0, 0)] - vac - spec.gamma).abs() < 1e-10);
            assert!((h1[(n + 1, n + 1)] - vac - spec.gamma).abs() < 1e-10);
        }
    }

    #[test]
    fn bosonized_vacuum_energy() {
        let p = params(5, 1.5, 0.1);
        let f = field_profile(&p).unwrap();
        let s = 1.5;
        let fields: f64 = f.site_fields().iter().sum();
        let want = -p.bus_z * s * s * (p.bus_sites - 1) as f64 - 2.0 * p.reg_z * s * s - fields * s;
        let got = bosonized_hamiltonian(&p, &f, 2, 0).unwrap().get(0, 0);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn bosons_approach_spins_at_large_spin() {
        use crate::sectors::assemble_sector_hamiltonian;
        let d = 3;
        for s in [5.0, 20.0, 100.0] {
            let mut p = params(3, s, 0.1);
            p.levels = d;
            let f = field_profile(&p).unwrap();
            let terms = build_hamiltonian_terms(&p, &f).unwrap();
            let basis = Arc::new(enumerate_sector(5, p.spin.twice() as usize, d - 1).unwrap());
            let exact = assemble_sector_hamiltonian(&terms, &basis, p.spin).unwrap().to_dense();
            let boson = bosonized_hamiltonian(&p, &f, d - 1, d - 1).unwrap().to_dense();
            assert_eq!(exact.nrows(), boson.nrows());
            for i in 0..boson.nrows() {
                for j in 0..boson.nrows() {
                    if i != j && boson[(i, j)] != 0.0 {
                        let rel = (exact[(i, j)] - boson[(i, j)]).abs() / boson[(i, j)].abs();
                        assert!(rel <= (d - 1) as f64 / (2.0 * s));
                    }
                }
            }
        }
    }
}
