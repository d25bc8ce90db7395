//! Per-point fidelity evaluation and the worker pool.

use qst_core::channel::average_fidelity_mc_corrected;
use qst_core::effective::effective_spectrum;
use qst_core::{average_fidelity_exact, ChainParams, PureStateChannel, QuditState, Sampler, ThermalRun, TransferChannel, TransferRun};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::CliError;

/// Sampling settings shared by every grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub samples: usize,
    pub sampler: Sampler,
    pub threads: Option<usize>,
}

/// Literal and phase-corrected average fidelity of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub mean: f64,
    pub std_err: f64,
    pub exact: f64,
    pub corrected_mean: f64,
    pub corrected_std_err: f64,
    pub corrected_exact: f64,
    /// Input-averaged receiver population outside the encoded levels.
    pub leakage: f64,
    pub choi_min: f64,
}

pub trait Reconstruct: PureStateChannel {
    fn reconstruct(&self) -> qst_core::Result<TransferChannel>;
    fn leakage(&self, phi: &QuditState) -> qst_core::Result<f64>;
}

impl Reconstruct for TransferRun {
    fn reconstruct(&self) -> qst_core::Result<TransferChannel> {
        self.channel()
    }

    fn leakage(&self, phi: &QuditState) -> qst_core::Result<f64> {
        Ok(self.receiver_state(phi)?.leakage)
    }
}

impl Reconstruct for ThermalRun {
    fn reconstruct(&self) -> qst_core::Result<TransferChannel> {
        self.channel()
    }

    fn leakage(&self, phi: &QuditState) -> qst_core::Result<f64> {
        Ok(self.receiver_state(phi)?.leakage)
    }
}

/// Every point restarts the generator from the run seed, so all points of a
/// grid see the same inputs.
pub fn evaluate<C: Reconstruct>(run: &C, p: &ChainParams, opts: &RunOptions) -> Result<Point, CliError> {
    let d = p.levels;
    let phases = effective_spectrum(p)?.level_phases(d);
    let channel = run.reconstruct()?;
    let undo = qst_core::nalgebra::DMatrix::from_diagonal(&phases.map(|z| z.conj()));
    let exact = average_fidelity_exact(&channel);
    if let Some(v) = exact.cp_violation() {
        log::warn!("reconstructed channel fails complete positivity: min Choi eigenvalue {v:e}");
    }
    let corrected_exact = average_fidelity_exact(&channel.followed_by(&undo)).mean;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (lit, cor) = average_fidelity_mc_corrected(run, &phases, opts.samples, opts.sampler, &mut rng)?;
    let mut leakage = 0.0;
    for b in 0..d {
        leakage += run.leakage(&QuditState::basis(d, b))?;
    }
    let leakage = leakage / d as f64;
    Ok(Point {
        mean: lit.mean,
        std_err: lit.std_err,
        exact: exact.mean,
        corrected_mean: cor.mean,
        corrected_std_err: cor.std_err,
        corrected_exact,
        leakage,
        choi_min: exact.choi_min_eigenvalue,
    })
}

/// Maps `f` over `items` on a pool of `threads` workers, keeping input
/// order.
pub fn par_map<T, U, F>(items: &[T], threads: Option<usize>, f: F) -> Result<Vec<U>, CliError>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U, CliError> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

/// `b` is not below `a` beyond `k` combined standard errors.
pub fn not_below(a: (f64, f64), b: (f64, f64), k: f64) -> bool {
    b.0 >= a.0 - k * a.1.hypot(b.1)
}
