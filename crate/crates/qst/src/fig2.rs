//! Average fidelity against spin size.

use qst_core::effective::effective_spectrum;
use qst_core::{ChainParams, Spin, TransferRun};

use crate::config::Fig2Config;
use crate::eval::{evaluate, not_below, par_map, Point, RunOptions};
use crate::table::{num, Table};
use crate::CliError;

/// Band the best curve should reach at the largest spin.
pub const TARGET: (f64, f64) = (0.996, 0.9995);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Row {
    pub spin: f64,
    pub bus_z: f64,
    pub reg_z: f64,
    pub tau: f64,
    pub point: Point,
}

pub fn params(cfg: &Fig2Config, spin: f64, [bus_z, reg_z]: [f64; 2]) -> Result<ChainParams, CliError> {
    Ok(ChainParams {
        bus_sites: cfg.bus_sites,
        spin: Spin::new(spin)?,
        levels: cfg.levels,
        bus_xy: 1.0,
        bus_z,
        reg_xy: cfg.reg_xy,
        reg_z,
        field_offset: 0.0,
    })
}

/// Rows ordered by coupling pair, then by spin.
pub fn run(cfg: &Fig2Config, opts: &RunOptions) -> Result<Vec<Fig2Row>, CliError> {
    let grid: Vec<([f64; 2], f64)> = cfg.z_couplings.iter().flat_map(|&z| cfg.spins.iter().map(move |&s| (z, s))).collect();
    par_map(&grid, opts.threads, |&(z, s)| {
        let p = params(cfg, s, z)?;
        let run = TransferRun::at_optimal_time(&p)?;
        log::debug!("fig2 S={s} bus_z={} reg_z={}", z[0], z[1]);
        Ok(Fig2Row { spin: s, bus_z: z[0], reg_z: z[1], tau: effective_spectrum(&p)?.tau, point: evaluate(&run, &p, opts)? })
    })
}

pub fn table(rows: &[Fig2Row]) -> Table {
    let mut t = Table::new(&[
        "spin",
        "bus_z",
        "reg_z",
        "mean_f",
        "stderr",
        "exact_f",
        "phase_corrected_f",
        "phase_corrected_stderr",
        "phase_corrected_exact_f",
        "leakage",
        "tau",
    ]);
    for r in rows {
        let p = &r.point;
        t.push(vec![
            num(r.spin),
            num(r.bus_z),
            num(r.reg_z),
            num(p.mean),
            num(p.std_err),
            num(p.exact),
            num(p.corrected_mean),
            num(p.corrected_std_err),
            num(p.corrected_exact),
            num(p.leakage),
            num(r.tau),
        ]);
    }
    t
}

/// One curve of the figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub bus_z: f64,
    pub reg_z: f64,
    pub rows: Vec<Fig2Row>,
}

impl Curve {
    pub fn last(&self) -> &Fig2Row {
        self.rows.last().expect("curves are non-empty")
    }

    /// Non-decreasing in spin within `k` combined standard errors.
    pub fn monotone(&self, corrected: bool, k: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let pick = |r: &Fig2Row| {
                if corrected {
                    (r.point.corrected_mean, r.point.corrected_std_err)
                } else {
                    (r.point.mean, r.point.std_err)
                }
            };
            not_below(pick(&w[0]), pick(&w[1]), k)
        })
    }
}

pub fn curves(rows: &[Fig2Row]) -> Vec<Curve> {
    let mut out: Vec<Curve> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some(c) if c.bus_z == r.bus_z && c.reg_z == r.reg_z => c.rows.push(*r),
            _ => out.push(Curve { bus_z: r.bus_z, reg_z: r.reg_z, rows: vec![*r] }),
        }
    }
    for c in &mut out {
        c.rows.sort_by(|a, b| a.spin.total_cmp(&b.spin));
    }
    out
}

fn in_target(f: f64) -> bool {
    (TARGET.0..=TARGET.1).contains(&f)
}

pub fn summary(rows: &[Fig2Row]) -> Vec<String> {
    let mut lines = Vec::new();
    let cs = curves(rows);
    for c in &cs {
        let l = c.last();
        lines.push(format!(
            "bus_z={} reg_z={}: S={} <F>={:.5}±{:.1e} corrected {:.5}±{:.1e}; monotone in S (2 stderr): literal {}, corrected {}",
            c.bus_z,
            c.reg_z,
            l.spin,
            l.point.mean,
            l.point.std_err,
            l.point.corrected_mean,
            l.point.corrected_std_err,
            yes(c.monotone(false, 2.0)),
            yes(c.monotone(true, 2.0)),
        ));
    }
    let best = |f: fn(&Fig2Row) -> f64| cs.iter().map(|c| f(c.last())).fold(f64::NEG_INFINITY, f64::max);
    let (lit, cor) = (best(|r| r.point.mean), best(|r| r.point.corrected_mean));
    lines.push(format!(
        "best <F> at largest S: literal {lit:.5} (in [{}, {}]: {}), corrected {cor:.5} (in band: {})",
        TARGET.0,
        TARGET.1,
        yes(in_target(lit)),
        yes(in_target(cor)),
    ));
    lines
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
