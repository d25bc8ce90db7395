//! Average fidelity against bus temperature.

use std::sync::Arc;

use qst_core::effective::effective_spectrum;
use qst_core::{ChainParams, Spin, ThermalChoice, ThermalConfig, ThermalRun};

use crate::config::{Fig3aConfig, Fig3bConfig};
use crate::eval::{evaluate, not_below, par_map, Point, RunOptions};
use crate::table::{num, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Fixed spin, several `reg_z`.
    A,
    /// `reg_z = reg_xy`, several spins.
    B,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::A => "a",
            Variant::B => "b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Row {
    pub variant: Variant,
    /// `reg_z` for variant a, spin for variant b.
    pub group: f64,
    pub spin: f64,
    pub reg_z: f64,
    /// Temperature over `reg_xy`.
    pub temperature: f64,
    pub tau: f64,
    pub point: Point,
}

struct Group {
    key: f64,
    params: ChainParams,
}

fn chain(bus_sites: usize, levels: usize, reg_xy: f64, bus_z: f64, spin: f64, reg_z: f64) -> Result<ChainParams, CliError> {
    Ok(ChainParams {
        bus_sites,
        spin: Spin::new(spin)?,
        levels,
        bus_xy: 1.0,
        bus_z,
        reg_xy,
        reg_z,
        field_offset: reg_z * spin,
    })
}

pub fn run_a(cfg: &Fig3aConfig, opts: &RunOptions) -> Result<Vec<Fig3Row>, CliError> {
    let groups = cfg
        .reg_z
        .iter()
        .map(|&z| Ok(Group { key: z, params: chain(cfg.bus_sites, cfg.levels, cfg.reg_xy, cfg.bus_z, cfg.spin, z)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    sweep(Variant::A, &groups, &cfg.temperatures, cfg.thermal.into(), opts)
}

pub fn run_b(cfg: &Fig3bConfig, opts: &RunOptions) -> Result<Vec<Fig3Row>, CliError> {
    let groups = cfg
        .spins
        .iter()
        .map(|&s| Ok(Group { key: s, params: chain(cfg.bus_sites, cfg.levels, cfg.reg_xy, cfg.bus_z, s, cfg.reg_xy)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    sweep(Variant::B, &groups, &cfg.temperatures, cfg.thermal.into(), opts)
}

/// Rows ordered by group, then by temperature in config order.
fn sweep(variant: Variant, groups: &[Group], temps: &[f64], choice: ThermalChoice, opts: &RunOptions) -> Result<Vec<Fig3Row>, CliError> {
    let props = par_map(groups, opts.threads, |g| Ok(ThermalRun::propagator_for(&g.params)?))?;
    let grid: Vec<(usize, f64)> = (0..groups.len()).flat_map(|g| temps.iter().map(move |&t| (g, t))).collect();
    par_map(&grid, opts.threads, |&(gi, t)| {
        let g = &groups[gi];
        let p = &g.params;
        let tau = effective_spectrum(p)?.tau;
        let cfg = ThermalConfig::new(t * p.reg_xy, choice);
        let run = ThermalRun::with_propagator(p, &cfg, tau, Arc::clone(&props[gi]))?;
        log::debug!("fig3{} group={} T/w0={t}", variant.label(), g.key);
        Ok(Fig3Row {
            variant,
            group: g.key,
            spin: p.spin.value(),
            reg_z: p.reg_z,
            temperature: t,
            tau,
            point: evaluate(&run, p, opts)?,
        })
    })
}

pub fn table(rows: &[Fig3Row]) -> Table {
    let mut t = Table::new(&[
        "variant",
        "group",
        "spin",
        "reg_z",
        "t_over_w0",
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
            r.variant.label().into(),
            num(r.group),
            num(r.spin),
            num(r.reg_z),
            num(r.temperature),
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

/// Rows of one group, sorted by temperature.
pub fn group(rows: &[Fig3Row], key: f64) -> Vec<Fig3Row> {
    let mut g: Vec<Fig3Row> = rows.iter().filter(|r| r.group == key).copied().collect();
    g.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
    g
}

pub fn groups(rows: &[Fig3Row]) -> Vec<f64> {
    let mut keys: Vec<f64> = Vec::new();
    for r in rows {
        if !keys.contains(&r.group) {
            keys.push(r.group);
        }
    }
    keys.sort_by(f64::total_cmp);
    keys
}

fn corrected(r: &Fig3Row) -> (f64, f64) {
    (r.point.corrected_mean, r.point.corrected_std_err)
}

/// Non-increasing in temperature over `temps` within `k` combined standard
/// errors.
pub fn non_increasing(rows: &[Fig3Row], key: f64, temps: &[f64], k: f64) -> bool {
    let g: Vec<Fig3Row> = group(rows, key).into_iter().filter(|r| temps.contains(&r.temperature)).collect();
    g.windows(2).all(|w| not_below(corrected(&w[1]), corrected(&w[0]), k))
}

/// Sign of the ordering of the group curves at one temperature: `1` when
/// fidelity increases strictly with the group key, `-1` when it strictly
/// decreases, `0` otherwise.
pub fn ordering(rows: &[Fig3Row], temperature: f64) -> i32 {
    let mut at: Vec<Fig3Row> = rows.iter().filter(|r| r.temperature == temperature).copied().collect();
    at.sort_by(|a, b| a.group.total_cmp(&b.group));
    let f: Vec<f64> = at.iter().map(|r| r.point.corrected_mean).collect();
    if f.windows(2).all(|w| w[1] > w[0]) {
        1
    } else if f.windows(2).all(|w| w[1] < w[0]) {
        -1
    } else {
        0
    }
}

pub fn temperatures(rows: &[Fig3Row]) -> Vec<f64> {
    let mut ts: Vec<f64> = Vec::new();
    for r in rows {
        if !ts.contains(&r.temperature) {
            ts.push(r.temperature);
        }
    }
    ts.sort_by(f64::total_cmp);
    ts
}

pub fn summary(rows: &[Fig3Row]) -> Vec<String> {
    let ts = temperatures(rows);
    let mut lines = Vec::new();
    for key in groups(rows) {
        let g = group(rows, key);
        let curve: Vec<String> = g.iter().map(|r| format!("{:.4}", r.point.corrected_mean)).collect();
        lines.push(format!(
            "group {key}: corrected <F> over T/w0 {:?} = [{}]; non-increasing (2 stderr): {}",
            ts,
            curve.join(", "),
            if non_increasing(rows, key, &ts, 2.0) { "yes" } else { "no" }
        ));
    }
    let signs: Vec<String> = ts.iter().map(|&t| format!("T/w0={t}: {:+}", ordering(rows, t))).collect();
    let crossover = ts.iter().any(|&t| ordering(rows, t) == 1) && ts.iter().any(|&t| ordering(rows, t) == -1);
    lines.push(format!("ordering by group key: {}; crossover: {}", signs.join(", "), if crossover { "yes" } else { "no" }));
    lines
}
