//! Free Cartesian sweeps.

use qst_core::effective::effective_spectrum;
use qst_core::{ChainParams, Spin, ThermalConfig, ThermalRun, TransferRun};

use crate::config::SweepConfig;
use crate::eval::{evaluate, par_map, Point, RunOptions};
use crate::table::{num, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub params: ChainParams,
    /// Temperature over `reg_xy`; `None` for a vacuum bus.
    pub temperature: Option<f64>,
    pub time: f64,
    pub tau: f64,
    pub point: Point,
}

pub fn grid(cfg: &SweepConfig) -> Result<Vec<(ChainParams, Option<f64>)>, CliError> {
    let temps: Vec<Option<f64>> =
        if cfg.temperatures.is_empty() { vec![None] } else { cfg.temperatures.iter().map(|&t| Some(t)).collect() };
    let mut out = Vec::new();
    for &n in &cfg.bus_sites {
        for &s in &cfg.spins {
            for &d in &cfg.levels {
                for &w0 in &cfg.reg_xy {
                    for &oz in &cfg.bus_z {
                        for &wz in &cfg.reg_z {
                            for &h in &cfg.field_offset {
                                let p = ChainParams {
                                    bus_sites: n,
                                    spin: Spin::new(s)?,
                                    levels: d,
                                    bus_xy: 1.0,
                                    bus_z: oz,
                                    reg_xy: w0,
                                    reg_z: wz,
                                    field_offset: h,
                                };
                                out.extend(temps.iter().map(|&t| (p, t)));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn run(cfg: &SweepConfig, opts: &RunOptions) -> Result<Vec<SweepRow>, CliError> {
    par_map(&grid(cfg)?, opts.threads, |&(p, temp)| {
        let tau = effective_spectrum(&p)?.tau;
        let time = cfg.time.unwrap_or(tau);
        let point = match temp {
            None => evaluate(&TransferRun::new(&p, time)?, &p, opts)?,
            Some(t) => {
                let tc = ThermalConfig::new(t * p.reg_xy, cfg.thermal.into());
                evaluate(&ThermalRun::new(&p, &tc, time)?, &p, opts)?
            }
        };
        Ok(SweepRow { params: p, temperature: temp, time, tau, point })
    })
}

pub fn table(rows: &[SweepRow], thermal: bool) -> Table {
    let mut cols = vec!["bus_sites", "spin", "levels", "reg_xy", "bus_z", "reg_z", "field_offset"];
    if thermal {
        cols.push("t_over_w0");
    }
    cols.extend([
        "time",
        "mean_f",
        "stderr",
        "exact_f",
        "phase_corrected_f",
        "phase_corrected_stderr",
        "phase_corrected_exact_f",
        "leakage",
        "tau",
    ]);
    let mut t = Table::new(&cols);
    for r in rows {
        let p = &r.params;
        let mut row = vec![
            p.bus_sites.to_string(),
            num(p.spin.value()),
            p.levels.to_string(),
            num(p.reg_xy),
            num(p.bus_z),
            num(p.reg_z),
            num(p.field_offset),
        ];
        if let Some(temp) = r.temperature {
            row.push(num(temp));
        }
        let q = &r.point;
        row.extend([
            num(r.time),
            num(q.mean),
            num(q.std_err),
            num(q.exact),
            num(q.corrected_mean),
            num(q.corrected_std_err),
            num(q.corrected_exact),
            num(q.leakage),
            num(r.tau),
        ]);
        t.push(row);
    }
    t
}
