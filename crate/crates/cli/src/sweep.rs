//! Noise-ratio sweep: every (η, seed) cell prepares, trains, degrades and
//! restores independently, so cells run in parallel without affecting results.

use std::fmt::Write as _;
use std::fs;

use rayon::prelude::*;

use colur::bench::{self, Score, Seeds};
use colur::lur::{learn_incremental, learn_initial, Colur, Toggles};

use crate::commands::prepare_data;
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const THREADS_ENV: &str = "COLUR_THREADS";

#[derive(Debug, Clone)]
pub struct Cell {
    pub eta: f64,
    pub seed: u64,
    pub original: Score,
    pub degrade: Score,
    /// One score per toggle set, in sweep order.
    pub refined: Vec<Score>,
}

fn run_cell(cfg: &ExperimentConfig, eta: f64, seed: u64, toggles: &[Toggles]) -> CliResult<Cell> {
    let mut cfg = cfg.clone();
    cfg.noise.ratio = eta;
    let data = prepare_data(&cfg, seed)?;
    let s = Seeds::from(seed);
    let theta0 = learn_initial(&data.d0, &cfg.net.layers, &cfg.train, s.initial)?;
    let theta_u = learn_incremental(&theta0, data.du.observed(), &cfg.degrade, s.degrade)?;
    let mut refined = Vec::with_capacity(toggles.len());
    for &t in toggles {
        let mut lur = cfg.lur.clone();
        lur.toggles = t;
        lur.seed = s.lur;
        let out = Colur::new(lur).run(&theta_u, &theta0, data.du.observed())?;
        refined.push(bench::score(&out.student, &data)?);
    }
    Ok(Cell {
        eta,
        seed,
        original: bench::score(&theta0, &data)?,
        degrade: bench::score(&theta_u, &data)?,
        refined,
    })
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::field(THREADS_ENV, format!("expected a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))
}

pub fn run_cells(cfg: &ExperimentConfig, toggles: &[Toggles]) -> CliResult<Vec<Cell>> {
    let grid: Vec<(f64, u64)> = cfg
        .sweep
        .etas
        .iter()
        .flat_map(|&e| cfg.sweep.seeds.iter().map(move |&s| (e, s)))
        .collect();
    thread_pool()?.install(|| grid.par_iter().map(|&(e, s)| run_cell(cfg, e, s, toggles)).collect())
}

fn stats(v: &[f64]) -> (String, String) {
    if v.is_empty() {
        return (String::new(), String::new());
    }
    (format!("{:.6}", bench::mean(v)), format!("{:.6}", bench::std_dev(v)))
}

pub const AGGREGATE_HEADER: &str = "eta,toggles,seeds,original_mean,original_std,degrade_mean,degrade_std,\
refined_mean,refined_std,degrade_noisy_error_mean,degrade_noisy_error_std,refined_noisy_error_mean,refined_noisy_error_std";

/// One row per (η, toggle set), mean and sample std over seeds.
pub fn aggregate(cells: &[Cell], etas: &[f64], toggles: &[Toggles]) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for &eta in etas {
        let group: Vec<&Cell> = cells.iter().filter(|c| c.eta == eta).collect();
        let acc = |f: &dyn Fn(&Cell) -> Score| group.iter().map(|c| f(c).accuracy).collect::<Vec<_>>();
        let err = |f: &dyn Fn(&Cell) -> Score| group.iter().filter_map(|c| f(c).noisy_subset_error).collect::<Vec<_>>();
        for (ti, t) in toggles.iter().enumerate() {
            let cols = [
                stats(&acc(&|c| c.original)),
                stats(&acc(&|c| c.degrade)),
                stats(&acc(&|c| c.refined[ti])),
                stats(&err(&|c| c.degrade)),
                stats(&err(&|c| c.refined[ti])),
            ];
            let _ = write!(s, "{eta},{},{}", t.label(), group.len());
            for (m, sd) in cols {
                let _ = write!(s, ",{m},{sd}");
            }
            s.push('\n');
        }
    }
    s
}

pub const CELLS_HEADER: &str = "eta,seed,toggles,original,degrade,refined,degrade_noisy_error,refined_noisy_error";

pub fn cells_csv(cells: &[Cell], toggles: &[Toggles]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut s = String::from(CELLS_HEADER);
    s.push('\n');
    for c in cells {
        for (t, r) in toggles.iter().zip(&c.refined) {
            let _ = writeln!(
                s,
                "{},{},{},{:.6},{:.6},{:.6},{},{}",
                c.eta,
                c.seed,
                t.label(),
                c.original.accuracy,
                c.degrade.accuracy,
                r.accuracy,
                opt(c.degrade.noisy_subset_error),
                opt(r.noisy_subset_error)
            );
        }
    }
    s
}

pub fn sweep(cfg: &ExperimentConfig) -> CliResult<()> {
    if cfg.sweep.etas.is_empty() {
        return Err(CliError::field("sweep.etas", "must not be empty"));
    }
    if cfg.sweep.seeds.is_empty() {
        return Err(CliError::field("sweep.seeds", "must not be empty"));
    }
    let toggles = cfg.sweep.toggles()?;
    if toggles.is_empty() {
        return Err(CliError::field("sweep.toggle_sets", "must not be empty"));
    }
    let cells = run_cells(cfg, &toggles)?;
    let table = aggregate(&cells, &cfg.sweep.etas, &toggles);
    for (name, text) in [("sweep.csv", &table), ("sweep_cells.csv", &cells_csv(&cells, &toggles))] {
        let path = cfg.file(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    }
    print!("{table}");
    Ok(())
}
