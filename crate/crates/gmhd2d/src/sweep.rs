//! Parameter sweeps over (α, β, n): isolated cells run concurrently on a
//! bounded worker pool, one subdirectory each, then a deterministic summary
//! CSV is assembled in cell order.

use crate::config::RunConfig;
use crate::csvio::format_value;
use crate::runner::{execute_run, verdict_str, RunnerError};
use gmhd2d_core::dynamics::PhysicsParams;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone)]
pub struct Cell {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub dir_name: String,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub status: String,
    pub verdict: String,
    pub bkm_integral: f64,
    pub grad_j_sq_integral: f64,
    pub final_time: f64,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub results: Vec<CellResult>,
    pub summary_path: PathBuf,
}

/// Enumerate the sweep cells in deterministic (config) order.
pub fn cells(cfg: &RunConfig) -> Vec<Cell> {
    let sweep = cfg.sweep.as_ref();
    let alphas = sweep
        .map(|s| {
            if s.alphas.is_empty() {
                vec![cfg.physics.alpha]
            } else {
                s.alphas.clone()
            }
        })
        .unwrap_or_else(|| vec![cfg.physics.alpha]);
    let betas = sweep
        .map(|s| {
            if s.betas.is_empty() {
                vec![cfg.physics.beta]
            } else {
                s.betas.clone()
            }
        })
        .unwrap_or_else(|| vec![cfg.physics.beta]);
    let ns = sweep
        .map(|s| {
            if s.ns.is_empty() {
                vec![cfg.grid_n]
            } else {
                s.ns.clone()
            }
        })
        .unwrap_or_else(|| vec![cfg.grid_n]);
    let mut out = Vec::new();
    for &alpha in &alphas {
        for &beta in &betas {
            for &n in &ns {
                let dir_name = format!(
                    "cell_a{}_b{}_n{}",
                    format_value(alpha),
                    format_value(beta),
                    n
                );
                out.push(Cell {
                    alpha,
                    beta,
                    n,
                    dir_name,
                });
            }
        }
    }
    out
}

/// Resolve worker count: CLI flag, then config, then GMHD2D_WORKERS, then
/// machine parallelism.
pub fn resolve_workers(cfg: &RunConfig, cli: Option<usize>) -> usize {
    cli.or_else(|| cfg.sweep.as_ref().and_then(|s| s.workers))
        .or_else(|| {
            std::env::var("GMHD2D_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
        .max(1)
}

pub fn execute_sweep(cfg: &RunConfig, workers: usize) -> Result<SweepOutcome, RunnerError> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    let cell_list = cells(cfg);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CellResult>>> = Mutex::new(vec![None; cell_list.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers.min(cell_list.len()).max(1) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= cell_list.len() {
                    break;
                }
                let cell = &cell_list[idx];
                let result = run_cell(cfg, cell);
                results.lock().unwrap()[idx] = Some(result);
            });
        }
    });

    let results: Vec<CellResult> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("cell completed"))
        .collect();
    let summary_path = cfg.output.dir.join("summary.csv");
    let mut text =
        String::from("alpha,beta,n,status,verdict,bkm_integral,int_linf_grad_j_sq,final_time\n");
    for r in &results {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            format_value(r.cell.alpha),
            format_value(r.cell.beta),
            r.cell.n,
            r.status,
            r.verdict,
            format_value(r.bkm_integral),
            format_value(r.grad_j_sq_integral),
            format_value(r.final_time),
        ));
    }
    std::fs::write(&summary_path, &text)?;
    Ok(SweepOutcome {
        results,
        summary_path,
    })
}

fn run_cell(base: &RunConfig, cell: &Cell) -> CellResult {
    let mut cfg = base.clone();
    cfg.sweep = None;
    cfg.grid_n = cell.n;
    cfg.physics =
        match PhysicsParams::new(base.physics.nu, cell.alpha, base.physics.kappa, cell.beta) {
            Ok(p) => p,
            Err(e) => {
                return CellResult {
                    cell: cell.clone(),
                    status: format!("error:{e}"),
                    verdict: String::new(),
                    bkm_integral: f64::NAN,
                    grad_j_sq_integral: f64::NAN,
                    final_time: f64::NAN,
                }
            }
        };
    cfg.output.dir = base.output.dir.join(&cell.dir_name);
    match execute_run(&cfg) {
        Ok(outcome) => CellResult {
            cell: cell.clone(),
            status: if outcome.blew_up { "blowup" } else { "ok" }.to_string(),
            verdict: verdict_str(outcome.report.verdict).to_string(),
            bkm_integral: outcome.report.bkm_integral,
            grad_j_sq_integral: outcome.report.grad_j_sq_integral,
            final_time: outcome.final_time,
        },
        Err(e) => CellResult {
            cell: cell.clone(),
            status: "error".to_string(),
            verdict: format!("{e}").replace(',', ";"),
            bkm_integral: f64::NAN,
            grad_j_sq_integral: f64::NAN,
            final_time: f64::NAN,
        },
    }
}
