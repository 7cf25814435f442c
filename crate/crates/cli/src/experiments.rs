use std::sync::Arc;

use maus_core::codes::{self, maus_code};
use maus_core::dynamics::{self, NoiseParams};
use maus_core::optimal_recovery::{self, MinimalQuditCode};
use maus_core::protocol::{CycleOptions, CycleSimulator};
use maus_core::HalfInteger;
use rayon::prelude::*;

use crate::config::{Experiment, SweepConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Self::Num(x) => format!("{x:.11e}"),
            Self::Int(k) => k.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

impl From<HalfInteger> for Cell {
    fn from(s: HalfInteger) -> Self {
        Self::Text(s.to_string())
    }
}

/// One grid point: identifying columns plus either values or an error.
#[derive(Clone, Debug)]
pub struct Point {
    pub keys: Vec<Cell>,
    pub values: Result<Vec<Cell>, String>,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub key_columns: Vec<&'static str>,
    pub value_columns: Vec<&'static str>,
    pub points: Vec<Point>,
}

impl Table {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.values.is_err()).count()
    }
}

type Job = Box<dyn Fn() -> Result<Vec<Cell>, String> + Send + Sync>;

struct Task {
    keys: Vec<Cell>,
    job: Job,
}

fn evaluate(cfg: &SweepConfig, tasks: Vec<Task>) -> Vec<Point> {
    tasks
        .into_par_iter()
        .enumerate()
        .map(|(idx, task)| {
            let values = if cfg.inject_failures.contains(&idx) { Err("injected failure".to_string()) } else { (task.job)() };
            Point { keys: task.keys, values }
        })
        .collect()
}

pub fn run(cfg: &SweepConfig) -> Table {
    match cfg.experiment {
        Experiment::IdealFig3 => ideal(cfg),
        Experiment::ProtocolFig4 | Experiment::BreakevenFig5a | Experiment::BreakevenFig5b => protocol(cfg),
        Experiment::PulseFidelity => pulses(cfg),
        Experiment::Spectrum | Experiment::Schedule => unreachable!("{} is not a sweep", cfg.experiment),
    }
}

fn ideal(cfg: &SweepConfig) -> Table {
    let grid = cfg.t_grid.points();
    let mut tasks = vec![];
    let row = |f: f64, loss: f64, x: f64| {
        vec![Cell::Num(f), Cell::Num(loss), Cell::Num(codes::breakeven_baseline(x)), Cell::Num(codes::breakeven_baseline_infidelity(x))]
    };
    for &spin in &cfg.spins {
        for &x in &grid {
            tasks.push(Task {
                keys: vec![Cell::Text("maus".into()), spin.into(), Cell::Num(x)],
                job: Box::new(move || {
                    let code = maus_code(spin).map_err(|e| e.to_string())?;
                    let f = codes::ideal_corrected_fidelity(&code, x).map_err(|e| e.to_string())?;
                    let loss = codes::ideal_corrected_infidelity(&code, x).map_err(|e| e.to_string())?;
                    Ok(row(f, loss, x))
                }),
            });
        }
    }
    if cfg.flags.minimal_qudit {
        let code = Arc::new(MinimalQuditCode::bundled());
        for &x in &grid {
            let code = Arc::clone(&code);
            tasks.push(Task {
                keys: vec![Cell::Text("minimal-qudit".into()), MinimalQuditCode::spin().into(), Cell::Num(x)],
                job: Box::new(move || {
                    let f = optimal_recovery::minimal_qudit_fidelity(&code, x).map_err(|e| e.to_string())?;
                    Ok(row(f, 1.0 - f, x))
                }),
            });
        }
    }
    Table {
        key_columns: vec!["code", "spin", "gn_t"],
        value_columns: vec!["fidelity", "infidelity", "baseline_fidelity", "baseline_infidelity"],
        points: evaluate(cfg, tasks),
    }
}

fn protocol(cfg: &SweepConfig) -> Table {
    let options = CycleOptions {
        quantize_wait: cfg.flags.quantize_wait,
        q_over_omega: cfg.q_over_omega,
        encoding_noise: cfg.flags.encoding_noise,
        ..CycleOptions::default()
    };
    let mut combos = vec![];
    for &spin in &cfg.spins {
        for &gn in &cfg.gamma_n {
            for &ge in &cfg.gamma_e {
                combos.push((spin, gn, ge));
            }
        }
    }
    let sims: Vec<Result<Arc<CycleSimulator>, String>> = combos
        .par_iter()
        .map(|&(spin, gn, ge)| {
            let noise = NoiseParams::new(gn, ge).map_err(|e| e.to_string())?;
            CycleSimulator::new(spin, noise, options.clone()).map(Arc::new).map_err(|e| e.to_string())
        })
        .collect();
    let grid = cfg.t_grid.points();
    let mut tasks = vec![];
    for (&(spin, gn, ge), sim) in combos.iter().zip(&sims) {
        for &x in &grid {
            let sim = sim.clone();
            tasks.push(Task {
                keys: vec![spin.into(), Cell::Num(gn), Cell::Num(ge), Cell::Num(x)],
                job: Box::new(move || {
                    let sim = sim.clone()?;
                    let result = sim.run(x / gn).map_err(|e| e.to_string())?;
                    let corrected = 1.0 - result.entanglement_fidelity().map_err(|e| e.to_string())?;
                    let x_eff = gn * result.t_wait;
                    let bare = codes::breakeven_baseline_infidelity(x_eff);
                    Ok(vec![
                        Cell::Num(x_eff),
                        Cell::Num(corrected),
                        Cell::Num(bare),
                        Cell::Num(bare / corrected),
                        Cell::Int((corrected < bare) as i64),
                        Cell::Num(bare - corrected),
                        Cell::Num(result.expected_rounds()),
                    ])
                }),
            });
        }
    }
    Table {
        key_columns: vec!["spin", "gamma_n", "gamma_e", "gn_t_requested"],
        value_columns: vec![
            "gn_t",
            "corrected_infidelity",
            "uncorrected_infidelity",
            "ratio",
            "beats_breakeven",
            "margin",
            "expected_rounds",
        ],
        points: evaluate(cfg, tasks),
    }
}

fn pulses(cfg: &SweepConfig) -> Table {
    let mut tasks = vec![];
    for &spin in &cfg.spins {
        for &g in &cfg.gamma_n {
            for j in 1..=spin.twice() as usize {
                tasks.push(Task {
                    keys: vec![Cell::Text("nuclear".into()), spin.into(), Cell::Num(g), Cell::Int(j as i64)],
                    job: Box::new(move || {
                        let f = dynamics::nuclear_pi_pulse_fidelity(spin, g, j).map_err(|e| e.to_string())?;
                        Ok(vec![Cell::Num(f), Cell::Num(1.0 - f)])
                    }),
                });
            }
        }
    }
    for &g in &cfg.gamma_e {
        tasks.push(Task {
            keys: vec![Cell::Text("electron".into()), Cell::Text("-".into()), Cell::Num(g), Cell::Int(0)],
            job: Box::new(move || {
                let f = dynamics::electron_pi_pulse_fidelity(g).map_err(|e| e.to_string())?;
                Ok(vec![Cell::Num(f), Cell::Num(1.0 - f)])
            }),
        });
    }
    Table {
        key_columns: vec!["kind", "spin", "gamma", "transition"],
        value_columns: vec!["fidelity", "infidelity"],
        points: evaluate(cfg, tasks),
    }
}
