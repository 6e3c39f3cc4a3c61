#![allow(dead_code)]

use std::sync::OnceLock;
use std::time::Instant;

use globalprop::molecular::{ModelParameters, MolecularModel};
use globalprop::waveop::{solve, DrivenSystem, PropagationResult, SolverConfig};
use globalprop::C64;

pub struct Solved {
    pub model: MolecularModel,
    pub system: DrivenSystem,
    pub result: PropagationResult,
    pub seconds: f64,
}

impl Solved {
    pub fn j0(&self) -> usize {
        self.model.grid.j0()
    }

    pub fn final_psi(&self) -> Vec<C64> {
        self.result.psi_at(self.j0())
    }
}

pub fn solve_params(params: &ModelParameters, snapshots: Vec<usize>) -> Solved {
    let model = MolecularModel::build(params).unwrap();
    let system = DrivenSystem::from_model(&model);
    let start = Instant::now();
    let result = solve(
        &system,
        &SolverConfig {
            snapshots,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    Solved {
        model,
        system,
        result,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Built-in example solved once per test binary, keeping iterates 4, 9, 22.
pub fn example(which: u8) -> &'static Solved {
    static ONE: OnceLock<Solved> = OnceLock::new();
    static TWO: OnceLock<Solved> = OnceLock::new();
    let cell = if which == 1 { &ONE } else { &TWO };
    cell.get_or_init(|| solve_params(&ModelParameters::example(which).unwrap(), vec![4, 9, 22]))
}

/// `max_{t <= t_j0} | ||Psi(t)||^2 - 1 |`.
pub fn norm_deviation(s: &Solved) -> f64 {
    (0..=s.j0())
        .map(|k| (s.result.psi.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Channel of vibrational level `v` on the lower surface.
pub fn lower(s: &Solved, v: usize) -> usize {
    s.model.basis.index(v, 1)
}

/// Channel of level `v` on the upper surface.
pub fn upper(s: &Solved, v: usize) -> usize {
    s.model.basis.index(v, 2)
}
