//! Iterative global solution of the reduced wave-operator equation for a
//! one-dimensional model space `P = |i><i|`.
//!
//! The unknown `X(t) = Q Omega(t) P` is refined on the whole time grid at
//! once. Each iteration evaluates the residual `Delta`, solves the linear
//! first-order equation for the increment exactly with two FFT integrals per
//! channel, and adds it. The wavefunction follows from
//! `Psi(t) = (P + X(t)) exp(-i int H_eff)`.

mod ops;
mod rdwa;
mod system;

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub use ops::{
    effective_hamiltonian, fubini_study_distance, global_convergence_factor, increment_delta_x,
    reconstruct_wavefunction, residual_delta, tilde_h_diag, tilde_h_diag_with, Dressing,
};
pub use rdwa::{rdwa_run, rdwa_update, RdwaOutcome, RdwaVariant};
pub use system::{AbsorberProfile, DrivenSystem};

use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, TimeGrid};

/// `X_v(t_k)` stored with one column per channel; the initial-state column is
/// identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedWaveOperator {
    pub(crate) values: DMatrix<C64>,
    grid: TimeGrid,
    initial: usize,
    iteration: usize,
}

impl ReducedWaveOperator {
    pub fn zeros(grid: TimeGrid, dim: usize, initial: usize) -> Self {
        Self {
            values: DMatrix::zeros(grid.len(), dim),
            grid,
            initial,
            iteration: 0,
        }
    }

    /// Wraps sampled values; the initial column is cleared.
    pub fn from_values(grid: TimeGrid, initial: usize, mut values: DMatrix<C64>, iteration: usize) -> Result<Self> {
        if values.nrows() != grid.len() || initial >= values.ncols() {
            return Err(Error::config("wave-operator samples do not match the grid or basis"));
        }
        values.column_mut(initial).fill(C64::new(0.0, 0.0));
        Ok(Self {
            values,
            grid,
            initial,
            iteration,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn value(&self, v: usize, k: usize) -> C64 {
        self.values[(k, v)]
    }

    /// Samples as a `N_t x N_v` matrix.
    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn channel(&self, v: usize) -> ComplexSignal {
        ComplexSignal::from_parts(self.grid, self.values.column(v).iter().copied().collect())
    }

    /// `Omega(t_k) = e_i + X(t_k)`.
    pub fn omega_at(&self, k: usize) -> Vec<C64> {
        let mut w: Vec<C64> = self.values.row(k).iter().copied().collect();
        w[self.initial] = C64::new(1.0, 0.0);
        w
    }
}

/// Diagnostics of one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationReport {
    pub n: usize,
    /// Convergence factor `F`.
    pub factor: f64,
    /// `max |Delta|` of the iterate the increment was built from.
    pub max_residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationOptions {
    pub dressing: Dressing,
    /// Remove spectral content above N/3 from each increment.
    pub dealias: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            dressing: Dressing::Bare,
            dealias: true,
        }
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One increment `X -> X + delta X`.
pub fn iterate(
    x: &ReducedWaveOperator,
    sys: &DrivenSystem,
    opts: &IterationOptions,
) -> Result<(ReducedWaveOperator, IterationReport)> {
    let start = Instant::now();
    let hw = ops::h_omega(x, sys);
    let delta = ops::residual_from(x, sys, &hw);
    let heff = ComplexSignal::from_parts(*sys.grid(), hw.column(sys.initial()).iter().copied().collect());
    let htilde = tilde_h_diag_with(x, sys, opts.dressing);
    let n = x.iteration + 1;
    let mut dx = increment_delta_x(&delta, &heff, &htilde, sys.absorber(), sys.initial()).map_err(|e| match e {
        Error::Numerical(reason) => Error::Divergence {
            iteration: n,
            reason,
            history: Vec::new(),
        },
        other => other,
    })?;
    if opts.dealias {
        ops::dealias(&mut dx);
    }
    let values = &x.values + &dx;
    let factor = match global_convergence_factor(&dx, &values) {
        Ok(f) => f,
        Err(Error::Degenerate(_)) if max_abs(&dx) == 0.0 => 0.0,
        Err(e) => return Err(e),
    };
    if !factor.is_finite() {
        return Err(Error::Divergence {
            iteration: n,
            reason: "non-finite convergence factor".into(),
            history: Vec::new(),
        });
    }
    let report = IterationReport {
        n,
        factor,
        max_residual: max_abs(&delta),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((
        ReducedWaveOperator {
            values,
            grid: x.grid,
            initial: x.initial,
            iteration: n,
        },
        report,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub iteration: IterationOptions,
    /// Stop when F changes by less than 10% over three iterations.
    pub plateau_stop: bool,
    /// Iterations whose `X` is kept in the result.
    pub snapshots: Vec<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-16,
            max_iter: 25,
            iteration: IterationOptions::default(),
            plateau_stop: true,
            snapshots: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    Plateau,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub x: ReducedWaveOperator,
    pub h_eff: ComplexSignal,
    /// `Psi_v(t_k)`, rows are samples.
    pub psi: DMatrix<C64>,
    pub reports: Vec<IterationReport>,
    pub snapshots: Vec<ReducedWaveOperator>,
    pub stop: StopReason,
    /// `max |H_F Omega - Omega H_eff|` of the returned `X`.
    pub final_residual: f64,
}

impl PropagationResult {
    pub fn factors(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.factor).collect()
    }

    pub fn snapshot(&self, n: usize) -> Option<&ReducedWaveOperator> {
        self.snapshots.iter().find(|s| s.iteration() == n)
    }

    /// Wavefunction of the final iterate at sample `k`.
    pub fn psi_at(&self, k: usize) -> Vec<C64> {
        self.psi.row(k).iter().copied().collect()
    }
}

/// Wavefunction of an arbitrary iterate.
pub fn wavefunction(x: &ReducedWaveOperator, sys: &DrivenSystem) -> DMatrix<C64> {
    reconstruct_wavefunction(x, &effective_hamiltonian(x, sys))
}

fn on_plateau(f: &[f64]) -> bool {
    if f.len() < 3 {
        return false;
    }
    let w = &f[f.len() - 3..];
    let (lo, hi) = w
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo < 0.1 * hi
}

/// Iterates from `X = 0` until `F <= tol`, a plateau, or `max_iter`.
pub fn solve(sys: &DrivenSystem, config: &SolverConfig) -> Result<PropagationResult> {
    let mut x = ReducedWaveOperator::zeros(*sys.grid(), sys.dim(), sys.initial());
    let mut reports: Vec<IterationReport> = Vec::new();
    let mut snapshots = Vec::new();
    let mut rising = 0;
    let mut stop = StopReason::MaxIterations;
    let history = |reports: &[IterationReport]| reports.iter().map(|r| r.factor).collect::<Vec<_>>();

    for n in 1..=config.max_iter {
        let (next, report) = iterate(&x, sys, &config.iteration).map_err(|e| match e {
            Error::Divergence { iteration, reason, .. } => Error::Divergence {
                iteration,
                reason,
                history: history(&reports),
            },
            other => other,
        })?;
        x = next;
        if let Some(prev) = reports.last() {
            rising = if n > 5 && report.factor > prev.factor {
                rising + 1
            } else {
                0
            };
        }
        reports.push(report);
        if config.snapshots.contains(&n) {
            snapshots.push(x.clone());
        }
        if rising >= 5 {
            return Err(Error::Divergence {
                iteration: n,
                reason: "convergence factor grew for 5 consecutive iterations".into(),
                history: history(&reports),
            });
        }
        if report.factor <= config.tol {
            stop = StopReason::Tolerance;
            break;
        }
        if config.plateau_stop && n > 5 && on_plateau(&history(&reports)) {
            stop = StopReason::Plateau;
            break;
        }
    }

    let hw = ops::h_omega(&x, sys);
    let final_residual = max_abs(&ops::residual_from(&x, sys, &hw));
    let h_eff = ComplexSignal::from_parts(*sys.grid(), hw.column(sys.initial()).iter().copied().collect());
    let psi = reconstruct_wavefunction(&x, &h_eff);
    Ok(PropagationResult {
        x,
        h_eff,
        psi,
        reports,
        snapshots,
        stop,
        final_residual,
    })
}
