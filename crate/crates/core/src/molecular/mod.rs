//! Two-surface vibrational model: radial Fourier-grid eigenbasis, dipole
//! coupling to gaussian laser pulses and the time-dependent absorber used to
//! enforce periodic boundary values on the extended time interval.

mod absorber;
mod basis;
mod hamiltonian;
mod pulse;

pub use absorber::{absorbing_potential, AbsorberShape, AbsorberSpec};
pub use basis::{
    fourier_grid_eigensolve, resonance_frequencies, Eigenpairs, RadialGrid, Resonances, SurfaceSpec, VibrationalBasis,
};
pub use hamiltonian::{hamiltonian_matrix, DrivenHamiltonian};
pub use pulse::{field_amplitude, Pulse, PulseSet};

use crate::error::{Error, Result};
use crate::signal::TimeGrid;

/// Dipole scale of the built-in parameter sets. It equals the inverse of a
/// 0.06 radial step, i.e. overlaps taken as plain grid sums; a unit dipole
/// leaves the initial state above 97% populated for both pulse sets.
pub const DEFAULT_DIPOLE: f64 = 1.0 / 0.06;

/// Carrier frequency of a pulse, either fixed or tied to the computed spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Carrier {
    Fixed(f64),
    /// `E(7,2) - E(1,1)`.
    Omega1,
    /// `E(7,2) - E(6,1)`.
    Omega2,
}

impl Carrier {
    pub fn resolve(&self, res: &Resonances) -> f64 {
        match *self {
            Carrier::Fixed(w) => w,
            Carrier::Omega1 => res.omega1,
            Carrier::Omega2 => res.omega2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub amplitude: f64,
    pub carrier: Carrier,
    pub center: f64,
    pub width: f64,
}

/// Everything needed to build a [`MolecularModel`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParameters {
    pub radial: RadialGrid,
    pub lower: SurfaceSpec,
    pub upper: SurfaceSpec,
    pub n_keep: usize,
    pub dipole: f64,
    pub pulses: Vec<PulseSpec>,
    pub t_physical: f64,
    pub t_total: f64,
    pub n_time: usize,
    /// `int V_opt dt` over the absorbing window.
    pub absorber_total: f64,
    pub absorber_shape: AbsorberShape,
    /// Initial level `(v, surface)`, 1-based.
    pub initial: (usize, usize),
}

impl ModelParameters {
    /// Built-in parameter sets 1 and 2.
    pub fn example(which: u8) -> Result<Self> {
        let (a1, c1, a2, c2) = match which {
            1 => (0.05, 23.5, 0.08, 21.5),
            2 => (0.09, 22.5, 0.05, 21.5),
            _ => return Err(Error::config(format!("no built-in example {which}; choose 1 or 2"))),
        };
        Ok(Self {
            radial: RadialGrid::new(-4.5, 4.5, 256)?,
            lower: SurfaceSpec::double_well(),
            upper: SurfaceSpec::quartic(),
            n_keep: 30,
            dipole: DEFAULT_DIPOLE,
            pulses: vec![
                PulseSpec {
                    amplitude: a1,
                    carrier: Carrier::Omega1,
                    center: c1,
                    width: 3.90,
                },
                PulseSpec {
                    amplitude: a2,
                    carrier: Carrier::Omega2,
                    center: c2,
                    width: 4.50,
                },
            ],
            t_physical: 45.0,
            t_total: 50.0,
            n_time: 4096,
            absorber_total: 25.0,
            absorber_shape: AbsorberShape::SinFourth,
            initial: (1, 1),
        })
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_physical, self.t_total, self.n_time)
    }
}

/// Basis, pulses, time grid and absorber of one run.
#[derive(Clone, Debug)]
pub struct MolecularModel {
    pub basis: VibrationalBasis,
    pub resonances: Resonances,
    pub pulses: PulseSet,
    pub dipole: f64,
    pub grid: TimeGrid,
    pub absorber: AbsorberSpec,
    pub initial: usize,
}

impl MolecularModel {
    pub fn build(params: &ModelParameters) -> Result<Self> {
        let grid = params.time_grid()?;
        let basis = VibrationalBasis::build(&params.radial, &params.lower, &params.upper, params.n_keep)?;
        let (v, s) = params.initial;
        if v == 0 || v > params.n_keep || !(s == 1 || s == 2) {
            return Err(Error::config(format!(
                "initial level (v={v}, S={s}) is not in the basis"
            )));
        }
        let needs_resonances = params.pulses.iter().any(|p| !matches!(p.carrier, Carrier::Fixed(_)));
        if needs_resonances && params.n_keep < 7 {
            return Err(Error::config("resonant carriers need at least 7 states per surface"));
        }
        let resonances = if params.n_keep >= 7 {
            resonance_frequencies(&basis)
        } else {
            Resonances {
                omega1: f64::NAN,
                omega2: f64::NAN,
                raman_defect: f64::NAN,
            }
        };
        let pulses = PulseSet::new(
            params
                .pulses
                .iter()
                .map(|p| Pulse {
                    amplitude: p.amplitude,
                    carrier: p.carrier.resolve(&resonances),
                    center: p.center,
                    width: p.width,
                })
                .collect(),
        );
        let absorber =
            AbsorberSpec::with_total_absorption(grid.t_physical_end(), grid.t_total(), params.absorber_total)?
                .with_shape(params.absorber_shape);
        let initial = basis.index(v, s);
        Ok(Self {
            basis,
            resonances,
            pulses,
            dipole: params.dipole,
            grid,
            absorber,
            initial,
        })
    }

    pub fn hamiltonian(&self) -> DrivenHamiltonian {
        DrivenHamiltonian::new(
            self.basis.energies().to_vec(),
            self.basis.coupling_matrix(),
            self.pulses.clone(),
            self.dipole,
        )
        .expect("basis coupling is symmetric with zero diagonal")
    }

    /// Same model on a different time grid, keeping the absorber's shape and
    /// total absorption.
    pub fn with_grid(&self, grid: TimeGrid) -> Result<Self> {
        let absorber =
            AbsorberSpec::with_total_absorption(grid.t_physical_end(), grid.t_total(), self.absorber.total())?
                .with_shape(self.absorber.shape());
        Ok(Self {
            grid,
            absorber,
            ..self.clone()
        })
    }
}
