use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::molecular::{AbsorberSpec, DrivenHamiltonian, MolecularModel};
use crate::signal::{ComplexSignal, TimeGrid};

/// Absorber rate `V_opt(t_k)` and its running integral on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorberProfile {
    pub rate: Vec<f64>,
    pub integral: Vec<f64>,
}

impl AbsorberProfile {
    pub fn none(grid: &TimeGrid) -> Self {
        Self {
            rate: vec![0.0; grid.len()],
            integral: vec![0.0; grid.len()],
        }
    }

    pub fn from_spec(spec: &AbsorberSpec, grid: &TimeGrid) -> Self {
        let times = grid.times();
        Self {
            rate: times.iter().map(|&t| spec.rate(t)).collect(),
            integral: times.iter().map(|&t| spec.integral(t)).collect(),
        }
    }
}

/// Driven Hamiltonian and absorber sampled on the time grid, plus the index
/// of the initial (model-space) state.
#[derive(Clone, Debug)]
pub struct DrivenSystem {
    grid: TimeGrid,
    energies: Vec<f64>,
    coupling: DMatrix<f64>,
    drive: Vec<f64>,
    absorber: AbsorberProfile,
    initial: usize,
}

impl DrivenSystem {
    pub fn new(
        hamiltonian: &DrivenHamiltonian,
        grid: TimeGrid,
        absorber: Option<&AbsorberSpec>,
        initial: usize,
    ) -> Result<Self> {
        if initial >= hamiltonian.dim() {
            return Err(Error::config(format!(
                "initial index {initial} outside a {}-level system",
                hamiltonian.dim()
            )));
        }
        let drive = grid.times().iter().map(|&t| hamiltonian.drive(t)).collect();
        let absorber = match absorber {
            Some(spec) => AbsorberProfile::from_spec(spec, &grid),
            None => AbsorberProfile::none(&grid),
        };
        Ok(Self {
            grid,
            energies: hamiltonian.energies().to_vec(),
            coupling: hamiltonian.coupling().clone(),
            drive,
            absorber,
            initial,
        })
    }

    pub fn from_model(model: &MolecularModel) -> Self {
        Self::new(&model.hamiltonian(), model.grid, Some(&model.absorber), model.initial)
            .expect("model initial index lies in its basis")
    }

    /// Replaces the absorber by an arbitrary sampled profile.
    pub fn with_absorber(self, absorber: AbsorberProfile) -> Result<Self> {
        let n = self.grid.len();
        if absorber.rate.len() != n || absorber.integral.len() != n {
            return Err(Error::config(format!("absorber profile must have {n} samples")));
        }
        Ok(Self { absorber, ..self })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// `d(t_k)`, the scalar multiplying the coupling pattern.
    pub fn drive(&self) -> &[f64] {
        &self.drive
    }

    pub fn absorber(&self) -> &AbsorberProfile {
        &self.absorber
    }

    /// `H_{iv}(t)` as a signal.
    pub fn coupling_to_initial(&self, v: usize) -> ComplexSignal {
        let c = self.coupling[(self.initial, v)];
        ComplexSignal::from_parts(self.grid, self.drive.iter().map(|&d| C64::new(d * c, 0.0)).collect())
    }
}
