use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::basis::VibrationalBasis;
use super::pulse::{field_amplitude, PulseSet};
use crate::error::{Error, Result};

/// `H(t) = diag(E) + d(t) C` with drive `d(t) = -mu E(t)` and a real
/// symmetric coupling pattern `C` without diagonal.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    energies: Vec<f64>,
    coupling: DMatrix<f64>,
    pulses: PulseSet,
    dipole: f64,
    /// Nonzero couplings of each row.
    rows: Vec<Vec<(usize, f64)>>,
}

impl DrivenHamiltonian {
    pub fn new(energies: Vec<f64>, coupling: DMatrix<f64>, pulses: PulseSet, dipole: f64) -> Result<Self> {
        let n = energies.len();
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(Error::config(format!(
                "coupling is {}x{} but there are {n} levels",
                coupling.nrows(),
                coupling.ncols()
            )));
        }
        if (&coupling - coupling.transpose()).amax() > 0.0 {
            return Err(Error::config("coupling matrix must be symmetric"));
        }
        if (0..n).any(|k| coupling[(k, k)] != 0.0) {
            return Err(Error::config("coupling matrix must have a zero diagonal"));
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| coupling[(j, i)] != 0.0)
                    .map(|j| (j, coupling[(j, i)]))
                    .collect()
            })
            .collect();
        Ok(Self {
            energies,
            coupling,
            pulses,
            dipole,
            rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    pub fn pulses(&self) -> &PulseSet {
        &self.pulses
    }

    pub fn dipole(&self) -> f64 {
        self.dipole
    }

    /// Scalar multiplying the coupling pattern at time `t`.
    pub fn drive(&self, t: f64) -> f64 {
        -self.dipole * field_amplitude(t, &self.pulses)
    }

    pub fn matrix(&self, t: f64) -> DMatrix<C64> {
        let d = self.drive(t);
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.energies[i], 0.0)
            } else {
                C64::new(d * self.coupling[(i, j)], 0.0)
            }
        })
    }

    /// `out = d C psi`, the coupling part alone.
    pub fn apply_coupling(&self, drive: f64, psi: &[C64], out: &mut [C64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            let acc: C64 = row.iter().map(|&(j, c)| psi[j] * c).sum();
            *o = acc * drive;
        }
    }

    /// `out = H(t) psi` with a precomputed drive value.
    pub fn apply_with_drive(&self, drive: f64, psi: &[C64], out: &mut [C64]) {
        self.apply_coupling(drive, psi, out);
        for ((o, p), e) in out.iter_mut().zip(psi).zip(&self.energies) {
            *o += p * e;
        }
    }

    pub fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        self.apply_with_drive(self.drive(t), psi, out);
    }
}

/// Dipole-coupled two-surface Hamiltonian in the vibrational eigenbasis.
pub fn hamiltonian_matrix(t: f64, basis: &VibrationalBasis, pulses: &PulseSet, dipole: f64) -> DMatrix<C64> {
    let d = -dipole * field_amplitude(t, pulses);
    let c = basis.coupling_matrix();
    let e = basis.energies();
    DMatrix::from_fn(basis.dim(), basis.dim(), |i, j| {
        if i == j {
            C64::new(e[i], 0.0)
        } else {
            C64::new(d * c[(i, j)], 0.0)
        }
    })
}
