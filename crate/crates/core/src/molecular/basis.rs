use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Uniform radial grid `r_k = r_min + k dr`, `k = 0..n`, right end excluded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    n_points: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min < r_max) || !r_min.is_finite() || !r_max.is_finite() {
            return Err(Error::config(format!(
                "radial bounds must satisfy r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(Error::config(format!(
                "radial point count must be a power of two >= 4, got {n_points}"
            )));
        }
        Ok(Self { r_min, r_max, n_points })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / self.n_points as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.r_min + k as f64 * self.dr()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    pub fn doubled(&self) -> Self {
        Self {
            n_points: 2 * self.n_points,
            ..*self
        }
    }
}

/// Polynomial potential surface `eps(R) = sum_k c_k R^k` for a particle of
/// mass `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    coefficients: Vec<f64>,
    mass: f64,
}

impl SurfaceSpec {
    pub fn new(coefficients: Vec<f64>, mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::config(format!("mass must be positive, got {mass}")));
        }
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("surface needs at least one finite coefficient"));
        }
        Ok(Self { coefficients, mass })
    }

    /// Asymmetric double well `-5R^2 + 0.5R^3 + R^4`, m = 10.
    pub fn double_well() -> Self {
        Self {
            coefficients: vec![0.0, 0.0, -5.0, 0.5, 1.0],
            mass: 10.0,
        }
    }

    /// Quartic excited surface `0.2R^4`, m = 10.
    pub fn quartic() -> Self {
        Self {
            coefficients: vec![0.0, 0.0, 0.0, 0.0, 0.2],
            mass: 10.0,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn potential(&self, r: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * r + c)
    }
}

/// Lowest eigenpairs on a radial grid. Columns of `vectors` are normalized so
/// that `sum_k |phi(r_k)|^2 dr = 1`.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub grid: RadialGrid,
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Kinetic matrix `-(1/2m) d^2/dr^2` applied spectrally. The periodic grid
/// makes it a symmetric circulant, so one row determines it.
fn kinetic_matrix(grid: &RadialGrid, mass: f64) -> DMatrix<f64> {
    let n = grid.len();
    let len = grid.r_max() - grid.r_min();
    let row: Vec<f64> = (0..n)
        .map(|d| {
            (0..n)
                .map(|l| {
                    let k = if l < n / 2 { l as f64 } else { l as f64 - n as f64 };
                    let kk = 2.0 * std::f64::consts::PI * k / len;
                    kk * kk / (2.0 * mass) * (kk * d as f64 * grid.dr()).cos()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| row[i.abs_diff(j)])
}

pub fn fourier_grid_eigensolve(surface: &SurfaceSpec, grid: &RadialGrid, n_keep: usize) -> Result<Eigenpairs> {
    let n = grid.len();
    if n_keep == 0 || n_keep > n {
        return Err(Error::config(format!(
            "cannot keep {n_keep} states on a {n}-point grid"
        )));
    }
    let mut h = kinetic_matrix(grid, surface.mass());
    for k in 0..n {
        h[(k, k)] += surface.potential(grid.point(k));
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let norm = 1.0 / grid.dr().sqrt();
    let mut energies = Vec::with_capacity(n_keep);
    let mut vectors = DMatrix::zeros(n, n_keep);
    for (col, &idx) in order.iter().take(n_keep).enumerate() {
        energies.push(eig.eigenvalues[idx]);
        let v = eig.eigenvectors.column(idx);
        let peak = v.amax();
        // fix the sign: first clearly nonzero component is positive
        let first = v.iter().find(|x| x.abs() > 0.1 * peak).copied().unwrap_or(1.0);
        let sign = first.signum();
        let edge = v[0].abs().max(v[n - 1].abs());
        if edge > 1e-10 {
            return Err(Error::Diagnostics(format!(
                "state {} does not decay at the radial boundary (|phi| = {edge:e}); widen [r_min, r_max]",
                col + 1
            )));
        }
        for k in 0..n {
            vectors[(k, col)] = sign * norm * v[k];
        }
    }
    Ok(Eigenpairs {
        grid: *grid,
        energies,
        vectors,
    })
}

/// Two-surface vibrational basis: `n_keep` states on each surface, global
/// indices `0..n_keep` for the lower surface and `n_keep..2 n_keep` for the
/// upper one.
#[derive(Clone, Debug)]
pub struct VibrationalBasis {
    lower: Eigenpairs,
    upper: Eigenpairs,
    energies: Vec<f64>,
    overlap: DMatrix<f64>,
}

impl VibrationalBasis {
    pub fn build(grid: &RadialGrid, lower: &SurfaceSpec, upper: &SurfaceSpec, n_keep: usize) -> Result<Self> {
        let (lo, up) = rayon::join(
            || fourier_grid_eigensolve(lower, grid, n_keep),
            || fourier_grid_eigensolve(upper, grid, n_keep),
        );
        let (lower, upper) = (lo?, up?);
        let overlap = lower.vectors.transpose() * &upper.vectors * grid.dr();
        let energies = lower.energies.iter().chain(&upper.energies).copied().collect();
        Ok(Self {
            lower,
            upper,
            energies,
            overlap,
        })
    }

    pub fn n_per_surface(&self) -> usize {
        self.lower.energies.len()
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Global index of vibrational level `v` (1-based) on surface `s` (1 or 2).
    pub fn index(&self, v: usize, s: usize) -> usize {
        assert!(
            v >= 1 && v <= self.n_per_surface() && (s == 1 || s == 2),
            "no level v={v} on surface {s}"
        );
        (s - 1) * self.n_per_surface() + v - 1
    }

    /// Inverse of [`index`](Self::index).
    pub fn label(&self, index: usize) -> (usize, usize) {
        let n = self.n_per_surface();
        (index % n + 1, index / n + 1)
    }

    pub fn energy(&self, v: usize, s: usize) -> f64 {
        self.energies[self.index(v, s)]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn surface(&self, s: usize) -> &Eigenpairs {
        match s {
            1 => &self.lower,
            _ => &self.upper,
        }
    }

    /// `O[v, v'] = <v, S=1 | v', S=2>`.
    pub fn overlap(&self) -> &DMatrix<f64> {
        &self.overlap
    }

    /// Symmetric `dim x dim` matrix holding the overlap in its off-diagonal
    /// blocks and zeros elsewhere.
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let n = self.n_per_surface();
        let mut c = DMatrix::zeros(2 * n, 2 * n);
        c.view_mut((0, n), (n, n)).copy_from(&self.overlap);
        c.view_mut((n, 0), (n, n)).copy_from(&self.overlap.transpose());
        c
    }
}

/// Carrier frequencies resonant with the two-photon (Raman) pathway.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resonances {
    /// `E(7,2) - E(1,1)`.
    pub omega1: f64,
    /// `E(7,2) - E(6,1)`.
    pub omega2: f64,
    /// `|(omega1 - omega2) - (E(6,1) - E(1,1))|`.
    pub raman_defect: f64,
}

pub fn resonance_frequencies(basis: &VibrationalBasis) -> Resonances {
    let e72 = basis.energy(7, 2);
    let e11 = basis.energy(1, 1);
    let e61 = basis.energy(6, 1);
    let omega1 = e72 - e11;
    let omega2 = e72 - e61;
    Resonances {
        omega1,
        omega2,
        raman_defect: ((omega1 - omega2) - (e61 - e11)).abs(),
    }
}
