use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::system::{AbsorberProfile, DrivenSystem};
use super::ReducedWaveOperator;
use crate::error::{Error, Result};
use crate::fftint::{extend_in_place, integrate_periodic_in_place, simpson_prefix, ExtensionOptions};
use crate::signal::{self, ComplexSignal, TimeGrid};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Diagonal dressing used in the increment equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Dressing {
    /// `h_vv = H_vv` (energy and absorber only).
    #[default]
    Bare,
    /// `h_vv = H_vv - X_v H_iv`.
    Full,
}

/// `H(t) Omega(t)` for every sample, with `Omega = e_i + X` and the absorber
/// on all channels but `i`. Rows are samples, columns channels.
pub(crate) fn h_omega(x: &ReducedWaveOperator, sys: &DrivenSystem) -> DMatrix<C64> {
    let (n, nv, i) = (sys.grid().len(), sys.dim(), sys.initial());
    let omega_re = DMatrix::from_fn(n, nv, |k, v| if v == i { 1.0 } else { x.values[(k, v)].re });
    let omega_im = DMatrix::from_fn(n, nv, |k, v| if v == i { 0.0 } else { x.values[(k, v)].im });
    let c = sys.coupling();
    let (cre, cim) = (&omega_re * c, &omega_im * c);
    let (e, d, rate) = (sys.energies(), sys.drive(), &sys.absorber().rate);
    DMatrix::from_fn(n, nv, |k, v| {
        let om = C64::new(omega_re[(k, v)], omega_im[(k, v)]);
        let mut h = om * e[v] + C64::new(cre[(k, v)], cim[(k, v)]) * d[k];
        if v != i {
            h -= I * om * rate[k];
        }
        h
    })
}

fn column(m: &DMatrix<C64>, v: usize) -> &[C64] {
    let n = m.nrows();
    &m.as_slice()[v * n..(v + 1) * n]
}

/// `Delta = Q(1 - X) H_F (1 + X) P`, zero on the initial channel.
pub fn residual_delta(x: &ReducedWaveOperator, sys: &DrivenSystem) -> DMatrix<C64> {
    residual_from(x, sys, &h_omega(x, sys))
}

pub(crate) fn residual_from(x: &ReducedWaveOperator, sys: &DrivenSystem, hw: &DMatrix<C64>) -> DMatrix<C64> {
    let (n, nv, i) = (sys.grid().len(), sys.dim(), sys.initial());
    let t_total = sys.grid().t_total();
    let heff = column(hw, i);
    let mut out = DMatrix::zeros(n, nv);
    out.as_mut_slice().par_chunks_mut(n).enumerate().for_each(|(v, col)| {
        if v == i {
            return;
        }
        let xv = column(&x.values, v);
        let mut dx = xv.to_vec();
        signal::derivative_in_place(&mut dx, t_total);
        let hv = column(hw, v);
        for k in 0..n {
            col[k] = hv[k] - xv[k] * heff[k] - I * dx[k];
        }
    });
    out
}

/// `H_eff(t) = H_ii + sum_v H_iv X_v(t)`.
pub fn effective_hamiltonian(x: &ReducedWaveOperator, sys: &DrivenSystem) -> ComplexSignal {
    let i = sys.initial();
    let c = sys.coupling();
    let values = (0..sys.grid().len())
        .map(|k| {
            let s: C64 = (0..sys.dim())
                .filter(|&v| v != i)
                .map(|v| x.values[(k, v)] * c[(i, v)])
                .sum();
            C64::new(sys.energies()[i], 0.0) + s * sys.drive()[k]
        })
        .collect();
    ComplexSignal::from_parts(*sys.grid(), values)
}

/// Dressed diagonal `h_vv(t_k)` of the complementary space, absorber
/// included. The initial-channel column holds `H_ii`.
pub fn tilde_h_diag_with(x: &ReducedWaveOperator, sys: &DrivenSystem, dressing: Dressing) -> DMatrix<C64> {
    let (n, nv, i) = (sys.grid().len(), sys.dim(), sys.initial());
    let c = sys.coupling();
    DMatrix::from_fn(n, nv, |k, v| {
        let e = C64::new(sys.energies()[v], 0.0);
        if v == i {
            return e;
        }
        let mut h = e - I * sys.absorber().rate[k];
        if dressing == Dressing::Full {
            h -= x.values[(k, v)] * (sys.drive()[k] * c[(i, v)]);
        }
        h
    })
}

/// Fully dressed diagonal `H_vv - X_v H_iv`.
pub fn tilde_h_diag(x: &ReducedWaveOperator, sys: &DrivenSystem) -> DMatrix<C64> {
    tilde_h_diag_with(x, sys, Dressing::Full)
}

/// Real-part midpoint of a phase over a window, used as exponent reference.
fn midpoint(phi: &[C64]) -> f64 {
    let (lo, hi) = phi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
        (lo.min(z.re), hi.max(z.re))
    });
    0.5 * (lo + hi)
}

/// Solution of `i dX/dt = Delta + (h - H_eff) X`, `X(0) = 0`, for one channel.
///
/// The phase `phi = int (h - H_eff)/i` is split into a periodic part handled
/// by the FFT integrator and the absorber integral known in closed form. On
/// the physical window the integrand is bridged and integrated spectrally
/// with exponents referenced to their midpoint; on the absorbing tail the
/// exponentials are referenced pairwise to `t_{j0}` and integrated with
/// Simpson's rule, which keeps every factor bounded.
fn channel_increment(
    delta: &[C64],
    heff: &[C64],
    htilde: &[C64],
    absorber: &AbsorberProfile,
    grid: &TimeGrid,
) -> Result<Vec<C64>> {
    let n = grid.len();
    let t_total = grid.t_total();
    let mut phi: Vec<C64> = (0..n)
        .map(|k| (htilde[k] + I * absorber.rate[k] - heff[k]) * -I)
        .collect();
    integrate_periodic_in_place(&mut phi, t_total);
    for (p, a) in phi.iter_mut().zip(&absorber.integral) {
        *p -= a;
    }

    let mut dx = vec![ZERO; n];
    if !grid.has_extension() {
        let c = midpoint(&phi);
        let mut g: Vec<C64> = (0..n).map(|k| delta[k] * (c - phi[k]).exp()).collect();
        integrate_periodic_in_place(&mut g, t_total);
        for k in 0..n {
            dx[k] = (phi[k] - c).exp() * g[k] * -I;
        }
        return Ok(dx);
    }

    let j0 = grid.j0();
    let c = midpoint(&phi[..=j0]);
    let mut g = vec![ZERO; n];
    for k in 0..=j0 {
        g[k] = delta[k] * (c - phi[k]).exp();
    }
    extend_in_place(&mut g, grid, &ExtensionOptions::default())?;
    integrate_periodic_in_place(&mut g, t_total);
    for k in 0..=j0 {
        dx[k] = (phi[k] - c).exp() * g[k] * -I;
    }

    let base = phi[j0];
    let w: Vec<C64> = (j0..n).map(|k| delta[k] * (base - phi[k]).exp()).collect();
    let acc = simpson_prefix(&w, grid.dt());
    let start = dx[j0];
    for k in j0 + 1..n {
        dx[k] = (phi[k] - base).exp() * (start + acc[k - j0] * -I);
    }
    Ok(dx)
}

/// Exact increment `delta X` of the linearized wave-operator equation for
/// every complementary channel.
pub fn increment_delta_x(
    delta: &DMatrix<C64>,
    heff: &ComplexSignal,
    htilde: &DMatrix<C64>,
    absorber: &AbsorberProfile,
    initial: usize,
) -> Result<DMatrix<C64>> {
    let grid = *heff.grid();
    let (n, nv) = (grid.len(), delta.ncols());
    let mut out = DMatrix::zeros(n, nv);
    out.as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .try_for_each(|(v, col)| -> Result<()> {
            if v == initial {
                return Ok(());
            }
            let dx = channel_increment(column(delta, v), heff.values(), column(htilde, v), absorber, &grid)?;
            col.copy_from_slice(&dx);
            Ok(())
        })?;
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite increment".into()));
    }
    Ok(out)
}

/// Removes spectral content above `N/3` from every channel (the products
/// with `exp(+-phi)` would otherwise alias it back), then re-pins `t = 0`.
pub(crate) fn dealias(dx: &mut DMatrix<C64>) {
    let n = dx.nrows();
    let l_max = n / 3;
    dx.as_mut_slice().par_chunks_mut(n).for_each(|col| {
        if col.iter().all(|z| *z == ZERO) {
            return;
        }
        signal::band_limit_in_place(col, l_max);
        col[0] = ZERO;
    });
}

/// `F = ||delta X||^2 / ||X'||^2` over all channels and samples.
pub fn global_convergence_factor(dx: &DMatrix<C64>, x_next: &DMatrix<C64>) -> Result<f64> {
    let den: f64 = x_next.iter().map(|z| z.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::Degenerate("wave operator is identically zero".into()));
    }
    Ok(dx.iter().map(|z| z.norm_sqr()).sum::<f64>() / den)
}

/// `Psi_v(t) = (delta_vi + X_v(t)) exp(-i int_0^t H_eff)`.
pub fn reconstruct_wavefunction(x: &ReducedWaveOperator, heff: &ComplexSignal) -> DMatrix<C64> {
    let mut phase = heff.values().to_vec();
    integrate_periodic_in_place(&mut phase, heff.grid().t_total());
    let u: Vec<C64> = phase.iter().map(|p| (p * -I).exp()).collect();
    let i = x.initial();
    DMatrix::from_fn(u.len(), x.values.ncols(), |k, v| {
        let om = if v == i { C64::new(1.0, 0.0) } else { x.values[(k, v)] };
        om * u[k]
    })
}

/// `arccos(1 / ||Omega(t_k)||)` with `||Omega||^2 = 1 + ||X||^2`.
pub fn fubini_study_distance(x: &ReducedWaveOperator, k: usize) -> f64 {
    let norm2: f64 = x.values.row(k).iter().map(|z| z.norm_sqr()).sum();
    (1.0 / (1.0 + norm2).sqrt()).acos()
}
