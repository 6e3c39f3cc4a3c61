//! FFT-based cumulative integration.
//!
//! For a T-periodic signal all prefix integrals `I(t_j) = int_0^{t_j} f` are
//! obtained from two transforms: the spectrum of `f` is multiplied by
//! `mu_l = T / (2 pi i k_l)`, the `l = 0` slot is replaced by the constant that
//! pins `I(0) = 0`, and the mean of `f` is restored as a linear ramp.
//!
//! Non-periodic signals are first bridged back to their initial values by a
//! polynomial on the extension interval `[t_{j0}, T]` (see
//! [`hermite_extension`]).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::signal::{self, ComplexSignal, Direction, TimeGrid};

/// Per-mode multipliers of the cumulative integrator. `mu_0` is not defined.
#[derive(Clone, Debug, PartialEq)]
pub struct MuCoefficients {
    grid: TimeGrid,
    mu: Vec<C64>,
}

impl MuCoefficients {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `mu_l`, or `None` for the unset `l = 0` slot.
    pub fn get(&self, l: usize) -> Option<C64> {
        (l != 0).then(|| self.mu[l])
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// Signed mode number: `l` below `N/2`, `l - N` from `N/2` on.
fn mode_number(l: usize, n: usize) -> f64 {
    if l < n / 2 {
        l as f64
    } else {
        l as f64 - n as f64
    }
}

fn mu_values(n: usize, t_total: f64) -> Vec<C64> {
    let mut mu = vec![C64::new(0.0, 0.0); n];
    for (l, m) in mu.iter_mut().enumerate().skip(1) {
        *m = C64::new(0.0, -t_total / (2.0 * PI * mode_number(l, n)));
    }
    mu
}

pub fn mu_coefficients(grid: &TimeGrid) -> MuCoefficients {
    MuCoefficients {
        grid: *grid,
        mu: mu_values(grid.len(), grid.t_total()),
    }
}

/// Prefix integrals of a periodic signal in place, using exactly two transforms.
pub(crate) fn integrate_periodic_in_place(buf: &mut [C64], t_total: f64) {
    let n = buf.len();
    signal::dft_in_place(buf, Direction::Forward);
    let f0 = buf[0];
    let mut a = C64::new(0.0, 0.0);
    for (l, z) in buf.iter_mut().enumerate().skip(1) {
        *z *= C64::new(0.0, -t_total / (2.0 * PI * mode_number(l, n)));
        a -= *z;
    }
    buf[0] = a;
    signal::dft_in_place(buf, Direction::Inverse);
    let ramp = f0 * (t_total / (n as f64).sqrt());
    for (j, z) in buf.iter_mut().enumerate() {
        *z += ramp * (j as f64 / n as f64);
    }
    buf[0] = C64::new(0.0, 0.0);
}

pub fn cumulative_integral_periodic(f: &ComplexSignal) -> ComplexSignal {
    let mut buf = f.values().to_vec();
    integrate_periodic_in_place(&mut buf, f.grid().t_total());
    ComplexSignal::from_parts(*f.grid(), buf)
}

/// Values and first two derivatives at `t = 0` (`start`) and at the seam
/// `t_{j0}` (`end`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryDerivatives {
    pub start: [C64; 3],
    pub end: [C64; 3],
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExtensionOptions {
    /// Analytic boundary data; estimated by one-sided stencils when absent.
    pub derivatives: Option<BoundaryDerivatives>,
    /// Also require the bridge to cancel the integral over the physical part.
    pub zero_integral: bool,
}

/// Bridge `sum_k a_k (t - t_a)^k` on `[t_a, T]`, with `t_a = t_{j0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionPolynomial {
    anchor: f64,
    delta: f64,
    coefficients: [C64; 7],
    residual: f64,
}

impl ExtensionPolynomial {
    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn coefficients(&self) -> &[C64; 7] {
        &self.coefficients
    }

    /// Relative residual of the small linear solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Derivative of the given order at absolute time `t`.
    pub fn derivative(&self, t: f64, order: usize) -> C64 {
        let s = t - self.anchor;
        let mut acc = C64::new(0.0, 0.0);
        for k in (order..7).rev() {
            let falling: f64 = (k - order + 1..=k).map(|m| m as f64).product();
            acc = acc * s + self.coefficients[k] * falling;
        }
        acc
    }

    pub fn evaluate(&self, t: f64) -> C64 {
        self.derivative(t, 0)
    }
}

/// Fourth-order one-sided first and second derivatives at `v[0]`, with the
/// stencil running in direction `sign` (`+1` forward, `-1` backward).
fn one_sided_derivatives(v: [C64; 6], h: f64, sign: f64) -> (C64, C64) {
    let d1 = (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) / (12.0 * h);
    let d2 = (v[0] * 45.0 - v[1] * 154.0 + v[2] * 214.0 - v[3] * 156.0 + v[4] * 61.0 - v[5] * 10.0) / (12.0 * h * h);
    (d1 * sign, d2)
}

fn estimate_boundary(values: &[C64], j0: usize, h: f64) -> BoundaryDerivatives {
    let fwd: [C64; 6] = std::array::from_fn(|k| values[k]);
    let bwd: [C64; 6] = std::array::from_fn(|k| values[j0 - k]);
    let (s1, s2) = one_sided_derivatives(fwd, h, 1.0);
    let (e1, e2) = one_sided_derivatives(bwd, h, -1.0);
    BoundaryDerivatives {
        start: [values[0], s1, s2],
        end: [values[j0], e1, e2],
    }
}

/// Bridge polynomial for the samples `0..=j0` of `values` on `grid`.
pub(crate) fn bridge_polynomial(
    values: &[C64],
    grid: &TimeGrid,
    opts: &ExtensionOptions,
) -> Result<ExtensionPolynomial> {
    let j0 = grid.j0();
    let anchor = grid.time(j0.min(grid.len()));
    let delta = grid.t_total() - anchor;
    if j0 >= grid.len() || delta <= 0.0 {
        return Err(Error::config(
            "extension interval is empty (T0 = T); the bridge system is singular",
        ));
    }
    let bd = match opts.derivatives {
        Some(bd) => bd,
        None => {
            if j0 < 5 {
                return Err(Error::config(format!(
                    "need at least 6 physical samples for boundary stencils, got {}",
                    j0 + 1
                )));
            }
            estimate_boundary(values, j0, grid.dt())
        }
    };

    // unknowns b_k = a_k delta^k in the scaled variable u = (t - t_a) / delta
    let b0 = bd.end[0];
    let b1 = bd.end[1] * delta;
    let b2 = bd.end[2] * (delta * delta / 2.0);
    let free: Vec<usize> = if opts.zero_integral {
        vec![3, 4, 5, 6]
    } else {
        vec![3, 4, 5]
    };
    let mut rows: Vec<Vec<f64>> = vec![
        free.iter().map(|_| 1.0).collect(),
        free.iter().map(|&k| k as f64).collect(),
        free.iter().map(|&k| (k * (k - 1)) as f64).collect(),
    ];
    let mut rhs = vec![
        bd.start[0] - b0 - b1 - b2,
        bd.start[1] * delta - b1 - b2 * 2.0,
        bd.start[2] * (delta * delta) - b2 * 2.0,
    ];
    if opts.zero_integral {
        let phys = simpson_prefix(&values[..=j0], grid.dt());
        let total = phys[j0];
        rows.push(free.iter().map(|&k| 1.0 / (k + 1) as f64).collect());
        rhs.push(-total / delta - b0 - b1 / 2.0 - b2 / 3.0);
    }
    let sol = linalg::solve_pivoted(&rows, &rhs).ok_or_else(|| Error::config("singular extension system"))?;
    let residual = linalg::relative_residual(&rows, &sol, &rhs);

    let mut coefficients = [C64::new(0.0, 0.0); 7];
    coefficients[0] = b0;
    coefficients[1] = bd.end[1];
    coefficients[2] = bd.end[2] / 2.0;
    for (&k, &b) in free.iter().zip(&sol) {
        coefficients[k] = b / delta.powi(k as i32);
    }
    Ok(ExtensionPolynomial {
        anchor,
        delta,
        coefficients,
        residual,
    })
}

pub fn extension_polynomial(f: &ComplexSignal, opts: &ExtensionOptions) -> Result<ExtensionPolynomial> {
    bridge_polynomial(f.values(), f.grid(), opts)
}

/// Keeps `f` on `t_0..=t_{j0}` and replaces the remaining samples by the
/// bridge polynomial, so the result is smooth when viewed as T-periodic.
pub fn hermite_extension(f: &ComplexSignal, opts: &ExtensionOptions) -> Result<ComplexSignal> {
    let grid = *f.grid();
    let mut buf = f.values().to_vec();
    extend_in_place(&mut buf, &grid, opts)?;
    Ok(ComplexSignal::from_parts(grid, buf))
}

pub(crate) fn extend_in_place(buf: &mut [C64], grid: &TimeGrid, opts: &ExtensionOptions) -> Result<()> {
    let poly = bridge_polynomial(buf, grid, opts)?;
    for (j, z) in buf.iter_mut().enumerate().skip(grid.j0() + 1) {
        *z = poly.evaluate(grid.time(j));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum IntegrationMode {
    #[default]
    Periodic,
    Extend(ExtensionOptions),
}

pub fn cumulative_integral(f: &ComplexSignal, mode: IntegrationMode) -> Result<ComplexSignal> {
    match mode {
        IntegrationMode::Periodic => Ok(cumulative_integral_periodic(f)),
        IntegrationMode::Extend(opts) => {
            if !f.grid().has_extension() {
                return Err(Error::config("extend mode needs a grid with T > T0"));
            }
            Ok(cumulative_integral_periodic(&hermite_extension(f, &opts)?))
        }
    }
}

/// Composite Simpson prefix sums. Even indices use whole Simpson panels; odd
/// indices add the exact integral of the last parabola over its final interval.
pub(crate) fn simpson_prefix(f: &[C64], h: f64) -> Vec<C64> {
    let n = f.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n < 3 {
        if n == 2 {
            out[1] = (f[0] + f[1]) * (h / 2.0);
        }
        return out;
    }
    out[1] = (f[0] * 5.0 + f[1] * 8.0 - f[2]) * (h / 12.0);
    for k in 2..n {
        out[k] = if k % 2 == 0 {
            out[k - 2] + (f[k - 2] + f[k - 1] * 4.0 + f[k]) * (h / 3.0)
        } else {
            out[k - 1] + (-f[k - 2] + f[k - 1] * 8.0 + f[k] * 5.0) * (h / 12.0)
        };
    }
    out
}

/// Simpson prefix integrals of raw samples with spacing `h`.
pub fn simpson_cumulative_samples(f: &[C64], h: f64) -> Result<Vec<C64>> {
    if f.len() < 3 {
        return Err(Error::config(format!(
            "Simpson rule needs at least 3 samples, got {}",
            f.len()
        )));
    }
    Ok(simpson_prefix(f, h))
}

pub fn simpson_cumulative(f: &ComplexSignal) -> Result<ComplexSignal> {
    let values = simpson_cumulative_samples(f.values(), f.grid().dt())?;
    Ok(ComplexSignal::from_parts(*f.grid(), values))
}

/// `max_j |I^{(2N)}_{2j} - I^{(N)}_j|`.
pub fn convergence_factor(coarse: &ComplexSignal, fine: &ComplexSignal) -> Result<f64> {
    if !coarse.grid().nests_in(fine.grid()) {
        return Err(Error::config(format!(
            "grids do not nest: {} and {} samples",
            coarse.len(),
            fine.len()
        )));
    }
    Ok(coarse
        .values()
        .iter()
        .enumerate()
        .map(|(j, z)| (fine[2 * j] - z).norm())
        .fold(0.0, f64::max))
}

/// Leading asymptotic term of `int g(t') exp(2 pi i nu t') dt'` at the grid
/// sample nearest `t`.
pub fn oscillatory_asymptote(g: &ComplexSignal, nu: f64, t: f64) -> Result<C64> {
    if nu == 0.0 || !nu.is_finite() {
        return Err(Error::Domain(format!(
            "carrier frequency must be nonzero and finite, got {nu}"
        )));
    }
    let j = (t / g.grid().dt()).round();
    if j < 0.0 || j as usize >= g.len() {
        return Err(Error::Domain(format!("t = {t} lies outside the grid")));
    }
    let j = j as usize;
    let phase = C64::from_polar(1.0, 2.0 * PI * nu * g.grid().time(j) - PI / 2.0);
    Ok(phase * g[j] / (2.0 * PI * nu))
}

/// How the width parameter `a` enters a gaussian envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    /// `exp(-a (t - c)^2)`.
    RateSquared,
    /// `exp(-(t - c)^2 / a)`.
    SquaredOverWidth,
}

/// Gaussian envelope times a harmonic `exp(2 pi i x t / T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPacket {
    pub width: f64,
    pub center: f64,
    pub harmonic: f64,
}

/// Sum of gaussian packets over a period `T`; a stress test for the
/// integrator because the packets vanish at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketSum {
    pub packets: Vec<GaussianPacket>,
    pub period: f64,
    pub envelope: Envelope,
}

impl PacketSum {
    /// Six packets of different widths and carriers on `[0, 180]`, resolved
    /// to machine precision from N = 1024 on.
    pub fn benchmark() -> Self {
        let p = |width, center, harmonic| GaussianPacket {
            width,
            center,
            harmonic,
        };
        Self {
            packets: vec![
                p(6.790, 27.0, 12.0),
                p(3.819, 36.0, 135.6),
                p(1.018, 90.0, 1.75),
                p(1.591, 108.0, 154.7),
                p(2.118, 135.0, 3.25),
                p(3.310, 144.0, 18.15),
            ],
            period: 180.0,
            envelope: Envelope::SquaredOverWidth,
        }
    }

    pub fn with_envelope(self, envelope: Envelope) -> Self {
        Self { envelope, ..self }
    }

    pub fn value(&self, t: f64) -> C64 {
        self.packets
            .iter()
            .map(|p| {
                let d2 = (t - p.center) * (t - p.center);
                let arg = match self.envelope {
                    Envelope::RateSquared => p.width * d2,
                    Envelope::SquaredOverWidth => d2 / p.width,
                };
                C64::from_polar((-arg).exp(), 2.0 * PI * p.harmonic * t / self.period)
            })
            .sum()
    }

    pub fn grid(&self, n: usize) -> Result<TimeGrid> {
        TimeGrid::new(self.period, self.period, n)
    }

    pub fn sample(&self, grid: TimeGrid) -> ComplexSignal {
        ComplexSignal::sample(grid, |t| self.value(t))
    }

    /// `CF_N` of the FFT integrator for this function.
    pub fn fft_convergence_factor(&self, n: usize) -> Result<f64> {
        let coarse = cumulative_integral_periodic(&self.sample(self.grid(n)?));
        let fine = cumulative_integral_periodic(&self.sample(self.grid(2 * n)?));
        convergence_factor(&coarse, &fine)
    }

    /// `CF_N` of the Simpson rule for this function.
    pub fn simpson_convergence_factor(&self, n: usize) -> Result<f64> {
        let coarse = simpson_cumulative(&self.sample(self.grid(n)?))?;
        let fine = simpson_cumulative(&self.sample(self.grid(2 * n)?))?;
        convergence_factor(&coarse, &fine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{forward_dft, make_time_grid, transform_count};
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mu_small_grids() {
        let g = make_time_grid(1.0, 1.0, 4).unwrap();
        let mu = mu_coefficients(&g);
        assert_eq!(mu.get(0), None);
        let tp = 2.0 * PI;
        assert!((mu.get(1).unwrap() - c(0.0, -1.0 / tp)).norm() < 1e-16);
        assert!((mu.get(2).unwrap() - c(0.0, 1.0 / (2.0 * tp))).norm() < 1e-16);
        assert!((mu.get(3).unwrap() - c(0.0, 1.0 / tp)).norm() < 1e-16);

        let g = make_time_grid(2.0, 2.0, 8).unwrap();
        let mu = mu_coefficients(&g);
        assert!((mu.get(1).unwrap() - c(0.0, -2.0 / tp)).norm() < 1e-16);
        assert!((mu.get(7).unwrap() - c(0.0, 2.0 / tp)).norm() < 1e-16);
    }

    #[test]
    fn mu_antisymmetry_is_exact() {
        for &(n, t) in &[(4usize, 1.0), (64, 3.7), (1024, 180.0), (4096, 50.0)] {
            let mu = mu_coefficients(&make_time_grid(t, t, n).unwrap());
            for l in 1..n {
                if l != n / 2 {
                    assert_eq!(mu.get(l).unwrap(), -mu.get(n - l).unwrap());
                }
            }
        }
    }

    #[test]
    fn integrates_cosine() {
        let g = make_time_grid(1.0, 1.0, 64).unwrap();
        let f = ComplexSignal::sample(g, |t| c((2.0 * PI * t).cos(), 0.0));
        let i = cumulative_integral_periodic(&f);
        let want = ComplexSignal::sample(g, |t| c((2.0 * PI * t).sin() / (2.0 * PI), 0.0));
        assert!(i.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn constant_goes_into_linear_ramp() {
        let g = make_time_grid(2.0, 2.0, 32).unwrap();
        let cst = c(1.5, -0.25);
        let i = cumulative_integral_periodic(&ComplexSignal::sample(g, |_| cst));
        for j in 0..32 {
            assert!((i[j] - cst * g.time(j)).norm() < 1e-14);
        }
        assert_eq!(i[0], c(0.0, 0.0));
    }

    #[test]
    fn two_transforms_per_call() {
        let f = PacketSum::benchmark().sample(make_time_grid(180.0, 180.0, 256).unwrap());
        let before = transform_count();
        let _ = cumulative_integral_periodic(&f);
        assert_eq!(transform_count() - before, 2);
    }

    #[test]
    fn benchmark_plateau_at_1024() {
        let fun = PacketSum::benchmark();
        let cf = fun.fft_convergence_factor(1024).unwrap();
        assert!(cf <= 1e-13, "CF_1024 = {cf:e}");
        assert!(fun.value(0.0).norm() < 1e-20 && fun.value(180.0).norm() < 1e-20);
    }

    #[test]
    fn rate_squared_envelope_needs_2048() {
        // the narrower packets of this form are only resolved one doubling later
        let fun = PacketSum::benchmark().with_envelope(Envelope::RateSquared);
        assert!(fun.fft_convergence_factor(1024).unwrap() > 1e-9);
        assert!(fun.fft_convergence_factor(2048).unwrap() < 1e-13);
    }

    #[test]
    fn convergence_factor_checks_nesting() {
        let a = ComplexSignal::zeros(make_time_grid(1.0, 1.0, 8).unwrap());
        let b = ComplexSignal::zeros(make_time_grid(1.0, 1.0, 12).unwrap());
        assert!(matches!(convergence_factor(&a, &b), Err(Error::Config(_))));
        let g = make_time_grid(1.0, 1.0, 16).unwrap();
        let fine = ComplexSignal::sample(g, |t| c(t * t, -t));
        let coarse = ComplexSignal::sample(make_time_grid(1.0, 1.0, 8).unwrap(), |t| c(t * t, -t));
        assert_eq!(convergence_factor(&coarse, &fine).unwrap(), 0.0);
    }

    #[test]
    fn bridge_for_linear_function() {
        // j0 = 512 puts the seam exactly at t = 1
        let g = make_time_grid(1.0, 1.25, 640).unwrap();
        assert_eq!(g.j0(), 512);
        let f = ComplexSignal::sample(g, |t| c(t, 0.0));
        let p = extension_polynomial(&f, &ExtensionOptions::default()).unwrap();
        let a = p.coefficients();
        assert!((a[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((a[1] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(a[2].norm() < 1e-7);
        assert!(p.evaluate(1.25).norm() < 1e-10);
        assert!((p.derivative(1.25, 1) - c(1.0, 0.0)).norm() < 1e-9);
        assert!(p.derivative(1.25, 2).norm() < 1e-6);
        assert!(p.residual() < 1e-10);
    }

    #[test]
    fn bridge_for_constant() {
        let g = make_time_grid(1.0, 1.25, 640).unwrap();
        let f = ComplexSignal::sample(g, |_| c(5.0, 0.0));
        let ext = hermite_extension(&f, &ExtensionOptions::default()).unwrap();
        assert!(ext.values().iter().all(|z| (z - c(5.0, 0.0)).norm() < 1e-9));

        // with the integral condition, compare against an independent LU solve
        let opts = ExtensionOptions {
            zero_integral: true,
            ..Default::default()
        };
        let p = extension_polynomial(&f, &opts).unwrap();
        let delta: f64 = 0.25;
        let m = DMatrix::from_fn(4, 4, |r, col| {
            let k = col + 3;
            let d = delta.powi(k as i32);
            match r {
                0 => d,
                1 => k as f64 * d / delta,
                2 => (k * (k - 1)) as f64 * d / (delta * delta),
                _ => d * delta / (k + 1) as f64,
            }
        });
        let rhs = DVector::from_vec(vec![0.0, 0.0, 0.0, -5.0 - 5.0 * delta]);
        let a = m.lu().solve(&rhs).unwrap();
        for k in 0..4 {
            assert!((p.coefficients()[k + 3] - c(a[k], 0.0)).norm() < 1e-8 * a[k].abs().max(1.0));
        }
        let ext = hermite_extension(&f, &opts).unwrap();
        let total: C64 = ext.values().iter().sum::<C64>() * g.dt();
        assert!(total.norm() < 1e-6, "{total}");
    }

    #[test]
    fn bridged_sine_has_decaying_spectrum() {
        let g = make_time_grid(10.0, 12.0, 1024).unwrap();
        let f = ComplexSignal::sample(g, |t| c((2.0 * PI * t / 10.0).sin(), 0.0));
        let ext = hermite_extension(&f, &ExtensionOptions::default()).unwrap();
        let spec = forward_dft(&ext);
        // the bridge is C2, so the tail decays algebraically (l^-4)
        let tail = |l: usize| spec.coefficients()[l].norm();
        assert!(tail(512) < 5e-8, "tail {:e}", tail(512));
        assert!(tail(128) / tail(256) > 8.0);
        // the raw signal is not periodic on [0, 12]
        let raw = forward_dft(&f);
        assert!(raw.coefficients()[512].norm() > 1e-6);
    }

    #[test]
    fn analytic_boundary_data_is_used() {
        let g = make_time_grid(1.0, 1.25, 640).unwrap();
        let f = ComplexSignal::sample(g, |t| c(t * t, 0.0));
        let bd = BoundaryDerivatives {
            start: [c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)],
            end: [c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)],
        };
        let opts = ExtensionOptions {
            derivatives: Some(bd),
            zero_integral: false,
        };
        let p = extension_polynomial(&f, &opts).unwrap();
        assert_eq!(p.coefficients()[1], c(2.0, 0.0));
        assert_eq!(p.coefficients()[2], c(1.0, 0.0));
        assert!((p.derivative(1.25, 2) - c(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn bridge_requires_extension() {
        let g = make_time_grid(1.0, 1.0, 64).unwrap();
        let f = ComplexSignal::zeros(g);
        assert!(matches!(
            hermite_extension(&f, &ExtensionOptions::default()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            cumulative_integral(&f, IntegrationMode::Extend(ExtensionOptions::default())),
            Err(Error::Config(_))
        ));
    }

    fn linear_extend_error(n: usize) -> f64 {
        let g = make_time_grid(1.0, 1.25, n).unwrap();
        let f = ComplexSignal::sample(g, |t| c(t, 0.0));
        let i = cumulative_integral(&f, IntegrationMode::Extend(ExtensionOptions::default())).unwrap();
        (0..=g.j0())
            .map(|j| (i[j] - c(g.time(j).powi(2) / 2.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn extend_mode_on_linear_function() {
        let e512 = linear_extend_error(512);
        assert!(e512 < 5e-10, "{e512:e}");
        let e2048 = linear_extend_error(2048);
        assert!(e2048 < 1e-11, "{e2048:e}");
    }

    #[test]
    fn extend_mode_on_truncated_gaussian() {
        let g = make_time_grid(1.0, 1.25, 512).unwrap();
        let f = |t: f64| c((-(t - 0.7) * (t - 0.7) / 0.05).exp(), 0.3 * t);
        let i = cumulative_integral(
            &ComplexSignal::sample(g, f),
            IntegrationMode::Extend(ExtensionOptions::default()),
        )
        .unwrap();
        let h = g.dt() / 100.0;
        let fine: Vec<C64> = (0..=100 * g.j0()).map(|k| f(k as f64 * h)).collect();
        let oracle = simpson_prefix(&fine, h);
        for j in 0..=g.j0() {
            assert!(
                (i[j] - oracle[100 * j]).norm() < 1e-10,
                "j = {j}: {:e}",
                (i[j] - oracle[100 * j]).norm()
            );
        }
    }

    #[test]
    fn simpson_basics() {
        let f: Vec<C64> = (0..101).map(|j| c((j as f64 / 100.0).powi(2), 0.0)).collect();
        let i = simpson_cumulative_samples(&f, 0.01).unwrap();
        assert!((i[100] - c(1.0 / 3.0, 0.0)).norm() < 1e-10);
        // odd prefixes are exact for quadratics too
        assert!((i[51] - c(0.51f64.powi(3) / 3.0, 0.0)).norm() < 1e-12);

        let h = 2.0 * PI / 2000.0;
        let f: Vec<C64> = (0..2001).map(|j| C64::from_polar(1.0, j as f64 * h)).collect();
        assert!(simpson_cumulative_samples(&f, h).unwrap()[2000].norm() <= 1e-12);

        assert!(matches!(simpson_cumulative_samples(&f[..2], h), Err(Error::Config(_))));
        let g = make_time_grid(1.0, 1.0, 4).unwrap();
        assert_eq!(simpson_cumulative(&ComplexSignal::zeros(g)).unwrap()[0], c(0.0, 0.0));
    }

    #[test]
    fn asymptote_for_constant_envelope() {
        let g = make_time_grid(1.0, 1.0, 256).unwrap();
        let nu = 20.0;
        let one = ComplexSignal::sample(g, |_| c(1.0, 0.0));
        let t = g.time(77);
        let a = oscillatory_asymptote(&one, nu, t).unwrap();
        assert!((a.norm() - 1.0 / (2.0 * PI * nu)).abs() < 1e-15);
        // exact antiderivative minus its value at t = 0
        let exact = C64::from_polar(1.0, 2.0 * PI * nu * t) / c(0.0, 2.0 * PI * nu);
        assert!((a - exact).norm() < 1e-15);
        assert!(matches!(oscillatory_asymptote(&one, 0.0, t), Err(Error::Domain(_))));
    }

    fn packet(t: f64) -> C64 {
        let d = t - 90.0;
        C64::from_polar((-1.018 * d * d).exp(), 2.0 * PI * 1.75 * t / 180.0)
    }

    fn asymptote_error(cycles: f64, n: usize, t: f64) -> f64 {
        let g = make_time_grid(180.0, 180.0, n).unwrap();
        let nu = cycles / 180.0;
        let env = ComplexSignal::sample(g, packet);
        let carried = ComplexSignal::sample(g, |s| packet(s) * C64::from_polar(1.0, 2.0 * PI * nu * s));
        let i = cumulative_integral_periodic(&carried);
        let j = (t / g.dt()).round() as usize;
        let a = oscillatory_asymptote(&env, nu, t).unwrap();
        (a - i[j]).norm() / i[j].norm()
    }

    #[test]
    fn asymptote_at_packet_peak() {
        assert!(asymptote_error(500.0, 4096, 90.0) < 0.05);
    }

    #[test]
    fn asymptote_error_scales_inversely() {
        let t = 8238.0 * 180.0 / 16384.0;
        let coarse = asymptote_error(200.0, 16384, t);
        let fine = asymptote_error(2000.0, 16384, t);
        let ratio = coarse / fine;
        assert!((5.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn agrees_with_fine_simpson() {
        let t = 4.0;
        let f = |s: f64| c((2.0 * PI * s / t).sin().exp(), (4.0 * PI * s / t).cos());
        let g = make_time_grid(t, t, 128).unwrap();
        let i = cumulative_integral_periodic(&ComplexSignal::sample(g, f));
        let h = g.dt() / 100.0;
        let fine: Vec<C64> = (0..12800).map(|k| f(k as f64 * h)).collect();
        let oracle = simpson_prefix(&fine, h);
        for j in 0..128 {
            assert!((i[j] - oracle[100 * j]).norm() <= 1e-10);
        }
    }

    proptest! {
        #[test]
        fn exact_on_resolved_modes(l in 1usize..128, t in 0.5f64..50.0) {
            let n = 256;
            let g = make_time_grid(t, t, n).unwrap();
            let w = 2.0 * PI * l as f64 / t;
            let i = cumulative_integral_periodic(&ComplexSignal::sample(g, |s| C64::from_polar(1.0, w * s)));
            for j in 0..n {
                let exact = (C64::from_polar(1.0, w * g.time(j)) - 1.0) / c(0.0, w);
                prop_assert!((i[j] - exact).norm() < 1e-12);
            }
        }

        #[test]
        fn starts_at_zero(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 16)) {
            let g = make_time_grid(1.0, 1.0, 16).unwrap();
            let f = ComplexSignal::new(g, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap();
            prop_assert_eq!(cumulative_integral_periodic(&f)[0], c(0.0, 0.0));
        }

        #[test]
        fn integrator_is_linear(u in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
                                v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
                                a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let g = make_time_grid(2.0, 2.0, 64).unwrap();
            let su = ComplexSignal::new(g, u.into_iter().map(|(x, y)| c(x, y)).collect()).unwrap();
            let sv = ComplexSignal::new(g, v.into_iter().map(|(x, y)| c(x, y)).collect()).unwrap();
            let lhs = cumulative_integral_periodic(&su.zip_with(&sv, |x, y| x * a + y * b));
            let (iu, iv) = (cumulative_integral_periodic(&su), cumulative_integral_periodic(&sv));
            for j in 0..64 {
                prop_assert!((lhs[j] - (iu[j] * a + iv[j] * b)).norm() < 1e-12);
            }
        }
    }
}
