//! Uniform time grids, sampled complex signals and the symmetric-normalized
//! discrete Fourier transform.
//!
//! The forward transform is `F_k = N^{-1/2} sum_j f_j exp(-2 pi i j k / N)` and
//! the inverse uses the conjugate kernel with the same prefactor, so the pair
//! is unitary.

use std::cell::{Cell, RefCell};
use std::io::{self, Write};
use std::ops::Index;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// `N` samples `t_j = j T / N`, covering the physical interval `[0, T0]` and
/// an absorbing extension `[T0, T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_physical_end: f64,
    t_total: f64,
    n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_physical_end: f64, t_total: f64, n_samples: usize) -> Result<Self> {
        if !(t_physical_end > 0.0 && t_total > 0.0) || !t_physical_end.is_finite() || !t_total.is_finite() {
            return Err(Error::config(format!(
                "durations must be positive and finite (T0 = {t_physical_end}, T = {t_total})"
            )));
        }
        if t_physical_end > t_total {
            return Err(Error::config(format!(
                "physical end T0 = {t_physical_end} exceeds total duration T = {t_total}"
            )));
        }
        if n_samples < 4 || n_samples % 2 != 0 {
            return Err(Error::config(format!(
                "sample count must be even and at least 4, got {n_samples}"
            )));
        }
        Ok(Self {
            t_physical_end,
            t_total,
            n_samples,
        })
    }

    /// Grid whose absorbing extension is 10% of the physical interval.
    pub fn with_default_extension(t_physical_end: f64, n_samples: usize) -> Result<Self> {
        Self::new(t_physical_end, 1.1 * t_physical_end, n_samples)
    }

    pub fn t_physical_end(&self) -> f64 {
        self.t_physical_end
    }

    pub fn t_total(&self) -> f64 {
        self.t_total
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.t_total / self.n_samples as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.t_total / self.n_samples as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|j| self.time(j)).collect()
    }

    /// Index `floor(N T0 / T)` of the last physical sample.
    pub fn j0(&self) -> usize {
        let x = self.n_samples as f64 * self.t_physical_end / self.t_total;
        // guard against 3.9999999999 style roundoff
        let j = (x * (1.0 + 4.0 * f64::EPSILON)).floor() as usize;
        j.min(self.n_samples)
    }

    /// True when at least two samples lie strictly beyond `t_{j0}`.
    pub fn has_extension(&self) -> bool {
        self.j0() + 2 <= self.n_samples
    }

    /// Frequency `nu_l` of spectral index `l`, with the Nyquist bin negative.
    pub fn frequency(&self, l: usize) -> f64 {
        let n = self.n_samples;
        let k = if l < n / 2 { l as f64 } else { l as f64 - n as f64 };
        k / self.t_total
    }

    /// Same interval sampled twice as densely.
    pub fn refined(&self) -> Self {
        Self {
            n_samples: 2 * self.n_samples,
            ..*self
        }
    }

    /// Whether `fine` has exactly twice the samples of `self` on the same span.
    pub fn nests_in(&self, fine: &TimeGrid) -> bool {
        fine.n_samples == 2 * self.n_samples && (fine.t_total - self.t_total).abs() <= 1e-12 * self.t_total
    }
}

pub fn make_time_grid(t_physical_end: f64, t_total: f64, n_samples: usize) -> Result<TimeGrid> {
    TimeGrid::new(t_physical_end, t_total, n_samples)
}

/// Complex function sampled on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSignal {
    grid: TimeGrid,
    values: Vec<C64>,
}

impl ComplexSignal {
    pub fn new(grid: TimeGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::config(format!(
                "signal has {} values but grid has {} samples",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: TimeGrid, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn sample<F>(grid: TimeGrid, f: F) -> Self
    where
        F: Fn(f64) -> C64,
    {
        let values = (0..grid.len()).map(|j| f(grid.time(j))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(C64) -> C64,
    {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip_with<F>(&self, other: &Self, f: F) -> Self
    where
        F: Fn(C64, C64) -> C64,
    {
        debug_assert_eq!(self.len(), other.len());
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexSignal {
    type Output = C64;

    fn index(&self, j: usize) -> &C64 {
        &self.values[j]
    }
}

/// DFT coefficients indexed `l = 0..N-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: TimeGrid,
    coefficients: Vec<C64>,
}

impl Spectrum {
    pub fn new(grid: TimeGrid, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::config(format!(
                "spectrum has {} coefficients but grid has {} samples",
                coefficients.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coefficients })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn frequency(&self, l: usize) -> f64 {
        self.grid.frequency(l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static TRANSFORMS: Cell<u64> = const { Cell::new(0) };
}

/// Number of transforms executed on the current thread so far.
pub fn transform_count() -> u64 {
    TRANSFORMS.with(|c| c.get())
}

/// Unitary in-place DFT of a buffer.
pub(crate) fn dft_in_place(buf: &mut [C64], direction: Direction) {
    let n = buf.len();
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match direction {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    });
    plan.process(buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= scale);
    TRANSFORMS.with(|c| c.set(c.get() + 1));
}

pub fn forward_dft(f: &ComplexSignal) -> Spectrum {
    let mut buf = f.values.clone();
    dft_in_place(&mut buf, Direction::Forward);
    Spectrum {
        grid: f.grid,
        coefficients: buf,
    }
}

pub fn inverse_dft(spectrum: &Spectrum) -> ComplexSignal {
    let mut buf = spectrum.coefficients.clone();
    dft_in_place(&mut buf, Direction::Inverse);
    ComplexSignal {
        grid: spectrum.grid,
        values: buf,
    }
}

/// Spectral time derivative; the Nyquist coefficient is dropped.
pub fn spectral_derivative(f: &ComplexSignal) -> ComplexSignal {
    let mut buf = f.values.clone();
    derivative_in_place(&mut buf, f.grid.t_total());
    ComplexSignal {
        grid: f.grid,
        values: buf,
    }
}

pub(crate) fn derivative_in_place(buf: &mut [C64], t_total: f64) {
    let n = buf.len();
    dft_in_place(buf, Direction::Forward);
    for (l, z) in buf.iter_mut().enumerate() {
        let k = if l < n / 2 {
            l as f64
        } else if l == n / 2 {
            0.0
        } else {
            l as f64 - n as f64
        };
        *z *= C64::new(0.0, 2.0 * std::f64::consts::PI * k / t_total);
    }
    dft_in_place(buf, Direction::Inverse);
}

/// Zeroes every spectral component with `|l| > l_max`.
pub fn band_limit(f: &ComplexSignal, l_max: usize) -> ComplexSignal {
    let mut buf = f.values.clone();
    band_limit_in_place(&mut buf, l_max);
    ComplexSignal {
        grid: f.grid,
        values: buf,
    }
}

pub(crate) fn band_limit_in_place(buf: &mut [C64], l_max: usize) {
    let n = buf.len();
    dft_in_place(buf, Direction::Forward);
    for (l, z) in buf.iter_mut().enumerate() {
        if l.min(n - l) > l_max {
            *z = C64::new(0.0, 0.0);
        }
    }
    dft_in_place(buf, Direction::Inverse);
}

/// Formats a float with 17 significant digits.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one `(t, Re, Im)` row per sample after a header line.
pub fn write_signal_csv<W: Write>(out: &mut W, signal: &ComplexSignal) -> io::Result<()> {
    writeln!(out, "t[a.u.],re,im")?;
    for (j, z) in signal.values.iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            format_sig17(signal.grid.time(j)),
            format_sig17(z.re),
            format_sig17(z.im)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn brute_dft(f: &[C64], sign: f64) -> Vec<C64> {
        let n = f.len();
        (0..n)
            .map(|k| {
                f.iter().enumerate().fold(c(0.0, 0.0), |acc, (j, &v)| {
                    acc + v * C64::from_polar(1.0, sign * 2.0 * PI * (j * k) as f64 / n as f64)
                }) / (n as f64).sqrt()
            })
            .collect()
    }

    fn random_values(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn grid_construction() {
        let g = make_time_grid(180.0, 180.0, 2048).unwrap();
        assert_eq!(g.time(1), 180.0 / 2048.0);
        let g = make_time_grid(1.0, 1.0, 4).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75]);
        let g = make_time_grid(45.0, 50.0, 4096).unwrap();
        assert_eq!(g.j0(), 3686);
        assert_eq!(g.refined().j0(), 7372);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(make_time_grid(1.0, 1.0, 7), Err(Error::Config(_))));
        assert!(matches!(make_time_grid(1.0, 1.0, 2), Err(Error::Config(_))));
        assert!(matches!(make_time_grid(0.0, 1.0, 8), Err(Error::Config(_))));
        assert!(matches!(make_time_grid(2.0, 1.0, 8), Err(Error::Config(_))));
    }

    #[test]
    fn frequency_layout() {
        let g = make_time_grid(2.0, 2.0, 8).unwrap();
        let nu: Vec<f64> = (0..8).map(|l| g.frequency(l)).collect();
        assert_eq!(nu, vec![0.0, 0.5, 1.0, 1.5, -2.0, -1.5, -1.0, -0.5]);
    }

    #[test]
    fn dft_of_constant_and_harmonic() {
        let g = make_time_grid(1.0, 1.0, 4).unwrap();
        let s = forward_dft(&ComplexSignal::new(g, vec![c(1.0, 0.0); 4]).unwrap());
        assert!((s.coefficients()[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!(s.coefficients()[1..].iter().all(|z| z.norm() < 1e-15));

        let g = make_time_grid(1.0, 1.0, 8).unwrap();
        let f: Vec<C64> = (0..8)
            .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / 8.0))
            .collect();
        let s = forward_dft(&ComplexSignal::new(g, f).unwrap());
        for (l, z) in s.coefficients().iter().enumerate() {
            let want = if l == 1 { 8f64.sqrt() } else { 0.0 };
            assert!((z - c(want, 0.0)).norm() < 1e-14, "l = {l}: {z}");
        }
    }

    #[test]
    fn inverse_of_simple_spectra() {
        let g = make_time_grid(1.0, 1.0, 4).unwrap();
        let s = Spectrum::new(g, vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let f = inverse_dft(&s);
        assert!(f.values().iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));

        let g = make_time_grid(1.0, 1.0, 16).unwrap();
        let mut delta = vec![c(0.0, 0.0); 16];
        delta[3] = c(1.0, 0.0);
        let f = inverse_dft(&Spectrum::new(g, delta).unwrap());
        assert!(f.values().iter().all(|z| (z.norm() - 0.25).abs() < 1e-15));
    }

    #[test]
    fn matches_brute_force_sums() {
        let g = make_time_grid(1.0, 1.0, 16).unwrap();
        let f = random_values(16, 7);
        let fast = forward_dft(&ComplexSignal::new(g, f.clone()).unwrap());
        let slow = brute_dft(&f, -1.0);
        for (a, b) in fast.coefficients().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-13);
        }
        let spec = random_values(16, 8);
        let fast = inverse_dft(&Spectrum::new(g, spec.clone()).unwrap());
        let slow = brute_dft(&spec, 1.0);
        for (a, b) in fast.values().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_harmonic_and_constant() {
        let t = 3.0;
        let g = make_time_grid(t, t, 64).unwrap();
        let w = 2.0 * PI / t;
        let f = ComplexSignal::sample(g, |s| C64::from_polar(1.0, w * s));
        let d = spectral_derivative(&f);
        let want = ComplexSignal::sample(g, |s| c(0.0, w) * C64::from_polar(1.0, w * s));
        assert!(d.max_abs_diff(&want) < 1e-12);

        let d = spectral_derivative(&ComplexSignal::sample(g, |_| c(2.5, -1.0)));
        assert!(d.values().iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn derivative_agrees_with_finite_differences() {
        // single gaussian packet a=1.018, centre 90, harmonic 1.75 on [0,180]
        let t = 180.0;
        let g = make_time_grid(t, t, 2048).unwrap();
        let f = |s: f64| (-1.018 * (s - 90.0) * (s - 90.0)).exp() * C64::from_polar(1.0, 2.0 * PI * 1.75 * s / t);
        let d = spectral_derivative(&ComplexSignal::sample(g, f));
        let h = g.dt();
        let mut max_dev: f64 = 0.0;
        let mut max_d3: f64 = 0.0;
        for j in 1..g.len() - 1 {
            let s = g.time(j);
            let fd = (f(s + h) - f(s - h)) / (2.0 * h);
            max_dev = max_dev.max((d[j] - fd).norm());
            // third derivative scale for the O(h^2) bound
            let d3 = (f(s + 2.0 * h) - 2.0 * f(s + h) + 2.0 * f(s - h) - f(s - 2.0 * h)) / (2.0 * h * h * h);
            max_d3 = max_d3.max(d3.norm());
        }
        let bound = h * h / 6.0 * max_d3;
        assert!(max_dev <= 1.1 * bound, "deviation {max_dev:e} bound {bound:e}");
        // agreement is finite-difference limited, not grossly better or worse
        assert!(max_dev > 0.1 * bound);
    }

    #[test]
    fn csv_rows_have_seventeen_digits() {
        let g = make_time_grid(1.0, 1.0, 4).unwrap();
        let f = ComplexSignal::sample(g, |s| c(s / 3.0, -1.0));
        let mut out = Vec::new();
        write_signal_csv(&mut out, &f).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t[a.u.],re,im");
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines[2],
            "2.5000000000000000e-1,8.3333333333333329e-2,-1.0000000000000000e0"
        );
        let back: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 0.25 / 3.0);
    }

    #[test]
    fn transform_counter_counts() {
        let g = make_time_grid(1.0, 1.0, 8).unwrap();
        let f = ComplexSignal::zeros(g);
        let before = transform_count();
        let _ = inverse_dft(&forward_dft(&f));
        assert_eq!(transform_count() - before, 2);
    }

    fn signal_strategy(n: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)), n)
    }

    proptest! {
        #[test]
        fn parseval_and_round_trip(f in signal_strategy(64)) {
            let g = make_time_grid(1.0, 1.0, 64).unwrap();
            let sig = ComplexSignal::new(g, f).unwrap();
            let spec = forward_dft(&sig);
            let e_t: f64 = sig.values().iter().map(|z| z.norm_sqr()).sum();
            let e_f: f64 = spec.coefficients().iter().map(|z| z.norm_sqr()).sum();
            let tol = 100.0 * f64::EPSILON * 64.0;
            prop_assert!((e_t - e_f).abs() <= tol * e_t.max(1e-300));
            let back = inverse_dft(&spec);
            let scale = sig.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(back.max_abs_diff(&sig) <= tol * scale);
        }

        #[test]
        fn transforms_are_linear(f in signal_strategy(32), h in signal_strategy(32),
                                 a in (-2.0f64..2.0, -2.0f64..2.0), b in (-2.0f64..2.0, -2.0f64..2.0)) {
            let g = make_time_grid(1.0, 1.0, 32).unwrap();
            let (a, b) = (c(a.0, a.1), c(b.0, b.1));
            let fs = ComplexSignal::new(g, f).unwrap();
            let hs = ComplexSignal::new(g, h).unwrap();
            let combo = fs.zip_with(&hs, |x, y| a * x + b * y);
            let lhs = forward_dft(&combo);
            let (sf, sh) = (forward_dft(&fs), forward_dft(&hs));
            for l in 0..32 {
                let rhs = a * sf.coefficients()[l] + b * sh.coefficients()[l];
                prop_assert!((lhs.coefficients()[l] - rhs).norm() < 1e-12);
            }
            let dl = spectral_derivative(&combo);
            let (df, dh) = (spectral_derivative(&fs), spectral_derivative(&hs));
            for j in 0..32 {
                prop_assert!((dl[j] - (a * df[j] + b * dh[j])).norm() < 1e-10);
            }
        }

        #[test]
        fn derivative_product_rule(p in 1i32..10, q in 1i32..10, n_exp in 6u32..9) {
            let n = 1usize << n_exp;
            let t = 2.0;
            let g = make_time_grid(t, t, n).unwrap();
            let w = 2.0 * PI / t;
            // keep the product resolved below Nyquist
            prop_assume!(((p + q) as usize) < n / 2);
            let u = ComplexSignal::sample(g, |s| C64::from_polar(1.0, w * p as f64 * s));
            let v = ComplexSignal::sample(g, |s| c((w * q as f64 * s).cos(), 0.0));
            let uv = u.zip_with(&v, |x, y| x * y);
            let lhs = spectral_derivative(&uv);
            let (du, dv) = (spectral_derivative(&u), spectral_derivative(&v));
            for j in 0..n {
                let rhs = du[j] * v[j] + u[j] * dv[j];
                prop_assert!((lhs[j] - rhs).norm() < 1e-10);
            }
        }
    }
}
