use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Ramp profile `V_opt(t) = A sin^p(pi (t - T0) / (2 (T - T0)))`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AbsorberShape {
    /// `p = 2`: continuous first derivative, curvature jump at `T0`. The
    /// jump limits spectral accuracy near the seam to about `N^-2`.
    SinSquared,
    /// `p = 4`: three continuous derivatives at `T0`.
    #[default]
    SinFourth,
}

impl AbsorberShape {
    /// `int_0^1 sin^p(pi s / 2) ds`.
    fn mean(self) -> f64 {
        match self {
            AbsorberShape::SinSquared => 0.5,
            AbsorberShape::SinFourth => 0.375,
        }
    }

    fn value(self, s: f64) -> f64 {
        let v = (0.5 * PI * s).sin();
        match self {
            AbsorberShape::SinSquared => v * v,
            AbsorberShape::SinFourth => v.powi(4),
        }
    }

    /// `int_0^s shape(s') ds'` for `s` in `[0, 1]`.
    fn primitive(self, s: f64) -> f64 {
        match self {
            AbsorberShape::SinSquared => s / 2.0 - (PI * s).sin() / (2.0 * PI),
            AbsorberShape::SinFourth => {
                3.0 * s / 8.0 - (PI * s).sin() / (2.0 * PI) + (2.0 * PI * s).sin() / (16.0 * PI)
            }
        }
    }
}

impl std::str::FromStr for AbsorberShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin2" => Ok(AbsorberShape::SinSquared),
            "sin4" => Ok(AbsorberShape::SinFourth),
            other => Err(Error::config(format!(
                "unknown absorber shape '{other}' (expected sin2 or sin4)"
            ))),
        }
    }
}

impl std::fmt::Display for AbsorberShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AbsorberShape::SinSquared => "sin2",
            AbsorberShape::SinFourth => "sin4",
        })
    }
}

/// Time-dependent absorber ramping from zero at `T0` to its strength `A` at
/// `T`, zero before `T0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorberSpec {
    t_start: f64,
    t_end: f64,
    strength: f64,
    shape: AbsorberShape,
}

impl AbsorberSpec {
    pub fn new(t_start: f64, t_end: f64, strength: f64) -> Result<Self> {
        if !(t_start < t_end) {
            return Err(Error::config(format!("absorber window [{t_start}, {t_end}] is empty")));
        }
        if !(strength >= 0.0) || !strength.is_finite() {
            return Err(Error::config(format!(
                "absorber strength must be nonnegative, got {strength}"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            strength,
            shape: AbsorberShape::default(),
        })
    }

    pub fn with_shape(self, shape: AbsorberShape) -> Self {
        let total = self.total();
        Self {
            shape,
            strength: total / (shape.mean() * (self.t_end - self.t_start)),
            ..self
        }
    }

    /// `int V_opt dt` over the window.
    pub fn total(&self) -> f64 {
        self.strength * self.shape.mean() * (self.t_end - self.t_start)
    }

    /// Absorber whose time integral over the window equals `total`, i.e. a
    /// per-channel damping factor `exp(-total)`, with the default ramp.
    pub fn with_total_absorption(t_start: f64, t_end: f64, total: f64) -> Result<Self> {
        Self::new(
            t_start,
            t_end,
            total / (AbsorberShape::default().mean() * (t_end - t_start)),
        )
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn shape(&self) -> AbsorberShape {
        self.shape
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            strength: self.strength * factor,
            ..*self
        }
    }

    /// `V_opt(t)`; the ramp is held at its top value past `t_end`.
    pub fn rate(&self, t: f64) -> f64 {
        if t <= self.t_start {
            return 0.0;
        }
        let s = ((t - self.t_start) / (self.t_end - self.t_start)).min(1.0);
        self.strength * self.shape.value(s)
    }

    /// `int_0^t V_opt(t') dt'` in closed form.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= self.t_start {
            return 0.0;
        }
        let d = self.t_end - self.t_start;
        let s = (t - self.t_start) / d;
        if s <= 1.0 {
            self.strength * d * self.shape.primitive(s)
        } else {
            self.total() + self.strength * (t - self.t_end)
        }
    }
}

/// Diagonal `-i V_opt(t)` on every channel except `initial`.
pub fn absorbing_potential(t: f64, spec: &AbsorberSpec, dim: usize, initial: usize) -> Vec<C64> {
    let v = spec.rate(t);
    (0..dim)
        .map(|k| {
            if k == initial {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, -v)
            }
        })
        .collect()
}
