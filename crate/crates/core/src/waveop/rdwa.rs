//! Approximate (recursive distorted-wave) updates. They replace the exact
//! exponential integral by a local or a Fourier-diagonal quotient and are kept
//! only to show that they do not converge on strongly driven systems.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::ops::{self, tilde_h_diag};
use super::system::DrivenSystem;
use super::ReducedWaveOperator;
use crate::error::{Error, Result};
use crate::signal::{dft_in_place, Direction};

/// Denominators smaller than this are treated as crossings.
pub const SINGULAR_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdwaVariant {
    /// `delta X(t) = -Delta(t) / (h_vv(t) - H_eff(t))`, pointwise in time.
    Adiabatic,
    /// Quotient in the Fourier basis with time-averaged `h_vv` and `H_eff`.
    Fourier,
}

fn singular(iteration: usize, min_denominator: f64) -> Error {
    Error::Singular {
        iteration,
        min_denominator,
    }
}

/// One approximate update of `X`.
pub fn rdwa_update(x: &ReducedWaveOperator, sys: &DrivenSystem, variant: RdwaVariant) -> Result<ReducedWaveOperator> {
    let (n, nv, i) = (sys.grid().len(), sys.dim(), sys.initial());
    let iteration = x.iteration() + 1;
    let hw = ops::h_omega(x, sys);
    let htilde = tilde_h_diag(x, sys);
    let heff: Vec<C64> = hw.column(i).iter().copied().collect();

    let values = match variant {
        RdwaVariant::Adiabatic => {
            let delta = ops::residual_from(x, sys, &hw);
            let mut min_den = f64::INFINITY;
            let dx = DMatrix::from_fn(n, nv, |k, v| {
                if v == i {
                    return C64::new(0.0, 0.0);
                }
                let den = htilde[(k, v)] - heff[k];
                min_den = min_den.min(den.norm());
                -delta[(k, v)] / den
            });
            if min_den < SINGULAR_THRESHOLD {
                return Err(singular(iteration, min_den));
            }
            &x.values + dx
        }
        RdwaVariant::Fourier => {
            let nf = n as f64;
            let heff_mean = heff.iter().sum::<C64>() / nf;
            let mut out = DMatrix::zeros(n, nv);
            let mut min_den = f64::INFINITY;
            for v in (0..nv).filter(|&v| v != i) {
                let hbar = htilde.column(v).iter().sum::<C64>() / nf;
                let mut num: Vec<C64> = hw.column(v).iter().copied().collect();
                let mut xv: Vec<C64> = x.values.column(v).iter().copied().collect();
                dft_in_place(&mut num, Direction::Forward);
                dft_in_place(&mut xv, Direction::Forward);
                for (l, (a, b)) in num.iter_mut().zip(&xv).enumerate() {
                    let omega = 2.0 * std::f64::consts::PI * sys.grid().frequency(l);
                    let den = heff_mean - hbar - omega;
                    min_den = min_den.min(den.norm());
                    *a = (*a - hbar * b) / den;
                }
                dft_in_place(&mut num, Direction::Inverse);
                out.column_mut(v).copy_from_slice(&num);
            }
            if min_den < SINGULAR_THRESHOLD {
                return Err(singular(iteration, min_den));
            }
            out
        }
    };
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Divergence {
            iteration,
            reason: "non-finite approximate update".into(),
            history: Vec::new(),
        });
    }
    ReducedWaveOperator::from_values(*sys.grid(), i, values, iteration)
}

/// History of an approximate iteration started from `X = 0`.
#[derive(Clone, Debug)]
pub struct RdwaOutcome {
    pub variant: RdwaVariant,
    /// RMS norm `sqrt(sum_{v,k} |X_v(t_k)|^2 / N_t)` after each update.
    pub norms: Vec<f64>,
    /// First iteration whose norm exceeded the blow-up threshold.
    pub diverged_at: Option<usize>,
    /// Singularity or non-finite failure that ended the run, if any.
    pub failure: Option<Error>,
    pub last: ReducedWaveOperator,
}

impl RdwaOutcome {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some() || self.failure.is_some()
    }

    /// Iteration at which the run was declared divergent or failed.
    pub fn failure_iteration(&self) -> Option<usize> {
        self.diverged_at.or(match &self.failure {
            Some(Error::Singular { iteration, .. }) | Some(Error::Divergence { iteration, .. }) => Some(*iteration),
            _ => None,
        })
    }
}

fn rms_norm(x: &ReducedWaveOperator) -> f64 {
    let n = x.values.nrows() as f64;
    (x.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / n).sqrt()
}

/// Runs up to `max_iter` updates, stopping once the RMS norm exceeds
/// `blow_up` or an update fails.
pub fn rdwa_run(sys: &DrivenSystem, variant: RdwaVariant, max_iter: usize, blow_up: f64) -> RdwaOutcome {
    let mut x = ReducedWaveOperator::zeros(*sys.grid(), sys.dim(), sys.initial());
    let mut norms = Vec::new();
    for _ in 0..max_iter {
        match rdwa_update(&x, sys, variant) {
            Ok(next) => x = next,
            Err(e) => {
                return RdwaOutcome {
                    variant,
                    norms,
                    diverged_at: None,
                    failure: Some(e),
                    last: x,
                }
            }
        }
        let r = rms_norm(&x);
        norms.push(r);
        if r > blow_up {
            return RdwaOutcome {
                variant,
                norms,
                diverged_at: Some(x.iteration()),
                failure: None,
                last: x,
            };
        }
    }
    RdwaOutcome {
        variant,
        norms,
        diverged_at: None,
        failure: None,
        last: x,
    }
}
