//! Physical invariants of the two built-in parameter sets.

mod common;

use common::{example, lower, norm_deviation, solve_params};
use globalprop::molecular::ModelParameters;
use globalprop::refprop::{CrossCheck, StepMethod};
use globalprop::signal::{spectral_derivative, ComplexSignal};
use globalprop::waveop::{
    effective_hamiltonian, fubini_study_distance, increment_delta_x, iterate, rdwa_run, residual_delta,
    tilde_h_diag_with, IterationOptions, RdwaVariant, ReducedWaveOperator, StopReason,
};
use globalprop::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[test]
fn both_examples_converge_to_machine_precision() {
    for which in [1, 2] {
        let s = example(which);
        assert_eq!(s.result.stop, StopReason::Tolerance, "example {which}");
        let f = s.result.factors();
        assert_eq!(f[0], 1.0);
        assert!(*f.last().unwrap() <= 1e-16);
        // roughly one order of magnitude per iteration once the series settles
        let rate = (f[9] / f[21]).log10() / 12.0;
        assert!(
            (0.7..1.5).contains(&rate),
            "example {which}: {rate} decades per iteration"
        );
    }
}

#[test]
fn norm_is_restored_on_the_physical_window() {
    for which in [1, 2] {
        let dev = norm_deviation(example(which));
        assert!(dev <= 1e-6, "example {which}: {dev:e}");
    }
}

#[test]
fn second_example_leaves_the_model_space_further() {
    let d: Vec<f64> = [1, 2]
        .iter()
        .map(|&w| {
            let s = example(w);
            fubini_study_distance(&s.result.x, s.j0())
        })
        .collect();
    assert!(d[1] > d[0], "{d:?}");
    assert!(d.iter().all(|x| *x < std::f64::consts::FRAC_PI_2));
}

#[test]
fn effective_energy_oscillates_with_order_unit_amplitude() {
    let s = example(2);
    let re: Vec<f64> = s.result.h_eff.values()[..=s.j0()].iter().map(|z| z.re).collect();
    let span = re.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - re.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((2.0..8.0).contains(&span), "{span}");
}

#[test]
fn doubling_the_absorber_leaves_the_physical_window_unchanged() {
    let base = example(1);
    let mut params = ModelParameters::example(1).unwrap();
    params.absorber_total *= 2.0;
    let strong = solve_params(&params, Vec::new());
    let diff = (0..=base.j0())
        .flat_map(|k| (0..60).map(move |v| (k, v)))
        .map(|(k, v)| (base.result.psi[(k, v)] - strong.result.psi[(k, v)]).norm())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-6, "{diff:e}");
}

#[test]
fn increments_satisfy_their_linear_equation() {
    let s = example(1);
    let sys = &s.system;
    let grid = *sys.grid();
    let opts = IterationOptions::default();
    let mut x = ReducedWaveOperator::zeros(grid, sys.dim(), sys.initial());
    for _ in 0..3 {
        let delta = residual_delta(&x, sys);
        let heff = effective_hamiltonian(&x, sys);
        let htilde = tilde_h_diag_with(&x, sys, opts.dressing);
        let dx = increment_delta_x(&delta, &heff, &htilde, sys.absorber(), sys.initial()).unwrap();
        let scale = delta.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for v in (0..sys.dim()).filter(|&v| v != sys.initial()) {
            let col: Vec<C64> = dx.column(v).iter().copied().collect();
            let deriv = spectral_derivative(&ComplexSignal::new(grid, col.clone()).unwrap());
            for k in 0..grid.len() {
                let r = I * deriv[k] - delta[(k, v)] - (htilde[(k, v)] - heff[k]) * col[k];
                assert!(r.norm() <= 1e-8 * scale, "v={v} k={k}: {:e}", r.norm() / scale);
            }
        }
        x = iterate(&x, sys, &opts).unwrap().0;
    }
}

#[test]
fn approximate_updates_diverge_on_the_second_example() {
    let sys = &example(2).system;
    let adiabatic = rdwa_run(sys, RdwaVariant::Adiabatic, 40, 1e3);
    let fourier = rdwa_run(sys, RdwaVariant::Fourier, 40, 1e3);
    let (a, f) = (
        adiabatic.failure_iteration().unwrap(),
        fourier.failure_iteration().unwrap(),
    );
    assert!(a < f, "adiabatic at {a}, fourier at {f}");
}

#[test]
fn step_propagators_agree_at_their_converged_step_counts() {
    let s = example(1);
    let ham = s.model.hamiltonian();
    let t_final = s.model.grid.time(s.j0());
    let check = CrossCheck::new(&ham, s.system.initial(), t_final, s.result.x.omega_at(s.j0())).unwrap();
    let split = check.run(StepMethod::SplitSod, 1 << 18).unwrap();
    let sil = check.run(StepMethod::Sil, 1 << 16).unwrap();
    assert!(
        split.factor <= 1e-12 && sil.factor <= 1e-9,
        "{} {}",
        split.factor,
        sil.factor
    );
    assert!(split.norm_drift.abs() <= 1e-8 && sil.norm_drift.abs() <= 1e-8);
    let gap: f64 = split
        .state
        .iter()
        .zip(&sil.state)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    assert!(gap <= 1e-9, "{gap:e}");
    let survival = sil.state[lower(s, 1)].norm_sqr();
    assert!((survival - s.final_psi()[0].norm_sqr()).abs() <= 1e-5);
}
