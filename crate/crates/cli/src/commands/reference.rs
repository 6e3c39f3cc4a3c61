use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use globalprop::refprop::{
    cross_convergence_factor, initial_state, propagate, reconstruct_wave_operator, StepMethod, StepPropagatorConfig,
};
use globalprop::waveop::{solve, SolverConfig};

use super::{amplitude_rows, build, AMPLITUDE_HEADER};
use crate::error::{CliError, InModule};
use crate::output::{write_csv, Manifest};
use crate::ModelSource;

#[derive(Debug, Clone, Args)]
pub struct ReferenceArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// `split` (diagonal phases with second-order differencing) or `sil`.
    #[arg(long, value_parser = parse_method)]
    pub method: StepMethod,
    /// Number of equal steps up to t_final.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub lanczos_dim: usize,
    /// Also solve globally and report F_C against that wave operator.
    #[arg(long)]
    pub cross_check: bool,
    /// Final amplitudes CSV.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

pub(crate) fn parse_method(s: &str) -> Result<StepMethod, String> {
    s.parse::<StepMethod>().map_err(|e| e.to_string())
}

pub(crate) fn method_name(m: StepMethod) -> &'static str {
    match m {
        StepMethod::SplitSod => "split",
        StepMethod::Sil => "sil",
    }
}

pub fn run(args: &ReferenceArgs) -> Result<(), CliError> {
    let config = args.source.load()?;
    let mut manifest = Manifest::new(
        "reference",
        format!(
            "{}\n[reference]\nmethod = {}\nsteps = {}\nlanczos_dim = {}\n",
            config.to_text(),
            method_name(args.method),
            args.steps,
            args.lanczos_dim
        ),
    );
    let (model, system) = build(&config)?;
    let ham = model.hamiltonian();
    let t_final = model.grid.time(model.grid.j0());
    let step_cfg = StepPropagatorConfig::new(args.steps, args.method)
        .and_then(|c| c.with_lanczos_dim(args.lanczos_dim))
        .in_module("refprop")?;

    let start = Instant::now();
    let traj = propagate(&initial_state(ham.dim(), model.initial), &ham, t_final, &step_cfg).in_module("refprop")?;
    let seconds = start.elapsed().as_secs_f64();
    manifest.time("propagate", seconds);
    let psi = traj.final_state();
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    say!(
        "{} with {} steps to t = {t_final}: {seconds:.3} s",
        method_name(args.method),
        args.steps
    );
    say!("norm drift = {:.3e}", norm2 - 1.0);
    say!(
        "|<v={}|psi(t_final)>|^2 = {:.6}",
        model.initial + 1,
        psi[model.initial].norm_sqr()
    );

    if args.cross_check {
        let start = Instant::now();
        let global = solve(
            &system,
            &SolverConfig {
                tol: config.solver.tol,
                max_iter: config.solver.max_iter,
                ..SolverConfig::default()
            },
        )
        .in_module("waveop")?;
        manifest.time("global_solve", start.elapsed().as_secs_f64());
        let omega = reconstruct_wave_operator(psi, model.initial).in_module("refprop")?;
        let fc = cross_convergence_factor(&omega, &global.x.omega_at(model.grid.j0())).in_module("refprop")?;
        say!("F_C = {fc:.3e}");
    }

    if let Some(path) = &args.emit {
        write_csv(path, &AMPLITUDE_HEADER.map(String::from), amplitude_rows(&model, psi))?;
        manifest.finish_beside(path)?;
    }
    Ok(())
}
