use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use globalprop::refprop::{cross_convergence_factor, CrossCheck, StepMethod, SweepPoint};
use globalprop::signal::TimeGrid;
use globalprop::waveop::{solve, DrivenSystem, PropagationResult, SolverConfig};
use rayon::prelude::*;

use super::build;
use super::reference::method_name;
use crate::error::{CliError, InModule};
use crate::output::{Cell, Emitter, Manifest};
use crate::ModelSource;

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Step counts of the split/SOD sweep.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "4096,8192,16384,32768,65536,131072,262144"
    )]
    pub split_steps: Vec<usize>,
    /// Step counts of the SIL sweep.
    #[arg(long, value_delimiter = ',', default_value = "4096,8192,16384,32768,65536")]
    pub sil_steps: Vec<usize>,
    /// Time-grid sizes solved globally for F_G; N/2 and 2N by default.
    #[arg(long, value_delimiter = ',')]
    pub grid_sizes: Option<Vec<usize>>,
    /// Accuracy thresholds of the timing table.
    #[arg(long, value_delimiter = ',', default_value = "1e-6,1e-8,1e-10,1e-12")]
    pub thresholds: Vec<f64>,
    /// Largest step count tried when searching for a threshold.
    #[arg(long, default_value_t = 1 << 22)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 10)]
    pub lanczos_dim: usize,
    /// Output directory; the config's `[output] dir` otherwise.
    #[arg(long)]
    pub emit_dir: Option<PathBuf>,
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn timed_solve(system: &DrivenSystem, config: &SolverConfig) -> Result<(PropagationResult, f64), CliError> {
    let start = Instant::now();
    let result = solve(system, config).in_module("waveop")?;
    Ok((result, start.elapsed().as_secs_f64()))
}

pub fn run(args: &CompareArgs) -> Result<(), CliError> {
    let mut config = args.source.load()?;
    if let Some(dir) = &args.emit_dir {
        config.output_dir = dir.clone();
    }
    if args.thresholds.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(CliError::Usage("thresholds must be positive".into()));
    }
    let n_time = config.model.n_time;
    let grid_sizes = args.grid_sizes.clone().unwrap_or_else(|| vec![n_time / 2, 2 * n_time]);
    let mut manifest = Manifest::new(
        "compare",
        format!(
            "{}\n[compare]\nsplit_steps = {}\nsil_steps = {}\ngrid_sizes = {}\nthresholds = {}\nmax_steps = {}\nlanczos_dim = {}\n",
            config.to_text(),
            list(&args.split_steps),
            list(&args.sil_steps),
            list(&grid_sizes),
            list(&args.thresholds),
            args.max_steps,
            args.lanczos_dim
        ),
    );

    let (model, system) = build(&config)?;
    let solver = SolverConfig {
        tol: config.solver.tol,
        max_iter: config.solver.max_iter,
        ..SolverConfig::default()
    };
    let (global, t_global) = timed_solve(&system, &solver)?;
    manifest.time("global_solve", t_global);
    let j0 = model.grid.j0();
    let t_final = model.grid.time(j0);
    let omega = global.x.omega_at(j0);
    say!("global: {} iterations, {t_global:.3} s", global.reports.len());

    let ham = model.hamiltonian();
    let check = CrossCheck::new(&ham, model.initial, t_final, omega.clone())
        .in_module("refprop")?
        .with_lanczos_dim(args.lanczos_dim);

    // independent sweep points run concurrently; their wall times are not used
    let start = Instant::now();
    let sweep = |method, steps: &[usize]| -> Result<Vec<SweepPoint>, CliError> {
        steps
            .par_iter()
            .map(|&n| check.run(method, n).in_module("refprop"))
            .collect()
    };
    let split = sweep(StepMethod::SplitSod, &args.split_steps)?;
    let sil = sweep(StepMethod::Sil, &args.sil_steps)?;
    manifest.time("reference_sweeps", start.elapsed().as_secs_f64());

    let start = Instant::now();
    let mut fg_rows = Vec::with_capacity(grid_sizes.len());
    for &n in &grid_sizes {
        let grid = TimeGrid::new(model.grid.t_physical_end(), model.grid.t_total(), n).in_module("signal")?;
        if (grid.time(grid.j0()) - t_final).abs() > 1e-12 * t_final {
            return Err(CliError::Usage(format!(
                "grid size {n} puts the last physical sample at t = {} instead of {t_final}; choose sizes that nest",
                grid.time(grid.j0())
            )));
        }
        let other = model.with_grid(grid).in_module("molecular")?;
        let result = solve(&DrivenSystem::from_model(&other), &solver).in_module("waveop")?;
        let fg = cross_convergence_factor(&result.x.omega_at(grid.j0()), &omega).in_module("refprop")?;
        say!("F_G({n} vs {n_time}) = {fg:.3e}");
        fg_rows.push(vec![Cell::from("global"), n.into(), fg.into()]);
    }
    manifest.time("grid_sweep", start.elapsed().as_secs_f64());

    let mut fig13 = fg_rows;
    for (method, points) in [(StepMethod::SplitSod, &split), (StepMethod::Sil, &sil)] {
        for p in points.iter() {
            say!("F_C({}, {} steps) = {:.3e}", method_name(method), p.n_steps, p.factor);
            fig13.push(vec![method_name(method).into(), p.n_steps.into(), p.factor.into()]);
        }
    }

    // timing table: every run here is sequential so wall times are comparable
    let start = Instant::now();
    let mut table = Vec::with_capacity(args.thresholds.len());
    for &threshold in &args.thresholds {
        let (g, t_g) = timed_solve(
            &system,
            &SolverConfig {
                tol: threshold,
                ..solver.clone()
            },
        )?;
        let mut row = vec![Cell::Float(threshold), g.reports.len().into(), t_g.into()];
        let mut summary = format!("threshold {threshold:e}: T_G = {t_g:.3} s");
        for (method, points, steps) in [
            (StepMethod::Sil, &sil, &args.sil_steps),
            (StepMethod::SplitSod, &split, &args.split_steps),
        ] {
            let hit = check
                .steps_for_threshold(method, threshold, points, args.max_steps)
                .in_module("refprop")?;
            let hit = match hit {
                Some(p) if steps.contains(&p.n_steps) => Some(check.run(method, p.n_steps).in_module("refprop")?),
                other => other,
            };
            match hit {
                Some(p) => {
                    summary.push_str(&format!(
                        ", {} {} steps {:.3} s (ratio {:.3})",
                        method_name(method),
                        p.n_steps,
                        p.seconds,
                        t_g / p.seconds
                    ));
                    row.extend([p.n_steps.into(), p.seconds.into(), (t_g / p.seconds).into()]);
                }
                None => {
                    summary.push_str(&format!(", {} not reached", method_name(method)));
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
                }
            }
        }
        say!("{summary}");
        table.push(row);
    }
    manifest.time("timing_table", start.elapsed().as_secs_f64());

    let mut out = Emitter::new(&config.output_dir)?;
    out.csv("fig13_cross_convergence.csv", &["method", "n[1]", "factor[1]"], fig13)?;
    out.csv(
        "table2_timings.csv",
        &[
            "threshold[1]",
            "global_iterations[1]",
            "t_global[s]",
            "sil_steps[1]",
            "t_sil[s]",
            "ratio_global_sil[1]",
            "split_steps[1]",
            "t_split[s]",
            "ratio_global_split[1]",
        ],
        table,
    )?;
    manifest.finish(&mut out)?;
    Ok(())
}
