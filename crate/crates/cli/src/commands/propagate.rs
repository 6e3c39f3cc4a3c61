use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use globalprop::waveop::{fubini_study_distance, solve, wavefunction, SolverConfig, StopReason};

use super::{amplitude_rows, build, AMPLITUDE_HEADER};
use crate::error::{CliError, InModule};
use crate::output::{Cell, Emitter, Manifest};
use crate::{parse_levels, ModelSource};

#[derive(Debug, Clone, Args)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Stop once the convergence factor F falls to this value.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output directory; the config's `[output] dir` otherwise.
    #[arg(long)]
    pub emit_dir: Option<PathBuf>,
    /// Levels whose time series are written, e.g. `v=1,37`.
    #[arg(long, value_parser = parse_levels)]
    pub track: Option<Vec<usize>>,
    /// Iterations kept for per-order amplitudes and defects, e.g. `4,9,22`.
    #[arg(long, value_parser = parse_levels)]
    pub snapshots: Option<Vec<usize>>,
}

pub fn run(args: &PropagateArgs) -> Result<(), CliError> {
    let mut config = args.source.load()?;
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
        }
        config.solver.tol = tol;
    }
    if let Some(n) = args.max_iter {
        config.solver.max_iter = n;
    }
    if let Some(dir) = &args.emit_dir {
        config.output_dir = dir.clone();
    }
    if let Some(track) = &args.track {
        config.solver.track = track.clone();
    }
    if let Some(snaps) = &args.snapshots {
        config.solver.snapshots = snaps.clone();
    }
    let canonical = config.to_text();
    let mut manifest = Manifest::new("propagate", canonical.clone());

    let start = Instant::now();
    let (model, system) = build(&config)?;
    manifest.time("model", start.elapsed().as_secs_f64());

    let solver = SolverConfig {
        tol: config.solver.tol,
        max_iter: config.solver.max_iter,
        snapshots: config.solver.snapshots.clone(),
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let result = solve(&system, &solver).in_module("waveop")?;
    manifest.time("solve", start.elapsed().as_secs_f64());
    for r in &result.reports {
        manifest.time(&format!("iteration_{}", r.n), r.seconds);
    }

    let grid = model.grid;
    let j0 = grid.j0();
    let t_final = grid.time(j0);
    let n_final = result.reports.len();
    let f_final = result.reports.last().map_or(f64::NAN, |r| r.factor);
    let stop = match result.stop {
        StopReason::Tolerance => "tolerance",
        StopReason::Plateau => "plateau",
        StopReason::MaxIterations => "max_iterations",
    };
    manifest.note("stop", stop);
    manifest.note("iterations", n_final);
    let psi_final = result.psi_at(j0);

    say!(
        "stop: {stop} after {n_final} iterations, F = {f_final:.3e}, residual = {:.3e}",
        result.final_residual
    );
    say!("t_final = {t_final}");
    say!(
        "|<v={}|psi(t_final)>|^2 = {:.6}",
        model.initial + 1,
        psi_final[model.initial].norm_sqr()
    );
    for &v in config.solver.track.iter().filter(|&&v| v != model.initial + 1) {
        say!("|<v={v}|psi(t_final)>|^2 = {:.6e}", psi_final[v - 1].norm_sqr());
    }
    if result.stop != StopReason::Tolerance {
        eprintln!("warning: F did not reach tol = {:e}", config.solver.tol);
    }

    let start = Instant::now();
    let mut out = Emitter::new(&config.output_dir)?;
    out.text("config.txt", &canonical)?;
    out.csv(
        "fig7_convergence.csv",
        &["n[1]", "F[1]", "max_residual[a.u.]"],
        result
            .reports
            .iter()
            .map(|r| vec![r.n.into(), r.factor.into(), r.max_residual.into()]),
    )?;
    out.csv(
        "fig8_fubini_study.csv",
        &["t[a.u.]", "distance[rad]"],
        (0..=j0).map(|k| vec![grid.time(k).into(), fubini_study_distance(&result.x, k).into()]),
    )?;
    out.csv(
        "final_amplitudes.csv",
        &AMPLITUDE_HEADER,
        amplitude_rows(&model, &psi_final),
    )?;

    // per-order amplitudes at t_final and defects against the final iterate
    let snapshot_psi: Vec<(usize, _)> = result
        .snapshots
        .iter()
        .map(|x| (x.iteration(), wavefunction(x, &system)))
        .collect();
    let mut header = vec!["n[1]"];
    header.extend(AMPLITUDE_HEADER);
    let mut rows = Vec::new();
    for (n, psi) in snapshot_psi
        .iter()
        .map(|(n, p)| (*n, p.row(j0).iter().copied().collect::<Vec<_>>()))
        .chain((!result.snapshots.iter().any(|x| x.iteration() == n_final)).then(|| (n_final, psi_final.clone())))
    {
        rows.extend(amplitude_rows(&model, &psi).map(|mut r| {
            r.insert(0, Cell::Int(n));
            r
        }));
    }
    out.csv("fig9_amplitudes_by_iteration.csv", &header, rows)?;
    if !snapshot_psi.is_empty() {
        for &v in &config.solver.track {
            let mut header = vec!["t[a.u.]".to_string()];
            header.extend(snapshot_psi.iter().map(|(n, _)| format!("defect_n{n}[1]")));
            let rows = (0..=j0).map(|k| {
                let mut row = vec![Cell::Float(grid.time(k))];
                let exact = result.psi[(k, v - 1)];
                row.extend(
                    snapshot_psi
                        .iter()
                        .map(|(_, p)| Cell::Float((p[(k, v - 1)] - exact).norm())),
                );
                row
            });
            out.csv_owned(&format!("fig10_defects_v{v}.csv"), &header, rows)?;
        }
    }
    for &v in &config.solver.track {
        out.csv(
            &format!("fig11_channel_v{v}.csv"),
            &["t[a.u.]", "re[1]", "im[1]", "abs2[1]"],
            (0..=j0).map(|k| {
                let z = result.psi[(k, v - 1)];
                vec![grid.time(k).into(), z.re.into(), z.im.into(), z.norm_sqr().into()]
            }),
        )?;
    }
    out.csv(
        "fig12_heff.csv",
        &["t[a.u.]", "re[hartree]", "im[hartree]"],
        (0..=j0).map(|k| {
            let z = result.h_eff[k];
            vec![grid.time(k).into(), z.re.into(), z.im.into()]
        }),
    )?;
    manifest.time("emit", start.elapsed().as_secs_f64());
    let path = manifest.finish(&mut out)?;
    say!(
        "wrote {} files to {}",
        out.written().len(),
        path.parent().unwrap_or(&path).display()
    );
    Ok(())
}
