use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use globalprop::molecular::{fourier_grid_eigensolve, RadialGrid};

use crate::error::{CliError, InModule};
use crate::output::{write_csv, Cell, Manifest};
use crate::ModelSource;

#[derive(Debug, Clone, Args)]
pub struct EigenArgs {
    /// Surfaces and grid; built-in set 1 when neither is given.
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub surface: u8,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub r_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub n_keep: Option<usize>,
    /// Energies CSV (v, E).
    #[arg(long)]
    pub emit: Option<PathBuf>,
    /// Eigenvector CSV (r, phi_1..phi_n).
    #[arg(long)]
    pub vectors: Option<PathBuf>,
}

pub fn run(args: &EigenArgs) -> Result<(), CliError> {
    let base = if args.source.config.is_none() && args.source.example.is_none() {
        crate::RunConfig::example(1)?
    } else {
        args.source.load()?
    };
    let m = &base.model;
    let grid = RadialGrid::new(
        args.r_min.unwrap_or(m.radial.r_min()),
        args.r_max.unwrap_or(m.radial.r_max()),
        args.n_points.unwrap_or(m.radial.len()),
    )
    .in_module("molecular")?;
    let n_keep = args.n_keep.unwrap_or(m.n_keep);
    let surface = if args.surface == 1 { &m.lower } else { &m.upper };

    let coeffs: Vec<String> = surface.coefficients().iter().map(|c| format!("{c:?}")).collect();
    let mut manifest = Manifest::new(
        "eigen",
        format!(
            "[eigen]\nmass = {:?}\ncoefficients = {}\nr_min = {:?}\nr_max = {:?}\nn_points = {}\nn_keep = {n_keep}\n",
            surface.mass(),
            coeffs.join(", "),
            grid.r_min(),
            grid.r_max(),
            grid.len()
        ),
    );
    let start = Instant::now();
    let pairs = fourier_grid_eigensolve(surface, &grid, n_keep).in_module("molecular")?;
    manifest.time("eigensolve", start.elapsed().as_secs_f64());

    for (v, e) in pairs.energies.iter().enumerate().take(8) {
        say!("E(v={}, S={}) = {e:.10}", v + 1, args.surface);
    }
    if pairs.energies.len() > 8 {
        say!("... {} levels in total", pairs.energies.len());
    }

    if let Some(path) = &args.emit {
        let rows = pairs
            .energies
            .iter()
            .enumerate()
            .map(|(v, &e)| vec![Cell::Int(v + 1), e.into()]);
        write_csv(path, &["v[1]".into(), "energy[hartree]".into()], rows)?;
        manifest.finish_beside(path)?;
    }
    if let Some(path) = &args.vectors {
        let mut header = vec!["r[bohr]".to_string()];
        header.extend((1..=n_keep).map(|v| format!("phi_{v}[bohr^-1/2]")));
        let rows = (0..grid.len()).map(|k| {
            let mut row = vec![Cell::Float(grid.point(k))];
            row.extend((0..n_keep).map(|v| Cell::Float(pairs.vectors[(k, v)])));
            row
        });
        write_csv(path, &header, rows)?;
        manifest.finish_beside(path)?;
    }
    Ok(())
}
