use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use globalprop::fftint::{
    convergence_factor, cumulative_integral, simpson_cumulative, ExtensionOptions, IntegrationMode, PacketSum,
};
use globalprop::signal::{ComplexSignal, TimeGrid};

use crate::error::{CliError, InModule};
use crate::output::{write_csv, Emitter, Manifest};

/// Fine-to-coarse sample ratio of the Simpson oracle; even, so every coarse
/// sample closes a Simpson panel, and about 150000 samples at N = 1024.
pub const ORACLE_STRIDE: usize = 146;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Periodic,
    Extend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Simpson,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateArgs {
    /// Integrate the six-packet benchmark function on [0, 180].
    #[arg(long)]
    pub test_function: bool,
    /// Sample counts N (comma-separated); CF_N compares N with 2N.
    #[arg(long, value_delimiter = ',', default_value = "1024")]
    pub n_samples: Vec<usize>,
    #[arg(long, value_enum, default_value = "periodic")]
    pub mode: Mode,
    /// End of the physical interval in extend mode [a.u.]; defaults to 0.9 T.
    #[arg(long)]
    pub t_physical: Option<f64>,
    /// Compare against a Simpson integral on a 146x finer grid.
    #[arg(long, value_enum)]
    pub oracle: Option<Oracle>,
    /// Per-sample CSV (t, Re I, Im I) for the first N.
    #[arg(long)]
    pub emit: Option<PathBuf>,
    /// Directory for the named figure files (fig3, fig4_5) and manifest.
    #[arg(long)]
    pub emit_dir: Option<PathBuf>,
}

impl IntegrateArgs {
    fn canonical(&self) -> String {
        let n: Vec<String> = self.n_samples.iter().map(|n| n.to_string()).collect();
        format!(
            "[integrate]\nfunction = packet_sum\nn_samples = {}\nmode = {:?}\nt_physical = {:?}\noracle = {:?}\n",
            n.join(", "),
            self.mode,
            self.t_physical,
            self.oracle
        )
    }
}

struct Setup {
    f: PacketSum,
    mode: IntegrationMode,
    t_physical: f64,
}

impl Setup {
    fn grid(&self, n: usize) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.t_physical, self.f.period, n).in_module("signal")
    }

    fn integral(&self, n: usize) -> Result<ComplexSignal, CliError> {
        cumulative_integral(&self.f.sample(self.grid(n)?), self.mode).in_module("fftint")
    }

    fn cf(&self, n: usize) -> Result<f64, CliError> {
        convergence_factor(&self.integral(n)?, &self.integral(2 * n)?).in_module("fftint")
    }

    fn simpson_cf(&self, n: usize) -> Result<f64, CliError> {
        let s = |n| simpson_cumulative(&self.f.sample(self.f.grid(n).in_module("signal")?)).in_module("fftint");
        convergence_factor(&s(n)?, &s(2 * n)?).in_module("fftint")
    }

    /// Simpson integral sampled at the coarse grid points `0..=j0`.
    fn oracle(&self, n: usize) -> Result<Vec<globalprop::C64>, CliError> {
        let fine = simpson_cumulative(&self.f.sample(self.grid(n * ORACLE_STRIDE)?)).in_module("fftint")?;
        Ok((0..=self.grid(n)?.j0().min(n - 1))
            .map(|j| fine[ORACLE_STRIDE * j])
            .collect())
    }
}

pub fn run(args: &IntegrateArgs) -> Result<(), CliError> {
    if !args.test_function {
        return Err(CliError::Usage("integrate needs a source; pass --test-function".into()));
    }
    if args.n_samples.is_empty() || args.n_samples.iter().any(|&n| n < 4 || n % 2 == 1) {
        return Err(CliError::Usage("--n-samples must be even and at least 4".into()));
    }
    let f = PacketSum::benchmark();
    let (mode, t_physical) = match args.mode {
        Mode::Periodic => {
            if args.t_physical.is_some_and(|t| t != f.period) {
                return Err(CliError::Usage("--t-physical applies to extend mode only".into()));
            }
            (IntegrationMode::Periodic, f.period)
        }
        Mode::Extend => {
            let t = args.t_physical.unwrap_or(0.9 * f.period);
            if !(t > 0.0 && t < f.period) {
                return Err(CliError::Usage(format!("--t-physical must lie in (0, {})", f.period)));
            }
            (IntegrationMode::Extend(ExtensionOptions::default()), t)
        }
    };
    let setup = Setup { f, mode, t_physical };
    let mut manifest = Manifest::new("integrate", args.canonical());

    let start = Instant::now();
    for &n in &args.n_samples {
        say!("CF_{n} = {:.3e}", setup.cf(n)?);
    }
    manifest.time("convergence_factors", start.elapsed().as_secs_f64());

    let n = args.n_samples[0];
    let integral = setup.integral(n)?;
    let grid = *integral.grid();
    let oracle = match args.oracle {
        Some(Oracle::Simpson) => {
            let start = Instant::now();
            let reference = setup.oracle(n)?;
            manifest.time("simpson_oracle", start.elapsed().as_secs_f64());
            let diff = reference
                .iter()
                .enumerate()
                .map(|(j, z)| (integral[j] - z).norm())
                .fold(0.0, f64::max);
            say!("max |I_FFT({n}) - I_Simpson({})| = {diff:.3e}", n * ORACLE_STRIDE);
            Some(reference)
        }
        None => None,
    };

    if let Some(path) = &args.emit {
        let header = ["t[a.u.]", "re_I[a.u.]", "im_I[a.u.]"].map(String::from);
        let rows = (0..grid.len()).map(|j| vec![grid.time(j).into(), integral[j].re.into(), integral[j].im.into()]);
        write_csv(path, &header, rows)?;
        if args.emit_dir.is_none() {
            manifest.finish_beside(path)?;
        }
    }

    if let Some(dir) = &args.emit_dir {
        let mut emitter = Emitter::new(dir)?;
        let start = Instant::now();
        let sizes: Vec<usize> = (4..=13).map(|k| 1usize << k).collect();
        let mut rows = Vec::with_capacity(sizes.len());
        for &m in &sizes {
            rows.push(vec![m.into(), setup.cf(m)?.into(), setup.simpson_cf(m)?.into()]);
        }
        emitter.csv("fig3.csv", &["n_samples[1]", "cf_fft[a.u.]", "cf_simpson[a.u.]"], rows)?;
        manifest.time("fig3", start.elapsed().as_secs_f64());
        if let Some(reference) = &oracle {
            let rows = reference.iter().enumerate().map(|(j, s)| {
                let z = integral[j];
                vec![
                    grid.time(j).into(),
                    z.re.into(),
                    z.im.into(),
                    s.re.into(),
                    s.im.into(),
                    (z - s).norm().into(),
                ]
            });
            emitter.csv(
                "fig4_5.csv",
                &[
                    "t[a.u.]",
                    "re_fft[a.u.]",
                    "im_fft[a.u.]",
                    "re_simpson[a.u.]",
                    "im_simpson[a.u.]",
                    "abs_diff[a.u.]",
                ],
                rows,
            )?;
        }
        manifest.finish(&mut emitter)?;
    }
    Ok(())
}
