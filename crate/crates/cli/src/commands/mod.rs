pub mod compare;
pub mod eigen;
pub mod integrate;
pub mod propagate;
pub mod reference;

use globalprop::molecular::MolecularModel;
use globalprop::waveop::DrivenSystem;
use globalprop::C64;

use crate::error::{CliError, InModule};
use crate::output::Cell;
use crate::RunConfig;

pub(crate) const AMPLITUDE_HEADER: [&str; 6] = ["v[1]", "vib[1]", "surface[1]", "re[1]", "im[1]", "abs2[1]"];

pub(crate) fn build(config: &RunConfig) -> Result<(MolecularModel, DrivenSystem), CliError> {
    let model = MolecularModel::build(&config.model).in_module("molecular")?;
    let system = DrivenSystem::from_model(&model);
    check_levels(&config.solver.track, system.dim())?;
    Ok((model, system))
}

pub(crate) fn check_levels(levels: &[usize], dim: usize) -> Result<(), CliError> {
    match levels.iter().find(|&&v| v == 0 || v > dim) {
        Some(v) => Err(CliError::Usage(format!("level {v} is outside 1..={dim}"))),
        None => Ok(()),
    }
}

/// Rows `(v, vib, surface, Re, Im, |.|^2)` with `v` the global 1-based level.
pub(crate) fn amplitude_rows<'a>(model: &'a MolecularModel, psi: &'a [C64]) -> impl Iterator<Item = Vec<Cell>> + 'a {
    psi.iter().enumerate().map(move |(i, z)| {
        let (vib, s) = model.basis.label(i);
        vec![
            Cell::Int(i + 1),
            vib.into(),
            s.into(),
            z.re.into(),
            z.im.into(),
            z.norm_sqr().into(),
        ]
    })
}
