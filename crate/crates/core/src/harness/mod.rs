//! Experiment drivers: convergence studies, preconditioner iteration
//! tables, channel-flow runs, inf-sup diagnostics and CSV/VTK output.

pub mod channel;
pub mod convergence;
pub mod infsup;
pub mod problems;
pub mod solvers;
pub mod vtk;

pub use channel::{run_channel, ChannelConfig, ChannelReport};
pub use convergence::{run_convergence, ConvergenceConfig, ConvergenceRow};
pub use infsup::{estimate_infsup, InfSupEstimate};
pub use problems::{builtin_problem, channel_problem, ExampleId, MuSpec};
pub use solvers::{study_over_levels, study_over_viscosities, StudyRow};
pub use vtk::write_vtk;

use std::path::Path;

use crate::error::Error;

/// Writes a CSV file with the given header and preformatted rows.
pub(crate) fn write_csv(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> Result<(), Error> {
    use std::io::Write;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{header}")?;
    for row in rows {
        writeln!(file, "{row}")?;
    }
    Ok(())
}
