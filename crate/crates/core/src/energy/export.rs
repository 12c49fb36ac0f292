use std::io::{self, Write};

use super::monotone::times_up_to;
use super::{f_window, g_tilde_window, g_window, DensityField, EnergyError, WindowSpec};

/// CSV `zeta,F,Ftilde` at every node.
pub fn write_f_csv<W: Write>(field: &DensityField, spec: &WindowSpec, mut out: W) -> Result<(), EnergyError> {
    writeln!(out, "zeta,F,Ftilde")?;
    for z in field.grid().nodes() {
        let f = f_window(field, z, spec, false)?;
        let ft = f_window(field, z, spec, true)?;
        writeln!(out, "{z:.16e},{f:.16e},{ft:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

/// CSV `t,G,Gtilde` at every snapshot up to the later of the two admissible
/// ends; a functional past its own range is left empty.
pub fn write_g_csv<W: Write>(field: &DensityField, spec: &WindowSpec, mut out: W) -> Result<(), EnergyError> {
    writeln!(out, "t,G,Gtilde")?;
    let (g_end, gt_end) = (spec.g_end(), spec.g_tilde_end());
    let cell = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for t in times_up_to(field, g_end.max(gt_end)) {
        let g = if t <= g_end { Some(g_window(field, t, spec)?) } else { None };
        let gt = if t <= gt_end { Some(g_tilde_window(field, t, spec)?) } else { None };
        writeln!(out, "{t:.16e},{},{}", cell(g), cell(gt))?;
    }
    out.flush()?;
    Ok(())
}

/// Keeps I/O failures distinct from window errors for callers that map them to exit codes.
impl From<io::Error> for EnergyError {
    fn from(e: io::Error) -> Self {
        EnergyError::Io(e.to_string())
    }
}
