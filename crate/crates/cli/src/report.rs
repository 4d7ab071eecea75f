//! Human-readable summaries of a finished run directory.

use std::fmt::Write;
use std::path::Path;

use anyhow::{bail, Result};
use boxtorus_core::solver::align_time_shift;
use boxtorus_core::FourierField;

use crate::artifacts::{Manifest, RunDir};

/// One row of the branch table.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchRow {
    pub id: String,
    pub i_value: f64,
    pub residual: f64,
    pub v_c0: f64,
    pub holder: Option<f64>,
}

/// Branch rows sorted by `I_beta`, and pairwise time-aligned `L^2` distances
/// in the same order.
pub fn branch_table(dir: &RunDir, manifest: &Manifest) -> Result<(Vec<BranchRow>, Vec<Vec<f64>>)> {
    let mut rows = Vec::new();
    for entry in &manifest.branches {
        let record = dir.read_record(entry)?;
        let diag = dir.read_diagnostics(entry)?;
        let holder = diag.bootstrap.rows.last().and_then(|r| r.holder_exponent);
        rows.push((
            BranchRow {
                id: entry.id.clone(),
                i_value: record.i_value,
                residual: record.residual_norm,
                v_c0: record.v_c0_history.last().copied().unwrap_or(0.0),
                holder,
            },
            record.field(),
        ));
    }
    rows.sort_by(|a, b| a.0.i_value.total_cmp(&b.0.i_value));
    let fields: Vec<&FourierField<f64>> = rows.iter().map(|(_, u)| u).collect();
    let distances = fields
        .iter()
        .map(|a| fields.iter().map(|b| align_time_shift(a, b).distance).collect())
        .collect();
    Ok((rows.into_iter().map(|(r, _)| r).collect(), distances))
}

/// Renders the summary of the run stored in `out_dir`.
pub fn report_summary(out_dir: &Path) -> Result<String> {
    if !out_dir.is_dir() {
        bail!("{} is not a run directory", out_dir.display());
    }
    let dir = RunDir::open(out_dir);
    let manifest = dir.read_manifest()?;
    let mut out = String::new();
    writeln!(out, "mode {}  seed {}  status {:?}", manifest.mode.name(), manifest.seed, manifest.status)?;
    if !manifest.branches.is_empty() {
        let (rows, dist) = branch_table(&dir, &manifest)?;
        writeln!(out, "{:<12} {:>16} {:>12} {:>12} {:>8}", "branch", "I_beta", "residual", "|v|_C0", "holder")?;
        for r in &rows {
            let holder = r.holder.map_or("-".to_owned(), |h| format!("{h:.3}"));
            writeln!(
                out,
                "{:<12} {:>16.8e} {:>12.3e} {:>12.3e} {:>8}",
                r.id, r.i_value, r.residual, r.v_c0, holder
            )?;
        }
        if rows.len() > 1 {
            writeln!(out, "aligned distances")?;
            write!(out, "{:<12}", "")?;
            for r in &rows {
                write!(out, " {:>12}", r.id)?;
            }
            writeln!(out)?;
            for (r, line) in rows.iter().zip(&dist) {
                write!(out, "{:<12}", r.id)?;
                for d in line {
                    write!(out, " {d:>12.4e}")?;
                }
                writeln!(out)?;
            }
        }
    }
    for e in &manifest.estimates {
        let rep = dir.read_estimate(e)?;
        writeln!(
            out,
            "{:<20} {} worst {:.6e} envelope [{:.6e}, {:.6e}] over {} samples",
            rep.name,
            if rep.pass { "pass" } else { "FAIL" },
            rep.worst_ratio,
            rep.envelope_lower,
            rep.envelope,
            rep.samples
        )?;
    }
    for c in &manifest.checks {
        writeln!(out, "{:<20} {} {}", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail)?;
    }
    Ok(out)
}
