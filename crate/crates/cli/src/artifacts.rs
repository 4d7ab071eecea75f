//! On-disk layout of a run directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use boxtorus_core::lattice::{grid_for_radius, FourierField, Transform};
use boxtorus_core::solver::SolutionRecord;
use boxtorus_core::verify::{BootstrapReport, C0Diagnostic, EstimateReport};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::config::{Mode, RunConfig};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    CheckFailed,
    NonConvergence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchEntry {
    pub id: String,
    pub record: String,
    pub coefficients: String,
    pub grid: String,
    pub diagnostics: String,
    pub i_value: f64,
    pub residual_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    pub name: String,
    pub file: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Per-branch diagnostics computed after the solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub bootstrap: BootstrapReport,
    pub c0: C0Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub mode: Mode,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub config: RunConfig,
    pub status: Status,
    #[serde(default)]
    pub branches: Vec<BranchEntry>,
    #[serde(default)]
    pub estimates: Vec<EstimateEntry>,
    #[serde(default)]
    pub checks: Vec<CheckLine>,
    /// Wall-clock seconds per phase; the only nondeterministic field.
    pub timings: BTreeMap<String, f64>,
}

impl Manifest {
    pub fn new(config: &RunConfig) -> Self {
        let versions = BTreeMap::from([
            ("boxtorus-cli".to_owned(), env!("CARGO_PKG_VERSION").to_owned()),
            ("manifest".to_owned(), "1".to_owned()),
        ]);
        Self {
            mode: config.mode,
            seed: config.seed,
            versions,
            config: config.clone(),
            status: Status::Ok,
            branches: Vec::new(),
            estimates: Vec::new(),
            checks: Vec::new(),
            timings: BTreeMap::new(),
        }
    }
}

pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<V: DeserializeOwned>(path: &Path) -> Result<V> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Samples `(x, t, u)` on the collocation grid of the field's radius.
pub fn grid_csv(u: &FourierField<f64>) -> Result<String> {
    let (nx, nt) = grid_for_radius(u.radius());
    let g = Transform::new(nx, nt)?.synthesize(u)?;
    let mut out = String::from("x,t,u\n");
    for a in 0..nx {
        let x = std::f64::consts::PI * a as f64 / nx as f64;
        for b in 0..nt {
            let t = 2.0 * std::f64::consts::PI * b as f64 / nt as f64;
            out.push_str(&format!("{x:.16e},{t:.16e},{:.16e}\n", g.get(a, b)));
        }
    }
    Ok(out)
}

/// Parses a grid dump back into rows.
pub fn parse_grid_csv(text: &str) -> Result<Vec<[f64; 3]>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(str::parse).collect::<std::result::Result<_, _>>()?;
            anyhow::ensure!(v.len() == 3, "expected 3 columns in `{l}`");
            Ok([v[0], v[1], v[2]])
        })
        .collect()
}

/// A run directory and the files it holds.
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_owned() })
    }

    pub fn open(root: &Path) -> Self {
        Self { root: root.to_owned() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<()> {
        write_json(&self.path(MANIFEST), m)
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        let path = self.path(MANIFEST);
        anyhow::ensure!(path.exists(), "no {MANIFEST} in {}", self.root.display());
        read_json(&path)
    }

    pub fn write_branch(
        &self,
        index: usize,
        record: &SolutionRecord<f64>,
        diagnostics: &Diagnostics,
    ) -> Result<BranchEntry> {
        let id = format!("branch_{index:03}");
        let entry = BranchEntry {
            record: format!("{id}.json"),
            coefficients: format!("{id}_coeffs.csv"),
            grid: format!("{id}_grid.csv"),
            diagnostics: format!("{id}_diagnostics.json"),
            i_value: record.i_value,
            residual_norm: record.residual_norm,
            id,
        };
        let u = record.field();
        write_json(&self.path(&entry.record), record)?;
        fs::write(self.path(&entry.coefficients), u.to_csv())?;
        fs::write(self.path(&entry.grid), grid_csv(&u)?)?;
        write_json(&self.path(&entry.diagnostics), diagnostics)?;
        Ok(entry)
    }

    pub fn read_record(&self, entry: &BranchEntry) -> Result<SolutionRecord<f64>> {
        read_json(&self.path(&entry.record))
    }

    pub fn read_coefficients(&self, entry: &BranchEntry) -> Result<FourierField<f64>> {
        let text = fs::read_to_string(self.path(&entry.coefficients))?;
        Ok(FourierField::from_csv(&text)?)
    }

    pub fn read_diagnostics(&self, entry: &BranchEntry) -> Result<Diagnostics> {
        read_json(&self.path(&entry.diagnostics))
    }

    pub fn write_estimate(&self, report: &EstimateReport) -> Result<EstimateEntry> {
        let file = format!("estimate_{}.json", report.name);
        write_json(&self.path(&file), report)?;
        Ok(EstimateEntry {
            name: report.name.clone(),
            file,
            pass: report.pass,
        })
    }

    pub fn read_estimate(&self, entry: &EstimateEntry) -> Result<EstimateReport> {
        read_json(&self.path(&entry.file))
    }
}
