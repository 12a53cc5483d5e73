use crate::error::{CliError, CliResult};
use christoffel::equation::{AdmissibilityReport, GeneratorSearch};
use christoffel::estimates::BoundsReport;
use christoffel::geometry::{DualityReport, GeometryDefects, IdentityCheck, MeshStats};
use christoffel::io::{write_atomic, write_json};
use christoffel::nirenberg::NirenbergSidecar;
use christoffel::solver::Certificate;
use christoffel::GridMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Certified,
    Uncertified,
    Failed,
}

impl RunStatus {
    /// 0 certified, 2 solved but uncertified, 1 failure.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Certified => 0,
            RunStatus::Uncertified => 2,
            RunStatus::Failed => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub source: String,
    pub parity: Option<String>,
    pub generator_c: Option<f64>,
    pub generator_search: Option<GeneratorSearch>,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub steps: usize,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
    pub final_residual: f64,
    pub min_phi: f64,
    pub max_phi: f64,
    pub min_eig_u: f64,
    pub all_h_convex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub defects: GeometryDefects,
    pub duality_grid: DualityReport,
    pub duality_off_grid: DualityReport,
    pub christoffel_residual: Option<f64>,
    pub mesh: Option<MeshStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NirenbergSummary {
    pub sidecar: NirenbergSidecar,
    pub residual: f64,
    pub alternative_residual: f64,
    pub verified: bool,
    pub v_min: f64,
    pub v_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub seed: u64,
    pub fields: usize,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub status: RunStatus,
    pub n: usize,
    pub mode: GridMode,
    pub resolution: usize,
    pub seed: u64,
    pub data: Option<DataSummary>,
    pub admissibility: Option<AdmissibilityReport>,
    pub solve: Option<SolveSummary>,
    pub certificate: Option<Certificate>,
    pub bounds: Option<BoundsReport>,
    pub identity: Vec<IdentityCheck>,
    pub geometry: Option<GeometrySummary>,
    pub nirenberg: Option<NirenbergSummary>,
    pub probe: Option<ProbeSummary>,
    pub notes: Vec<String>,
    /// Every file written by the run except this report.
    pub manifest: Vec<ManifestEntry>,
}

impl RunReport {
    pub fn new(command: &str, n: usize, mode: GridMode, resolution: usize, seed: u64) -> Self {
        Self {
            command: command.into(),
            status: RunStatus::Failed,
            n,
            mode,
            resolution,
            seed,
            data: None,
            admissibility: None,
            solve: None,
            certificate: None,
            bounds: None,
            identity: Vec::new(),
            geometry: None,
            nirenberg: None,
            probe: None,
            notes: Vec::new(),
            manifest: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        Ok(serde_json::from_slice(&bytes).map_err(christoffel::Error::from)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records a hash for every file written through it.
pub struct Outputs {
    dir: PathBuf,
    manifest: Vec<ManifestEntry>,
}

impl Outputs {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
        Ok(Self { dir: dir.into(), manifest: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.manifest.retain(|e| e.file != name);
        self.manifest.push(ManifestEntry {
            file: name.into(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn finish(self, report: &mut RunReport) -> CliResult<PathBuf> {
        let mut manifest = self.manifest;
        manifest.sort_by(|a, b| a.file.cmp(&b.file));
        report.manifest = manifest;
        let path = self.dir.join(REPORT_FILE);
        write_json(&path, report)?;
        Ok(path)
    }
}
