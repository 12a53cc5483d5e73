//! Run configuration, read from TOML.
//!
//! ```toml
//! n = 2
//! mode = "full-s2"          # or "axisymmetric"
//! resolution = 32
//! output = "out"            # relative to the config file
//! artifacts = ["trace", "bounds", "mesh", "nirenberg"]
//! seed = 7
//! certify_tol = 1e-9
//!
//! [f]                       # exactly one of the four keys
//! constant = 4.0
//! # expression = "1 + 0.3*cos(theta)^2"
//! # csv = "f.csv"
//! # generator = { h = "1 + 0.3*cos(theta)^2", c = "auto" }
//!
//! [solver]                  # any field of SolverOptions
//! newton_tol = 1e-10
//! ```

use crate::error::{CliError, CliResult};
use christoffel::equation::{find_admissible_c, generate_admissible_f, GeneratorSearch, PrescribedData};
use christoffel::expr::{Expr, Parity};
use christoffel::io::read_field_csv;
use christoffel::solver::SolverOptions;
use christoffel::{build_grid, Grid, GridMode};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Artifact {
    Trace,
    Bounds,
    Mesh,
    Nirenberg,
}

fn default_artifacts() -> Vec<Artifact> {
    vec![Artifact::Trace, Artifact::Bounds, Artifact::Mesh]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorC {
    Value(f64),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub h: String,
    pub c: GeneratorC,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFSpec {
    constant: Option<f64>,
    expression: Option<String>,
    csv: Option<PathBuf>,
    generator: Option<GeneratorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FSpec {
    Constant(f64),
    Expression(String),
    Csv(PathBuf),
    Generator(GeneratorSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    mode: GridMode,
    resolution: usize,
    #[serde(default = "default_output")]
    output: PathBuf,
    #[serde(default = "default_artifacts")]
    artifacts: Vec<Artifact>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_tol")]
    certify_tol: f64,
    f: toml::Spanned<RawFSpec>,
    #[serde(default)]
    solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub mode: GridMode,
    pub resolution: usize,
    pub output: PathBuf,
    pub artifacts: Vec<Artifact>,
    pub seed: u64,
    pub certify_tol: f64,
    pub f: FSpec,
    pub solver: SolverOptions,
    /// Directory that relative paths in the file resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Prescribed data with a record of how it was produced.
#[derive(Debug, Clone)]
pub struct BuiltData {
    pub f: PrescribedData,
    pub parity: Option<Parity>,
    pub generator_c: Option<f64>,
    /// Present when C was found by search.
    pub generator: Option<GeneratorSearch>,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl RunConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let src = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&src, path, base)
    }

    pub fn parse(src: &str, path: &Path, base_dir: PathBuf) -> CliResult<Self> {
        let at = |offset: usize, message: String| {
            let (line, column) = line_col(src, offset);
            CliError::Config { path: path.into(), line, column, message }
        };
        let raw: RawConfig = toml::from_str(src).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            at(offset, e.message().to_string())
        })?;
        let span = raw.f.span();
        let spec = raw.f.into_inner();
        let given = [
            spec.constant.is_some(),
            spec.expression.is_some(),
            spec.csv.is_some(),
            spec.generator.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            return Err(at(
                span.start,
                format!("[f] needs exactly one of constant, expression, csv, generator (found {given})"),
            ));
        }
        let f = if let Some(c) = spec.constant {
            FSpec::Constant(c)
        } else if let Some(e) = spec.expression {
            FSpec::Expression(e)
        } else if let Some(p) = spec.csv {
            FSpec::Csv(p)
        } else {
            let g = spec.generator.expect("counted above");
            if let GeneratorC::Word(w) = &g.c {
                if w != "auto" {
                    return Err(at(span.start, format!("generator c must be a number or \"auto\", found \"{w}\"")));
                }
            }
            FSpec::Generator(g)
        };
        raw.solver.validate().map_err(|e| at(0, format!("[solver] {e}")))?;
        let mut artifacts = raw.artifacts;
        artifacts.sort();
        artifacts.dedup();
        Ok(Self {
            n: raw.n,
            mode: raw.mode,
            resolution: raw.resolution,
            output: raw.output,
            artifacts,
            seed: raw.seed,
            certify_tol: raw.certify_tol,
            f,
            solver: raw.solver,
            base_dir,
        })
    }

    pub fn wants(&self, a: Artifact) -> bool {
        self.artifacts.contains(&a)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    pub fn grid(&self) -> CliResult<Arc<Grid>> {
        Ok(build_grid(self.n, self.mode, self.resolution)?)
    }

    /// Samples the f specification on `grid`.
    pub fn build_f(&self, grid: &Arc<Grid>) -> CliResult<BuiltData> {
        let parsed = |src: &str| -> CliResult<Expr> {
            Expr::parse(src).map_err(|e| match e {
                christoffel::Error::Expression { column, message } => {
                    CliError::Usage(format!("in expression \"{src}\": column {column}: {message}"))
                }
                other => other.into(),
            })
        };
        Ok(match &self.f {
            FSpec::Constant(c) => BuiltData {
                f: PrescribedData::constant(grid.clone(), *c)?,
                parity: Some(Parity::Even),
                generator_c: None,
                generator: None,
            },
            FSpec::Expression(src) => {
                let e = parsed(src)?;
                BuiltData {
                    f: PrescribedData::new(e.field(grid)?)?,
                    parity: Some(e.parity()),
                    generator_c: None,
                    generator: None,
                }
            }
            FSpec::Csv(p) => BuiltData {
                f: PrescribedData::new(read_field_csv(&self.resolve(p), grid)?)?,
                parity: None,
                generator_c: None,
                generator: None,
            },
            FSpec::Generator(g) => {
                let e = parsed(&g.h)?;
                let h = e.field(grid)?;
                let (c, search) = match g.c {
                    GeneratorC::Value(c) => (c, None),
                    GeneratorC::Word(_) => {
                        let s = find_admissible_c(&h)?;
                        (s.c, Some(s))
                    }
                };
                BuiltData {
                    f: generate_admissible_f(&h, c)?,
                    parity: Some(e.parity()),
                    generator_c: Some(c),
                    generator: search,
                }
            }
        })
    }
}
