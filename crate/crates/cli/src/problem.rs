//! Problem files: TOML with polynomial and scalar strings in the
//! expression grammar of the core crate.
//!
//! ```toml
//! name = "planar3"
//! variables = ["x", "y"]
//! radicand = 2                 # optional
//! phase = "x^2*y"
//! degree_bound = 3             # optional, defaults to the phase degree
//! factors = [[1, 0], [0, 1], ["1", "sqrt(2)"]]
//!
//! [cutoff]                     # optional, unit bump by default
//! radii = [1.0, 1.0]
//!
//! [[numeric_factors]]          # one per factor, estimate-decay only
//! kind = "gaussian"            # or "trig-poly" { cos, sin }, "constant-one"
//! center = 0.0
//! width = 1.0
//! ```

use std::path::Path;

use oscidecay_core::nondegeneracy::{ProjectionSystem, PART_VAR};
use oscidecay_core::poly::{parse_polynomial, parse_scalar, MultiPoly, VarSet};
use oscidecay_core::quadrature::{CutoffSpec, FactorSpec};
use oscidecay_core::scalar::QuadScalar;
use oscidecay_core::strategy::Functional;
use oscidecay_core::uniformity::SHIFT_PARAM;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const PRESETS: &[(&str, &str)] = &[
    ("lightcone6", include_str!("../presets/lightcone6.toml")),
    ("flex1", include_str!("../presets/flex1.toml")),
    ("flex2", include_str!("../presets/flex2.toml")),
    ("planar3", include_str!("../presets/planar3.toml")),
];

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Entry {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
struct CutoffTable {
    radii: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    name: Option<String>,
    variables: Vec<String>,
    radicand: Option<u32>,
    phase: String,
    degree_bound: Option<u32>,
    factors: Vec<Vec<Entry>>,
    cutoff: Option<CutoffTable>,
    numeric_factors: Option<Vec<FactorSpec>>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub sys: ProjectionSystem,
    pub phase: MultiPoly,
    pub degree_bound: u32,
    pub cutoff: CutoffSpec,
    pub numeric_factors: Option<Vec<FactorSpec>>,
    radicand: Option<u32>,
}

/// Problem echo in the machine report.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub name: String,
    pub variables: Vec<String>,
    pub phase: MultiPoly,
    pub degree_bound: u32,
    pub factors: Vec<Vec<QuadScalar>>,
}

fn check_radicand(field: &str, found: Option<u32>, declared: Option<u32>) -> Result<(), CliError> {
    match (found, declared) {
        (Some(k), Some(m)) if k != m => Err(CliError::Invalid(format!(
            "{field}: uses sqrt({k}) but the problem declares radicand {m}"
        ))),
        _ => Ok(()),
    }
}

impl Problem {
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
        Problem::parse(text, name)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Problem::parse(&text, &stem)
    }

    /// `fallback_name` is used when the file has no `name` key.
    pub fn parse(text: &str, fallback_name: &str) -> Result<Self, CliError> {
        let file: ProblemFile =
            toml::from_str(text).map_err(|e| CliError::Toml(e.to_string().trim_end().to_string()))?;
        for v in &file.variables {
            if v == PART_VAR || v == SHIFT_PARAM {
                return Err(CliError::Invalid(format!("variables: name {v} is reserved")));
            }
        }
        let vars = VarSet::new(file.variables.iter().cloned())
            .map_err(|e| CliError::Invalid(format!("variables: {e}")))?;
        let mut vectors = Vec::with_capacity(file.factors.len());
        for (j, row) in file.factors.iter().enumerate() {
            let mut v = Vec::with_capacity(row.len());
            for (i, entry) in row.iter().enumerate() {
                let field = format!("factors[{j}][{i}]");
                let c = match entry {
                    Entry::Int(n) => QuadScalar::from_int(*n),
                    Entry::Text(s) => {
                        parse_scalar(s).map_err(|source| CliError::Parse { field: field.clone(), source })?
                    }
                };
                check_radicand(&field, c.radicand(), file.radicand)?;
                v.push(c);
            }
            vectors.push(v);
        }
        let sys = ProjectionSystem::new(vars, vectors)?;
        let mut problem = Problem {
            name: file.name.unwrap_or_else(|| fallback_name.to_string()),
            phase: MultiPoly::zero(sys.vars()),
            sys,
            degree_bound: 0,
            cutoff: CutoffSpec::unit_bump(0),
            numeric_factors: file.numeric_factors,
            radicand: file.radicand,
        };
        problem.cutoff = match file.cutoff {
            Some(c) => CutoffSpec::BumpProduct { radii: c.radii },
            None => CutoffSpec::unit_bump(problem.sys.dim()),
        };
        problem.set_phase(&file.phase)?;
        problem.degree_bound = match file.degree_bound {
            Some(d) => d,
            None => problem.phase_degree(),
        };
        problem.check_degree()?;
        Ok(problem)
    }

    fn phase_degree(&self) -> u32 {
        self.phase.total_degree().unwrap_or(0).max(1)
    }

    fn check_degree(&self) -> Result<(), CliError> {
        if let Some(d) = self.phase.total_degree() {
            if d > self.degree_bound {
                return Err(CliError::Invalid(format!(
                    "degree_bound: phase has degree {d}, above the bound {}",
                    self.degree_bound
                )));
            }
        }
        Ok(())
    }

    fn set_phase(&mut self, text: &str) -> Result<(), CliError> {
        let phase = parse_polynomial(text, self.sys.vars()).map_err(|source| CliError::Parse {
            field: "phase".to_string(),
            source,
        })?;
        check_radicand("phase", phase.radicand(), self.radicand)?;
        self.phase = phase;
        Ok(())
    }

    /// Applies `--phase` and `--degree-bound`. A new phase without a new
    /// bound raises the bound to the phase degree when needed.
    pub fn with_overrides(mut self, phase: Option<&str>, degree_bound: Option<u32>) -> Result<Self, CliError> {
        if let Some(text) = phase {
            self.set_phase(text)?;
            self.degree_bound = self.degree_bound.max(self.phase_degree());
        }
        if let Some(d) = degree_bound {
            self.degree_bound = d;
        }
        self.check_degree()?;
        Ok(self)
    }

    pub fn functional(&self) -> Result<Functional, CliError> {
        Ok(Functional::new(self.sys.clone(), &self.phase, self.degree_bound)?.with_cutoff(self.cutoff.clone()))
    }

    pub fn summary(&self) -> ProblemSummary {
        ProblemSummary {
            name: self.name.clone(),
            variables: self.sys.vars().names().to_vec(),
            phase: self.phase.clone(),
            degree_bound: self.degree_bound,
            factors: self.sys.vectors().to_vec(),
        }
    }

    /// Parses a coordinate list such as `z,w`.
    pub fn coordinates(&self, names: &[String]) -> Result<Vec<String>, CliError> {
        for n in names {
            if !self.sys.vars().contains(n) {
                return Err(CliError::Invalid(format!("unknown coordinate {n}")));
            }
        }
        Ok(names.to_vec())
    }
}
