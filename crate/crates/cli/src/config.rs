//! Experiment configuration: a flat JSON object tagged with a schema key.
//!
//! Every problem is reported against the key that caused it, so keys are
//! decoded one at a time rather than through a single derived struct.

use std::path::{Path, PathBuf};

use alexandrov_core::hypersurface::{CurvatureOperator, Harmonic, RadialSurface, SurfaceFamily};
use alexandrov_core::stability::SweepFamily;
use alexandrov_core::{ModelKind, SpaceForm, Tolerances};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub const SCHEMA: &str = "alexandrov-experiment/1";

const KEYS: [&str; 17] = [
    "schema",
    "models",
    "dim",
    "family",
    "radius",
    "harmonic",
    "eps",
    "operator",
    "grid_levels",
    "directions",
    "radial_nodes",
    "measure_defects",
    "tolerances",
    "lemmas",
    "lemma_grid_level",
    "output_dir",
    "seed",
];

/// Surfaces of one experiment: a single geodesic sphere or a one-parameter
/// family swept over `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Sphere { radius: f64 },
    Sweep { family: SweepFamily },
}

impl FamilySpec {
    pub fn name(&self) -> String {
        match self {
            FamilySpec::Sphere { radius } => format!("sphere(r={radius})"),
            FamilySpec::Sweep { family } => family.name(),
        }
    }

    pub fn surface_family(&self, dim: usize, eps: f64) -> SurfaceFamily {
        match self {
            FamilySpec::Sphere { radius } => SurfaceFamily::GeodesicSphere { radius: *radius },
            FamilySpec::Sweep { family } => family.instance(dim, eps),
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, FamilySpec::Sphere { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub models: Vec<ModelKind>,
    pub dim: usize,
    pub family: FamilySpec,
    /// Sweep parameters; a single `0` for a sphere.
    pub eps: Vec<f64>,
    #[serde(serialize_with = "as_string")]
    pub operator: CurvatureOperator,
    /// Primary resolution first; a second level reruns every surface for the
    /// convergence check.
    pub grid_levels: Vec<usize>,
    pub directions: usize,
    pub radial_nodes: usize,
    pub measure_defects: bool,
    pub tolerances: Tolerances,
    pub lemmas: bool,
    pub lemma_grid_level: usize,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// Multiplier applied to every tolerance, pipeline and summary gates
    /// alike.
    pub tol_scale: f64,
}

fn as_string<S: serde::Serializer>(op: &CurvatureOperator, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&op.to_string())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("not valid JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(CliError::Config("the document must be a JSON object".into()));
        };
        Self::from_map(&map)
    }

    fn from_map(map: &Map<String, Value>) -> Result<Self> {
        if let Some(key) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::key(key, format!("unknown key (expected one of {})", KEYS.join(", "))));
        }
        let schema: String = required(map, "schema")?;
        if schema != SCHEMA {
            return Err(CliError::key("schema", format!("unsupported schema `{schema}`, expected `{SCHEMA}`")));
        }

        let names: Vec<String> = required(map, "models")?;
        if names.is_empty() {
            return Err(CliError::key("models", "at least one model is required"));
        }
        let models = names
            .iter()
            .map(|m| m.parse::<ModelKind>().map_err(|e| CliError::key("models", e.to_string())))
            .collect::<Result<Vec<_>>>()?;

        let dim: usize = optional(map, "dim")?.unwrap_or(3);
        if !(2..=3).contains(&dim) {
            return Err(CliError::key("dim", format!("surfaces are supported for n = 2 or 3, got {dim}")));
        }

        let family_name: String = required(map, "family")?;
        let radius: Option<f64> = optional(map, "radius")?;
        if let Some(r) = radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(CliError::key("radius", format!("must be positive, got {r}")));
            }
        }
        let harmonic: Option<String> = optional(map, "harmonic")?;
        let eps: Option<Vec<f64>> = optional(map, "eps")?;
        let (family, eps) = match family_name.as_str() {
            "sphere" => {
                if harmonic.is_some() {
                    return Err(CliError::key("harmonic", "only perturbed_sphere takes a harmonic"));
                }
                if eps.as_ref().is_some_and(|e| !e.is_empty()) {
                    return Err(CliError::key("eps", "a sphere has no sweep parameter"));
                }
                (FamilySpec::Sphere { radius: radius.unwrap_or(0.7) }, vec![0.0])
            }
            "spheroid" | "perturbed_sphere" => {
                let eps = eps.ok_or_else(|| CliError::key("eps", "required for a swept family"))?;
                if eps.is_empty() {
                    return Err(CliError::key("eps", "needs at least one value"));
                }
                if let Some(e) = eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
                    return Err(CliError::key("eps", format!("values must be positive, got {e}")));
                }
                let family = if family_name == "spheroid" {
                    if radius.is_some() {
                        return Err(CliError::key("radius", "the spheroid family has unit minor axes"));
                    }
                    if harmonic.is_some() {
                        return Err(CliError::key("harmonic", "only perturbed_sphere takes a harmonic"));
                    }
                    SweepFamily::Spheroid
                } else {
                    let harmonic = match harmonic {
                        Some(h) => h.parse::<Harmonic>().map_err(|e| CliError::key("harmonic", e.to_string()))?,
                        None => Harmonic::Zonal(2),
                    };
                    SweepFamily::PerturbedSphere {
                        radius: radius.unwrap_or(0.7),
                        harmonic,
                    }
                };
                (FamilySpec::Sweep { family }, eps)
            }
            other => {
                return Err(CliError::key(
                    "family",
                    format!("unknown family `{other}` (expected sphere, spheroid or perturbed_sphere)"),
                ))
            }
        };

        let operator_name: String = optional(map, "operator")?.unwrap_or_else(|| "mean".into());
        let operator = parse_operator(&operator_name, dim).map_err(|m| CliError::key("operator", m))?;

        let grid_levels: Vec<usize> = optional(map, "grid_levels")?.unwrap_or_else(|| vec![5]);
        if grid_levels.is_empty() || grid_levels.len() > 2 {
            return Err(CliError::key("grid_levels", "give one level, or two for a convergence rerun"));
        }
        if let Some(l) = grid_levels.iter().find(|l| !(1..=7).contains(*l)) {
            return Err(CliError::key("grid_levels", format!("levels must lie in 1..=7, got {l}")));
        }
        let directions: usize = optional(map, "directions")?.unwrap_or(50);
        if directions < dim {
            return Err(CliError::key("directions", format!("need at least {dim} directions")));
        }
        let radial_nodes: usize = optional(map, "radial_nodes")?.unwrap_or(64);
        if radial_nodes < 4 {
            return Err(CliError::key("radial_nodes", "need at least 4 radial nodes"));
        }
        let measure_defects: bool = optional(map, "measure_defects")?.unwrap_or(true);
        let tolerances: Tolerances = optional(map, "tolerances")?.unwrap_or_default();
        let t = &tolerances;
        let positive = [t.algebraic, t.ode, t.hemisphere_guard, t.containment_rel, t.position_rel, t.contains_rel];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(CliError::key("tolerances", "every tolerance must be positive"));
        }
        let lemmas: bool = optional(map, "lemmas")?.unwrap_or(true);
        let lemma_grid_level: usize = optional(map, "lemma_grid_level")?.unwrap_or(4);
        // Coarser grids leave no sample pairs inside the normal-stability range.
        if !(4..=6).contains(&lemma_grid_level) {
            return Err(CliError::key("lemma_grid_level", format!("must lie in 4..=6, got {lemma_grid_level}")));
        }
        let output_dir: Option<PathBuf> = optional(map, "output_dir")?;
        let seed: u64 = optional(map, "seed")?.unwrap_or(0);

        let config = Self {
            models,
            dim,
            family,
            eps,
            operator,
            grid_levels,
            directions,
            radial_nodes,
            measure_defects,
            tolerances,
            lemmas,
            lemma_grid_level,
            output_dir,
            seed,
            tol_scale: 1.0,
        };
        config.check_surfaces()?;
        Ok(config)
    }

    /// Every (model, eps) surface must be constructible.
    pub fn check_surfaces(&self) -> Result<()> {
        for (model, eps) in self.cases() {
            if let Err(e) = RadialSurface::centered(model, self.family.surface_family(self.dim, eps)) {
                return Err(CliError::key(
                    "family",
                    format!("{} with eps = {eps} is not valid in the {} model: {e}", self.family.name(), model.kind),
                ));
            }
        }
        Ok(())
    }

    pub fn space_forms(&self) -> Vec<SpaceForm> {
        self.models
            .iter()
            .map(|k| SpaceForm::new(*k, self.dim).expect("dimension validated"))
            .collect()
    }

    /// `(model, eps)` pairs in output order.
    pub fn cases(&self) -> Vec<(SpaceForm, f64)> {
        self.space_forms()
            .into_iter()
            .flat_map(|m| self.eps.iter().map(move |e| (m, *e)))
            .collect()
    }

    pub fn scaled_tolerances(&self) -> Tolerances {
        self.tolerances.scaled(self.tol_scale)
    }
}

pub fn parse_operator(name: &str, dim: usize) -> std::result::Result<CurvatureOperator, String> {
    let op: CurvatureOperator = name.parse().map_err(|e: alexandrov_core::Error| e.to_string())?;
    match op {
        CurvatureOperator::Custom(_) => Err("custom operators cannot be configured from a file".into()),
        CurvatureOperator::SymmetricRoot(r) if r > dim - 1 => Err(format!("hr:{r} needs at least {} principal curvatures", r)),
        op => Ok(op),
    }
}

fn decode<T: DeserializeOwned>(key: &str, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::key(key, e.to_string()))
}

fn required<T: DeserializeOwned>(map: &Map<String, Value>, key: &str) -> Result<T> {
    map.get(key)
        .ok_or_else(|| CliError::key(key, "missing"))
        .and_then(|v| decode(key, v))
}

fn optional<T: DeserializeOwned>(map: &Map<String, Value>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => decode(key, v).map(Some),
    }
}
