use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::currents::Sign;
use crate::dynamics::{Direction, Mode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Cohomology,
    Surface,
    Orbit,
    Lyapunov,
    Saddles,
    Green,
    Holder,
    Invariance,
    Contract,
}

/// Where the surface comes from: a coefficient file, or `random_wehler(seed, bound)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub seed: u64,
    pub bound: i64,
    pub screen_samples: usize,
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        Self { file: None, seed: 7, bound: 5, screen_samples: crate::surface::DEFAULT_SCREEN_SAMPLES }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CohomologyParams {
    pub order: String,
    pub inverse: bool,
}

impl Default for CohomologyParams {
    fn default() -> Self {
        Self { order: "123".into(), inverse: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceParams {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitParams {
    pub n: usize,
    pub mode: Mode,
    pub direction: Direction,
    /// Exact mode starts from this entry of the rational-point search.
    pub point_index: usize,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self { n: 50, mode: Mode::Float, direction: Direction::Forward, point_index: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovParams {
    pub n: usize,
    pub seeds: usize,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self { n: 2000, seeds: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaddleParams {
    pub period: usize,
    pub seeds: usize,
    pub tol: f64,
    pub lyapunov_n: usize,
}

impl Default for SaddleParams {
    fn default() -> Self {
        Self { period: 2, seeds: 200, tol: 1e-10, lyapunov_n: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenParams {
    #[serde(rename = "N")]
    pub n_terms: usize,
    pub tol: f64,
    /// `a:b:n`, a real `n × n` grid over `[a, b]²` in the affine `(x, y)` chart.
    pub grid: String,
    pub sign: Sign,
}

impl Default for GreenParams {
    fn default() -> Self {
        Self { n_terms: 12, tol: 1e-10, grid: "-1:1:9".into(), sign: Sign::Plus }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderParams {
    pub scales: Vec<f64>,
    pub points: usize,
    /// Base points at saddles of this period instead of random points.
    pub saddle_period: Option<usize>,
    pub sign: Sign,
    #[serde(rename = "N")]
    pub n_terms: usize,
}

impl Default for HolderParams {
    fn default() -> Self {
        Self {
            scales: crate::currents::dyadic_scales(4, 14),
            points: 64,
            saddle_period: None,
            sign: Sign::Plus,
            n_terms: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvarianceParams {
    /// A test-function expression, or `panel` for the fixed panel.
    pub u: String,
    pub mc: usize,
    pub centered: bool,
}

impl Default for InvarianceParams {
    fn default() -> Self {
        Self { u: "panel".into(), mc: 100_000, centered: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContractParams {
    pub input: PathBuf,
    pub rmax: u32,
}

impl Default for ContractParams {
    fn default() -> Self {
        Self { input: PathBuf::new(), rmax: 3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Cohomology(CohomologyParams),
    Surface(SurfaceParams),
    Orbit(OrbitParams),
    Lyapunov(LyapunovParams),
    Saddles(SaddleParams),
    Green(GreenParams),
    Holder(HolderParams),
    Invariance(InvarianceParams),
    Contract(ContractParams),
}

impl Command {
    pub fn subcommand(&self) -> Subcommand {
        match self {
            Command::Cohomology(_) => Subcommand::Cohomology,
            Command::Surface(_) => Subcommand::Surface,
            Command::Orbit(_) => Subcommand::Orbit,
            Command::Lyapunov(_) => Subcommand::Lyapunov,
            Command::Saddles(_) => Subcommand::Saddles,
            Command::Green(_) => Subcommand::Green,
            Command::Holder(_) => Subcommand::Holder,
            Command::Invariance(_) => Subcommand::Invariance,
            Command::Contract(_) => Subcommand::Contract,
        }
    }

    fn params_value(&self) -> Value {
        let v = match self {
            Command::Cohomology(p) => serde_json::to_value(p),
            Command::Surface(p) => serde_json::to_value(p),
            Command::Orbit(p) => serde_json::to_value(p),
            Command::Lyapunov(p) => serde_json::to_value(p),
            Command::Saddles(p) => serde_json::to_value(p),
            Command::Green(p) => serde_json::to_value(p),
            Command::Holder(p) => serde_json::to_value(p),
            Command::Invariance(p) => serde_json::to_value(p),
            Command::Contract(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize")
    }

    fn from_value(sub: Subcommand, params: Value) -> Result<Self, serde_json::Error> {
        use serde_json::from_value as fv;
        Ok(match sub {
            Subcommand::Cohomology => Command::Cohomology(fv(params)?),
            Subcommand::Surface => Command::Surface(fv(params)?),
            Subcommand::Orbit => Command::Orbit(fv(params)?),
            Subcommand::Lyapunov => Command::Lyapunov(fv(params)?),
            Subcommand::Saddles => Command::Saddles(fv(params)?),
            Subcommand::Green => Command::Green(fv(params)?),
            Subcommand::Holder => Command::Holder(fv(params)?),
            Subcommand::Invariance => Command::Invariance(fv(params)?),
            Subcommand::Contract => Command::Contract(fv(params)?),
        })
    }
}

/// A complete, reproducible description of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub surface: SurfaceSpec,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    subcommand: Subcommand,
    #[serde(default)]
    params: Option<Value>,
    #[serde(default)]
    surface: SurfaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self { command, surface: SurfaceSpec::default(), output: None, seed: 0 }
    }

    /// Parses a JSON config, filling defaults and rejecting unknown keys.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let params = raw.params.unwrap_or_else(|| Value::Object(Default::default()));
        let command = Command::from_value(raw.subcommand, params)
            .map_err(|e| CliError::Config(format!("params: {e}")))?;
        let cfg = Self { command, surface: raw.surface, output: raw.output, seed: raw.seed };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Normalized JSON: every parameter of the active subcommand written out.
    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            subcommand: self.command.subcommand(),
            params: Some(self.command.params_value()),
            surface: self.surface.clone(),
            output: self.output.clone(),
            seed: self.seed,
        };
        serde_json::to_string_pretty(&raw).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.surface.file.is_none() && self.surface.bound < 1 {
            return bad(format!("surface.bound must be positive, got {}", self.surface.bound));
        }
        match &self.command {
            Command::Lyapunov(p) if p.n < 10 || p.seeds == 0 => bad("lyapunov needs n >= 10 and seeds >= 1".into()),
            Command::Saddles(p) if p.period == 0 || !(p.tol > 0.0) => {
                bad("saddles needs period >= 1 and tol > 0".into())
            }
            Command::Green(p) => parse_grid(&p.grid).map(|_| ()),
            Command::Holder(p) if p.points == 0 => bad("holder needs points >= 1".into()),
            Command::Invariance(p) if p.mc == 0 => bad("invariance needs mc >= 1".into()),
            Command::Contract(p) if p.input.as_os_str().is_empty() => bad("contract needs an input file".into()),
            _ => Ok(()),
        }
    }
}

/// `a:b:n` into `n` evenly spaced values from `a` to `b`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let err = || CliError::Config(format!("grid '{spec}' is not of the form a:b:n"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(err());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| err())?;
    let n: usize = parts[2].trim().parse().map_err(|_| err())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(err());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = RunConfig::from_json(r#"{"subcommand": "green"}"#).unwrap();
        let Command::Green(g) = &c.command else { panic!() };
        assert_eq!(g.n_terms, 12);
        assert_eq!(g.tol, 1e-10);
        let again = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_json(), c.to_json());
    }

    #[test]
    fn rejects_missing_subcommand_and_unknown_keys() {
        assert!(matches!(RunConfig::from_json(r#"{"seed": 1}"#), Err(CliError::Config(_))));
        let e = RunConfig::from_json(r#"{"subcommand": "green", "params": {"n": 3}}"#).unwrap_err();
        assert!(e.to_string().contains("unknown field `n`"), "{e}");
        let e = RunConfig::from_json("{\"subcommand\": \"orbit\",\n \"colour\": 1}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:1:2").is_err());
    }
}
