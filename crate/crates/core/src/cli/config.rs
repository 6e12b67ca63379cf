//! Run configuration: a TOML file, overridden field by field from the command line.

use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::lattice::{DyadicTime, LatticePoint, ModelSpec, ProblemSpec, Space, State, Value, MODEL_A, MODEL_B, PHASE_MODEL};
use crate::solver::RegSpec;
use crate::stochastic::NoiseSpec;

/// Environment variable consulted for `out_dir` when neither the file nor
/// the command line sets it.
pub const OUT_DIR_ENV: &str = "MSRG_OUT_DIR";

/// A built-in model name or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelChoice {
    Named(String),
    Inline(ModelSpec),
}

impl ModelChoice {
    pub fn resolve(&self) -> Result<ModelSpec, CliError> {
        match self {
            ModelChoice::Inline(m) => Ok(*m),
            ModelChoice::Named(name) => match name.to_ascii_lowercase().as_str() {
                "a" | "model_a" => Ok(MODEL_A),
                "b" | "model_b" => Ok(MODEL_B),
                "phase" | "circle" => Ok(PHASE_MODEL),
                other => Err(CliError::Config(format!("unknown model {other:?} (expected a, b or phase)"))),
            },
        }
    }
}

/// One initial or boundary value: `0`/`1` for bits; for phases a dyadic
/// fraction of the circle such as `"3/8"` or `"0.375"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(u64),
    Text(String),
}

impl Literal {
    pub fn to_value(&self, space: Space) -> Result<Value, CliError> {
        let bad = |why: &str| CliError::Config(format!("bad {} literal {self:?}: {why}", space.name()));
        match space {
            Space::Bit => {
                let v = match self {
                    Literal::Int(v) => *v,
                    Literal::Text(s) => s.trim().parse().map_err(|_| bad("expected 0 or 1"))?,
                };
                match v {
                    0 | 1 => Ok(Value::bit(v as u8)),
                    _ => Err(bad("expected 0 or 1")),
                }
            }
            Space::Phase => {
                let text = match self {
                    Literal::Int(v) => v.to_string(),
                    Literal::Text(s) => s.clone(),
                };
                let t: DyadicTime = text.parse().map_err(|_| bad("expected a dyadic fraction"))?;
                if t.level() > 64 {
                    return Err(bad("finer than 2^-64"));
                }
                let scaled: BigUint = t.numerator() << (64 - t.level());
                // values are taken mod 1
                Ok(Value::Phase(scaled.iter_u64_digits().next().unwrap_or(0)))
            }
        }
    }
}

fn literals(values: &[Literal], space: Space) -> Result<Vec<Value>, CliError> {
    values.iter().map(|l| l.to_value(space)).collect()
}

/// Fault injected by `verify`: the simulated model gets `f` flipped at one
/// entry while the RG operator keeps the configured model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fault {
    pub f_flip: [u8; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RgSection {
    /// Cantor grid depth of exported map tables.
    pub depth: usize,
    /// Stochastic mode: one table per seed plus an aggregate.
    pub stochastic: bool,
    /// Number of seeds in stochastic mode.
    pub seeds: u64,
}

impl Default for RgSection {
    fn default() -> Self {
        Self {
            depth: 8,
            stochastic: false,
            seeds: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    /// Tracked points as `(n, t)`; empty means every lattice point of the
    /// window at scales `1..=raster_scales`.
    pub points: Vec<(u32, String)>,
    /// Scales of the mean raster written when `points` is empty.
    pub raster_scales: u32,
    /// Leading levels dropped from each convergence fit.
    pub fit_skip: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            raster_scales: 8,
            fit_skip: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSection {
    /// Time of the limit-kernel check.
    pub time: String,
    pub components: usize,
}

impl Default for PhaseSection {
    fn default() -> Self {
        Self {
            time: "0.5".into(),
            components: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Largest level in the exhaustive RG-commutation and fractional-time runs.
    pub max_level: u32,
    /// Largest iteration count in the fixed-point run.
    pub max_iterations: u32,
    /// Random synthetic initial maps in the fixed-point run.
    pub random_maps: usize,
    /// Random problems per model in the staircase and fractional runs.
    pub random_problems: usize,
    /// Draws per two-sample test in the stochastic consistency run.
    pub samples: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            max_level: 6,
            max_iterations: 8,
            random_maps: 10,
            random_problems: 50,
            samples: 2000,
            fault: None,
        }
    }
}

/// Everything a command needs; persisted next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelChoice,
    pub initial: Vec<Literal>,
    pub boundary: Vec<Literal>,
    pub levels: Vec<u32>,
    pub reg: RegSpec,
    pub noise: Option<NoiseSpec>,
    pub seed: u64,
    pub samples: usize,
    pub horizon: String,
    pub out_dir: Option<PathBuf>,
    pub raster: bool,
    /// Also run the strong-solution analysis in `simulate`.
    pub strong: bool,
    pub rg: RgSection,
    pub mc: McSection,
    pub phase: PhaseSection,
    pub verify: VerifySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Named("a".into()),
            initial: Vec::new(),
            boundary: Vec::new(),
            levels: vec![8],
            reg: RegSpec::Cutoff,
            noise: None,
            seed: 1,
            samples: 10_000,
            horizon: "1".into(),
            out_dir: None,
            raster: true,
            strong: false,
            rg: RgSection::default(),
            mc: McSection::default(),
            phase: PhaseSection::default(),
            verify: VerifySection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot serialize config: {e}")))
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        self.model.resolve()
    }

    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        let model = self.model_spec()?;
        let space = model.space();
        let initial = State::new(literals(&self.initial, space)?, space.zero());
        let boundary = literals(&self.boundary, space)?;
        ProblemSpec::new(model, initial, boundary).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn horizon(&self) -> Result<DyadicTime, CliError> {
        self.horizon
            .parse()
            .map_err(|_| CliError::Config(format!("horizon {:?} is not a dyadic time", self.horizon)))
    }

    pub fn noise_spec(&self) -> Result<NoiseSpec, CliError> {
        let space = self.model_spec()?.space();
        let noise = match &self.noise {
            Some(n) => n.clone(),
            None if space == Space::Bit => NoiseSpec::default(),
            None => NoiseSpec::UniformCircle,
        };
        noise.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if noise.space() != space {
            return Err(CliError::Config(format!(
                "noise is {} but the model is {}",
                noise.space().name(),
                space.name()
            )));
        }
        Ok(noise)
    }

    /// Regularization levels, each at least 1.
    pub fn levels(&self) -> Result<Vec<u32>, CliError> {
        if self.levels.is_empty() {
            return Err(CliError::Config("no regularization level given".into()));
        }
        if let Some(l) = self.levels.iter().find(|&&l| l == 0) {
            return Err(CliError::Config(format!("regularization level {l} is invalid; levels start at 1")));
        }
        Ok(self.levels.clone())
    }

    pub fn reg_spec(&self) -> Result<RegSpec, CliError> {
        let space = self.model_spec()?.space();
        self.reg.validate(space).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(self.reg.clone())
    }

    pub fn mc_points(&self) -> Result<Vec<LatticePoint>, CliError> {
        self.mc
            .points
            .iter()
            .map(|(n, t)| {
                let time: DyadicTime = t
                    .parse()
                    .map_err(|_| CliError::Config(format!("point time {t:?} is not a dyadic time")))?;
                LatticePoint::new(*n, time).map_err(|e| CliError::Config(e.to_string()))
            })
            .collect()
    }

    pub fn phase_time(&self) -> Result<DyadicTime, CliError> {
        self.phase
            .time
            .parse()
            .map_err(|_| CliError::Config(format!("phase time {:?} is not a dyadic time", self.phase.time)))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("msrg-out"))
    }
}

/// Parses `"6..20"`, `"6..=20"`, `"3"` or `"1,2,4"`.
pub fn parse_levels(s: &str) -> Result<Vec<u32>, String> {
    let num = |x: &str| x.trim().parse::<u32>().map_err(|_| format!("bad level {x:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(format!("empty level range {s:?}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

/// Parses a comma-separated literal list such as `"0,1,0"` or `"1/4,3/8"`.
pub fn parse_literals(s: &str) -> Vec<Literal> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_or_else(|_| Literal::Text(x.to_string()), Literal::Int))
        .collect()
}

/// Parses `cutoff`, `unit`, `const:<literal>`.
pub fn parse_reg(s: &str) -> Result<RegSpec, String> {
    match s.trim() {
        "cutoff" => Ok(RegSpec::Cutoff),
        "unit" => Ok(RegSpec::unit()),
        other => {
            let lit = other
                .strip_prefix("const:")
                .ok_or_else(|| format!("unknown regularization {other:?} (cutoff, unit, const:<value>)"))?;
            let lit = parse_literals(lit).pop().ok_or("missing constant")?;
            // bit literals are 0/1; anything else is read as a phase
            let value = lit
                .to_value(Space::Bit)
                .or_else(|_| lit.to_value(Space::Phase))
                .map_err(|e| e.to_string())?;
            Ok(RegSpec::ConstAt { value })
        }
    }
}

/// Phase value as a fraction of the circle, for display.
pub fn phase_fraction(u: u64) -> String {
    if u == 0 {
        return "0".into();
    }
    let tz = u.trailing_zeros();
    format!("{}/2^{}", u >> tz, 64 - tz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_by_space() {
        assert_eq!(Literal::Int(1).to_value(Space::Bit).unwrap(), Value::ONE_BIT);
        assert!(Literal::Int(2).to_value(Space::Bit).is_err());
        assert_eq!(Literal::Text("3/8".into()).to_value(Space::Phase).unwrap(), Value::Phase(3 << 61));
        assert_eq!(Literal::Text("0.25".into()).to_value(Space::Phase).unwrap(), Value::Phase(1 << 62));
        assert_eq!(Literal::Int(1).to_value(Space::Phase).unwrap(), Value::Phase(0));
        assert!(Literal::Text("1/3".into()).to_value(Space::Phase).is_err());
    }

    #[test]
    fn level_syntax() {
        assert_eq!(parse_levels("6..9").unwrap(), vec![6, 7, 8, 9]);
        assert_eq!(parse_levels("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_levels("1,4").unwrap(), vec![1, 4]);
        assert!(parse_levels("5..2").is_err());
    }

    #[test]
    fn reg_syntax() {
        assert_eq!(parse_reg("unit").unwrap(), RegSpec::unit());
        assert_eq!(parse_reg("const:0").unwrap(), RegSpec::ConstAt { value: Value::ZERO_BIT });
        assert_eq!(parse_reg("const:1/2").unwrap(), RegSpec::ConstAt { value: Value::Phase(1 << 63) });
        assert!(parse_reg("weird").is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut c = RunConfig {
            model: ModelChoice::Named("b".into()),
            initial: vec![Literal::Int(0), Literal::Int(1)],
            noise: Some(NoiseSpec::default()),
            ..Default::default()
        };
        c.mc.points = vec![(5, "1.15625".into())];
        c.verify.fault = Some(Fault { f_flip: [1, 0] });
        let text = c.to_toml().unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn inline_models_parse() {
        let c: RunConfig = toml::from_str("model = { space = \"bit\", f = [0,0,1,0], g = [0,1,1,1] }").unwrap();
        assert_eq!(c.model_spec().unwrap(), MODEL_A);
        let c: RunConfig = toml::from_str("model = \"nope\"").unwrap();
        assert!(c.model_spec().is_err());
    }
}
