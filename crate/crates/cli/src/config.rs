use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Fully resolved run configuration; `summary.json` stores it under `config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub cost: CostConfig,
    pub r1: Option<R1Config>,
    pub solver: SolverConfig,
    pub sim: SimSection,
    pub sweep: SweepSection,
    pub welfare: WelfareSection,
    pub mechanism: MechanismSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelConfig {
    Discrete(DiscreteSection),
    Continuous(ContinuousSection),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSection {
    /// Number of periods; `None` is the infinite horizon.
    pub horizon: Option<usize>,
    pub discount: f64,
    pub er1: f64,
    pub emax: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousSection {
    pub r: f64,
    pub lambda: f64,
    pub z: f64,
    pub s: f64,
    pub assume_large_cbar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostConfig {
    Uniform { cbar: f64 },
    /// Two-column `x,H` CSV; the path is absolute once resolved.
    Tabulated { table: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum R1Config {
    Uniform { upper: f64 },
    Rho { rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid_step: f64,
    pub export_points: usize,
    /// Rows of the bonus schedule written for an infinite horizon.
    pub periods: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    SkipAhead,
    PerPeriod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub alpha0: f64,
    pub threads: Option<usize>,
    pub mode: SimMode,
    /// Paths written to `trace.csv`; 0 disables the trace.
    pub trace_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub r2_min: f64,
    pub r2_max: f64,
    pub r2_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelfareSection {
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismSection {
    pub alpha_points: usize,
    pub cost_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_step: 1e-4,
            export_points: bandit_bonus::continuous::EXPORT_POINTS,
            periods: 50,
        }
    }
}

impl Default for SimSection {
    fn default() -> Self {
        let d = bandit_bonus::sim::SimConfig::default();
        Self {
            dt: d.dt,
            horizon: d.horizon,
            n_paths: d.n_paths,
            seed: d.master_seed,
            alpha0: d.alpha0,
            threads: None,
            mode: SimMode::SkipAhead,
            trace_paths: 0,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { r2_min: 1.1, r2_max: 4.0, r2_points: 291 }
    }
}

impl Default for WelfareSection {
    fn default() -> Self {
        Self { points: 999 }
    }
}

impl Default for MechanismSection {
    fn default() -> Self {
        Self { alpha_points: 99, cost_points: 21 }
    }
}

/// Typed access to one INI section; every key must be consumed.
struct Section {
    name: String,
    keys: BTreeMap<String, String>,
}

impl Section {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.keys.remove(key) {
            None => Ok(None),
            Some(raw) => raw.trim().parse().map(Some).map_err(|_| {
                CliError::Config(format!("[{}] {key} = {raw:?} is not a valid value", self.name))
            }),
        }
    }

    fn need<T: FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        self.take(key)?
            .ok_or_else(|| CliError::Config(format!("[{}] is missing required key {key}", self.name)))
    }

    fn finish(self) -> Result<(), CliError> {
        match self.keys.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Config(format!("[{}] has unknown key {k}", self.name))),
        }
    }
}

const SECTIONS: [&str; 10] = [
    "discrete", "continuous", "cost", "r1", "solver", "sim", "sweep", "welfare", "mechanism", "output",
];

impl RunConfig {
    /// Loads an INI file, or a JSON file holding either a bare configuration
    /// or a `summary.json` with a `config` member.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_ini(&text, &base)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        let cfg = match value.get("config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(cfg).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    /// Parses INI text; relative table paths resolve against `base`.
    pub fn from_ini(text: &str, base: &Path) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(format!("invalid INI: {e}")))?;
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if props.iter().next().is_some() {
                    return Err(CliError::Config("keys outside any section".into()));
                }
                continue;
            };
            let name = name.to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(CliError::Config(format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(CliError::Config(format!("section [{name}] appears twice")));
            }
            let keys = props.iter().map(|(k, v)| (k.to_ascii_lowercase(), v.to_string())).collect();
            sections.insert(name.clone(), Section { name, keys });
        }
        let mut section = |name: &str| {
            sections.remove(name).unwrap_or(Section {
                name: name.into(),
                keys: BTreeMap::new(),
            })
        };

        let mut r1_sec = section("r1");
        let r1 = match r1_sec.take::<String>("law")?.as_deref() {
            None => None,
            Some("uniform") => Some(R1Config::Uniform { upper: r1_sec.need("upper")? }),
            Some("rho") => Some(R1Config::Rho { rho: r1_sec.need("rho")? }),
            Some(other) => return Err(CliError::Config(format!("[r1] unknown law {other:?}"))),
        };
        r1_sec.finish()?;

        let mut d = section("discrete");
        let mut c = section("continuous");
        let model = match (d.keys.is_empty(), c.keys.is_empty()) {
            (false, true) => {
                let horizon = match d.need::<String>("horizon")?.trim() {
                    "inf" | "infinite" => None,
                    t => Some(t.parse::<usize>().map_err(|_| {
                        CliError::Config(format!("[discrete] horizon = {t:?} must be a positive integer or inf"))
                    })?),
                };
                let law = r1.as_ref().map(r1_law);
                let er1 = match (d.take("er1")?, &law) {
                    (Some(v), _) => v,
                    (None, Some(l)) => l.mean(),
                    (None, None) => return Err(CliError::Config("[discrete] needs er1 or an [r1] law".into())),
                };
                let r2: f64 = d.need("r2")?;
                let emax = match (d.take("emax")?, &law) {
                    (Some(v), _) => v,
                    (None, Some(l)) => bandit_bonus::discrete::emax_oracle(l, r2).map_err(CliError::from)?,
                    (None, None) => return Err(CliError::Config("[discrete] needs emax or an [r1] law".into())),
                };
                let m = DiscreteSection { horizon, discount: d.need("discount")?, er1, emax, r2 };
                d.finish()?;
                ModelConfig::Discrete(m)
            }
            (true, false) => {
                let r = c.need("r")?;
                let lambda = c.need("lambda")?;
                let z = c.need("z")?;
                let s = match (c.take::<f64>("s")?, c.take::<f64>("s_ratio")?) {
                    (Some(s), None) => s,
                    (None, Some(q)) => q * lambda * z,
                    _ => return Err(CliError::Config("[continuous] needs exactly one of s, s_ratio".into())),
                };
                let assume_large_cbar = c.take("assume_large_cbar")?.unwrap_or(false);
                c.finish()?;
                ModelConfig::Continuous(ContinuousSection { r, lambda, z, s, assume_large_cbar })
            }
            _ => {
                return Err(CliError::Config(
                    "exactly one model section, [discrete] or [continuous], is required".into(),
                ))
            }
        };

        let mut cs = section("cost");
        let cost = match cs.take::<String>("kind")?.as_deref().unwrap_or("uniform") {
            "uniform" => CostConfig::Uniform { cbar: cs.need("cbar")? },
            "tabulated" => {
                let table: PathBuf = cs.need("table")?;
                let table = if table.is_absolute() { table } else { base.join(table) };
                let table = std::path::absolute(&table).unwrap_or(table);
                CostConfig::Tabulated { table }
            }
            other => return Err(CliError::Config(format!("[cost] unknown kind {other:?}"))),
        };
        cs.finish()?;

        let mut s = section("solver");
        let dflt = SolverConfig::default();
        let solver = SolverConfig {
            grid_step: s.take("grid_step")?.unwrap_or(dflt.grid_step),
            export_points: s.take("export_points")?.unwrap_or(dflt.export_points),
            periods: s.take("periods")?.unwrap_or(dflt.periods),
        };
        s.finish()?;

        let mut s = section("sim");
        let dflt = SimSection::default();
        let mode = match s.take::<String>("mode")?.as_deref() {
            None | Some("skip-ahead") => SimMode::SkipAhead,
            Some("per-period") => SimMode::PerPeriod,
            Some(other) => return Err(CliError::Config(format!("[sim] unknown mode {other:?}"))),
        };
        let sim = SimSection {
            dt: s.take("dt")?.unwrap_or(dflt.dt),
            horizon: s.take("horizon")?.unwrap_or(dflt.horizon),
            n_paths: s.take("n_paths")?.unwrap_or(dflt.n_paths),
            seed: s.take("seed")?.unwrap_or(dflt.seed),
            alpha0: s.take("alpha0")?.unwrap_or(dflt.alpha0),
            threads: s.take("threads")?,
            mode,
            trace_paths: s.take("trace_paths")?.unwrap_or(0),
        };
        s.finish()?;

        let mut s = section("sweep");
        let dflt = SweepSection::default();
        let sweep = SweepSection {
            r2_min: s.take("r2_min")?.unwrap_or(dflt.r2_min),
            r2_max: s.take("r2_max")?.unwrap_or(dflt.r2_max),
            r2_points: s.take("r2_points")?.unwrap_or(dflt.r2_points),
        };
        s.finish()?;

        let mut s = section("welfare");
        let welfare = WelfareSection { points: s.take("points")?.unwrap_or(WelfareSection::default().points) };
        s.finish()?;

        let mut s = section("mechanism");
        let dflt = MechanismSection::default();
        let mechanism = MechanismSection {
            alpha_points: s.take("alpha_points")?.unwrap_or(dflt.alpha_points),
            cost_points: s.take("cost_points")?.unwrap_or(dflt.cost_points),
        };
        s.finish()?;

        let mut s = section("output");
        let output = OutputSection { directory: s.take("directory")?.unwrap_or_else(|| PathBuf::from("out")) };
        s.finish()?;

        Ok(Self { model, cost, r1, solver, sim, sweep, welfare, mechanism, output })
    }

    /// Range checks on the run controls; model assumptions are checked by the solvers.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.solver.grid_step > 0.0 && self.solver.grid_step < 0.1) {
            return bad(format!("[solver] grid_step = {} must lie in (0, 0.1)", self.solver.grid_step));
        }
        if self.solver.export_points < 2 || self.solver.periods == 0 {
            return bad("[solver] export_points must be at least 2 and periods positive".into());
        }
        if self.sweep.r2_points < 2 || !(self.sweep.r2_min < self.sweep.r2_max) || self.sweep.r2_min < 0.0 {
            return bad("[sweep] needs 0 <= r2_min < r2_max and r2_points >= 2".into());
        }
        if self.welfare.points == 0 || self.mechanism.alpha_points == 0 || self.mechanism.cost_points < 2 {
            return bad("[welfare] points, [mechanism] alpha_points and cost_points must be positive".into());
        }
        if self.sim.threads == Some(0) {
            return bad("[sim] threads must be positive".into());
        }
        if let ModelConfig::Discrete(d) = &self.model {
            if d.horizon == Some(0) {
                return bad("[discrete] horizon must be positive".into());
            }
        }
        Ok(())
    }

    /// Applies the thread-count override from the environment.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(raw) = std::env::var(crate::THREADS_ENV) {
            let n: usize = raw
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Config(format!("{} = {raw:?} must be a positive integer", crate::THREADS_ENV)))?;
            self.sim.threads = Some(n);
        }
        Ok(())
    }

    pub fn costs(&self) -> Result<bandit_bonus::CostDistribution<f64>, CliError> {
        Ok(match &self.cost {
            CostConfig::Uniform { cbar } => bandit_bonus::CostDistribution::uniform(*cbar)?,
            CostConfig::Tabulated { table } => bandit_bonus::CostDistribution::load_csv(table)?,
        })
    }

    pub fn r1_law(&self) -> Option<bandit_bonus::discrete::R1Law> {
        self.r1.as_ref().map(r1_law)
    }
}

fn r1_law(c: &R1Config) -> bandit_bonus::discrete::R1Law {
    use bandit_bonus::discrete::R1Law;
    match *c {
        R1Config::Uniform { upper } => R1Law::UniformR1 { upper },
        R1Config::Rho { rho } => R1Law::RhoMix { rho },
    }
}
