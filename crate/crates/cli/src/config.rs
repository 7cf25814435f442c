use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use maus_core::HalfInteger;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    IdealFig3,
    ProtocolFig4,
    BreakevenFig5a,
    BreakevenFig5b,
    PulseFidelity,
    Spectrum,
    Schedule,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::IdealFig3 => "ideal-fig3",
            Self::ProtocolFig4 => "protocol-fig4",
            Self::BreakevenFig5a => "breakeven-fig5a",
            Self::BreakevenFig5b => "breakeven-fig5b",
            Self::PulseFidelity => "pulse-fidelity",
            Self::Spectrum => "spectrum",
            Self::Schedule => "schedule",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Log-spaced grid over `Γ_n t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl TGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.log10(), self.max.log10());
        (0..self.count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (self.count - 1) as f64)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    pub quantize_wait: bool,
    pub encoding_noise: bool,
    pub minimal_qudit: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Self { quantize_wait: true, encoding_noise: false, minimal_qudit: true }
    }
}

impl Flags {
    pub fn set(&mut self, spec: &str) -> Result<(), CliError> {
        let (key, value) =
            spec.split_once('=').ok_or_else(|| CliError::Config(format!("--flag {spec:?}: expected key=on|off")))?;
        let on = match value {
            "on" => true,
            "off" => false,
            _ => return Err(CliError::Config(format!("--flag {key}: value must be on or off, got {value:?}"))),
        };
        match key {
            "quantize-wait" => self.quantize_wait = on,
            "encoding-noise" => self.encoding_noise = on,
            "minimal-qudit" => self.minimal_qudit = on,
            _ => return Err(CliError::Config(format!("--flag: unknown flag {key:?}"))),
        }
        Ok(())
    }

    /// File-name tag listing flags that differ from the defaults.
    pub fn suffix(&self) -> String {
        let d = Self::default();
        let mut parts = vec![];
        let onoff = |b: bool| if b { "on" } else { "off" };
        if self.quantize_wait != d.quantize_wait {
            parts.push(format!("quantize-wait-{}", onoff(self.quantize_wait)));
        }
        if self.encoding_noise != d.encoding_noise {
            parts.push(format!("encoding-noise-{}", onoff(self.encoding_noise)));
        }
        if self.minimal_qudit != d.minimal_qudit {
            parts.push(format!("minimal-qudit-{}", onoff(self.minimal_qudit)));
        }
        parts.join(".")
    }
}

/// Config file contents; every field is optional and falls back to the
/// experiment's defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<Experiment>,
    pub spins: Option<Vec<HalfInteger>>,
    pub gamma_n: Option<Vec<f64>>,
    pub gamma_e: Option<Vec<f64>>,
    pub t_grid: Option<TGrid>,
    pub seed: Option<u64>,
    pub flags: Option<FlagsPatch>,
    pub q_over_omega: Option<f64>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub species: Option<String>,
    pub presets: Option<PathBuf>,
    pub bz: Option<f64>,
    pub wait: Option<f64>,
    pub inject_failures: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagsPatch {
    pub quantize_wait: Option<bool>,
    pub encoding_noise: Option<bool>,
    pub minimal_qudit: Option<bool>,
}

impl RawConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved sweep description. Serialized form feeds the config hash.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub spins: Vec<HalfInteger>,
    pub gamma_n: Vec<f64>,
    pub gamma_e: Vec<f64>,
    pub t_grid: TGrid,
    pub seed: u64,
    pub flags: Flags,
    pub q_over_omega: f64,
    pub species: String,
    pub bz: Option<f64>,
    pub wait: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inject_failures: Vec<usize>,
    #[serde(skip)]
    pub presets: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Command-line values that replace config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub spins: Option<Vec<String>>,
    pub gamma_n: Option<Vec<f64>>,
    pub gamma_e: Option<Vec<f64>>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_count: Option<usize>,
    pub threads: Option<usize>,
    pub flags: Vec<String>,
    pub out: Option<PathBuf>,
}

fn log_list(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    TGrid { min: lo, max: hi, count }.points()
}

fn spins(twice: &[i32]) -> Vec<HalfInteger> {
    twice.iter().map(|&t| HalfInteger::from_twice(t)).collect()
}

impl SweepConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            spins: spins(&[3]),
            gamma_n: vec![1e-4],
            gamma_e: vec![5e-4],
            t_grid: TGrid { min: 1e-4, max: 1.0, count: 25 },
            seed: 0,
            flags: Flags::default(),
            q_over_omega: 50.0,
            species: "arsenic".into(),
            bz: None,
            wait: 1.0,
            inject_failures: vec![],
            presets: None,
            threads: None,
            output: None,
        };
        match experiment {
            Experiment::IdealFig3 => Self { spins: spins(&[3, 5, 7]), t_grid: TGrid { min: 1e-4, max: 1.0, count: 40 }, ..base },
            Experiment::BreakevenFig5a => Self {
                gamma_e: log_list(5e-4, 5.0, 9),
                t_grid: TGrid { min: 1e-4, max: 1.0, count: 17 },
                ..base
            },
            Experiment::BreakevenFig5b => Self {
                gamma_n: log_list(1e-4, 1e-2, 5),
                t_grid: TGrid { min: 1e-4, max: 1.0, count: 17 },
                ..base
            },
            Experiment::PulseFidelity => {
                Self { gamma_n: log_list(1e-4, 1e-2, 5), gamma_e: log_list(1e-4, 1e-2, 5), ..base }
            }
            _ => base,
        }
    }

    /// Applies file values, then command-line overrides, then validates.
    pub fn resolve(experiment: Experiment, raw: RawConfig, over: Overrides) -> Result<Self, CliError> {
        if let Some(e) = raw.experiment {
            if e != experiment {
                return Err(CliError::Config(format!("experiment: config is for {e}, command line asks for {experiment}")));
            }
        }
        let mut cfg = Self::defaults(experiment);
        if let Some(v) = raw.spins {
            cfg.spins = v;
        }
        if let Some(v) = raw.gamma_n {
            cfg.gamma_n = v;
        }
        if let Some(v) = raw.gamma_e {
            cfg.gamma_e = v;
        }
        if let Some(v) = raw.t_grid {
            cfg.t_grid = v;
        }
        if let Some(v) = raw.seed {
            cfg.seed = v;
        }
        if let Some(p) = raw.flags {
            cfg.flags.quantize_wait = p.quantize_wait.unwrap_or(cfg.flags.quantize_wait);
            cfg.flags.encoding_noise = p.encoding_noise.unwrap_or(cfg.flags.encoding_noise);
            cfg.flags.minimal_qudit = p.minimal_qudit.unwrap_or(cfg.flags.minimal_qudit);
        }
        if let Some(v) = raw.q_over_omega {
            cfg.q_over_omega = v;
        }
        cfg.threads = raw.threads;
        cfg.output = raw.output;
        if let Some(v) = raw.species {
            cfg.species = v;
        }
        cfg.presets = raw.presets;
        cfg.bz = raw.bz;
        if let Some(v) = raw.wait {
            cfg.wait = v;
        }
        if let Some(v) = raw.inject_failures {
            cfg.inject_failures = v;
        }

        if let Some(list) = over.spins {
            cfg.spins = list
                .iter()
                .map(|s| HalfInteger::from_str(s).map_err(|e| CliError::Config(format!("--spin {s:?}: {e}"))))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = over.gamma_n {
            cfg.gamma_n = v;
        }
        if let Some(v) = over.gamma_e {
            cfg.gamma_e = v;
        }
        if let Some(v) = over.t_min {
            cfg.t_grid.min = v;
        }
        if let Some(v) = over.t_max {
            cfg.t_grid.max = v;
        }
        if let Some(v) = over.t_count {
            cfg.t_grid.count = v;
        }
        if over.threads.is_some() {
            cfg.threads = over.threads;
        }
        for f in &over.flags {
            cfg.flags.set(f)?;
        }
        if over.out.is_some() {
            cfg.output = over.out;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        let sweeps_t = !matches!(self.experiment, Experiment::PulseFidelity | Experiment::Spectrum | Experiment::Schedule);
        if sweeps_t {
            let g = self.t_grid;
            if g.count == 0 {
                return err("t_grid.count", "grid is empty".into());
            }
            if !(g.min > 0.0) || !g.min.is_finite() {
                return err("t_grid.min", format!("must be positive, got {}", g.min));
            }
            if !(g.max > 0.0) || !g.max.is_finite() {
                return err("t_grid.max", format!("must be positive, got {}", g.max));
            }
            if g.count > 1 && !(g.min < g.max) {
                return err("t_grid", format!("log spacing needs min < max, got [{}, {}]", g.min, g.max));
            }
        }
        if self.spins.is_empty() {
            return err("spins", "list is empty".into());
        }
        for s in &self.spins {
            let ok = s.twice() >= 3 && s.twice() <= 15 && s.is_half_odd();
            if !ok {
                return err("spins", format!("{s} is not a code spin (3/2 ..= 15/2)"));
            }
        }
        for (field, list) in [("gamma_n", &self.gamma_n), ("gamma_e", &self.gamma_e)] {
            if list.is_empty() {
                return err(field, "list is empty".into());
            }
            if let Some(bad) = list.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
                return err(field, format!("rates must be non-negative, got {bad}"));
            }
        }
        let protocol = matches!(self.experiment, Experiment::ProtocolFig4 | Experiment::BreakevenFig5a | Experiment::BreakevenFig5b);
        if protocol && self.gamma_n.contains(&0.0) {
            return err("gamma_n", "t is measured in units of 1/gamma_n, so rates must be positive".into());
        }
        if !(self.q_over_omega > 0.0) || !self.q_over_omega.is_finite() {
            return err("q_over_omega", format!("must be positive, got {}", self.q_over_omega));
        }
        if !(self.wait >= 0.0) || !self.wait.is_finite() {
            return err("wait", format!("must be non-negative, got {}", self.wait));
        }
        if let Some(bz) = self.bz {
            if !(bz > 0.0) || !bz.is_finite() {
                return err("bz", format!("must be positive, got {bz}"));
            }
        }
        if self.threads == Some(0) {
            return err("threads", "must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_log_spaced() {
        let p = TGrid { min: 1e-4, max: 1.0, count: 5 }.points();
        for (a, b) in p.iter().zip([1e-4, 1e-3, 1e-2, 1e-1, 1.0]) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn suffix_lists_changed_flags() {
        let mut f = Flags::default();
        assert_eq!(f.suffix(), "");
        f.set("encoding-noise=on").unwrap();
        f.set("quantize-wait=off").unwrap();
        assert_eq!(f.suffix(), "quantize-wait-off.encoding-noise-on");
        assert!(f.set("quantize-wait=maybe").is_err());
        assert!(f.set("bogus=on").is_err());
    }

    #[test]
    fn validation_names_fields() {
        let raw = RawConfig { t_grid: Some(TGrid { min: 1e-2, max: 1e-3, count: 4 }), ..Default::default() };
        let e = SweepConfig::resolve(Experiment::ProtocolFig4, raw, Overrides::default()).unwrap_err();
        assert!(e.to_string().contains("t_grid"));
        let over = Overrides { spins: Some(vec!["2".into()]), ..Default::default() };
        let e = SweepConfig::resolve(Experiment::ProtocolFig4, RawConfig::default(), over).unwrap_err();
        assert!(e.to_string().contains("spin"));
    }
}
