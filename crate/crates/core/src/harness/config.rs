//! TOML experiment configuration. Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::parabolic::Region;
use crate::solver::{InitialCondition, SolverConfig, VectorField};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "harness", derive(clap::ValueEnum))]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Sample,
    Moments,
    Kernel,
    Renorm,
    Levy,
    Solve,
    Converge,
    Besov,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Sample => "sample",
            Kind::Moments => "moments",
            Kind::Kernel => "kernel",
            Kind::Renorm => "renorm",
            Kind::Levy => "levy",
            Kind::Solve => "solve",
            Kind::Converge => "converge",
            Kind::Besov => "besov",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renorm: Option<RenormConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levy: Option<LevyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub besov: Option<BesovConfig>,
}

/// Monte Carlo covariance of the sheet at point pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub h1: f64,
    pub h2: f64,
    pub n: u32,
    /// `[[t, x], [s, y]]` pairs.
    pub pairs: Vec<[[f64; 2]; 2]>,
    pub draws: usize,
    /// Optional `[nt, nx]` grid on `[0, 1]^2` for the first draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
}

/// Exact increment moments at dyadic offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    /// `[H1, H2]` pairs.
    pub hurst: Vec<[f64; 2]>,
    pub n: u32,
    /// Offsets are `2^-k` for these `k`.
    pub offset_exponents: Vec<i32>,
    /// Offset held fixed on the other axis.
    pub fixed_offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub n_max: u32,
    /// Random points per check.
    pub probes: usize,
    pub gradient_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenormCase {
    pub h1: f64,
    pub h2: f64,
    pub levels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitCase {
    pub h1: f64,
    pub h2: f64,
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenormConfig {
    #[serde(default)]
    pub cases: Vec<RenormCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitCase>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesovTarget {
    /// Level curve and realization fit of the noise.
    NoiseExponent,
    /// Fitted exponent of `K * xi^n` minus that of `xi^n`.
    ConvolutionGain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovConfig {
    pub h1: f64,
    pub h2: f64,
    pub n: u32,
    pub target: BesovTarget,
    pub levels: Vec<u32>,
    /// `[t0, t1, x0, x1]`
    pub region: [f64; 4],
    pub max_per_axis: usize,
    #[serde(default = "one")]
    pub realizations: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChenConfig {
    pub n: u32,
    pub realizations: usize,
    pub pairs: usize,
    pub probes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub coarse: Vec<u32>,
    pub fine: u32,
    pub levels: Vec<u32>,
    pub samples: usize,
    pub base: [f64; 2],
    /// Coarse level whose scale curve is fitted.
    pub slope_n: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyConfig {
    pub h1: f64,
    pub h2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chen: Option<ChenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldShape {
    Zero,
    Bump,
    BumpLinear,
    BumpSin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub shape: FieldShape,
    pub a: f64,
    pub amplitude: f64,
}

impl FieldConfig {
    pub fn build(&self) -> VectorField {
        let (a, amplitude) = (self.a, self.amplitude);
        match self.shape {
            FieldShape::Zero => VectorField::Zero,
            FieldShape::Bump => VectorField::Bump { a, amplitude },
            FieldShape::BumpLinear => VectorField::BumpLinear { a, amplitude },
            FieldShape::BumpSin => VectorField::BumpSin { a, amplitude },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialShape {
    Zero,
    Bump,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub shape: InitialShape,
    /// Bump radius or Gaussian variance.
    pub width: f64,
    pub height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub nx: usize,
    pub horizon: f64,
    pub nt: usize,
    #[serde(default = "one")]
    pub save_every: usize,
    pub initial: InitialConfig,
}

impl GridConfig {
    pub fn build(&self) -> SolverConfig {
        let i = self.initial;
        let initial = match i.shape {
            InitialShape::Zero => InitialCondition::Zero,
            InitialShape::Bump => InitialCondition::Bump { a: i.width, height: i.height },
            InitialShape::Gaussian => InitialCondition::Gaussian { variance: i.width, height: i.height },
        };
        SolverConfig {
            half_width: self.half_width,
            nx: self.nx,
            horizon: self.horizon,
            nt: self.nt,
            initial,
            save_every: self.save_every,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationName {
    Young,
    Renormalized,
    Ito,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub h1: f64,
    pub h2: f64,
    pub n: u32,
    pub equation: EquationName,
    pub field: FieldConfig,
    pub grid: GridConfig,
    pub paths: usize,
    /// Extra Ito reference paths compared against the main ones.
    #[serde(default)]
    pub reference_paths: usize,
    pub probe_x: f64,
    #[serde(default)]
    pub write_grid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub h1: f64,
    pub h2: f64,
    pub levels: Vec<u32>,
    pub equation: EquationName,
    pub field: FieldConfig,
    pub grid: GridConfig,
    pub gamma: f64,
    /// `[t0, t1, x0, x1]`
    pub holder_region: [f64; 4],
    pub holder_nodes: usize,
    /// Independent master seeds derived from the run seed.
    pub replicas: usize,
}

pub fn region(r: [f64; 4]) -> Result<Region> {
    Region::new(r[0], r[1], r[2], r[3])
}

fn check_hurst(h1: f64, h2: f64) -> Result<()> {
    for h in [h1, h2] {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Config(format!("Hurst index {h} outside (0, 1)")));
        }
    }
    Ok(())
}

fn need(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Exactly the section named by `kind` must be present.
    pub fn validate(&self) -> Result<()> {
        let present = [
            (Kind::Sample, self.sample.is_some()),
            (Kind::Moments, self.moments.is_some()),
            (Kind::Kernel, self.kernel.is_some()),
            (Kind::Renorm, self.renorm.is_some()),
            (Kind::Levy, self.levy.is_some()),
            (Kind::Solve, self.solve.is_some()),
            (Kind::Converge, self.converge.is_some()),
            (Kind::Besov, self.besov.is_some()),
        ];
        for (k, p) in present {
            if k == self.kind && !p {
                return Err(Error::Config(format!("missing [{}] section", k.name())));
            }
            if k != self.kind && p {
                return Err(Error::Config(format!("section [{}] does not belong to kind {}", k.name(), self.kind.name())));
            }
        }
        if let Some(s) = &self.sample {
            check_hurst(s.h1, s.h2)?;
            need(!s.pairs.is_empty() && s.draws >= 2, "sample needs pairs and at least two draws")?;
        }
        if let Some(m) = &self.moments {
            for h in &m.hurst {
                check_hurst(h[0], h[1])?;
            }
            need(m.offset_exponents.len() >= 2 && m.fixed_offset > 0.0, "moments need two offsets and a positive fixed offset")?;
        }
        if let Some(k) = &self.kernel {
            need(k.probes > 0 && k.gradient_times.iter().all(|&t| t > 0.0), "kernel needs probes and positive times")?;
        }
        if let Some(r) = &self.renorm {
            need(!r.cases.is_empty() || r.limit.is_some(), "renorm needs cases or a limit")?;
            for c in &r.cases {
                check_hurst(c.h1, c.h2)?;
                need(!c.levels.is_empty(), "renorm case needs levels")?;
            }
        }
        if let Some(l) = &self.levy {
            check_hurst(l.h1, l.h2)?;
            need(l.chen.is_some() != l.scan.is_some(), "levy needs exactly one of [levy.chen] and [levy.scan]")?;
            if let Some(s) = &l.scan {
                need(s.coarse.contains(&s.slope_n), "scan slope_n must be one of the coarse levels")?;
            }
        }
        if let Some(s) = &self.solve {
            check_hurst(s.h1, s.h2)?;
            need(s.paths >= 1, "solve needs at least one path")?;
        }
        if let Some(c) = &self.converge {
            check_hurst(c.h1, c.h2)?;
            need(c.equation != EquationName::Ito, "converge supports young and renormalized")?;
            need(c.replicas >= 1 && c.levels.len() >= 2, "converge needs replicas and two levels")?;
            region(c.holder_region)?;
        }
        if let Some(b) = &self.besov {
            check_hurst(b.h1, b.h2)?;
            need(b.levels.len() >= 2 && b.realizations >= 1, "besov needs two levels")?;
            region(b.region)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_configs() {
        let ok = "kind = \"renorm\"\nseed = 1\n[renorm]\ncases = [{ h1 = 0.5, h2 = 0.8, levels = [4, 5] }]\n";
        let cfg = ExperimentConfig::parse(ok).unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
        assert!(ExperimentConfig::parse(&format!("{ok}bogus = 3\n")).is_err());
        assert!(ExperimentConfig::parse("kind = \"renorm\"\nseed = 1\n").is_err());
        let missing = "kind = \"sample\"\nseed = 1\n[sample]\nh1 = 0.5\nn = 3\npairs = [[[0.5, 0.5], [0.5, 0.5]]]\ndraws = 10\n";
        assert!(matches!(ExperimentConfig::parse(missing), Err(Error::Config(_))));
    }
}
