//! Run configuration read from TOML, with command-line overrides applied on top.

use std::path::Path;

use qnm_core::barrier::SecondOrderClosure;
use qnm_core::evolution::{EvolveSettings, FitSettings};
use qnm_core::solver::{OperatorKind, ScaledSettings, SearchSettings};
use qnm_core::spacetime::BlackHoleParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub blackhole: BlackHoleConfig,
    pub solver: SolverConfig,
    pub evolution: EvolutionConfig,
    pub probe: ProbeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlackHoleConfig {
    pub mass: f64,
    pub charge: f64,
    pub lambda: f64,
    /// Tortoise range of the `potential` dump.
    pub x_range: [f64; 2],
    pub points: usize,
}

impl Default for BlackHoleConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            charge: 0.5,
            lambda: 0.05,
            x_range: [-30.0, 30.0],
            points: 601,
        }
    }
}

impl BlackHoleConfig {
    pub fn params(&self) -> qnm_core::Result<BlackHoleParams> {
        BlackHoleParams::new(self.mass, self.charge, self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Jost,
    Scaled,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Angular mode of `direct-qnm` and `compare`.
    pub two_l: Vec<u32>,
    pub kinds: Vec<OperatorKind>,
    pub method: MethodChoice,
    /// `[re_min, re_max, im_min, im_max]`; the default window of the mode when absent.
    pub window: Option<[f64; 4]>,
    /// Also search the mirror image of the window and check the set identities.
    pub mirror: bool,
    pub closure: SecondOrderClosure,
    /// Inclusive overtone range.
    pub k: [u32; 2],
    /// Inclusive `2l` range of `asymptotic-qnm`.
    pub two_l_range: [u32; 2],
    pub order: u8,
    pub union_tol: f64,
    pub search: SearchSettings,
    pub scaled: ScaledSettings,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            two_l: vec![19],
            kinds: OperatorKind::ALL.to_vec(),
            method: MethodChoice::Jost,
            window: None,
            mirror: false,
            closure: SecondOrderClosure::BarrierTop,
            k: [0, 2],
            two_l_range: [1, 19],
            order: 2,
            union_tol: 1e-6,
            search: SearchSettings::default(),
            scaled: ScaledSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub two_l: u32,
    pub kind: OperatorKind,
    pub dx: f64,
    pub t_end: f64,
    /// `[center, width]` of the initial bump.
    pub bump: [f64; 2],
    /// Spinor direction of the bump as `[re_u, im_u, re_v, im_v]`.
    pub mix: [f64; 4],
    /// Observation window `[a, b]`.
    pub window: [f64; 2],
    /// Extra distance kept beyond the quiet ends of the potential.
    pub margin: f64,
    /// Time between recorded samples.
    pub sample_interval: f64,
    pub stepping: EvolveSettings,
    pub fit_window: [f64; 2],
    pub fit: FitSettings,
    /// Depth below the axis of the solver resonances used by `ringdown`.
    pub basis_depth: f64,
    /// Number of resonance strings kept in the expansion residual; 0 skips it.
    pub strings: usize,
    pub residual_dx: f64,
    pub residual_t_end: f64,
    pub residual_window: [f64; 2],
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            two_l: 19,
            kind: OperatorKind::DiracMinus,
            dx: 0.05,
            t_end: 220.0,
            bump: [0.0, 2.0],
            mix: [1.0, 0.0, 0.0, 0.0],
            window: [-5.0, 5.0],
            margin: 5.0,
            sample_interval: 0.25,
            stepping: EvolveSettings::default(),
            fit_window: [60.0, 200.0],
            fit: FitSettings::default(),
            basis_depth: 0.6,
            strings: 2,
            residual_dx: 0.025,
            residual_t_end: 90.0,
            residual_window: [20.0, 80.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub two_l: Vec<u32>,
    /// Zone parameter `R`: samples cover `[n z0 / R, n z0 / 2]`.
    pub zone_r: f64,
    /// Number of real spectral samples.
    pub samples: usize,
    /// Cutoff window `[a, b]`.
    pub window: [f64; 2],
    /// Quadrature nodes on the window.
    pub points: usize,
    /// Add a row at `lambda = 0`.
    pub include_zero: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            two_l: vec![19, 39, 79],
            zone_r: 10.0,
            samples: 12,
            window: [-5.0, 5.0],
            points: 161,
            include_zero: true,
        }
    }
}

/// 1-based line and column of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Line of `key = ...` inside `[section]`, for diagnostics raised after parsing.
pub fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section && key.is_empty() {
                return Some(i + 1);
            }
        } else if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    pub fn parse(source: &str, origin: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(source).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(source, s.start));
            CliError::Config {
                origin: origin.to_string(),
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        config.validate(source, origin)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&source, &path.display().to_string())
    }

    /// Checks that need the whole config; `source` locates the offending key.
    pub fn validate(&self, source: &str, origin: &str) -> Result<(), CliError> {
        let fail = |section: &str, key: &str, message: String| {
            let line = locate(source, section, key)
                .or_else(|| locate(source, section, ""))
                .unwrap_or(1);
            CliError::Config {
                origin: origin.to_string(),
                line,
                column: 1,
                message,
            }
        };
        if let Err(e) = self.blackhole.params() {
            let key = match &e {
                qnm_core::QnmError::Inadmissible(m) if m.contains("mass") => "mass",
                qnm_core::QnmError::Inadmissible(m) if m.contains("cosmological") => "lambda",
                _ => "charge",
            };
            return Err(fail("blackhole", key, e.to_string()));
        }
        if self.blackhole.points < 2 || self.blackhole.x_range[0] >= self.blackhole.x_range[1] {
            return Err(fail(
                "blackhole",
                "x_range",
                "x_range must be increasing with at least 2 points".into(),
            ));
        }
        if self.solver.order > 2 {
            return Err(fail(
                "solver",
                "order",
                format!("order {} exceeds 2", self.solver.order),
            ));
        }
        if self.solver.k[0] > self.solver.k[1] {
            return Err(fail("solver", "k", "k range must be increasing".into()));
        }
        if self
            .solver
            .two_l
            .iter()
            .chain(&self.solver.two_l_range)
            .any(|t| t % 2 == 0)
            || self.solver.two_l_range[0] > self.solver.two_l_range[1]
        {
            return Err(fail("solver", "two_l", "2l must be odd and ranges increasing".into()));
        }
        let ev = &self.evolution;
        if ev.two_l.is_multiple_of(2) {
            return Err(fail("evolution", "two_l", "2l must be odd".into()));
        }
        if !(ev.dx > 0.0 && ev.t_end > 0.0 && ev.sample_interval > 0.0 && ev.residual_dx > 0.0) {
            return Err(fail(
                "evolution",
                "dx",
                "dx, t_end, sample_interval and residual_dx must be positive".into(),
            ));
        }
        if ev.window[0] >= ev.window[1]
            || ev.fit_window[0] >= ev.fit_window[1]
            || ev.residual_window[0] >= ev.residual_window[1]
        {
            return Err(fail(
                "evolution",
                "window",
                "windows must be increasing intervals".into(),
            ));
        }
        if !ev.kind.is_dirac() {
            return Err(fail("evolution", "kind", "evolution needs a Dirac kind".into()));
        }
        let pr = &self.probe;
        if pr.two_l.iter().any(|t| t % 2 == 0) {
            return Err(fail("probe", "two_l", "2l must be odd".into()));
        }
        if !(pr.zone_r > 2.0) || pr.samples == 0 || pr.points < 3 || pr.window[0] >= pr.window[1] {
            return Err(fail(
                "probe",
                "zone_r",
                "need zone_r > 2, samples >= 1, points >= 3 and an increasing window".into(),
            ));
        }
        Ok(())
    }
}
