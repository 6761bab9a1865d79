//! Argument definitions and their application to a [`RunConfig`].

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use qnm_core::barrier::SecondOrderClosure;
use qnm_core::solver::OperatorKind;

use crate::config::{MethodChoice, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "qnm",
    version,
    about = "Resonances of Dirac fields outside charged de Sitter black holes"
)]
pub struct Cli {
    /// TOML file with [blackhole], [solver], [evolution] and [probe] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving the outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Also write every table as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

fn floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != N {
        return Err(format!("expected {N} colon-separated numbers, got '{s}'"));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.trim().parse().map_err(|e| format!("'{p}': {e}"))?;
    }
    Ok(out)
}

fn pair(s: &str) -> Result<[f64; 2], String> {
    floats::<2>(s)
}

fn quad(s: &str) -> Result<[f64; 4], String> {
    floats::<4>(s)
}

/// `a..b` (inclusive) or a single value.
fn range(s: &str) -> Result<[u32; 2], String> {
    let parse = |p: &str| p.trim().parse::<u32>().map_err(|e| format!("'{p}': {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let r = [parse(a)?, parse(b)?];
            if r[0] > r[1] {
                return Err(format!("empty range '{s}'"));
            }
            Ok(r)
        }
        None => {
            let v = parse(s)?;
            Ok([v, v])
        }
    }
}

/// Operator kinds selected by one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct KindList(pub Vec<OperatorKind>);

fn kinds(s: &str) -> Result<KindList, String> {
    if s == "all" {
        return Ok(KindList(OperatorKind::ALL.to_vec()));
    }
    s.split(',')
        .map(|k| k.trim().parse::<OperatorKind>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()
        .map(KindList)
}

fn closure(s: &str) -> Result<SecondOrderClosure, String> {
    s.parse::<SecondOrderClosure>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, clap::Args)]
pub struct EvolutionArgs {
    /// 2l of the angular mode.
    #[arg(long = "two_l")]
    pub two_l: Option<u32>,
    /// Final time.
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Grid spacing; the time step equals it.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Initial bump as center:width.
    #[arg(long, value_parser = pair)]
    pub bump: Option<[f64; 2]>,
    /// Observation window a:b.
    #[arg(long, value_parser = pair)]
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Horizon radii, surface gravities and root residuals.
    Horizons,
    /// Potential and its tortoise derivatives on a grid.
    Potential {
        /// Tortoise range a:b.
        #[arg(long, value_parser = pair)]
        range: Option<[f64; 2]>,
        /// Number of grid points.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Barrier-top pseudopole lattice with mirror images.
    AsymptoticQnm {
        /// Inclusive 2l range, a..b.
        #[arg(long = "two_l", value_parser = range)]
        two_l: Option<[u32; 2]>,
        /// Inclusive overtone range, a..b.
        #[arg(long, value_parser = range)]
        k: Option<[u32; 2]>,
        /// Truncation order, 0 to 2.
        #[arg(long)]
        order: Option<u8>,
        /// Second-order closure: barrier-top or literal.
        #[arg(long, value_parser = closure)]
        closure: Option<SecondOrderClosure>,
    },
    /// Resonances from Jost zeros and/or the complex-scaled eigenproblem.
    DirectQnm {
        /// 2l of the angular mode.
        #[arg(long = "l", alias = "two_l")]
        two_l: Option<u32>,
        /// Operator kind, comma list, or "all".
        #[arg(long, value_parser = kinds)]
        kind: Option<KindList>,
        /// Jost zeros, complex scaling, or both.
        #[arg(long, value_enum)]
        method: Option<MethodChoice>,
        /// re0:re1:im0:im1
        #[arg(long, value_parser = quad)]
        window: Option<[f64; 4]>,
        /// Complex-scaling angle.
        #[arg(long)]
        theta: Option<f64>,
        /// Smallest collocation degree of the scaled method.
        #[arg(long = "N")]
        degree: Option<usize>,
        /// Search the mirror window too and check the set identities.
        #[arg(long)]
        mirror: bool,
    },
    /// Direct resonances against pseudopoles of each truncation order.
    Compare {
        /// Comma list of 2l values.
        #[arg(long = "two_l", value_delimiter = ',')]
        two_l: Vec<u32>,
        /// Inclusive overtone range, a..b.
        #[arg(long, value_parser = range)]
        k: Option<[u32; 2]>,
    },
    /// Time evolution of one angular mode.
    Evolve {
        #[command(flatten)]
        run: EvolutionArgs,
        /// Write a snapshot every this many steps.
        #[arg(long)]
        snapshots: Option<usize>,
    },
    /// Ringdown fit, late-time decay and resonance-expansion residual.
    Ringdown {
        #[command(flatten)]
        run: EvolutionArgs,
        /// Fit window t0:t1.
        #[arg(long, value_parser = pair)]
        fit: Option<[f64; 2]>,
        /// Resonance strings kept in the expansion residual (0 skips it).
        #[arg(long)]
        strings: Option<usize>,
    },
    /// Cutoff resolvent norms on real spectral samples.
    ProbeResolvent {
        /// Comma list of 2l values.
        #[arg(long = "two_l", value_delimiter = ',')]
        two_l: Vec<u32>,
        /// Zone parameter R.
        #[arg(long)]
        zone: Option<f64>,
        /// Number of spectral samples.
        #[arg(long)]
        grid: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Horizons => "horizons",
            Command::Potential { .. } => "potential",
            Command::AsymptoticQnm { .. } => "asymptotic-qnm",
            Command::DirectQnm { .. } => "direct-qnm",
            Command::Compare { .. } => "compare",
            Command::Evolve { .. } => "evolve",
            Command::Ringdown { .. } => "ringdown",
            Command::ProbeResolvent { .. } => "probe-resolvent",
        }
    }

    fn apply_evolution(run: &EvolutionArgs, config: &mut RunConfig) {
        let ev = &mut config.evolution;
        if let Some(v) = run.two_l {
            ev.two_l = v;
        }
        if let Some(v) = run.t_end {
            ev.t_end = v;
        }
        if let Some(v) = run.dx {
            ev.dx = v;
        }
        if let Some(v) = run.bump {
            ev.bump = v;
        }
        if let Some(v) = run.window {
            ev.window = v;
        }
    }

    /// Overrides `config` with the flags given on the command line.
    pub fn apply(&self, config: &mut RunConfig) {
        match self {
            Command::Horizons => {}
            Command::Potential { range, points } => {
                if let Some(v) = range {
                    config.blackhole.x_range = *v;
                }
                if let Some(v) = points {
                    config.blackhole.points = *v;
                }
            }
            Command::AsymptoticQnm {
                two_l,
                k,
                order,
                closure,
            } => {
                let s = &mut config.solver;
                if let Some(v) = two_l {
                    s.two_l_range = *v;
                }
                if let Some(v) = k {
                    s.k = *v;
                }
                if let Some(v) = order {
                    s.order = *v;
                }
                if let Some(v) = closure {
                    s.closure = *v;
                }
            }
            Command::DirectQnm {
                two_l,
                kind,
                method,
                window,
                theta,
                degree,
                mirror,
            } => {
                let s = &mut config.solver;
                if let Some(v) = two_l {
                    s.two_l = vec![*v];
                }
                if let Some(v) = kind {
                    s.kinds = v.0.clone();
                }
                if let Some(v) = method {
                    s.method = *v;
                }
                if let Some(v) = window {
                    s.window = Some(*v);
                }
                if let Some(v) = theta {
                    s.scaled.theta = *v;
                }
                if let Some(v) = degree {
                    s.scaled.min_points = *v;
                }
                s.mirror |= *mirror;
            }
            Command::Compare { two_l, k } => {
                if !two_l.is_empty() {
                    config.solver.two_l = two_l.clone();
                }
                if let Some(v) = k {
                    config.solver.k = *v;
                }
            }
            Command::Evolve { run, snapshots } => {
                Self::apply_evolution(run, config);
                if let Some(v) = snapshots {
                    config.evolution.stepping.snapshot_every = *v;
                }
            }
            Command::Ringdown { run, fit, strings } => {
                Self::apply_evolution(run, config);
                if let Some(v) = fit {
                    config.evolution.fit_window = *v;
                }
                if let Some(v) = strings {
                    config.evolution.strings = *v;
                }
            }
            Command::ProbeResolvent { two_l, zone, grid } => {
                if !two_l.is_empty() {
                    config.probe.two_l = two_l.clone();
                }
                if let Some(v) = zone {
                    config.probe.zone_r = *v;
                }
                if let Some(v) = grid {
                    config.probe.samples = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(pair("1.5:-2").unwrap(), [1.5, -2.0]);
        assert!(pair("1:2:3").is_err());
        assert_eq!(range("0..2").unwrap(), [0, 2]);
        assert_eq!(range("0..=2").unwrap(), [0, 2]);
        assert_eq!(range("7").unwrap(), [7, 7]);
        assert!(range("3..1").is_err());
        assert_eq!(kinds("all").unwrap().0.len(), 4);
        assert_eq!(
            kinds("dirac-plus,dirac-minus").unwrap().0,
            vec![OperatorKind::DiracPlus, OperatorKind::DiracMinus]
        );
        assert!(kinds("dirac").is_err());
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from([
            "qnm",
            "evolve",
            "--two_l",
            "39",
            "--T",
            "50",
            "--bump",
            "1:3",
            "--snapshots",
            "7",
        ])
        .unwrap();
        let mut c = RunConfig::default();
        cli.command.apply(&mut c);
        assert_eq!(c.evolution.two_l, 39);
        assert_eq!(c.evolution.t_end, 50.0);
        assert_eq!(c.evolution.bump, [1.0, 3.0]);
        assert_eq!(c.evolution.stepping.snapshot_every, 7);
        assert_eq!(c.evolution.dx, RunConfig::default().evolution.dx);
    }

    #[test]
    fn direct_flags() {
        let cli = Cli::try_parse_from([
            "qnm",
            "direct-qnm",
            "--l",
            "21",
            "--method",
            "both",
            "--window",
            "1:2:-0.5:0",
            "--N",
            "300",
            "--kind",
            "all",
        ])
        .unwrap();
        let mut c = RunConfig::default();
        cli.command.apply(&mut c);
        assert_eq!(c.solver.two_l, vec![21]);
        assert_eq!(c.solver.method, MethodChoice::Both);
        assert_eq!(c.solver.window, Some([1.0, 2.0, -0.5, 0.0]));
        assert_eq!(c.solver.scaled.min_points, 300);
        assert_eq!(c.solver.kinds.len(), 4);
    }

    #[test]
    fn unknown_command_is_a_usage_error() {
        let e = Cli::try_parse_from(["qnm", "frobnicate"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
