//! Resonance lists and the seeded, count-audited Jost search.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jost::{wronskian, JostSettings};
use super::operator::{ModeOperator, OperatorKind};
use super::zeros::{count_zeros, refine, CountSettings, Rect, RefineSettings};
use crate::barrier::{pseudopole, AngularMode, PseudopoleCoeffs, SecondOrderClosure};
use crate::error::{QnmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Jost,
    Scaled,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Jost => "jost",
            Method::Scaled => "scaled",
        })
    }
}

/// Nearest order-2 pseudopole to a resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudopoleMatch {
    pub k: u32,
    pub mirror: bool,
    pub value: Complex64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub lambda: Complex64,
    pub kind: OperatorKind,
    pub two_l: Option<u32>,
    pub method: Method,
    /// `|W(lambda)|` for Jost entries, eigenvalue backward error for scaled ones.
    pub residual: f64,
    pub matched: Option<PseudopoleMatch>,
    pub flagged_multiple: bool,
}

impl Resonance {
    pub fn k_guess(&self) -> Option<u32> {
        self.matched.map(|m| m.k)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResonanceList {
    pub entries: Vec<Resonance>,
}

impl ResonanceList {
    pub fn new(mut entries: Vec<Resonance>) -> Self {
        sort_entries(&mut entries);
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lambdas(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn within(&self, rect: &Rect) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|e| rect.contains(e.lambda))
                .cloned()
                .collect(),
        }
    }

    /// Least-damped entry.
    pub fn least_damped(&self) -> Option<&Resonance> {
        self.entries.iter().max_by(|a, b| a.lambda.im.total_cmp(&b.lambda.im))
    }

    /// Attaches the nearest order-2 pseudopole (or mirror) to every entry
    /// that has an angular mode, searching `k < k_max`.
    pub fn match_pseudopoles(&mut self, coeffs: &PseudopoleCoeffs, k_max: u32) -> Result<()> {
        for e in &mut self.entries {
            let Some(two_l) = e.two_l else { continue };
            let mode = AngularMode::new(two_l)?;
            let mut best: Option<PseudopoleMatch> = None;
            for k in 0..k_max {
                let p = pseudopole(coeffs, k, mode, 2)?;
                for (value, mirror) in [(p.value, false), (-p.value.conj(), true)] {
                    let distance = (value - e.lambda).norm();
                    if best.is_none_or(|b| distance < b.distance) {
                        best = Some(PseudopoleMatch {
                            k,
                            mirror,
                            value,
                            distance,
                        });
                    }
                }
            }
            e.matched = best;
        }
        Ok(())
    }
}

fn sort_entries(entries: &mut [Resonance]) {
    entries.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.two_l.cmp(&b.two_l))
            .then(a.lambda.re.total_cmp(&b.lambda.re))
            .then(b.lambda.im.total_cmp(&a.lambda.im))
    });
}

/// Merges values closer than `tol` (relative to `max(1, |z|)`), keeping the
/// first occurrence.
pub fn dedupe(values: &[Complex64], tol: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for &z in values {
        if !out.iter().any(|w| (w - z).norm() <= tol * z.norm().max(1.0)) {
            out.push(z);
        }
    }
    out
}

/// Pseudopoles of orders 1 and 2 (both closures) and their mirrors that fall
/// inside `window`.
pub fn pseudopole_seeds(coeffs: &PseudopoleCoeffs, mode: AngularMode, window: &Rect) -> Result<Vec<Complex64>> {
    let mut seeds = Vec::new();
    let coeffs = coeffs.with_closure(SecondOrderClosure::BarrierTop);
    for k in 0..1000 {
        let mut deepest = 0.0f64;
        for order in [2u8, 1] {
            let p = pseudopole(&coeffs, k, mode, order)?.value;
            deepest = deepest.min(p.im);
            for z in [p, -p.conj()] {
                if window.contains(z) {
                    seeds.push(z);
                }
            }
        }
        if deepest < window.im_min - window.height() {
            break;
        }
    }
    Ok(seeds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub jost: JostSettings,
    pub count: CountSettings,
    pub refine: RefineSettings,
    /// Relative distance below which two refined zeros are the same.
    pub merge_tol: f64,
    /// Levels of 2 x 2 subdivision tried when the audit finds missing zeros.
    pub max_split_depth: u32,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            jost: JostSettings::default(),
            count: CountSettings::default(),
            refine: RefineSettings::default(),
            merge_tol: 1e-8,
            max_split_depth: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub list: ResonanceList,
    /// Window after any boundary nudges of the audit.
    pub window: Rect,
    /// Zeros in the window according to the argument principle.
    pub counted: i64,
    /// `true` when every counted zero was located.
    pub complete: bool,
}

struct Found {
    lambda: Complex64,
    residual: f64,
    multiple: bool,
    order: u32,
}

fn located_in(found: &[Found], rect: &Rect) -> i64 {
    found
        .iter()
        .filter(|f| rect.contains(f.lambda))
        .map(|f| f.order as i64)
        .sum()
}

/// Jost-Wronskian zeros of `op` inside `window`: refines `seeds`, then audits
/// the result with the argument principle and searches subdivided cells for
/// anything missed.
pub fn direct_search(
    op: &ModeOperator,
    window: Rect,
    seeds: &[Complex64],
    settings: &SearchSettings,
) -> Result<SearchReport> {
    let w = |z: Complex64| wronskian(op, &settings.jost, z);
    let mut found: Vec<Found> = Vec::new();
    let absorb = |found: &mut Vec<Found>, candidates: &[Complex64], area: &Rect| {
        let refined: Vec<_> = candidates
            .par_iter()
            .filter_map(|&s| refine(&w, s, &settings.refine).ok())
            .collect();
        for r in refined {
            let dup = found
                .iter()
                .any(|f| (f.lambda - r.lambda).norm() <= settings.merge_tol * r.lambda.norm().max(1.0));
            if !dup && area.contains(r.lambda) {
                found.push(Found {
                    lambda: r.lambda,
                    residual: r.residual,
                    multiple: r.flagged_multiple,
                    order: r.order,
                });
            }
        }
    };

    let audit = count_zeros(&w, window, &settings.count)?;
    let area = audit.rect;
    absorb(&mut found, seeds, &area);

    let mut pending = vec![(area, audit.count, 0u32)];
    while let Some((cell, expected, depth)) = pending.pop() {
        if located_in(&found, &cell) >= expected {
            continue;
        }
        let c = cell.center();
        let (hw, hh) = (0.25 * cell.width(), 0.25 * cell.height());
        let probes = [
            c,
            c + Complex64::new(hw, hh),
            c + Complex64::new(-hw, hh),
            c + Complex64::new(hw, -hh),
            c + Complex64::new(-hw, -hh),
        ];
        absorb(&mut found, &probes, &area);
        if located_in(&found, &cell) >= expected || depth >= settings.max_split_depth || expected == 0 {
            continue;
        }
        for sub in cell.split(2, 2) {
            let n = count_zeros(&w, sub, &settings.count)?;
            if n.count > 0 {
                pending.push((n.rect, n.count, depth + 1));
            }
        }
    }

    let located = located_in(&found, &area);
    let entries = found
        .into_iter()
        .filter(|f| window.contains(f.lambda) || area.contains(f.lambda))
        .map(|f| Resonance {
            lambda: f.lambda,
            kind: op.kind(),
            two_l: op.mode().map(|m| m.two_l()),
            method: Method::Jost,
            residual: f.residual,
            matched: None,
            flagged_multiple: f.multiple,
        })
        .collect();
    Ok(SearchReport {
        list: ResonanceList::new(entries),
        window: area,
        counted: audit.count,
        complete: located == audit.count,
    })
}

/// Seeds from the pseudopole lattice of `op`'s angular mode.
pub fn lattice_search(
    op: &ModeOperator,
    coeffs: &PseudopoleCoeffs,
    window: Rect,
    settings: &SearchSettings,
) -> Result<SearchReport> {
    let mode = op
        .mode()
        .ok_or_else(|| QnmError::InvalidInput("lattice search needs an angular mode".into()))?;
    let seeds = pseudopole_seeds(coeffs, mode, &window)?;
    let mut report = direct_search(op, window, &seeds, settings)?;
    report.list.match_pseudopoles(coeffs, 64)?;
    Ok(report)
}
