//! Set identities between the resonances of the four operator kinds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::OperatorKind;
use super::resonance::ResonanceList;

/// Result of matching two multisets of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(Complex64, Complex64)>,
    pub unmatched_left: Vec<Complex64>,
    pub unmatched_right: Vec<Complex64>,
    pub max_distance: f64,
}

impl Matching {
    pub fn bijective(&self) -> bool {
        self.unmatched_left.is_empty() && self.unmatched_right.is_empty()
    }
}

/// Greedy closest-pair matching of `left` against `right` within `tol`.
pub fn match_multisets(left: &[Complex64], right: &[Complex64], tol: f64) -> Matching {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in left.iter().enumerate() {
        for (j, b) in right.iter().enumerate() {
            let d = (a - b).norm();
            if d <= tol {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_l = vec![false; left.len()];
    let mut used_r = vec![false; right.len()];
    let mut pairs = Vec::new();
    let mut max_distance: f64 = 0.0;
    for (d, i, j) in candidates {
        if !used_l[i] && !used_r[j] {
            used_l[i] = true;
            used_r[j] = true;
            pairs.push((left[i], right[j]));
            max_distance = max_distance.max(d);
        }
    }
    Matching {
        pairs,
        unmatched_left: left
            .iter()
            .zip(&used_l)
            .filter(|(_, u)| !**u)
            .map(|(z, _)| *z)
            .collect(),
        unmatched_right: right
            .iter()
            .zip(&used_r)
            .filter(|(_, u)| !**u)
            .map(|(z, _)| *z)
            .collect(),
        max_distance,
    }
}

pub fn mirror(values: &[Complex64]) -> Vec<Complex64> {
    values.iter().map(|z| -z.conj()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub matching: Matching,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionReport {
    pub two_l: Option<u32>,
    pub tol: f64,
    pub checks: Vec<IdentityCheck>,
}

impl UnionReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn max_mismatch(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.matching.max_distance))
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn lambdas_of(lists: &[(OperatorKind, &ResonanceList)], kind: OperatorKind) -> Vec<Complex64> {
    lists
        .iter()
        .filter(|(k, _)| *k == kind)
        .flat_map(|(_, l)| l.lambdas())
        .collect()
}

/// Checks, on lists computed over a common mirror-symmetric window:
/// the Schrodinger partners agree; each list is closed under
/// `lambda -> -conj lambda`; and the nonzero Schrodinger resonances equal
/// both the union of the two Dirac sets and the mirror completion of
/// either Dirac set.
pub fn verify_union(two_l: Option<u32>, lists: &[(OperatorKind, &ResonanceList)], tol: f64) -> UnionReport {
    let dm = lambdas_of(lists, OperatorKind::DiracMinus);
    let dp = lambdas_of(lists, OperatorKind::DiracPlus);
    let sm = lambdas_of(lists, OperatorKind::SchrodingerMinus);
    let sp = lambdas_of(lists, OperatorKind::SchrodingerPlus);
    let nonzero = |v: &[Complex64]| v.iter().copied().filter(|z| z.norm() > tol).collect::<Vec<_>>();
    let set_union = |a: &[Complex64], b: &[Complex64]| {
        let mut all = a.to_vec();
        all.extend_from_slice(b);
        let mut out: Vec<Complex64> = Vec::new();
        for z in all {
            if !out.iter().any(|w| (w - z).norm() <= tol) {
                out.push(z);
            }
        }
        out
    };
    let mut checks = Vec::new();
    let mut push = |name: &str, m: Matching| {
        let holds = m.bijective();
        checks.push(IdentityCheck {
            name: name.to_string(),
            matching: m,
            holds,
        });
    };
    push("schrodinger-partners", match_multisets(&sm, &sp, tol));
    for (name, v) in [
        ("mirror-dirac-minus", &dm),
        ("mirror-dirac-plus", &dp),
        ("mirror-schrodinger-minus", &sm),
        ("mirror-schrodinger-plus", &sp),
    ] {
        push(name, match_multisets(v, &mirror(v), tol));
    }
    let sm_nonzero = nonzero(&sm);
    push("union-dirac", match_multisets(&sm_nonzero, &set_union(&dm, &dp), tol));
    push(
        "mirror-completion",
        match_multisets(&sm_nonzero, &set_union(&dm, &mirror(&dm)), tol),
    );
    UnionReport { two_l, tol, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::resonance::{Method, Resonance};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn list(kind: OperatorKind, zs: &[Complex64]) -> ResonanceList {
        ResonanceList::new(
            zs.iter()
                .map(|&lambda| Resonance {
                    lambda,
                    kind,
                    two_l: Some(19),
                    method: Method::Jost,
                    residual: 0.0,
                    matched: None,
                    flagged_multiple: false,
                })
                .collect(),
        )
    }

    #[test]
    fn matching_is_greedy_and_reports_leftovers() {
        let m = match_multisets(&[c(1.0, 0.0), c(2.0, 0.0)], &[c(1.0 + 1e-9, 0.0), c(3.0, 0.0)], 1e-6);
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.unmatched_left, vec![c(2.0, 0.0)]);
        assert_eq!(m.unmatched_right, vec![c(3.0, 0.0)]);
        assert!(!m.bijective());
    }

    #[test]
    fn empty_window_is_trivially_equal() {
        let e = ResonanceList::default();
        let lists: Vec<_> = OperatorKind::ALL.iter().map(|&k| (k, &e)).collect();
        let r = verify_union(Some(19), &lists, 1e-6);
        assert!(r.holds());
        assert_eq!(r.max_mismatch(), 0.0);
    }

    #[test]
    fn consistent_sets_pass_and_broken_ones_fail() {
        let z = [c(1.5, -0.07), c(-1.5, -0.07)];
        let lists_owned: Vec<_> = OperatorKind::ALL.iter().map(|&k| (k, list(k, &z))).collect();
        let lists: Vec<_> = lists_owned.iter().map(|(k, l)| (*k, l)).collect();
        assert!(verify_union(Some(19), &lists, 1e-6).holds());

        let broken = list(OperatorKind::DiracMinus, &z[..1]);
        let mut lists = lists.clone();
        lists[0] = (OperatorKind::DiracMinus, &broken);
        let r = verify_union(Some(19), &lists, 1e-6);
        assert!(!r.check("mirror-dirac-minus").unwrap().holds);
        assert!(r.check("union-dirac").unwrap().holds);
    }
}
