use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::xi::Sign;
use super::{check_disc, FactorError, Factorization};
use crate::graph::VertexId;

/// Exhaustive check of the three vector properties over the core: `η` at
/// levels two apart are orthogonal, `‖η‖² ≤ C0`, and `⟨η−_l(y), η+_k(x)⟩`
/// equals `χ_{Z(k,l)}(x,y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionReport {
    pub n_max: u32,
    pub core_pairs: u64,
    pub table_entries: u64,
    pub table_mismatches: u64,
    /// `(x, k, y, l, eta_inner, in_z)` for the first mismatch.
    pub first_mismatch: Option<(VertexId, i64, VertexId, i64, i64, bool)>,
    pub orthogonality_checked: u64,
    pub orthogonality_violations: u64,
    pub norms_checked: u64,
    pub norm_violations: u64,
    pub max_norm_sq_log2: f64,
    #[serde(rename = "C0_log2")]
    pub c0_log2: f64,
}

impl PropositionReport {
    pub fn passed(&self) -> bool {
        self.table_mismatches == 0 && self.orthogonality_violations == 0 && self.norm_violations == 0
    }
}

#[derive(Default)]
struct Tally {
    entries: u64,
    mismatches: u64,
    first: Option<(VertexId, i64, VertexId, i64, i64, bool)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.entries += other.entries;
        self.mismatches += other.mismatches;
        self.first = self.first.or(other.first);
        self
    }
}

/// Absolute slack for floating-point rounding when a clamped pair meets
/// its bound with equality.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// `max |ζ-kernel − z^d|` over all core pairs against the per-pair bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelescopingReport {
    pub z: Complex64,
    pub tol: f64,
    pub pairs: u64,
    pub max_deviation: f64,
    /// Largest per-pair bound.
    pub max_bound: f64,
    /// Pairs whose deviation exceeds their own bound by more than
    /// [`ROUNDING_SLACK`].
    pub bound_violations: u64,
    /// Pairs where the snapshot forced a level below the required one.
    pub clamped_pairs: u64,
    #[serde(rename = "K_required")]
    pub k_required: u32,
    #[serde(rename = "K_effective_min")]
    pub k_effective_min: i64,
    pub worst_pair: Option<(VertexId, VertexId)>,
}

impl TelescopingReport {
    pub fn within_bound(&self) -> bool {
        self.bound_violations == 0
    }
}

impl<'a, 'g> Factorization<'a, 'g> {
    pub fn proposition_check(&self, n_max: u32) -> PropositionReport {
        let core = self.table.core();
        let n = core.len();
        let r1 = self.params.r1;
        let top = n_max as i64;
        let tally = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut t = Tally::default();
                for j in 0..n {
                    let w = self.table.pair_w(i, j);
                    for k in 0..=top {
                        for l in 0..=top {
                            let e = self.eta_inner_slots(i, k, j, l);
                            let z = w.in_z(k, l, r1);
                            t.entries += 1;
                            if e != i64::from(z) {
                                t.mismatches += 1;
                                t.first.get_or_insert((core[i], k, core[j], l, e, z));
                            }
                        }
                    }
                }
                t
            })
            .reduce(Tally::default, Tally::merge);

        let c0 = self.constants.c0;
        let (ortho, ortho_bad, norms, norm_bad, max_log2) = (0..n)
            .into_par_iter()
            .map(|i| {
                let top = self.levels(i) as i64 + 1;
                let mut acc = (0u64, 0u64, 0u64, 0u64, f64::NEG_INFINITY);
                for sign in [Sign::Plus, Sign::Minus] {
                    for m in 0..=top {
                        let nsq = self.eta_norm_sq_slot(i, m, sign);
                        acc.2 += 1;
                        if nsq > c0 {
                            acc.3 += 1;
                        }
                        if !nsq.is_zero() {
                            acc.4 = acc.4.max(nsq.log2_abs());
                        }
                        for m2 in m + 2..=top {
                            acc.0 += 1;
                            if !self.gram_slot(i, m, m2, sign).is_zero() {
                                acc.1 += 1;
                            }
                        }
                    }
                }
                acc
            })
            .reduce(
                || (0, 0, 0, 0, f64::NEG_INFINITY),
                |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3, a.4.max(b.4)),
            );
        PropositionReport {
            n_max,
            core_pairs: (n * n) as u64,
            table_entries: tally.entries,
            table_mismatches: tally.mismatches,
            first_mismatch: tally.first,
            orthogonality_checked: ortho,
            orthogonality_violations: ortho_bad,
            norms_checked: norms,
            norm_violations: norm_bad,
            max_norm_sq_log2: max_log2,
            c0_log2: self.constants.c0_log2,
        }
    }

    pub fn telescoping_check(&self, z: Complex64, tol: f64) -> Result<TelescopingReport, FactorError> {
        check_disc(z)?;
        let core = self.table.core();
        let entries = core
            .par_iter()
            .map(|&x| {
                core.iter()
                    .map(|&y| self.zeta_kernel(x, y, z, tol))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut report = TelescopingReport {
            z,
            tol,
            pairs: 0,
            max_deviation: 0.0,
            max_bound: 0.0,
            bound_violations: 0,
            clamped_pairs: 0,
            k_required: super::k_required(self.constants.c0_log2, z, tol),
            k_effective_min: i64::MAX,
            worst_pair: None,
        };
        for e in entries.iter().flatten() {
            report.pairs += 1;
            if e.deviation > report.max_deviation || report.worst_pair.is_none() {
                report.max_deviation = report.max_deviation.max(e.deviation);
                report.worst_pair = Some((e.x, e.y));
            }
            report.max_bound = report.max_bound.max(e.bound);
            report.bound_violations += u64::from(e.deviation > e.bound + ROUNDING_SLACK);
            report.clamped_pairs += u64::from(e.clamped);
            report.k_effective_min = report.k_effective_min.min(e.k_effective);
        }
        Ok(report)
    }
}
