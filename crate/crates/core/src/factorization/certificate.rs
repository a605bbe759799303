use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::xi::Sign;
use super::{check_disc, k_required, Constants, FactorError, Factorization};
use crate::corridor::verify_partition;
use crate::graph::VertexId;
use crate::logreal::LogReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Theta,
    Sphere,
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereDetail {
    /// `bound(E(m))` for `m = n−1, n` (only `n` when `n = 0`).
    pub ball_bounds: Vec<(u32, LogReal)>,
    /// Whether `χ_{E(m)} = Σ_k χ_{Z(k,m−k)}` was verified for every core
    /// pair and `m ≤ n`; the factorization only applies when it holds.
    pub partition_verified: bool,
    /// `bound / (2(n+1))`, the ratio to the tree value.
    pub ratio_to_tree_value: LogReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialDetail {
    pub theta_bound: LogReal,
    /// `Σ_{m=K+1..D} r^m · 2C0(m+1)` over the distances `D` present in the core.
    pub tail: LogReal,
    pub core_diameter: u32,
}

/// An upper bound on a multiplier norm with the factorization data behind it.
/// `bound = sup_norm_plus · sup_norm_minus`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormCertificate {
    pub kind: CertificateKind,
    pub bound: LogReal,
    pub bound_log2: f64,
    pub sup_norm_plus: LogReal,
    pub sup_norm_minus: LogReal,
    /// The closed-form bound this certificate is compared against.
    pub analytic_bound: LogReal,
    pub analytic_bound_log2: f64,
    pub within_analytic: bool,
    #[serde(flatten)]
    pub constants: Constants,
    pub z: Option<Complex64>,
    pub n: Option<u32>,
    pub r: Option<f64>,
    pub cutoff: Option<u32>,
    pub tol: Option<f64>,
    #[serde(rename = "K_max")]
    pub k_max: Option<u32>,
    pub sphere: Option<SphereDetail>,
    pub radial: Option<RadialDetail>,
}

impl NormCertificate {
    fn new(
        kind: CertificateKind,
        plus: LogReal,
        minus: LogReal,
        analytic: LogReal,
        constants: &Constants,
    ) -> Self {
        let bound = plus * minus;
        NormCertificate {
            kind,
            bound,
            bound_log2: bound.log2_abs(),
            sup_norm_plus: plus,
            sup_norm_minus: minus,
            analytic_bound: analytic,
            analytic_bound_log2: analytic.log2_abs(),
            within_analytic: bound <= analytic,
            constants: constants.clone(),
            z: None,
            n: None,
            r: None,
            cutoff: None,
            tol: None,
            k_max: None,
            sphere: None,
            radial: None,
        }
    }
}

/// `f(m) = r^m` for `m ≤ cutoff`, else 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialFunction {
    pub r: f64,
    pub cutoff: u32,
}

impl RadialFunction {
    pub fn value(&self, m: u32) -> f64 {
        if m <= self.cutoff {
            self.r.powi(m as i32)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleEntry {
    pub n: u32,
    pub r: f64,
    pub cutoff: u32,
    /// `2C0 · Σ_{m>K} (m+1) r^m`.
    pub tail: LogReal,
}

/// `2C0 · Σ_{m ≥ K+1} (m+1) r^m = 2C0 · r^{K+1}((K+2)(1−r) + r)/(1−r)²`.
fn analytic_tail(c0: LogReal, r: f64, cutoff: u32) -> LogReal {
    let k = cutoff as f64;
    LogReal::from_f64(2.0) * c0 * LogReal::powi(r, cutoff as u64 + 1)
        * LogReal::from_f64(((k + 2.0) * (1.0 - r) + r) / ((1.0 - r) * (1.0 - r)))
}

/// `r_n = 1 − 1/(n+1)` and the least `K_n` whose analytic tail is at most 1.
pub fn schedule(constants: &Constants, n: u32) -> ScheduleEntry {
    let r = 1.0 - 1.0 / (n as f64 + 1.0);
    if r == 0.0 {
        return ScheduleEntry {
            n,
            r,
            cutoff: 0,
            tail: LogReal::ZERO,
        };
    }
    // The tail is decreasing in K; jump close with logs, then step.
    let mut k: u32 = 0;
    let one = LogReal::ONE;
    let mut step: u32 = 1 << 20;
    while step > 0 {
        if analytic_tail(constants.c0, r, k + step - 1) > one {
            k += step;
        } else {
            step /= 2;
        }
    }
    while analytic_tail(constants.c0, r, k) > one {
        k += 1;
    }
    ScheduleEntry {
        n,
        r,
        cutoff: k,
        tail: analytic_tail(constants.c0, r, k),
    }
}

/// `φ_n(x) = f_n(d(o, x))` over the core.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessTable {
    pub n: u32,
    pub function: RadialFunction,
    pub values: Vec<(VertexId, String, f64)>,
    /// Largest distance from the base point with a non-zero value.
    pub support_radius: Option<u32>,
    pub certificate: NormCertificate,
    pub warning: Option<String>,
}

impl<'a, 'g> Factorization<'a, 'g> {
    fn sup_over_core<F>(&self, f: F) -> LogReal
    where
        F: Fn(usize) -> LogReal + Sync,
    {
        (0..self.table.core().len())
            .into_par_iter()
            .map(&f)
            .reduce(|| LogReal::ZERO, LogReal::max)
    }

    /// `sup_w ‖ζ+_z(w)‖ · sup_w ‖ζ−_z(w)‖` from exact Gram norms, compared
    /// with `2C0·|1−z|/(1−|z|)`.
    pub fn theta_certificate(&self, z: Complex64, tol: f64) -> Result<NormCertificate, FactorError> {
        check_disc(z)?;
        let plus = self.sup_over_core(|i| self.zeta_norm_sq_slot(i, z, Sign::Plus)).sqrt();
        let minus = self.sup_over_core(|i| self.zeta_norm_sq_slot(i, z, Sign::Minus)).sqrt();
        let ratio = (Complex64::new(1.0, 0.0) - z).norm() / (1.0 - z.norm());
        let analytic = self.constants.c * LogReal::from_f64(ratio);
        let mut cert = NormCertificate::new(CertificateKind::Theta, plus, minus, analytic, &self.constants);
        cert.z = Some(z);
        cert.tol = Some(tol);
        cert.k_max = Some(k_required(self.constants.c0_log2, z, tol));
        Ok(cert)
    }

    /// `sup_w ‖η±_k(w)‖` for `k = 0..=n`.
    fn eta_sups(&self, n: u32, sign: Sign) -> Vec<LogReal> {
        (0..=n as i64)
            .map(|k| self.sup_over_core(|i| self.eta_norm_sq_slot(i, k, sign)).sqrt())
            .collect()
    }

    /// Certificate for `χ_{d=n} = χ_{E(n)} − χ_{E(n−1)}` with
    /// `bound(E(m)) = Σ_k sup‖η+_k‖·sup‖η−_{m−k}‖`, compared with `2C0(n+1)`.
    /// The direct sum over `k` is balanced so both sides carry `√bound`.
    pub fn sphere_certificate(&self, n: u32) -> NormCertificate {
        let plus = self.eta_sups(n, Sign::Plus);
        let minus = self.eta_sups(n, Sign::Minus);
        let ball = |m: u32| -> LogReal {
            (0..=m as usize).map(|k| plus[k] * minus[m as usize - k]).sum()
        };
        let mut ball_bounds = vec![(n, ball(n))];
        if n > 0 {
            ball_bounds.insert(0, (n - 1, ball(n - 1)));
        }
        let bound: LogReal = ball_bounds.iter().map(|&(_, b)| b).sum();
        let side = bound.sqrt();
        let analytic = self.constants.c0 * LogReal::from_f64(2.0 * (n as f64 + 1.0));
        let partition_verified = verify_partition(self.table, self.params.r1, n).passed();
        let mut cert = NormCertificate::new(CertificateKind::Sphere, side, side, analytic, &self.constants);
        cert.n = Some(n);
        cert.sphere = Some(SphereDetail {
            ball_bounds,
            partition_verified,
            ratio_to_tree_value: bound / LogReal::from_f64(2.0 * (n as f64 + 1.0)),
        });
        cert
    }

    /// Weak-amenability witness `φ_n` from the schedule, with its certificate.
    pub fn witness(&self, n: u32, tol: f64) -> Result<WitnessTable, FactorError> {
        let entry = schedule(&self.constants, n);
        let (function, certificate) = radial_multiplier(self, entry.r, entry.cutoff, tol)?;
        let graph = self.table.graph();
        let dist = graph
            .distances_from(graph.base_point())
            .map_err(crate::corridor::CorridorError::from)?;
        let values: Vec<(VertexId, String, f64)> = self
            .table
            .core()
            .iter()
            .map(|&x| (x, graph.label(x), function.value(dist[x as usize])))
            .collect();
        let support_radius = values
            .iter()
            .filter(|v| v.2 != 0.0)
            .map(|v| dist[v.0 as usize])
            .max();
        Ok(WitnessTable {
            n,
            function,
            values,
            support_radius,
            certificate,
            warning: (!graph.is_group())
                .then(|| "snapshot is not a group Cayley graph; φ_n is a radial function only".into()),
        })
    }
}

/// `f(m) = r^m·[m ≤ K]` with certificate `theta(r) + Σ_{m=K+1..D} r^m·2C0(m+1)`.
pub fn radial_multiplier(
    fac: &Factorization,
    r: f64,
    cutoff: u32,
    tol: f64,
) -> Result<(RadialFunction, NormCertificate), FactorError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(FactorError::InvalidParameter(format!("radial base {r} not in (0,1)")));
    }
    let constants = fac.constants();
    let theta = fac.theta_certificate(Complex64::new(r, 0.0), tol)?;
    let diameter = fac.table().graph().core_diameter();
    let two_c0 = LogReal::from_f64(2.0) * constants.c0;
    let tail: LogReal = (cutoff.saturating_add(1)..=diameter)
        .map(|m| two_c0 * LogReal::powi(r, m as u64) * LogReal::from_f64(m as f64 + 1.0))
        .sum();
    let bound = theta.bound + tail;
    let side = bound.sqrt();
    let analytic = constants.c + analytic_tail(constants.c0, r, cutoff);
    let mut cert = NormCertificate::new(CertificateKind::Radial, side, side, analytic, constants);
    cert.r = Some(r);
    cert.cutoff = Some(cutoff);
    cert.tol = Some(tol);
    cert.radial = Some(RadialDetail {
        theta_bound: theta.bound,
        tail,
        core_diameter: diameter,
    });
    Ok((RadialFunction { r, cutoff }, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corridor::{resolve, CorridorMode, Overrides};
    use crate::providers::{gen_free_group_ball, gen_line, gen_regular_tree};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn theta_on_real_axis() {
        let g = gen_line(20).unwrap();
        let r = resolve(&g, CorridorMode::Empirical, 1.0, &Overrides::default(), 5).unwrap();
        let f = Factorization::from_resolved(&r, 1.0);
        for rr in [0.0, 0.3, 0.9] {
            let c = f.theta_certificate(Complex64::new(rr, 0.0), 1e-9).unwrap();
            assert!(c.within_analytic);
            assert!(c.bound <= f.constants().c);
            assert!(close(c.bound.to_f64(), (c.sup_norm_plus * c.sup_norm_minus).to_f64()));
            assert!(c.bound.to_f64() >= 1.0);
        }
        let c = f.theta_certificate(Complex64::new(0.0, 0.9), 1e-9).unwrap();
        assert!(c.within_analytic);
    }

    #[test]
    fn sphere_growth_is_linear() {
        let g = gen_free_group_ball(2, 4).unwrap();
        let r = resolve(&g, CorridorMode::Empirical, 1.0, &Overrides::default(), 5).unwrap();
        let f = Factorization::from_resolved(&r, 1.0);
        let c0 = f.constants().c0;
        let s0 = f.sphere_certificate(0);
        assert!(s0.bound <= c0);
        assert_eq!(s0.sphere.as_ref().unwrap().ball_bounds.len(), 1);
        for n in 0..=5 {
            let s = f.sphere_certificate(n);
            assert!(s.within_analytic);
            assert!(s.sphere.as_ref().unwrap().partition_verified);
            assert!(s.bound <= c0 * LogReal::from_f64(2.0 * n as f64 + 1.0));
        }
    }

    #[test]
    fn schedule_cutoffs_are_least() {
        let g = gen_regular_tree(2, 4).unwrap();
        let r = resolve(&g, CorridorMode::Empirical, 1.0, &Overrides::default(), 4).unwrap();
        let f = Factorization::from_resolved(&r, 1.0);
        let c = f.constants();
        let mut last = 0.0;
        for n in 1..=6 {
            let e = schedule(c, n);
            assert!(e.r > last);
            last = e.r;
            assert!(e.tail <= LogReal::ONE);
            assert!(e.cutoff == 0 || analytic_tail(c.c0, e.r, e.cutoff - 1) > LogReal::ONE);
            // brute-force partial sums approach the closed form
            let brute: f64 = (e.cutoff + 1..e.cutoff + 4000)
                .map(|m| 2.0 * c.c0.to_f64() * (m as f64 + 1.0) * e.r.powi(m as i32))
                .sum();
            assert!(close(brute, e.tail.to_f64()));
        }
    }

    #[test]
    fn radial_beyond_diameter_is_theta() {
        let g = gen_line(30).unwrap();
        let r = resolve(&g, CorridorMode::Empirical, 1.0, &Overrides::default(), 5).unwrap();
        let f = Factorization::from_resolved(&r, 1.0);
        let (func, cert) = radial_multiplier(&f, 0.9, 40, 1e-9).unwrap();
        let theta = f.theta_certificate(Complex64::new(0.9, 0.0), 1e-9).unwrap();
        assert_eq!(cert.radial.as_ref().unwrap().tail, LogReal::ZERO);
        assert!(close(cert.bound.to_f64(), theta.bound.to_f64()));
        assert_eq!(func.value(41), 0.0);
        let (_, cut) = radial_multiplier(&f, 0.9, 10, 1e-9).unwrap();
        let c0 = f.constants().c0.to_f64();
        let tail: f64 = (11..=30).map(|m| 0.9f64.powi(m) * 2.0 * c0 * (m as f64 + 1.0)).sum();
        assert!(close(cut.bound.to_f64(), theta.bound.to_f64() + tail));
    }

    #[test]
    fn witness_values() {
        let g = gen_free_group_ball(2, 3).unwrap();
        let r = resolve(&g, CorridorMode::Empirical, 1.0, &Overrides::default(), 3).unwrap();
        let f = Factorization::from_resolved(&r, 1.0);
        let w1 = f.witness(1, 1e-9).unwrap();
        let w2 = f.witness(2, 1e-9).unwrap();
        assert!(w1.warning.is_none());
        assert_eq!(w1.values[0].2, 1.0);
        for (a, b) in w1.values.iter().zip(&w2.values) {
            assert!(a.2 <= b.2 && b.2 <= 1.0);
        }
        let line = gen_line(6).unwrap();
        let r = resolve(&line, CorridorMode::Empirical, 1.0, &Overrides::default(), 3).unwrap();
        let f = Factorization::from_resolved(&r, 1.0);
        assert!(f.witness(1, 1e-9).unwrap().warning.is_some());
    }
}
