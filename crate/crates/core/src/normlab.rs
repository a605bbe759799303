//! Norms of Schur multipliers on finite kernel sections: spectral norms,
//! witness-based lower bounds, the completely bounded norm by
//! semidefinite feasibility, and eigenvalue positivity checks.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{matrix_to_text, KernelMatrix};

type CMat = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("shape mismatch: kernel is {kernel}x{kernel}, matrix is {rows}x{cols}")]
    Shape { kernel: usize, rows: usize, cols: usize },
    #[error("kernel is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("section dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Dimensions up to this use a full singular value decomposition.
pub const DENSE_LIMIT: usize = 64;
const POWER_CAP: usize = 20_000;

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> Result<f64, NormError> {
    if a.is_empty() {
        return Ok(0.0);
    }
    if a.nrows().max(a.ncols()) <= DENSE_LIMIT {
        return Ok(a.singular_values().max());
    }
    power_norm(a)
}

/// Power iteration on `A*A`. A stalled run restarts once from a second
/// deterministic vector.
pub fn power_norm(a: &CMat) -> Result<f64, NormError> {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Ok(0.0);
    }
    let ah = a.adjoint();
    let starts = [
        DVector::from_fn(n, |i, _| Complex64::new(1.0 + i as f64 / n as f64, 0.0)),
        DVector::from_fn(n, |i, _| Complex64::new(((i * 7 + 3) % 11) as f64 - 5.0, (i % 3) as f64)),
    ];
    let mut last = NormError::NotConverged { iterations: 0, residual: f64::INFINITY };
    for start in starts {
        let mut v = start.normalize();
        let mut sigma2 = 0.0;
        for it in 1..=POWER_CAP {
            let w = &ah * (a * &v);
            let next = w.norm();
            if next == 0.0 {
                break;
            }
            let residual = (&w - v.scale(next)).norm() / next;
            v = w.unscale(next);
            if (next - sigma2).abs() <= 1e-13 * next && residual <= 1e-5 {
                return Ok(next.sqrt());
            }
            sigma2 = next;
            last = NormError::NotConverged { iterations: it, residual };
        }
    }
    Err(last)
}

/// Sum of singular values.
pub fn trace_norm(a: &CMat) -> f64 {
    a.singular_values().sum()
}

/// `m_k(A) = [k(x,y)·A_{x,y}]`.
pub fn schur_apply(kernel: &KernelMatrix, a: &CMat) -> Result<CMat, NormError> {
    let n = kernel.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(NormError::Shape { kernel: n, rows: a.nrows(), cols: a.ncols() });
    }
    Ok(kernel.data.component_mul(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Matrix units, the identity and the all-ones matrix.
    Basis,
    /// Rank-one sign patterns `s tᵀ` on random row and column supports.
    RankOneSigns,
    /// Matrices with independent complex Gaussian entries.
    RandomGaussian,
    /// Alternating ascent between a witness and the trace-norm dual pair
    /// `(a, b)` maximizing `‖D_a K D_b‖_1`.
    DualPolar,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Basis,
        Strategy::RankOneSigns,
        Strategy::RandomGaussian,
        Strategy::DualPolar,
    ];
}

/// `value = ‖m_k(A)‖/‖A‖` for the stored witness `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundResult {
    pub value: f64,
    pub strategy: Strategy,
    pub witness_descriptor: String,
    pub seed: u64,
    pub candidates_tried: usize,
    #[serde(skip)]
    pub witness: CMat,
}

impl LowerBoundResult {
    /// Recomputes the ratio from the stored witness.
    pub fn recheck(&self, kernel: &KernelMatrix) -> Result<f64, NormError> {
        ratio(kernel, &self.witness)
    }

    pub fn witness_text(&self) -> String {
        matrix_to_text(&self.witness)
    }
}

fn ratio(kernel: &KernelMatrix, a: &CMat) -> Result<f64, NormError> {
    let den = spectral_norm(a)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(spectral_norm(&schur_apply(kernel, a)?)? / den)
}

const SIGN_SAMPLES: usize = 24;
const GAUSSIAN_SAMPLES: usize = 8;
const POLAR_RANDOM_STARTS: usize = 4;
const POLAR_STEPS: usize = 500;

struct Best {
    value: f64,
    strategy: Strategy,
    descriptor: String,
    witness: CMat,
    tried: usize,
}

impl Best {
    fn offer(&mut self, kernel: &KernelMatrix, strategy: Strategy, descriptor: String, a: CMat) -> Result<f64, NormError> {
        self.tried += 1;
        let v = ratio(kernel, &a)?;
        if v > self.value {
            *self = Best { value: v, strategy, descriptor, witness: a, tried: self.tried };
        }
        Ok(v)
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// The polar step: top singular pair `(u, v)` of `m_k(A)`, then the
/// partial isometry of `D_{ū} K D_v`, conjugated.
fn polar_step(kernel: &KernelMatrix, a: &CMat) -> CMat {
    let b = kernel.data.component_mul(a);
    let svd = b.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let top = svd
        .singular_values
        .iter()
        .enumerate()
        .fold(0, |best, (i, s)| if *s > svd.singular_values[best] { i } else { best });
    let n = kernel.dim();
    // B v = σ u with v the top right singular vector (row of V*, conjugated).
    let m = DMatrix::from_fn(n, n, |i, j| u[(i, top)].conj() * kernel.data[(i, j)] * vt[(top, j)].conj());
    let svd = m.svd(true, true);
    (svd.u.unwrap() * svd.v_t.unwrap()).map(|c| c.conj())
}

/// Best witness over the requested strategies. Deterministic in `seed`.
pub fn lower_bound(kernel: &KernelMatrix, strategies: &[Strategy], seed: u64) -> Result<LowerBoundResult, NormError> {
    if strategies.is_empty() {
        return Err(NormError::InvalidParameter("no lower-bound strategy selected".into()));
    }
    let n = kernel.dim();
    let one = Complex64::new(1.0, 0.0);
    let mut best = Best {
        value: 0.0,
        strategy: strategies[0],
        descriptor: "zero".into(),
        witness: DMatrix::zeros(n, n),
        tried: 0,
    };
    if n == 0 {
        return Ok(LowerBoundResult {
            value: 0.0,
            strategy: best.strategy,
            witness_descriptor: best.descriptor,
            seed,
            candidates_tried: 0,
            witness: best.witness,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &s in strategies {
        match s {
            Strategy::Basis => {
                let (mut bi, mut bj, mut bv) = (0, 0, -1.0);
                for i in 0..n {
                    for j in 0..n {
                        if kernel.data[(i, j)].norm() > bv {
                            (bi, bj, bv) = (i, j, kernel.data[(i, j)].norm());
                        }
                    }
                }
                let mut unit = DMatrix::zeros(n, n);
                unit[(bi, bj)] = one;
                best.offer(kernel, s, format!("matrix unit ({bi},{bj})"), unit)?;
                best.offer(kernel, s, "identity".into(), DMatrix::identity(n, n))?;
                best.offer(kernel, s, "all ones".into(), DMatrix::from_element(n, n, one))?;
            }
            Strategy::RankOneSigns => {
                for t in 0..SIGN_SAMPLES {
                    let mut pick = || -> Vec<f64> {
                        (0..n)
                            .map(|_| match rng.random_range(0..3) {
                                0 => 0.0,
                                1 => 1.0,
                                _ => -1.0,
                            })
                            .collect()
                    };
                    let (s1, s2) = (pick(), pick());
                    let a = DMatrix::from_fn(n, n, |i, j| Complex64::new(s1[i] * s2[j], 0.0));
                    best.offer(kernel, s, format!("sign pattern sample {t}"), a)?;
                }
            }
            Strategy::RandomGaussian => {
                for t in 0..GAUSSIAN_SAMPLES {
                    let a = gaussian(&mut rng, n);
                    best.offer(kernel, s, format!("gaussian sample {t}"), a)?;
                }
            }
            Strategy::DualPolar => {
                let mut starts: Vec<(String, CMat)> = vec![
                    ("identity".into(), DMatrix::identity(n, n)),
                    ("all ones".into(), DMatrix::from_element(n, n, one)),
                    (
                        "kernel phases".into(),
                        kernel.data.map(|c| if c.norm() > 0.0 { (c / c.norm()).conj() } else { one }),
                    ),
                ];
                for t in 0..POLAR_RANDOM_STARTS {
                    starts.push((format!("gaussian start {t}"), gaussian(&mut rng, n)));
                }
                for (name, start) in starts {
                    let mut a = start;
                    let mut prev = ratio(kernel, &a)?;
                    for step in 1..=POLAR_STEPS {
                        a = polar_step(kernel, &a);
                        let v = best.offer(kernel, s, format!("polar ascent from {name}, step {step}"), a.clone())?;
                        if v <= prev * (1.0 + 1e-14) + 1e-300 {
                            break;
                        }
                        prev = v;
                    }
                }
            }
        }
    }
    Ok(LowerBoundResult {
        value: best.value,
        strategy: best.strategy,
        witness_descriptor: best.descriptor,
        seed,
        candidates_tried: best.tried,
        witness: best.witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_dim: usize,
    /// Alternating-projection iterations allowed per bisection step.
    pub max_iterations: usize,
    /// Weight-balancing steps used to tighten the bracket before
    /// bisecting; 0 leaves the bisection to alternating projections alone.
    pub balance_steps: usize,
    pub seed: u64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol: 1e-7, max_dim: DENSE_LIMIT, max_iterations: 4000, balance_steps: 3000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CbNormResult {
    pub value: f64,
    pub tol: f64,
    /// Total alternating-projection iterations.
    pub iterations: usize,
    pub bisection_steps: usize,
    /// Diagonal shift that made the last accepted block matrix positive
    /// semidefinite.
    pub feasibility_residual: f64,
    pub method: String,
    /// `[max|k|, dim·max|k|]`.
    pub initial_bracket: (f64, f64),
    pub final_bracket: (f64, f64),
    /// From a stored witness; a true lower bound.
    pub lower_certified: f64,
    /// From an explicit positive semidefinite block matrix; a true upper
    /// bound.
    pub upper_certified: f64,
    /// The certified bounds are further apart than `max(10·tol, 1e-6)`.
    pub inconclusive: bool,
}

/// Feasibility state for one bisection run. `G` is the Hermitian block
/// matrix `[[X, K], [K*, Y]]`.
struct Projector<T: ComplexField<RealField = f64> + Copy> {
    k: DMatrix<T>,
    g: DMatrix<T>,
    iterations: usize,
}

enum Verdict {
    /// Certified: `G + shift·I` is positive semidefinite with diagonal `t + shift`.
    Feasible { shift: f64 },
    Infeasible,
}

impl<T: ComplexField<RealField = f64> + Copy> Projector<T> {
    fn new(k: DMatrix<T>, g: DMatrix<T>) -> Self {
        Projector { k, g, iterations: 0 }
    }

    fn project_affine(&mut self, t: f64) {
        let n = self.k.nrows();
        self.g.view_mut((0, n), (n, n)).copy_from(&self.k);
        self.g.view_mut((n, 0), (n, n)).copy_from(&self.k.adjoint());
        for i in 0..2 * n {
            self.g[(i, i)] = T::from_real(t);
        }
    }

    /// Alternates between the affine set at `t` and `{G ⪰ margin·I}` until
    /// the affine point is within `accept` of positive semidefinite, or
    /// progress stalls.
    fn decide(&mut self, t: f64, margin: f64, accept: f64, cap: usize) -> Verdict {
        let mut best = f64::NEG_INFINITY;
        let mut best_at = 0;
        for it in 0..cap {
            self.project_affine(t);
            self.iterations += 1;
            let eig = self.g.clone().symmetric_eigen();
            let min = eig.eigenvalues.min();
            if min >= -accept {
                return Verdict::Feasible { shift: (-min).max(0.0) };
            }
            if min > best + 1e-3 * best.abs().max(accept) {
                best = min;
                best_at = it;
            } else if it - best_at > 200 {
                return Verdict::Infeasible;
            }
            let clipped = eig.eigenvalues.map(|l| l.max(margin));
            let q = &eig.eigenvectors;
            let d = DMatrix::from_diagonal(&clipped.map(T::from_real));
            self.g = q * d * q.adjoint();
        }
        Verdict::Infeasible
    }
}

fn bisect<T: ComplexField<RealField = f64> + Copy>(
    k: DMatrix<T>,
    start: DMatrix<T>,
    lo0: f64,
    (hi0, residual0): (f64, f64),
    opts: &SdpOptions,
) -> (f64, f64, f64, f64, usize, usize) {
    let mut proj = Projector::new(k, start);
    let (mut lo, mut hi) = (lo0, hi0);
    let mut upper = hi0;
    let mut residual = residual0;
    let mut steps = 0;
    let accept = opts.tol / 4.0;
    while hi - lo > opts.tol {
        steps += 1;
        let t = 0.5 * (lo + hi);
        match proj.decide(t, 0.5 * (t - lo), accept, opts.max_iterations) {
            Verdict::Feasible { shift } => {
                hi = t;
                residual = shift;
                upper = upper.min(t + shift);
            }
            Verdict::Infeasible => lo = t,
        }
    }
    (lo, hi, upper, residual, proj.iterations, steps)
}

/// Weights `p, q` on the two index sets (each summing to 1) give
/// `D_√p K D_√q = UΣV*`, the lower bound `Σσ` (witnessed by the conjugated
/// polar part `conj(UV*)`), and the factorization `K = P·Q` with
/// `P = D_√p⁻¹UΣ^½`, `Q = Σ^½V*D_√q⁻¹`. The squared row norms of `P` are the
/// gradient of `Σσ` in `p`; the multiplicative update `p_i ← p_i·r_i/Σσ`
/// equalizes them, which is where the two bounds meet.
struct Balance {
    lower: f64,
    witness: CMat,
    upper: f64,
    gram: CMat,
    /// Diagonal shift the eigenvalue check added to `upper`.
    shift: f64,
    steps: usize,
}

fn weights_floor(p: &mut DVector<f64>) {
    let m = p.max();
    p.apply(|v| *v = v.max(1e-30 * m).max(f64::MIN_POSITIVE));
    let s = p.sum();
    p.unscale_mut(s);
}

fn balance(kernel: &KernelMatrix, mut p: DVector<f64>, mut q: DVector<f64>, tol: f64, cap: usize) -> Balance {
    let n = kernel.dim();
    let mut out = Balance {
        lower: 0.0,
        witness: DMatrix::zeros(n, n),
        upper: f64::INFINITY,
        gram: DMatrix::zeros(2 * n, 2 * n),
        shift: 0.0,
        steps: 0,
    };
    let mut best_pq = None;
    for step in 0..cap {
        out.steps = step + 1;
        weights_floor(&mut p);
        weights_floor(&mut q);
        let (a, b) = (p.map(f64::sqrt), q.map(f64::sqrt));
        let m = DMatrix::from_fn(n, n, |i, j| kernel.data[(i, j)] * a[i] * b[j]);
        let svd = m.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let sig = &svd.singular_values;
        let f = sig.sum();
        if f == 0.0 {
            break;
        }
        let r = DVector::from_fn(n, |i, _| (0..n).map(|k| u[(i, k)].norm_sqr() * sig[k]).sum::<f64>() / p[i]);
        let c = DVector::from_fn(n, |j, _| (0..n).map(|k| vt[(k, j)].norm_sqr() * sig[k]).sum::<f64>() / q[j]);
        let est = (r.max() * c.max()).sqrt();
        if f > out.lower {
            out.lower = f;
            out.witness = (&u * &vt).map(|z| z.conj());
        }
        if est < out.upper {
            out.upper = est;
            best_pq = Some((a.clone(), b.clone(), u.clone(), vt.clone(), sig.clone()));
        }
        if out.upper - out.lower <= tol {
            break;
        }
        p.component_mul_assign(&r);
        q.component_mul_assign(&c);
    }
    let Some((a, b, u, vt, sig)) = best_pq else {
        return out;
    };
    let root = sig.map(f64::sqrt);
    let pm = DMatrix::from_fn(n, n, |i, k| u[(i, k)] * root[k] / a[i]);
    let qm = DMatrix::from_fn(n, n, |k, j| vt[(k, j)] * root[k] / b[j]);
    let x = &pm * pm.adjoint();
    let y = qm.adjoint() * &qm;
    let mx = (0..n).map(|i| x[(i, i)].re).fold(0.0, f64::max);
    let my = (0..n).map(|i| y[(i, i)].re).fold(0.0, f64::max);
    if !(mx > 0.0 && my > 0.0 && mx.is_finite() && my.is_finite()) {
        out.upper = f64::INFINITY;
        return out;
    }
    let scale = (my / mx).sqrt();
    let t = (mx * my).sqrt();
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&x.scale(scale));
    g.view_mut((n, n), (n, n)).copy_from(&y.unscale(scale));
    g.view_mut((0, n), (n, n)).copy_from(&kernel.data);
    g.view_mut((n, 0), (n, n)).copy_from(&kernel.data.adjoint());
    // The Gram matrix is positive semidefinite up to rounding; the eigenvalue
    // check turns it into a certified bound.
    let mut check = g.clone();
    for i in 0..2 * n {
        check[(i, i)] = Complex64::new(t, 0.0);
    }
    let shift = (-check.symmetric_eigen().eigenvalues.min()).max(0.0);
    out.upper = t + shift;
    out.shift = shift;
    out.gram = g;
    out
}

/// Weights from the top singular pair of `m_k(A)`, mixed with uniform ones.
fn weights_from_witness(kernel: &KernelMatrix, a: &CMat) -> (DVector<f64>, DVector<f64>) {
    let n = kernel.dim();
    let svd = kernel.data.component_mul(a).svd(true, true);
    let top = svd.singular_values.imax();
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mix = |w: DVector<f64>| w.map(|v| 0.5 * v + 0.5 / n as f64);
    (
        mix(DVector::from_fn(n, |i, _| u[(i, top)].norm_sqr())),
        mix(DVector::from_fn(n, |j, _| vt[(top, j)].norm_sqr())),
    )
}

/// `‖m_k‖_cb` by bisection on `t`, deciding `‖m_k‖_cb ≤ t` through the
/// block matrix `[[X, K], [K*, Y]] ⪰ 0` with `diag X = diag Y = t`.
pub fn cb_norm_sdp(kernel: &KernelMatrix, opts: &SdpOptions) -> Result<CbNormResult, NormError> {
    if !(opts.tol > 0.0) {
        return Err(NormError::InvalidParameter(format!("tol must be positive, got {}", opts.tol)));
    }
    let n = kernel.dim();
    if n > opts.max_dim {
        return Err(NormError::TooLarge { dim: n, cap: opts.max_dim });
    }
    let m = kernel.max_abs();
    let initial = (m, n as f64 * m);
    let witness = lower_bound(kernel, &[Strategy::Basis, Strategy::DualPolar], opts.seed)?;
    let uniform = DVector::from_element(n, 1.0 / n.max(1) as f64);
    let (pw, qw) = if n > 0 { weights_from_witness(kernel, &witness.witness) } else { (uniform.clone(), uniform.clone()) };
    let runs = [
        balance(kernel, uniform.clone(), uniform, opts.tol / 4.0, opts.balance_steps),
        balance(kernel, pw, qw, opts.tol / 4.0, opts.balance_steps),
    ];
    let mut lower = witness.value;
    for run in &runs {
        if run.lower > lower {
            lower = lower.max(ratio(kernel, &run.witness)?);
        }
    }
    let fact = runs.iter().min_by(|a, b| a.upper.total_cmp(&b.upper)).unwrap();
    let lo0 = initial.0.max(lower.min(initial.1));
    let (start, hi0) = if fact.upper < initial.1 {
        (fact.gram.clone(), (fact.upper, fact.shift))
    } else {
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        g.view_mut((0, n), (n, n)).copy_from(&kernel.data);
        g.view_mut((n, 0), (n, n)).copy_from(&kernel.data.adjoint());
        (g, (initial.1, 0.0))
    };
    let real = kernel.is_real();
    let (lo, hi, upper, residual, iterations, steps) = if m == 0.0 {
        (0.0, 0.0, 0.0, 0.0, 0, 0)
    } else if real {
        bisect(kernel.data.map(|c| c.re), start.map(|c| c.re), lo0, hi0, opts)
    } else {
        bisect(kernel.data.clone(), start, lo0, hi0, opts)
    };
    let value = (0.5 * (lo + hi)).max(m);
    Ok(CbNormResult {
        value,
        tol: opts.tol,
        iterations,
        bisection_steps: steps,
        feasibility_residual: residual,
        method: format!(
            "bisection with alternating projections ({} arithmetic), bracket tightened by certified witness and factorization bounds",
            if real { "real" } else { "complex" }
        ),
        initial_bracket: initial,
        final_bracket: (lo, hi),
        lower_certified: lower,
        upper_certified: upper,
        inconclusive: upper - lower > (10.0 * opts.tol).max(1e-6),
    })
}

/// Minimum eigenvalue of a Hermitian section.
pub fn psd_min_eig(kernel: &KernelMatrix) -> Result<f64, NormError> {
    let n = kernel.dim();
    if n == 0 {
        return Ok(0.0);
    }
    let scale = kernel.max_abs().max(1.0);
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            dev = dev.max((kernel.data[(i, j)] - kernel.data[(j, i)].conj()).norm());
        }
    }
    if dev > 1e-12 * scale {
        return Err(NormError::NotHermitian(dev));
    }
    Ok(if kernel.is_real() {
        kernel.data.map(|c| c.re).symmetric_eigen().eigenvalues.min()
    } else {
        kernel.data.clone().symmetric_eigen().eigenvalues.min()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichDiagnostics {
    pub witness_text: String,
    pub certificate: Option<serde_json::Value>,
}

/// `lower ≤ sdp + tol ≤ certificate + tol`, with the three values and gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub dim: usize,
    pub lower: LowerBoundResult,
    pub sdp: CbNormResult,
    pub certificate: Option<f64>,
    pub gap_lower_sdp: f64,
    pub gap_sdp_certificate: Option<f64>,
    pub ordered: bool,
    pub diagnostics: Option<SandwichDiagnostics>,
}

pub fn sandwich_report(
    kernel: &KernelMatrix,
    certificate: Option<(f64, serde_json::Value)>,
    opts: &SdpOptions,
) -> Result<SandwichReport, NormError> {
    let lower = lower_bound(kernel, &Strategy::ALL, opts.seed)?;
    let sdp = cb_norm_sdp(kernel, opts)?;
    let bound = certificate.as_ref().map(|c| c.0);
    let ordered = lower.value <= sdp.value + opts.tol
        && bound.is_none_or(|b| sdp.value <= b + opts.tol);
    let diagnostics = (!ordered).then(|| SandwichDiagnostics {
        witness_text: lower.witness_text(),
        certificate: certificate.as_ref().map(|c| c.1.clone()),
    });
    Ok(SandwichReport {
        dim: kernel.dim(),
        gap_lower_sdp: sdp.value - lower.value,
        gap_sdp_certificate: bound.map(|b| b - sdp.value),
        certificate: bound,
        lower,
        sdp,
        ordered,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> KernelMatrix {
        KernelMatrix::from_real("test", rows).unwrap()
    }

    #[test]
    fn spectral_norm_basics() {
        let id = DMatrix::<Complex64>::identity(5, 5);
        assert!((spectral_norm(&id).unwrap() - 1.0).abs() < 1e-12);
        let ones = DMatrix::from_element(7, 7, Complex64::new(1.0, 0.0));
        assert!((spectral_norm(&ones).unwrap() - 7.0).abs() < 1e-12);
        assert!((power_norm(&ones).unwrap() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a = gaussian(&mut rng, 8);
            let s = spectral_norm(&a).unwrap();
            let p = power_norm(&a).unwrap();
            assert!((s - p).abs() <= 1e-6 * s, "{s} vs {p}");
        }
        let big = gaussian(&mut rng, 70);
        let s = big.singular_values().max();
        assert!((spectral_norm(&big).unwrap() - s).abs() <= 1e-8 * s);
    }

    #[test]
    fn spectral_norm_grid_oracle_2x2() {
        let a = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.3, 0.1), Complex64::new(-1.2, 0.0),
            Complex64::new(0.5, -0.4), Complex64::new(0.8, 0.2),
        ]);
        // v = (cos s, e^{iφ} sin s) covers the unit sphere up to a phase.
        let mut best: f64 = 0.0;
        let steps = 2000;
        for p in 0..steps {
            let s = std::f64::consts::FRAC_PI_2 * p as f64 / (steps - 1) as f64;
            for q in 0..steps {
                let phi = std::f64::consts::TAU * q as f64 / steps as f64;
                let v = DVector::from_vec(vec![
                    Complex64::new(s.cos(), 0.0),
                    Complex64::from_polar(s.sin(), phi),
                ]);
                best = best.max((&a * v).norm());
            }
        }
        assert!((spectral_norm(&a).unwrap() - best).abs() < 1e-5);
    }

    #[test]
    fn schur_apply_cases() {
        let a = DMatrix::from_fn(3, 3, |i, j| Complex64::new((i * 3 + j) as f64, 1.0));
        let ones = real(&[&[1.0; 3], &[1.0; 3], &[1.0; 3]]);
        assert_eq!(schur_apply(&ones, &a).unwrap(), a);
        let diag = real(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let d = schur_apply(&diag, &a).unwrap();
        assert_eq!(d, DMatrix::from_diagonal(&a.diagonal()));
        assert!(schur_apply(&diag, &DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn lower_bound_witnesses_recheck() {
        let ones = real(&[&[1.0; 4], &[1.0; 4], &[1.0; 4], &[1.0; 4]]);
        let lb = lower_bound(&ones, &Strategy::ALL, 0).unwrap();
        assert!((lb.value - 1.0).abs() < 1e-12);
        let mut single = DMatrix::zeros(3, 3);
        single[(1, 2)] = Complex64::new(0.0, 2.0);
        let k = KernelMatrix::custom("delta", single).unwrap();
        let lb = lower_bound(&k, &[Strategy::Basis], 0).unwrap();
        assert!(lb.value >= 2.0 - 1e-12);
        assert!((lb.recheck(&k).unwrap() - lb.value).abs() < 1e-12);
        assert!(lower_bound(&k, &[], 0).is_err());
    }

    #[test]
    fn lower_bound_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = KernelMatrix::custom("g", gaussian(&mut rng, 6)).unwrap();
        let a = lower_bound(&k, &Strategy::ALL, 5).unwrap();
        let b = lower_bound(&k, &Strategy::ALL, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cb_norm_trivial_cases() {
        let opts = SdpOptions::default();
        let ones = real(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let r = cb_norm_sdp(&ones, &opts).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6, "{r:?}");
        let d = real(&[&[-3.0, 0.0], &[0.0, 2.0]]);
        let r = cb_norm_sdp(&d, &opts).unwrap();
        assert!((r.value - 3.0).abs() <= 1e-6, "{r:?}");
        let c = KernelMatrix::custom("c", DMatrix::from_element(3, 3, Complex64::new(0.0, -0.5))).unwrap();
        let r = cb_norm_sdp(&c, &opts).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-6, "{r:?}");
        assert!(!r.inconclusive);
    }

    /// Dual side: `max over a, b ≥ 0 unit of ‖D_a K D_b‖_1`, and for 2×2
    /// `‖M‖_1 = sqrt(‖M‖_F² + 2|det M|)`.
    fn triangular_dual_grid(steps: usize) -> f64 {
        let mut best: f64 = 0.0;
        for p in 0..=steps {
            let al = std::f64::consts::FRAC_PI_2 * p as f64 / steps as f64;
            for q in 0..=steps {
                let be = std::f64::consts::FRAC_PI_2 * q as f64 / steps as f64;
                let (a1, a2, b1, b2) = (al.cos(), al.sin(), be.cos(), be.sin());
                let (m11, m12, m22) = (a1 * b1, a1 * b2, a2 * b2);
                let f2 = m11 * m11 + m12 * m12 + m22 * m22;
                best = best.max((f2 + 2.0 * (m11 * m22).abs()).sqrt());
            }
        }
        best
    }

    /// Primal side: `K = [⟨x_i, y_j⟩]` with `y1 = (s,0)`, `x2 = (0,u)`,
    /// `x1 = (1/s, v)`, `y2 = (s(1 − v/u), 1/u)`; minimize the largest
    /// squared norm over a grid that is refined around the best point.
    fn triangular_primal_grid(steps: usize, rounds: usize) -> f64 {
        let cost = |s: f64, u: f64, v: f64| {
            let y2 = (s * (1.0 - v / u), 1.0 / u);
            (1.0 / (s * s) + v * v)
                .max(u * u)
                .max(s * s)
                .max(y2.0 * y2.0 + y2.1 * y2.1)
        };
        let (mut centre, mut width) = ([1.0, 1.0, 0.0], [1.0, 1.0, 2.0]);
        let mut best = f64::INFINITY;
        for _ in 0..rounds {
            let at = |axis: usize, i: usize| {
                centre[axis] - width[axis] / 2.0 + width[axis] * i as f64 / steps as f64
            };
            let mut arg = centre;
            for a in 0..=steps {
                for b in 0..=steps {
                    for c in 0..=steps {
                        let (s, u, v) = (at(0, a), at(1, b), at(2, c));
                        if s <= 0.0 || u <= 0.0 {
                            continue;
                        }
                        let f = cost(s, u, v);
                        if f < best {
                            best = f;
                            arg = [s, u, v];
                        }
                    }
                }
            }
            centre = arg;
            width = width.map(|w| w / 8.0);
        }
        best
    }

    #[test]
    fn triangular_kernel_matches_grid_oracles() {
        let dual = triangular_dual_grid(2000);
        let primal = triangular_primal_grid(80, 5);
        assert!(primal >= dual - 1e-9 && primal - dual < 1e-3, "{primal} {dual}");
        let tri = real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let r = cb_norm_sdp(&tri, &SdpOptions::default()).unwrap();
        assert!((r.value - dual).abs() < 1e-3, "{} vs {dual}", r.value);
        assert!((r.value - 2.0 / 3f64.sqrt()).abs() < 1e-5);
        let lb = lower_bound(&tri, &Strategy::ALL, 0).unwrap();
        assert!(lb.value <= r.value + 1e-6 && r.value <= 2.0);
    }

    #[test]
    fn psd_kernel_with_unit_diagonal_has_norm_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = gaussian(&mut rng, 5);
        let g = &b * b.adjoint();
        let d = g.diagonal().map(|c| 1.0 / c.re.sqrt());
        let k = DMatrix::from_fn(5, 5, |i, j| g[(i, j)] * d[i] * d[j]);
        let k = KernelMatrix::custom("gram", k).unwrap();
        assert!(psd_min_eig(&k).unwrap() > -1e-10);
        let r = cb_norm_sdp(&k, &SdpOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6, "{r:?}");
    }

    #[test]
    fn psd_min_eig_rejects_non_hermitian() {
        let tri = real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(psd_min_eig(&tri), Err(NormError::NotHermitian(_))));
        let m = real(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!((psd_min_eig(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projections_alone_reach_the_norm() {
        let opts = SdpOptions { tol: 1e-4, balance_steps: 0, ..SdpOptions::default() };
        for (rows, want) in [
            (vec![vec![1.0, 1.0], vec![1.0, 1.0]], 1.0),
            (vec![vec![0.5, 0.0], vec![0.0, -2.0]], 2.0),
            (vec![vec![1.0, 1.0], vec![0.0, 1.0]], 2.0 / 3f64.sqrt()),
        ] {
            let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            let r = cb_norm_sdp(&real(&refs), &opts).unwrap();
            assert!((r.value - want).abs() <= 2e-4, "{r:?}");
            assert!(r.upper_certified >= want - 1e-9);
        }
    }

    #[test]
    fn cb_norm_too_large() {
        let k = KernelMatrix::custom("big", DMatrix::zeros(65, 65)).unwrap();
        assert!(matches!(
            cb_norm_sdp(&k, &SdpOptions::default()),
            Err(NormError::TooLarge { .. })
        ));
    }
}
