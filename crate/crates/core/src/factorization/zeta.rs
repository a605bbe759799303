use num_complex::Complex64;
use serde::Serialize;

use super::tensor::TensorVector;
use super::xi::Sign;
use super::{check_disc, FactorError, Factorization};
use crate::graph::VertexId;
use crate::logreal::LogReal;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaTerm {
    pub coefficient: Complex64,
    pub level: u32,
    pub vector: TensorVector,
}

/// `ζ+_z(w) = conj(√(1−z)) Σ_k conj(z)^k η+_k(w)` or
/// `ζ−_z(w) = √(1−z) Σ_l z^l η−_l(w)`, truncated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaVector {
    pub sign: Sign,
    pub z: Complex64,
    pub prefactor: Complex64,
    pub terms: Vec<ZetaTerm>,
    /// Last level kept.
    pub k_max: u32,
    /// Level the tolerance asked for.
    pub k_required: u32,
    /// Set when the series stopped early because `η` vanishes on the snapshot.
    pub exhausted: bool,
}

impl ZetaVector {
    /// `‖ζ‖²` from the Gram matrix of the terms; entries with levels two or
    /// more apart vanish and are skipped.
    pub fn norm_sq(&self) -> LogReal {
        let mut acc = LogReal::ZERO;
        for (a, ta) in self.terms.iter().enumerate() {
            for tb in &self.terms[a..] {
                let gap = tb.level.abs_diff(ta.level);
                if gap > 1 {
                    continue;
                }
                let w = (ta.coefficient.conj() * tb.coefficient).re;
                let w = if gap == 0 { w } else { 2.0 * w };
                acc = acc + LogReal::from_f64(w) * ta.vector.inner(&tb.vector);
            }
        }
        acc * LogReal::from_f64(self.prefactor.norm_sqr())
    }

    /// `⟨self, other⟩ = Σ conj(self)·other`, in `f64`.
    pub fn inner(&self, other: &ZetaVector) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ta in &self.terms {
            for tb in &other.terms {
                let g = ta.vector.inner(&tb.vector).to_f64();
                if g != 0.0 {
                    acc += ta.coefficient.conj() * tb.coefficient * g;
                }
            }
        }
        acc * self.prefactor.conj() * other.prefactor
    }
}

/// Smallest `K` with `√C0·|1−z|^{1/2}·|z|^{K+1}/(1−|z|) ≤ tol`.
pub fn k_required(c0_log2: f64, z: Complex64, tol: f64) -> u32 {
    let r = z.norm();
    if r == 0.0 {
        return 0;
    }
    let lhs0 = 0.5 * c0_log2 + 0.5 * (Complex64::new(1.0, 0.0) - z).norm().log2() - (1.0 - r).log2();
    // lhs0 + (K+1)·log2 r ≤ log2 tol
    let need = (tol.log2() - lhs0) / r.log2();
    if need <= 1.0 {
        0
    } else {
        (need.ceil() - 1.0).min(u32::MAX as f64 / 4.0) as u32
    }
}

/// One entry of the kernel realized by `ζ±_z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEntry {
    pub x: VertexId,
    pub y: VertexId,
    pub distance: u32,
    pub value: Complex64,
    /// `z^{d(x,y)}`.
    pub target: Complex64,
    pub deviation: f64,
    /// `|1−z|·|z|^{K+1}/(1−|z|)` at the level actually used.
    pub bound: f64,
    pub k_required: u32,
    /// Level actually used; `-1` when not even level 0 is trustworthy.
    pub k_effective: i64,
    /// Set when the snapshot forced `k_effective < k_required`.
    pub clamped: bool,
}

impl<'a, 'g> Factorization<'a, 'g> {
    fn coefficient(z: Complex64, k: u32, sign: Sign) -> Complex64 {
        match sign {
            Sign::Plus => z.conj().powu(k),
            Sign::Minus => z.powu(k),
        }
    }

    fn prefactor(z: Complex64, sign: Sign) -> Complex64 {
        let s = (Complex64::new(1.0, 0.0) - z).sqrt();
        match sign {
            Sign::Plus => s.conj(),
            Sign::Minus => s,
        }
    }

    /// The truncated series for `ζ±_z(w)`.
    pub fn zeta(
        &self,
        w: VertexId,
        z: Complex64,
        sign: Sign,
        tol: f64,
    ) -> Result<ZetaVector, FactorError> {
        check_disc(z)?;
        if !(tol > 0.0) {
            return Err(FactorError::InvalidParameter("tol must be positive".into()));
        }
        let i = self.slot(w)?;
        let k_req = k_required(self.constants.c0_log2, z, tol);
        let available = self.levels(i);
        let top = k_req.min(available.saturating_sub(1));
        let terms = (0..=top)
            .filter(|_| available > 0)
            .map(|k| ZetaTerm {
                coefficient: Self::coefficient(z, k, sign),
                level: k,
                vector: self.eta_slot(i, k as i64, sign),
            })
            .collect();
        Ok(ZetaVector {
            sign,
            z,
            prefactor: Self::prefactor(z, sign),
            terms,
            k_max: top,
            k_required: k_req,
            exhausted: available <= k_req,
        })
    }

    /// `‖ζ±_z(w)‖²` summed over every level where `η` is non-zero, with the
    /// tridiagonal Gram matrix.
    pub(crate) fn zeta_norm_sq_slot(&self, i: usize, z: Complex64, sign: Sign) -> LogReal {
        let levels = self.levels(i) as i64;
        let r = z.norm();
        let re = LogReal::from_f64(2.0 * z.re);
        let mut acc = LogReal::ZERO;
        for k in 0..levels {
            let weight = LogReal::powi(r, 2 * k as u64);
            if weight.is_zero() {
                break;
            }
            let diag = self.eta_norm_sq_slot(i, k, sign);
            let off = self.gram_slot(i, k, k + 1, sign);
            acc = acc + weight * (diag + re * off);
        }
        acc * LogReal::from_f64((Complex64::new(1.0, 0.0) - z).norm())
    }

    pub fn zeta_norm_sq(&self, w: VertexId, z: Complex64, sign: Sign) -> Result<LogReal, FactorError> {
        check_disc(z)?;
        Ok(self.zeta_norm_sq_slot(self.slot(w)?, z, sign))
    }

    /// The kernel realized by the untruncated vectors on a finite snapshot:
    /// `(1−z) Σ z^{k+l} ⟨η−_l(y), η+_k(x)⟩` over every level pair. It agrees
    /// with `z^{d(x,y)}` up to the series tail and the finite-end effects of
    /// the snapshot; the theta certificate bounds exactly this kernel.
    pub fn realized_kernel(
        &self,
        section: &[VertexId],
        z: Complex64,
    ) -> Result<nalgebra::DMatrix<Complex64>, FactorError> {
        check_disc(z)?;
        let slots = section.iter().map(|&v| self.slot(v)).collect::<Result<Vec<_>, _>>()?;
        let n = slots.len();
        let one = Complex64::new(1.0, 0.0);
        Ok(nalgebra::DMatrix::from_fn(n, n, |a, b| {
            let (i, j) = (slots[a], slots[b]);
            let sum: Complex64 = self
                .table
                .pair_w(i, j)
                .0
                .iter()
                .map(|&(k, l)| z.powu(k + l) * self.eta_inner_slots(i, k as i64, j, l as i64) as f64)
                .sum();
            (one - z) * sum
        }))
    }

    /// `⟨ζ+_z(x), ζ−_z(y)⟩ = (1−z) Σ_{k,l} z^{k+l} ⟨η−_l(y), η+_k(x)⟩`,
    /// restricted to levels `k, l ≤ K` where the snapshot is trustworthy.
    ///
    /// `K` is the tolerance level, lowered so that the per-`n` counts
    /// `c_n = Σ_{k+l=n} ⟨η−_l(y), η+_k(x)⟩` equal `[n ≥ d]` for `n ≤ K` and
    /// stay `≤ 1` up to `2K`; the reported bound then holds exactly.
    pub fn zeta_kernel(
        &self,
        x: VertexId,
        y: VertexId,
        z: Complex64,
        tol: f64,
    ) -> Result<KernelEntry, FactorError> {
        check_disc(z)?;
        let (i, j) = (self.slot(x)?, self.slot(y)?);
        let d = self.table.graph().distance(x, y).map_err(crate::corridor::CorridorError::from)?;
        let k_req = k_required(self.constants.c0_log2, z, tol);
        let w = self.table.pair_w(i, j);
        let contributions: Vec<(u32, u32, i64)> = w
            .0
            .iter()
            .map(|&(k, l)| (k, l, self.eta_inner_slots(i, k as i64, j, l as i64)))
            .filter(|&(_, _, v)| v != 0)
            .collect();
        let n_hi = contributions.iter().map(|&(k, l, _)| k + l).max().unwrap_or(0) as usize + 1;
        let mut counts = vec![0i64; n_hi + 1];
        for &(k, l, v) in &contributions {
            counts[(k + l) as usize] += v;
        }
        let first_bad = (0..=n_hi)
            .find(|&n| counts[n] != i64::from(n as u32 >= d))
            .unwrap_or(n_hi + 1) as i64;
        let first_double = (0..=n_hi).find(|&n| counts[n] >= 2).map(|n| n as i64);
        let mut k_eff = (k_req as i64).min(first_bad - 1);
        if let Some(m) = first_double {
            k_eff = k_eff.min((m - 1).div_euclid(2));
        }
        let mut value = Complex64::new(0.0, 0.0);
        if k_eff >= 0 {
            for &(k, l, v) in &contributions {
                if (k as i64) <= k_eff && (l as i64) <= k_eff {
                    value += z.powu(k + l) * v as f64;
                }
            }
        }
        let one = Complex64::new(1.0, 0.0);
        value *= one - z;
        let target = z.powu(d);
        let r = z.norm();
        let bound = (one - z).norm() * LogReal::powi(r, (k_eff + 1) as u64).to_f64() / (1.0 - r);
        Ok(KernelEntry {
            x,
            y,
            distance: d,
            value,
            target,
            deviation: (value - target).norm(),
            bound,
            k_required: k_req,
            k_effective: k_eff,
            clamped: k_eff < k_req as i64,
        })
    }
}
