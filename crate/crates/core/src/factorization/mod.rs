//! The vectors `ξ`, `η`, `ζ` built on corridor sets, the kernels they
//! realize, and the norm certificates derived from them.

mod certificate;
mod checks;
mod tensor;
pub mod xi;
mod zeta;

pub use certificate::{
    radial_multiplier, schedule, CertificateKind, NormCertificate, RadialFunction, ScheduleEntry,
    SphereDetail, WitnessTable,
};
pub use checks::{PropositionReport, TelescopingReport, ROUNDING_SLACK};
pub use tensor::TensorVector;
pub use xi::{
    binomial_suite, xi_inner, xi_vector, BinomialSuiteReport, BinomialValue, Sign, SubsetKey,
    SubsetVector, XiVector, DEFAULT_SUBSET_CAP,
};
pub use zeta::{k_required, KernelEntry, ZetaTerm, ZetaVector};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::corridor::{CorridorError, CorridorMode, CorridorParams, CorridorTable, ResolvedCorridors};
use crate::graph::VertexId;
use crate::logreal::LogReal;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("subset of size {size} exceeds the cap {cap} for explicit vectors")]
    SubsetTooLarge { size: usize, cap: usize },
    #[error("inner product is not an exact integer")]
    NotExact,
    #[error("|z| = {0} is not below 1")]
    OutsideDisc(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Corridor(#[from] CorridorError),
}

/// The constants a certificate depends on. `C0 = 2^{C1(1+R1)}`, `C = 2·C0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    pub mode: CorridorMode,
    pub delta: f64,
    pub rho: f64,
    #[serde(rename = "R0")]
    pub r0: u32,
    #[serde(rename = "R1")]
    pub r1: u32,
    #[serde(rename = "C1")]
    pub c1: u32,
    #[serde(rename = "C0")]
    pub c0: LogReal,
    #[serde(rename = "C0_log2")]
    pub c0_log2: f64,
    #[serde(rename = "C")]
    pub c: LogReal,
}

impl Constants {
    pub fn new(params: &CorridorParams, c1: u32, delta: f64) -> Self {
        let c0_log2 = c1 as f64 * (1.0 + params.r1 as f64);
        let c0 = LogReal::pow2(c0_log2);
        Constants {
            mode: params.mode,
            delta,
            rho: params.rho,
            r0: params.r0,
            r1: params.r1,
            c1,
            c0,
            c0_log2,
            c: c0 * LogReal::from_f64(2.0),
        }
    }
}

/// Factorization data for one corridor table and parameter choice.
pub struct Factorization<'a, 'g> {
    table: &'a CorridorTable<'g>,
    params: CorridorParams,
    constants: Constants,
    /// `sets[i][k]` is `T(x,k)` for the core vertex in slot `i`.
    sets: Vec<Vec<SubsetKey>>,
    empty: SubsetKey,
}

impl<'a, 'g> Factorization<'a, 'g> {
    pub fn new(table: &'a CorridorTable<'g>, params: CorridorParams, c1: u32, delta: f64) -> Self {
        let sets = (0..table.core().len())
            .map(|i| {
                (0..=table.top_level(i) as i64)
                    .map(|k| SubsetKey::from_sorted(table.set(i, k)))
                    .collect()
            })
            .collect();
        Factorization {
            table,
            constants: Constants::new(&params, c1, delta),
            params,
            sets,
            empty: SubsetKey::empty(),
        }
    }

    pub fn from_resolved(resolved: &'a ResolvedCorridors<'g>, delta: f64) -> Self {
        Factorization::new(
            &resolved.table,
            resolved.params.clone(),
            resolved.constants.c1,
            delta,
        )
    }

    pub fn table(&self) -> &'a CorridorTable<'g> {
        self.table
    }

    pub fn params(&self) -> &CorridorParams {
        &self.params
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn slot(&self, x: VertexId) -> Result<usize, FactorError> {
        Ok(self.table.slot(x)?)
    }

    fn set(&self, i: usize, k: i64) -> &SubsetKey {
        if k < 0 {
            return &self.empty;
        }
        self.sets[i].get(k as usize).unwrap_or(&self.empty)
    }

    /// Number of leading levels `0..levels(i)` at which `η±(x)` can be
    /// non-zero; beyond them `T(x,k) = ∅`.
    fn levels(&self, i: usize) -> u32 {
        self.sets[i].iter().rposition(|s| !s.is_empty()).map_or(0, |p| p as u32 + 1)
    }

    /// `η+_m(w) = ξ+_{T(w,m)} ⊗ ξ̃+_{T(w,m+1)} ⊗ … ⊗ ξ̃+_{T(w,m+R1)}` and
    /// `η−_m(w) = ξ−_{T(w,m)} ⊗ ξ̃−_{T(w,m−1)} ⊗ … ⊗ ξ̃−_{T(w,m−R1)}`.
    pub fn eta(&self, w: VertexId, m: i64, sign: Sign) -> Result<TensorVector, FactorError> {
        Ok(self.eta_slot(self.slot(w)?, m, sign))
    }

    fn eta_slot(&self, i: usize, m: i64, sign: Sign) -> TensorVector {
        let step = match sign {
            Sign::Plus => 1,
            Sign::Minus => -1,
        };
        let factors = (0..=self.params.r1 as i64)
            .map(|j| XiVector::new(self.set(i, m + step * j).clone(), sign, j > 0))
            .collect();
        TensorVector { factors }
    }

    /// `⟨η−_l(y), η+_k(x)⟩`, evaluated factor by factor.
    pub fn eta_inner(&self, x: VertexId, k: i64, y: VertexId, l: i64) -> Result<i64, FactorError> {
        Ok(self.eta_inner_slots(self.slot(x)?, k, self.slot(y)?, l))
    }

    fn eta_inner_slots(&self, i: usize, k: i64, j: usize, l: i64) -> i64 {
        let mut acc: i64 = 1;
        for f in 0..=self.params.r1 as i64 {
            let plus = XiVector::new(self.set(i, k + f).clone(), Sign::Plus, f > 0);
            let minus = XiVector::new(self.set(j, l - f).clone(), Sign::Minus, f > 0);
            let v = minus.inner(&plus).to_i128().expect("factor values are 0 or ±1");
            acc *= v as i64;
            if acc == 0 {
                return 0;
            }
        }
        acc
    }

    /// `‖η±_m(w)‖²` for the core vertex in slot `i`.
    fn eta_norm_sq_slot(&self, i: usize, m: i64, sign: Sign) -> LogReal {
        self.eta_slot(i, m, sign).norm_sq()
    }

    /// `⟨η±_m(w), η±_{m2}(w)⟩` for the core vertex in slot `i`.
    fn gram_slot(&self, i: usize, m: i64, m2: i64, sign: Sign) -> LogReal {
        self.eta_slot(i, m, sign).inner(&self.eta_slot(i, m2, sign))
    }

    pub fn gram(&self, w: VertexId, m: i64, m2: i64, sign: Sign) -> Result<LogReal, FactorError> {
        Ok(self.gram_slot(self.slot(w)?, m, m2, sign))
    }
}

fn check_disc(z: Complex64) -> Result<(), FactorError> {
    if z.norm() < 1.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(FactorError::OutsideDisc(z.norm()))
    }
}
