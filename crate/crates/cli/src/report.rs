//! The JSON report and its sections.

use std::collections::BTreeMap;

use hyperschur::corridor::{CorridorConstants, CorridorMode, CorridorParams, IdentityReport, R1Report, RhoSearch};
use hyperschur::factorization::{
    BinomialSuiteReport, Constants, NormCertificate, PropositionReport, RadialFunction, TelescopingReport,
};
use hyperschur::graph::{HyperbolicityProfile, ThinnessReport};
use hyperschur::kernel::KernelDescriptor;
use hyperschur::normlab::SandwichReport;
use serde::Serialize;

use crate::config::{RunConfig, Task};

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: &str = "1.0";

pub mod exit {
    pub const PASS: i32 = 0;
    pub const IDENTITY_VIOLATION: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    pub const INPUT_ERROR: i32 = 4;
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: Task,
    pub config: RunConfig,
    pub graph: GraphSummary,
    pub constants: ConstantsSection,
    pub profile: Option<ProfileSection>,
    pub verify: Option<VerifySection>,
    pub norms: Option<NormsSection>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    pub exit_code: i32,
    /// Wall-clock seconds per stage. Excluded from reproducibility
    /// comparisons.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// The report as JSON without the timings block.
    pub fn to_value_without_timings(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("timings");
        }
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaSummary {
    pub delta_thin: f64,
    pub delta_four_point: f64,
    pub sampled: bool,
    pub delta_impl: f64,
    pub triangles_checked: u64,
    pub quadruples_checked: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub core_size: usize,
    pub core_radius: u32,
    pub core_diameter: u32,
    pub base_point: String,
    pub is_group: bool,
    pub is_tree: bool,
    pub ray_extension: u32,
    pub delta: DeltaSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsBlock {
    pub params: CorridorParams,
    pub constants: Constants,
    /// Measured on the table built at this block's width.
    pub measured: CorridorConstants,
    pub rho_search: Option<RhoSearch>,
    pub r1_scan: R1Report,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsSection {
    pub active: CorridorMode,
    pub empirical: ConstantsBlock,
    pub paper: ConstantsBlock,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSection {
    pub profile: HyperbolicityProfile,
    pub thinness: ThinnessReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySection {
    pub n_max: u32,
    pub covering: IdentityReport,
    pub partition: IdentityReport,
    pub proposition: PropositionReport,
    pub binomial: BinomialSuiteReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichEntry {
    pub name: String,
    pub descriptor: KernelDescriptor,
    /// `log2` of the certificate bound; the bound itself may not fit in f64.
    pub certificate_log2: Option<f64>,
    pub report: SandwichReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityEntry {
    pub r: f64,
    pub dim: usize,
    pub min_eigenvalue: f64,
    /// Positivity is only asserted on trees.
    pub asserted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSummary {
    pub n: u32,
    pub function: RadialFunction,
    pub support_radius: Option<u32>,
    pub min_value: f64,
    pub value_at_base: f64,
    pub certificate: NormCertificate,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormsSection {
    pub theta: Vec<NormCertificate>,
    pub telescoping: Vec<TelescopingReport>,
    pub sphere: Vec<NormCertificate>,
    pub sandwich: Vec<SandwichEntry>,
    pub positivity: Vec<PositivityEntry>,
    pub witnesses: Vec<WitnessSummary>,
}

/// One asserted check and the exact domain it covered.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub domain: String,
}

impl Verdict {
    pub fn new(check: impl Into<String>, passed: bool, domain: impl Into<String>) -> Self {
        Verdict { check: check.into(), passed, domain: domain.into() }
    }
}
