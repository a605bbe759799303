//! The subcommands. Each builds the snapshot, profiles it, resolves both
//! constant sets, and then runs its own stage.

use std::collections::BTreeMap;
use std::time::Instant;

use hyperschur::corridor::{covering_check, resolve, verify_partition, CorridorMode, Overrides, ResolvedCorridors};
use hyperschur::factorization::{binomial_suite, schedule, Constants, Factorization, NormCertificate};
use hyperschur::graph::{hyperbolicity_profile, thinness_check, Graph, ProfileMode};
use hyperschur::kernel::{core_section, KernelMatrix, KernelRecord};
use hyperschur::logreal::LogReal;
use hyperschur::normlab::{psd_min_eig, sandwich_report, SdpOptions};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{RunConfig, Task};
use crate::report::*;
use crate::CliError;

/// Triangles and quadruples sampled when the core is too large to profile
/// exhaustively and no budget was given.
pub const DEFAULT_SAMPLE_BUDGET: usize = 20_000;
/// Thinness slack multiplier on δ.
pub const THINNESS_MULTIPLIER: f64 = 10.0;
pub const POSITIVITY_RADII: [f64; 3] = [0.3, 0.7, 0.95];
pub const POSITIVITY_TOL: f64 = 1e-9;

/// A report plus the plot-ready tables written next to it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub tables: Tables,
}

#[derive(Debug, Clone, Default)]
pub struct Tables {
    pub theta: Vec<ThetaRow>,
    pub sphere: Vec<SphereRow>,
    pub schedule: Vec<ScheduleRow>,
    pub witness: Vec<WitnessRow>,
    pub kernels: Vec<KernelExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaRow {
    pub z_re: f64,
    pub z_im: f64,
    pub modulus: f64,
    pub bound_log2: f64,
    pub analytic_log2: f64,
    pub within_analytic: bool,
    pub max_deviation: f64,
    pub max_truncation_bound: f64,
    pub k_required: u32,
    pub clamped_pairs: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereRow {
    pub n: u32,
    pub bound_log2: f64,
    pub bound_per_radius_log2: f64,
    pub analytic_log2: f64,
    pub within_analytic: bool,
    pub partition_verified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleRow {
    pub n: u32,
    pub r: f64,
    pub cutoff: u32,
    pub bound_log2: f64,
    pub analytic_log2: f64,
    pub support_radius: Option<u32>,
    pub min_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow {
    pub n: u32,
    pub vertex: u32,
    pub label: String,
    pub distance: u32,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct KernelExport {
    pub name: String,
    pub record: KernelRecord,
    pub text: String,
}

struct Clock(BTreeMap<String, f64>);

impl Clock {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.0.entry(stage.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    run_task(cfg, Task::Profile)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    run_task(cfg, Task::Verify)
}

pub fn cmd_norms(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    run_task(cfg, Task::Norms)
}

pub fn cmd_all(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    run_task(cfg, Task::All)
}

/// Runs the task named in the config.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    run_task(cfg, cfg.task)
}

fn run_task(cfg: &RunConfig, task: Task) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.task = task;
    let mut clock = Clock(BTreeMap::new());
    let mut verdicts = Vec::new();
    let mut tables = Tables::default();

    let (graph, mut warnings) = clock.time("provider", || cfg.provider.build())?;
    let sample = profile_sample(&cfg, &graph, &mut warnings);
    let mode = match sample {
        Some((budget, seed)) => ProfileMode::Sampled { budget, seed },
        None => ProfileMode::Exact,
    };
    let hyper = clock.time("profile", || hyperbolicity_profile(&graph, mode))?;
    let delta = hyper.delta_impl;
    let summary = graph_summary(&cfg, &graph, &hyper);

    let profile = if matches!(task, Task::Profile | Task::All) {
        let thinness = clock.time("thinness", || thinness_check(&graph, delta, THINNESS_MULTIPLIER, sample))?;
        verdicts.push(Verdict::new(
            "geodesic triangles are thin: d(w,[x,y]) <= <x,y>_w + 10 delta over every geodesic [x,y]",
            thinness.passed(),
            format!(
                "{} core triples ({}), delta = {}",
                thinness.triples_checked,
                if thinness.sampled { "sampled" } else { "exhaustive" },
                delta
            ),
        ));
        Some(ProfileSection { profile: hyper.clone(), thinness })
    } else {
        None
    };

    let user = Overrides { rho: cfg.rho, r1: cfg.r1 };
    let none = Overrides::default();
    let (emp_over, paper_over) = match cfg.mode {
        CorridorMode::Empirical => (&user, &none),
        CorridorMode::Paper => (&none, &user),
    };
    let empirical = clock.time("corridors", || resolve(&graph, CorridorMode::Empirical, delta, emp_over, cfg.n_max))?;
    let paper = clock.time("corridors", || resolve(&graph, CorridorMode::Paper, delta, paper_over, cfg.n_max))?;
    let constants = ConstantsSection {
        active: cfg.mode,
        empirical: constants_block(&empirical, delta),
        paper: constants_block(&paper, delta),
    };
    let active = match cfg.mode {
        CorridorMode::Empirical => &empirical,
        CorridorMode::Paper => &paper,
    };
    let fac = Factorization::from_resolved(active, delta);

    let verify = if matches!(task, Task::Verify | Task::All) {
        Some(clock.time("verify", || verify_stage(&cfg, active, &fac, &mut verdicts))?)
    } else {
        None
    };
    let norms = if matches!(task, Task::Norms | Task::All) {
        Some(norms_stage(&cfg, &graph, &fac, &mut clock, &mut verdicts, &mut tables)?)
    } else {
        None
    };

    let inconclusive = norms
        .as_ref()
        .is_some_and(|n| n.sandwich.iter().any(|s| s.report.sdp.inconclusive));
    let exit_code = if verdicts.iter().any(|v| !v.passed) {
        exit::IDENTITY_VIOLATION
    } else if inconclusive {
        exit::INCONCLUSIVE
    } else {
        exit::PASS
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: task,
        config: cfg,
        graph: summary,
        constants,
        profile,
        verify,
        norms,
        verdicts,
        warnings,
        exit_code,
        timings: clock.0,
    };
    Ok(RunOutput { report, tables })
}

/// `None` for an exhaustive profile, else the sampling budget and seed.
fn profile_sample(cfg: &RunConfig, graph: &Graph, warnings: &mut Vec<String>) -> Option<(usize, u64)> {
    if let Some(budget) = cfg.sample_budget {
        return Some((budget, cfg.seed));
    }
    let core = graph.core().len();
    if core <= cfg.exact_profile_cap {
        return None;
    }
    warnings.push(format!(
        "core has {core} vertices, above the exact profile cap of {}; triangles and quadruples are sampled ({} each, seed {})",
        cfg.exact_profile_cap, DEFAULT_SAMPLE_BUDGET, cfg.seed
    ));
    Some((DEFAULT_SAMPLE_BUDGET, cfg.seed))
}

fn graph_summary(cfg: &RunConfig, graph: &Graph, p: &hyperschur::graph::HyperbolicityProfile) -> GraphSummary {
    GraphSummary {
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        core_size: graph.core().len(),
        core_radius: graph.core_radius(),
        core_diameter: graph.core_diameter(),
        base_point: graph.label(graph.base_point()),
        is_group: graph.is_group(),
        is_tree: graph.edge_count() + 1 == graph.vertex_count(),
        ray_extension: cfg.provider.ray_extension,
        delta: DeltaSummary {
            delta_thin: p.delta_thin.to_f64(),
            delta_four_point: p.delta_four_point.to_f64(),
            sampled: p.sampled,
            delta_impl: p.delta_impl,
            triangles_checked: p.triangles_checked,
            quadruples_checked: p.quadruples_checked,
        },
    }
}

fn constants_block(r: &ResolvedCorridors, delta: f64) -> ConstantsBlock {
    ConstantsBlock {
        params: r.params.clone(),
        constants: Constants::new(&r.params, r.constants.c1, delta),
        measured: r.constants.clone(),
        rho_search: r.rho_search.clone(),
        r1_scan: r.r1_report.clone(),
    }
}

fn verify_stage(
    cfg: &RunConfig,
    active: &ResolvedCorridors,
    fac: &Factorization,
    verdicts: &mut Vec<Verdict>,
) -> Result<VerifySection, CliError> {
    let n_max = cfg.n_max;
    let table = &active.table;
    let covering = covering_check(table, n_max);
    let partition = verify_partition(table, active.params.r1, n_max);
    let proposition = fac.proposition_check(n_max);
    let binomial = binomial_suite(8)?;
    verdicts.push(Verdict::new(
        "every pair at distance <= n is covered by some corridor pair (k, n-k)",
        covering.passed(),
        format!("{} core pairs, n = 0..={n_max}", covering.pairs_checked),
    ));
    verdicts.push(Verdict::new(
        "ball indicator equals the sum of overlap indicators along each antidiagonal",
        partition.passed(),
        format!(
            "{} core pairs, n = 0..={n_max}, R1 = {}, {} identities",
            partition.pairs_checked, active.params.r1, partition.identities_checked
        ),
    ));
    verdicts.push(Verdict::new(
        "level vectors: inner products equal overlap indicators, levels two apart are orthogonal, squared norms <= C0",
        proposition.passed(),
        format!(
            "{} core pairs x levels 0..={n_max} squared ({} entries); {} orthogonality and {} norm checks over all populated levels",
            proposition.core_pairs, proposition.table_entries, proposition.orthogonality_checked, proposition.norms_checked
        ),
    ));
    verdicts.push(Verdict::new(
        "subset vector norms and inner products match the binomial closed forms",
        binomial.passed(),
        format!(
            "all {} ordered subset pairs of a {}-element set, exact integers",
            binomial.pairs_checked, binomial.universe
        ),
    ));
    Ok(VerifySection { n_max, covering, partition, proposition, binomial })
}

/// `min(max row ℓ2, max column ℓ2)`, an upper bound on the multiplier
/// norm of `e` from the trivial factorizations through the unit vectors.
fn row_column_bound(e: &DMatrix<Complex64>) -> f64 {
    let rows = (0..e.nrows())
        .map(|i| e.row(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let cols = (0..e.ncols())
        .map(|j| e.column(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    rows.min(cols)
}

fn norms_stage(
    cfg: &RunConfig,
    graph: &Graph,
    fac: &Factorization,
    clock: &mut Clock,
    verdicts: &mut Vec<Verdict>,
    tables: &mut Tables,
) -> Result<NormsSection, CliError> {
    let constants = fac.constants().clone();
    let core = graph.core().len();
    let pairs = (core * core) as u64;
    let section = core_section(graph, cfg.section_cap);
    let opts = SdpOptions { tol: cfg.sdp_tol, seed: cfg.seed, ..SdpOptions::default() };
    let mut sandwich = Vec::new();

    let mut theta = Vec::new();
    let mut telescoping = Vec::new();
    for &z in &cfg.z {
        let cert = clock.time("theta", || fac.theta_certificate(z, cfg.tol))?;
        let tele = clock.time("telescoping", || fac.telescoping_check(z, cfg.tol))?;
        verdicts.push(Verdict::new(
            format!("theta certificate at z = {z} is within C|1-z|/(1-|z|)"),
            cert.within_analytic,
            format!("supremum of exact Gram norms over {core} core vertices, all populated levels"),
        ));
        verdicts.push(Verdict::new(
            format!("truncated kernel series at z = {z} is within its truncation bound"),
            tele.within_bound(),
            format!(
                "{} core pairs, tol {}, K_required {}, {} pairs clamped by the snapshot",
                tele.pairs, cfg.tol, tele.k_required, tele.clamped_pairs
            ),
        ));
        tables.theta.push(ThetaRow {
            z_re: z.re,
            z_im: z.im,
            modulus: z.norm(),
            bound_log2: cert.bound_log2,
            analytic_log2: cert.analytic_bound_log2,
            within_analytic: cert.within_analytic,
            max_deviation: tele.max_deviation,
            max_truncation_bound: tele.max_bound,
            k_required: tele.k_required,
            clamped_pairs: tele.clamped_pairs,
        });

        let kernel = KernelMatrix::power(graph, &section, z)?;
        let realized = fac.realized_kernel(&section, z)?;
        let err = row_column_bound(&(realized - &kernel.data));
        let total = cert.bound + LogReal::from_f64(err);
        let attached = certificate_value(&total, &cert, err);
        let name = format!("theta z={z}");
        tables.kernels.push(export(&name, graph, &kernel));
        sandwich.push(clock.time("sandwich", || {
            sandwich_entry(name, &kernel, Some(total.log2_abs()), attached, &opts)
        })?);
        theta.push(cert);
        telescoping.push(tele);
    }

    let mut sphere = Vec::new();
    for &n in &cfg.n {
        let cert = clock.time("sphere", || fac.sphere_certificate(n));
        let partition_verified = cert.sphere.as_ref().is_some_and(|s| s.partition_verified);
        verdicts.push(Verdict::new(
            format!("sphere certificate at n = {n} is within 2 C0 (n+1)"),
            cert.within_analytic && partition_verified,
            format!("supremum over {core} core vertices, levels 0..={n}; partition identity checked for {pairs} core pairs up to n"),
        ));
        tables.sphere.push(SphereRow {
            n,
            bound_log2: cert.bound_log2,
            bound_per_radius_log2: cert.bound_log2 - (n as f64 + 1.0).log2(),
            analytic_log2: cert.analytic_bound_log2,
            within_analytic: cert.within_analytic,
            partition_verified,
        });
        let kernel = KernelMatrix::sphere(graph, &section, n)?;
        let attached = partition_verified.then(|| certificate_value(&cert.bound, &cert, 0.0)).flatten();
        let name = format!("sphere n={n}");
        tables.kernels.push(export(&name, graph, &kernel));
        sandwich.push(clock.time("sandwich", || {
            sandwich_entry(name, &kernel, partition_verified.then_some(cert.bound_log2), attached, &opts)
        })?);
        sphere.push(cert);
    }

    for entry in &sandwich {
        verdicts.push(Verdict::new(
            format!("{}: lower bound <= semidefinite value <= certificate", entry.name),
            entry.report.ordered,
            format!(
                "{}x{} section nearest the base point, solver tol {}, certificate {}",
                entry.report.dim,
                entry.report.dim,
                cfg.sdp_tol,
                if entry.report.certificate.is_some() { "attached" } else { "absent" }
            ),
        ));
    }

    let is_tree = graph.edge_count() + 1 == graph.vertex_count();
    let mut positivity = Vec::new();
    for r in POSITIVITY_RADII {
        let kernel = KernelMatrix::power(graph, &section, Complex64::new(r, 0.0))?;
        let min_eigenvalue = clock.time("positivity", || psd_min_eig(&kernel))?;
        if is_tree {
            verdicts.push(Verdict::new(
                format!("[r^d(x,y)] is positive semidefinite at r = {r}"),
                min_eigenvalue >= -POSITIVITY_TOL,
                format!("{0}x{0} section nearest the base point, tolerance {POSITIVITY_TOL}", kernel.dim()),
            ));
        }
        positivity.push(PositivityEntry { r, dim: kernel.dim(), min_eigenvalue, asserted: is_tree });
    }

    let base_dist = graph.distances_from(graph.base_point())?.to_vec();
    let mut witnesses = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    let mut monotone = true;
    let bound_cap = constants.c + LogReal::ONE;
    for n in 1..=cfg.schedule {
        let w = clock.time("witness", || fac.witness(n, cfg.tol))?;
        let current: Vec<f64> = w.values.iter().map(|v| v.2).collect();
        if let Some(prev) = &previous {
            monotone &= prev.iter().zip(&current).all(|(a, b)| b >= a);
        }
        previous = Some(current);
        let entry = schedule(&constants, n);
        tables.schedule.push(ScheduleRow {
            n,
            r: entry.r,
            cutoff: entry.cutoff,
            bound_log2: w.certificate.bound_log2,
            analytic_log2: w.certificate.analytic_bound_log2,
            support_radius: w.support_radius,
            min_value: w.values.iter().map(|v| v.2).fold(f64::INFINITY, f64::min),
        });
        for (id, label, value) in &w.values {
            tables.witness.push(WitnessRow {
                n,
                vertex: *id,
                label: label.clone(),
                distance: base_dist[*id as usize],
                value: *value,
            });
        }
        verdicts.push(Verdict::new(
            format!("witness n = {n}: certificate <= 2 C0 + 1"),
            w.certificate.bound <= bound_cap,
            format!("radial function r = {}, cutoff {}, over {core} core vertices", w.function.r, w.function.cutoff),
        ));
        witnesses.push(WitnessSummary {
            n,
            function: w.function,
            support_radius: w.support_radius,
            min_value: w.values.iter().map(|v| v.2).fold(f64::INFINITY, f64::min),
            value_at_base: w.function.value(0),
            certificate: w.certificate,
            warning: w.warning,
        });
    }
    if cfg.schedule >= 2 {
        verdicts.push(Verdict::new(
            "witness values are nondecreasing in n at every vertex",
            monotone,
            format!("{core} core vertices, n = 1..={}", cfg.schedule),
        ));
    }

    Ok(NormsSection { theta, telescoping, sphere, sandwich, positivity, witnesses })
}

/// The certificate as an `f64` plus the JSON handed to the diagnostics;
/// `None` when the bound overflows `f64`.
fn certificate_value(total: &LogReal, cert: &NormCertificate, err: f64) -> Option<(f64, serde_json::Value)> {
    let v = total.to_f64();
    v.is_finite().then(|| {
        let json = serde_json::json!({
            "certificate": cert,
            "realization_error_bound": err,
            "total_log2": total.log2_abs(),
        });
        (v, json)
    })
}

fn export(name: &str, graph: &Graph, kernel: &KernelMatrix) -> KernelExport {
    KernelExport { name: name.to_string(), record: kernel.record(Some(graph)), text: kernel.to_text() }
}

fn sandwich_entry(
    name: String,
    kernel: &KernelMatrix,
    certificate_log2: Option<f64>,
    certificate: Option<(f64, serde_json::Value)>,
    opts: &SdpOptions,
) -> Result<SandwichEntry, CliError> {
    let report = sandwich_report(kernel, certificate, opts)?;
    Ok(SandwichEntry { name, descriptor: kernel.descriptor.clone(), certificate_log2, report })
}
