//! Corridor sets `T(x,k)`, the pair relations `W(k,l)` and `Z(k,l)`, the
//! empirical constants and the covering / partition checks.
//!
//! `T(x,k)` is the set of vertices `w` with `d(w, p_x) < ρ` and
//! `d(w,x) ∈ {k−1, k}`, empty for `k < 0`. The relations are indexed by the
//! core vertices; pairs with an endpoint outside the core never appear.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError, Ray, VertexId, UNREACHED};

#[derive(Debug, Error)]
pub enum CorridorError {
    #[error("corridor width must be positive, got {0}")]
    InvalidRho(f64),
    #[error("level {k} is beyond the ray of vertex {x} (length {ray_len}) inside the snapshot")]
    Truncated { x: VertexId, k: i64, ray_len: usize },
    #[error("vertex {0} is outside the core")]
    OutsideCore(VertexId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorridorMode {
    Paper,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorridorParams {
    pub rho: f64,
    pub r0: u32,
    pub r1: u32,
    pub mode: CorridorMode,
}

impl CorridorParams {
    /// The fixed constants: width `100δ`, `R0 = 200δ + 1`, `R1 = 2·R0`.
    pub fn paper(delta: f64) -> Self {
        let r0 = (200.0 * delta).ceil() as u32 + 1;
        CorridorParams {
            rho: 100.0 * delta,
            r0,
            r1: 2 * r0,
            mode: CorridorMode::Paper,
        }
    }

    pub fn empirical(rho: f64, r0: u32, r1: u32) -> Self {
        CorridorParams {
            rho,
            r0,
            r1,
            mode: CorridorMode::Empirical,
        }
    }

    /// Largest integer distance strictly below the width.
    pub fn reach(&self) -> Result<u32, CorridorError> {
        reach(self.rho)
    }
}

fn reach(rho: f64) -> Result<u32, CorridorError> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(CorridorError::InvalidRho(rho));
    }
    Ok(rho.ceil() as u32 - 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorridorSet {
    pub owner: VertexId,
    pub level: i64,
    pub members: Vec<VertexId>,
    /// `p_x(k)` when `k ≥ 0`.
    pub anchor: Option<VertexId>,
    /// Largest distance from a member to the anchor.
    pub enclosing_radius: u32,
    /// Whether every member lies in the open `R0`-ball around the anchor.
    pub within_r0: bool,
}

/// `T(x,k)` computed straight from the definition.
pub fn corridor_set(
    graph: &Graph,
    x: VertexId,
    k: i64,
    params: &CorridorParams,
) -> Result<CorridorSet, CorridorError> {
    let depth = params.reach()?;
    let ray = graph.build_ray(x)?;
    if k < 0 {
        return Ok(CorridorSet {
            owner: x,
            level: k,
            members: Vec::new(),
            anchor: None,
            enclosing_radius: 0,
            within_r0: true,
        });
    }
    if k as usize > ray.len() {
        return Err(CorridorError::Truncated {
            x,
            k,
            ray_len: ray.len(),
        });
    }
    let near = graph.multi_source_distances(&ray.path, depth);
    let dx = graph.distances_from(x)?;
    let k = k as u32;
    let members: Vec<VertexId> = (0..graph.vertex_count() as u32)
        .filter(|&w| near[w as usize] != UNREACHED)
        .filter(|&w| dx[w as usize] == k || dx[w as usize] + 1 == k)
        .collect();
    let anchor = ray.path[k as usize];
    let da = graph.distances_from(anchor)?;
    let enclosing_radius = members.iter().map(|&w| da[w as usize]).max().unwrap_or(0);
    Ok(CorridorSet {
        owner: x,
        level: k as i64,
        members,
        anchor: Some(anchor),
        enclosing_radius,
        within_r0: enclosing_radius < params.r0,
    })
}

/// Sorted list of `(k, l)` with `T(x,k) ∩ T(y,l) ≠ ∅` for one pair.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct WSet(pub Vec<(u32, u32)>);

impl WSet {
    pub fn contains(&self, k: i64, l: i64) -> bool {
        k >= 0 && l >= 0 && self.0.binary_search(&(k as u32, l as u32)).is_ok()
    }

    /// Membership in `Z(k,l) = W(k,l) ∖ ⋃_{j=1..r1} W(k+j, l−j)`.
    pub fn in_z(&self, k: i64, l: i64, r1: u32) -> bool {
        self.contains(k, l) && (1..=r1 as i64).all(|j| !self.contains(k + j, l - j))
    }

    /// Levels `k` with `(k, n−k) ∈ W`.
    pub fn levels_on_antidiagonal(&self, n: u32) -> Vec<u32> {
        self.0
            .iter()
            .filter(|&&(k, l)| k + l == n)
            .map(|&(k, _)| k)
            .collect()
    }

    /// `c_n = #{k : (k, n−k) ∈ Z}` for `n = 0..=n_max`.
    pub fn z_counts(&self, r1: u32, n_max: u32) -> Vec<u32> {
        let mut counts = vec![0u32; n_max as usize + 1];
        for &(k, l) in &self.0 {
            let n = k + l;
            if n <= n_max && self.in_z(k as i64, l as i64, r1) {
                counts[n as usize] += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone)]
struct CorridorRow {
    ray: Ray,
    /// `(u, d(x,u))` for every `u` with `d(u, p_x) < ρ`, sorted by `u`.
    near: Vec<(VertexId, u32)>,
    /// `levels[m]` lists the near vertices at distance `m` from `x`.
    levels: Vec<Vec<VertexId>>,
}

/// Corridor data for every core vertex at one width.
#[derive(Debug)]
pub struct CorridorTable<'g> {
    graph: &'g Graph,
    rho: f64,
    core: Vec<VertexId>,
    slot: Vec<u32>,
    rows: Vec<CorridorRow>,
}

impl<'g> CorridorTable<'g> {
    pub fn build(graph: &'g Graph, rho: f64) -> Result<Self, CorridorError> {
        let depth = reach(rho)?;
        let core = graph.core().to_vec();
        let mut slot = vec![u32::MAX; graph.vertex_count()];
        for (i, &x) in core.iter().enumerate() {
            slot[x as usize] = i as u32;
        }
        let rows = core
            .par_iter()
            .map(|&x| -> Result<CorridorRow, CorridorError> {
                let ray = graph.build_ray(x)?;
                let within = graph.multi_source_distances(&ray.path, depth);
                let dx = graph.distances_from(x)?;
                let near: Vec<(VertexId, u32)> = within
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d != UNREACHED)
                    .map(|(u, _)| (u as VertexId, dx[u]))
                    .collect();
                let top = near.iter().map(|&(_, d)| d).max().unwrap_or(0);
                let mut levels = vec![Vec::new(); top as usize + 1];
                for &(u, d) in &near {
                    levels[d as usize].push(u);
                }
                Ok(CorridorRow { ray, near, levels })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CorridorTable {
            graph,
            rho,
            core,
            slot,
            rows,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn core(&self) -> &[VertexId] {
        &self.core
    }

    pub fn slot(&self, x: VertexId) -> Result<usize, CorridorError> {
        match self.slot.get(x as usize) {
            Some(&s) if s != u32::MAX => Ok(s as usize),
            _ => Err(CorridorError::OutsideCore(x)),
        }
    }

    pub fn ray(&self, i: usize) -> &Ray {
        &self.rows[i].ray
    }

    /// `T(x,k)` for the core vertex in slot `i`, sorted. Levels past the end
    /// of the ray are evaluated against the finite ray (see [`Self::clamped`]).
    pub fn set(&self, i: usize, k: i64) -> Vec<VertexId> {
        if k < 0 {
            return Vec::new();
        }
        let levels = &self.rows[i].levels;
        let k = k as usize;
        let lower = if k >= 1 { levels.get(k - 1) } else { None };
        let upper = levels.get(k);
        let mut out: Vec<VertexId> = lower
            .into_iter()
            .chain(upper)
            .flatten()
            .copied()
            .collect();
        out.sort_unstable();
        out
    }

    pub fn set_len(&self, i: usize, k: i64) -> usize {
        if k < 0 {
            return 0;
        }
        let levels = &self.rows[i].levels;
        let k = k as usize;
        let lower = if k >= 1 { levels.get(k - 1).map_or(0, Vec::len) } else { 0 };
        lower + levels.get(k).map_or(0, Vec::len)
    }

    /// Whether level `k` lies past the far end of the finite ray `p_x`.
    pub fn clamped(&self, i: usize, k: i64) -> bool {
        k > 0 && k as usize > self.rows[i].ray.len()
    }

    /// Largest level with a non-empty corridor set.
    pub fn top_level(&self, i: usize) -> u32 {
        self.rows[i].levels.len() as u32
    }

    /// The `W`-set of the pair in slots `(i, j)`, by merging near lists.
    pub fn pair_w(&self, i: usize, j: usize) -> WSet {
        let a = &self.rows[i].near;
        let b = &self.rows[j].near;
        let mut out = Vec::new();
        let (mut p, mut q) = (0, 0);
        while p < a.len() && q < b.len() {
            match a[p].0.cmp(&b[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    let (dx, dy) = (a[p].1, b[q].1);
                    out.extend_from_slice(&[(dx, dy), (dx, dy + 1), (dx + 1, dy), (dx + 1, dy + 1)]);
                    p += 1;
                    q += 1;
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        WSet(out)
    }

    /// `C1`: the largest corridor set over core vertices and all levels.
    pub fn max_set_size(&self) -> u32 {
        (0..self.rows.len())
            .flat_map(|i| (0..=self.top_level(i) as i64).map(move |k| (i, k)))
            .map(|(i, k)| self.set_len(i, k) as u32)
            .max()
            .unwrap_or(0)
    }

    /// Largest distance from a member of `T(x,k)` to `p_x(k)` (clamped to the
    /// far end of the ray) over all core `x` and levels.
    pub fn max_enclosing_radius(&self) -> u32 {
        (0..self.rows.len())
            .into_par_iter()
            .map(|i| {
                let ray = &self.rows[i].ray;
                (0..=self.top_level(i) as i64)
                    .map(|k| {
                        let v = ray.point_clamped(k as usize);
                        let dv = self.graph.distances_from(v).expect("valid id");
                        self.set(i, k)
                            .iter()
                            .map(|&w| dv[w as usize])
                            .max()
                            .unwrap_or(0)
                    })
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    fn pair_iter(&self) -> impl ParallelIterator<Item = (usize, usize)> + '_ {
        let n = self.rows.len();
        (0..n).into_par_iter().flat_map_iter(move |i| (0..n).map(move |j| (i, j)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    W,
    Z,
}

/// Boolean matrix over ordered pairs of core vertices (row `x`, column `y`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairRelation {
    pub kind: RelationKind,
    pub k: i64,
    pub l: i64,
    pub size: usize,
    pub bits: Vec<bool>,
}

impl PairRelation {
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.size + j]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// One line per row of `'0'`/`'1'` characters.
    pub fn to_bit_rows(&self) -> String {
        let mut s = String::with_capacity(self.size * (self.size + 1));
        for i in 0..self.size {
            for j in 0..self.size {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_bit_rows(kind: RelationKind, k: i64, l: i64, text: &str) -> Option<Self> {
        let rows: Vec<&str> = text.lines().filter(|r| !r.is_empty()).collect();
        let size = rows.len();
        let mut bits = Vec::with_capacity(size * size);
        for r in rows {
            if r.len() != size {
                return None;
            }
            for c in r.chars() {
                bits.push(match c {
                    '0' => false,
                    '1' => true,
                    _ => return None,
                });
            }
        }
        Some(PairRelation { kind, k, l, size, bits })
    }
}

fn sorted_intersect(a: &[VertexId], b: &[VertexId]) -> bool {
    let (mut p, mut q) = (0, 0);
    while p < a.len() && q < b.len() {
        match a[p].cmp(&b[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// `W(k,l)` by intersecting the corridor sets of every core pair.
pub fn relation_w(table: &CorridorTable, k: i64, l: i64) -> PairRelation {
    let n = table.core.len();
    let left: Vec<Vec<VertexId>> = (0..n).map(|i| table.set(i, k)).collect();
    let right: Vec<Vec<VertexId>> = (0..n).map(|j| table.set(j, l)).collect();
    let bits = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let left = &left;
            let right = &right;
            (0..n).map(move |j| sorted_intersect(&left[i], &right[j]))
        })
        .collect();
    PairRelation {
        kind: RelationKind::W,
        k,
        l,
        size: n,
        bits,
    }
}

/// `Z(k,l) = W(k,l) ∩ ⋂_{j=1..r1} W(k+j, l−j)^c`.
pub fn relation_z(table: &CorridorTable, k: i64, l: i64, r1: u32) -> PairRelation {
    let mut z = relation_w(table, k, l);
    z.kind = RelationKind::Z;
    for j in 1..=r1 as i64 {
        if l - j < 0 {
            break;
        }
        let w = relation_w(table, k + j, l - j);
        for (b, &o) in z.bits.iter_mut().zip(&w.bits) {
            *b &= !o;
        }
    }
    z
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct R1Report {
    pub r1: u32,
    pub n_max: u32,
    pub pairs_scanned: usize,
    /// A pair and `n` realizing the spread, as core vertex ids.
    pub witness: Option<(VertexId, VertexId, u32)>,
    /// In paper mode, whether the spread stays within `2·R0`.
    pub within_paper_bound: Option<bool>,
}

/// Smallest `R` such that no core pair lies in `W(k,l) ∩ W(k+j,l−j)` with
/// `j > R` and `k + l ≤ n_max`.
pub fn empirical_r1(table: &CorridorTable, n_max: u32, paper_r0: Option<u32>) -> R1Report {
    // Largest spread; ties go to the smallest (i, j, n) so the witness is
    // deterministic.
    let key = |b: &(u32, Option<(usize, usize, u32)>)| {
        (b.0, std::cmp::Reverse(b.1.unwrap_or((usize::MAX, usize::MAX, u32::MAX))))
    };
    let best = table
        .pair_iter()
        .map(|(i, j)| {
            let w = table.pair_w(i, j);
            let mut best = (0u32, None);
            for n in 0..=n_max {
                let ks = w.levels_on_antidiagonal(n);
                if let (Some(lo), Some(hi)) = (ks.iter().min(), ks.iter().max()) {
                    if hi - lo > best.0 {
                        best = (hi - lo, Some((i, j, n)));
                    }
                }
            }
            best
        })
        .reduce(|| (0, None), |a, b| if key(&a) >= key(&b) { a } else { b });
    R1Report {
        r1: best.0,
        n_max,
        pairs_scanned: table.core.len() * table.core.len(),
        witness: best.1.map(|(i, j, n)| (table.core[i], table.core[j], n)),
        within_paper_bound: paper_r0.map(|r0| best.0 <= 2 * r0),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairViolation {
    pub x: VertexId,
    pub y: VertexId,
    pub n: u32,
    pub distance: u32,
    /// Number of contributing levels (for covering: number of `k` with
    /// `(x,y) ∈ W(k, n−k)`).
    pub count: u32,
    /// The pair's `W` entries with `k + l ≤ n_max + R1`.
    pub w_row: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub n_max: u32,
    pub pairs_checked: usize,
    pub identities_checked: usize,
    pub violation_count: usize,
    /// The first violations in `(x, y, n)` order.
    pub violations: Vec<PairViolation>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

const KEPT_VIOLATIONS: usize = 20;

fn collect_report<F>(table: &CorridorTable, n_max: u32, row_span: u32, check: F) -> IdentityReport
where
    F: Fn(&WSet, u32, u32) -> Option<u32> + Sync,
{
    let mut violations: Vec<PairViolation> = table
        .pair_iter()
        .flat_map_iter(|(i, j)| {
            let w = table.pair_w(i, j);
            let x = table.core[i];
            let y = table.core[j];
            let d = table.graph.d(x, y);
            let found: Vec<PairViolation> = (0..=n_max)
                .filter_map(|n| {
                    check(&w, n, d).map(|count| PairViolation {
                        x,
                        y,
                        n,
                        distance: d,
                        count,
                        w_row: w
                            .0
                            .iter()
                            .copied()
                            .filter(|&(k, l)| k + l <= n_max + row_span)
                            .collect(),
                    })
                })
                .collect();
            found
        })
        .collect();
    violations.sort_by_key(|v| (v.x, v.y, v.n));
    let violation_count = violations.len();
    violations.truncate(KEPT_VIOLATIONS);
    let pairs = table.core.len() * table.core.len();
    IdentityReport {
        n_max,
        pairs_checked: pairs,
        identities_checked: pairs * (n_max as usize + 1),
        violation_count,
        violations,
    }
}

/// Checks `E(n) = ⋃_{k=0..n} W(k, n−k)` pairwise for `n ≤ n_max`.
pub fn covering_check(table: &CorridorTable, n_max: u32) -> IdentityReport {
    collect_report(table, n_max, 0, |w, n, d| {
        let count = w.levels_on_antidiagonal(n).len() as u32;
        let ok = if d <= n { count > 0 } else { count == 0 };
        (!ok).then_some(count)
    })
}

/// Checks `χ_{E(n)} = Σ_{k=0..n} χ_{Z(k, n−k)}` pairwise for `n ≤ n_max`.
pub fn verify_partition(table: &CorridorTable, r1: u32, n_max: u32) -> IdentityReport {
    collect_report(table, n_max, r1, |w, n, d| {
        let count = w.z_counts(r1, n)[n as usize];
        let expected = u32::from(d <= n);
        (count != expected).then_some(count)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoSearch {
    pub rho: f64,
    pub passed: bool,
    /// Every width evaluated, with its covering verdict.
    pub evaluations: Vec<(f64, bool)>,
}

/// Smallest width on the grid `{0.5, 1.5, 2.5, …}` for which covering holds
/// up to `n_max`. Covering is monotone in the width, so the grid is bisected.
pub fn minimal_rho(graph: &Graph, n_max: u32) -> Result<RhoSearch, CorridorError> {
    let mut hi = 0u32;
    for &x in graph.core() {
        hi = hi.max(graph.eccentricity(x)?);
    }
    let mut evaluations = Vec::new();
    let mut eval = |i: u32| -> Result<bool, CorridorError> {
        let rho = i as f64 + 0.5;
        let table = CorridorTable::build(graph, rho)?;
        let ok = covering_check(&table, n_max).passed();
        evaluations.push((rho, ok));
        Ok(ok)
    };
    if !eval(hi)? {
        return Ok(RhoSearch {
            rho: hi as f64 + 0.5,
            passed: false,
            evaluations,
        });
    }
    let (mut lo, mut hi) = (0u32, hi);
    // invariant: hi passes; everything below lo fails
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if eval(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(RhoSearch {
        rho: hi as f64 + 0.5,
        passed: true,
        evaluations,
    })
}

/// Constants measured on a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorridorConstants {
    /// Largest corridor set.
    pub c1: u32,
    /// Smallest `R0` such that every corridor set fits in the open
    /// `R0`-ball around its anchor.
    pub r0: u32,
}

pub fn measure_constants(table: &CorridorTable) -> CorridorConstants {
    CorridorConstants {
        c1: table.max_set_size(),
        r0: table.max_enclosing_radius() + 1,
    }
}

/// Everything needed downstream for one snapshot and parameter choice.
#[derive(Debug)]
pub struct ResolvedCorridors<'g> {
    pub table: CorridorTable<'g>,
    pub params: CorridorParams,
    pub constants: CorridorConstants,
    pub rho_search: Option<RhoSearch>,
    pub r1_report: R1Report,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub rho: Option<f64>,
    pub r1: Option<u32>,
}

/// Builds the corridor table and fixes `ρ`, `R0`, `R1` for the given mode.
/// `n_max` bounds the index range scanned for the empirical constants.
pub fn resolve<'g>(
    graph: &'g Graph,
    mode: CorridorMode,
    delta: f64,
    overrides: &Overrides,
    n_max: u32,
) -> Result<ResolvedCorridors<'g>, CorridorError> {
    match mode {
        CorridorMode::Paper => {
            let mut params = CorridorParams::paper(delta);
            if let Some(rho) = overrides.rho {
                params.rho = rho;
            }
            if let Some(r1) = overrides.r1 {
                params.r1 = r1;
            }
            let table = CorridorTable::build(graph, params.rho)?;
            let r1_report = empirical_r1(&table, n_max, Some(params.r0));
            let constants = measure_constants(&table);
            Ok(ResolvedCorridors {
                table,
                params,
                constants,
                rho_search: None,
                r1_report,
            })
        }
        CorridorMode::Empirical => {
            let (rho, rho_search) = match overrides.rho {
                Some(rho) => (rho, None),
                None => {
                    let s = minimal_rho(graph, n_max)?;
                    (s.rho, Some(s))
                }
            };
            let table = CorridorTable::build(graph, rho)?;
            let r1_report = empirical_r1(&table, n_max, None);
            let constants = measure_constants(&table);
            let params =
                CorridorParams::empirical(rho, constants.r0, overrides.r1.unwrap_or(r1_report.r1));
            Ok(ResolvedCorridors {
                table,
                params,
                constants,
                rho_search,
                r1_report,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::path_graph;
    use crate::providers::{gen_free_group_ball, gen_line, gen_regular_tree};

    fn by_label(g: &Graph, w: &str) -> VertexId {
        g.labels().unwrap().iter().position(|l| l == w).unwrap() as VertexId
    }

    #[test]
    fn negative_levels_are_empty() {
        let g = gen_line(6).unwrap();
        let p = CorridorParams::empirical(0.5, 1, 0);
        let t = corridor_set(&g, 2, -1, &p).unwrap();
        assert!(t.members.is_empty());
        let table = CorridorTable::build(&g, 0.5).unwrap();
        assert!(table.set(0, -1).is_empty());
    }

    #[test]
    fn line_corridor_is_the_ray() {
        let g = gen_line(10).unwrap();
        let p = CorridorParams::empirical(0.5, 2, 0);
        for x in 0..=10u32 {
            let ray = g.build_ray(x).unwrap();
            assert_eq!(ray.path, (x..=10).collect::<Vec<_>>());
            for k in 0..=(10 - x) as i64 {
                let t = corridor_set(&g, x, k, &p).unwrap();
                let mut want = vec![x + k as u32];
                if k >= 1 {
                    want.insert(0, x + k as u32 - 1);
                }
                assert_eq!(t.members, want);
                assert!(t.within_r0);
            }
            assert!(matches!(
                corridor_set(&g, x, (11 - x) as i64, &p),
                Err(CorridorError::Truncated { .. })
            ));
        }
    }

    #[test]
    fn free_group_corridor_of_b() {
        let g = gen_free_group_ball(2, 4).unwrap();
        let p = CorridorParams::empirical(1.0, 2, 0);
        let b = by_label(&g, "b");
        let t = corridor_set(&g, b, 2, &p).unwrap();
        let mut want = vec![by_label(&g, "e"), by_label(&g, "a")];
        want.sort_unstable();
        assert_eq!(t.members, want);
        // brute force over B_2(b) with the definition
        let ray = g.build_ray(b).unwrap();
        let brute: Vec<VertexId> = (0..g.vertex_count() as u32)
            .filter(|&w| {
                let dw = g.distance(w, b).unwrap();
                (dw == 1 || dw == 2) && ray.path.iter().any(|&v| g.distance(w, v).unwrap() < 1)
            })
            .collect();
        assert_eq!(t.members, brute);
    }

    #[test]
    fn table_matches_direct_sets() {
        let g = gen_free_group_ball(2, 3).unwrap();
        for rho in [0.5, 1.5, 2.5] {
            let p = CorridorParams::empirical(rho, 10, 0);
            let table = CorridorTable::build(&g, rho).unwrap();
            for (i, &x) in g.core().iter().enumerate() {
                for k in 0..=table.ray(i).len() as i64 {
                    assert_eq!(table.set(i, k), corridor_set(&g, x, k, &p).unwrap().members);
                }
            }
        }
    }

    #[test]
    fn level_sets_two_apart_are_disjoint() {
        let g = gen_free_group_ball(2, 3).unwrap();
        let table = CorridorTable::build(&g, 1.5).unwrap();
        for i in 0..g.core().len() {
            for m in 0..8 {
                for m2 in m + 2..10 {
                    assert!(!sorted_intersect(&table.set(i, m), &table.set(i, m2)));
                }
            }
        }
    }

    #[test]
    fn pair_w_matches_relation_w() {
        for g in [gen_line(12).unwrap(), gen_free_group_ball(2, 2).unwrap()] {
            for rho in [0.5, 1.5] {
                let table = CorridorTable::build(&g, rho).unwrap();
                let n = g.core().len();
                for k in 0..7 {
                    for l in 0..7 {
                        let rel = relation_w(&table, k, l);
                        for i in 0..n {
                            for j in 0..n {
                                assert_eq!(rel.get(i, j), table.pair_w(i, j).contains(k, l));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn w_diagonal_and_transpose() {
        let g = gen_free_group_ball(2, 2).unwrap();
        let table = CorridorTable::build(&g, 0.5).unwrap();
        let w00 = relation_w(&table, 0, 0);
        for i in 0..g.core().len() {
            assert!(w00.get(i, i));
        }
        let a = relation_w(&table, 2, 3);
        let b = relation_w(&table, 3, 2);
        for i in 0..a.size {
            for j in 0..a.size {
                assert_eq!(a.get(i, j), b.get(j, i));
            }
        }
    }

    #[test]
    fn line_w_matches_interval_arithmetic() {
        // Rays head right, so with ρ = 0.5 the corridor of x at level k is
        // {x+k−1, x+k} clipped to [x, 20].
        let g = gen_line(20).unwrap();
        let table = CorridorTable::build(&g, 0.5).unwrap();
        let interval = |x: i64, k: i64| -> (i64, i64) {
            if k < 0 || x + k - 1 > 20 {
                return (1, 0);
            }
            ((x + k - 1).max(x), (x + k).min(20))
        };
        for k in 0..8 {
            for l in 0..8 {
                let rel = relation_w(&table, k, l);
                for x in 0..=20 {
                    for y in 0..=20 {
                        let (a0, a1) = interval(x, k);
                        let (b0, b1) = interval(y, l);
                        let meet = a0 <= a1 && b0 <= b1 && a0.max(b0) <= a1.min(b1);
                        let (i, j) = (table.slot(x as u32).unwrap(), table.slot(y as u32).unwrap());
                        assert_eq!(rel.get(i, j), meet, "x={x} y={y} k={k} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn r1_on_small_trees_and_lines() {
        let tree = gen_regular_tree(2, 5).unwrap();
        let t = CorridorTable::build(&tree, 0.5).unwrap();
        assert!(empirical_r1(&t, 8, None).r1 <= 1);
        let line = gen_line(20).unwrap();
        let t = CorridorTable::build(&line, 0.5).unwrap();
        assert!(empirical_r1(&t, 10, None).r1 <= 1);
    }

    /// Per pair and `n`, the largest `k` with `(x,y) ∈ W(k, n−k)`, computed
    /// from the corridor sets without the `Z` construction.
    fn largest_k(table: &CorridorTable, i: usize, j: usize, n: i64) -> Option<i64> {
        (0..=n)
            .rev()
            .find(|&k| sorted_intersect(&table.set(i, k), &table.set(j, n - k)))
    }

    #[test]
    fn z_matches_largest_k_oracle() {
        let g = gen_free_group_ball(2, 4).unwrap();
        let n_max = 4;
        let table = CorridorTable::build(&g, 0.5).unwrap();
        let r1 = empirical_r1(&table, n_max, None).r1;
        let size = g.core().len();
        for n in 0..=n_max as i64 {
            for k in 0..=n {
                let z = relation_z(&table, k, n - k, r1);
                for i in 0..size {
                    for j in 0..size {
                        assert_eq!(z.get(i, j), largest_k(&table, i, j, n) == Some(k));
                    }
                }
            }
        }
    }

    #[test]
    fn partition_and_covering_on_free_group() {
        let g = gen_free_group_ball(2, 4).unwrap();
        let search = minimal_rho(&g, 4).unwrap();
        assert!(search.passed);
        let table = CorridorTable::build(&g, search.rho).unwrap();
        assert!(covering_check(&table, 4).passed());
        let r1 = empirical_r1(&table, 4, None).r1;
        let rep = verify_partition(&table, r1, 4);
        assert!(rep.passed(), "{:?}", rep.violations.first());
        assert_eq!(rep.pairs_checked, 161 * 161);
        if search.rho > 0.5 {
            let below = CorridorTable::build(&g, search.rho - 1.0).unwrap();
            assert!(!covering_check(&below, 4).passed());
        }
    }

    #[test]
    fn shrunken_width_breaks_covering() {
        let g = gen_free_group_ball(2, 3).unwrap();
        let full = CorridorTable::build(&g, 100.0).unwrap();
        assert!(covering_check(&full, 3).passed());
        let search = minimal_rho(&g, 3).unwrap();
        for (rho, ok) in &search.evaluations {
            assert_eq!(*ok, *rho >= search.rho);
        }
    }

    #[test]
    fn partition_on_tree_at_exact_distance() {
        let g = gen_regular_tree(2, 5).unwrap();
        let table = CorridorTable::build(&g, 0.5).unwrap();
        let r1 = empirical_r1(&table, 10, None).r1;
        let n = g.core().len();
        for i in 0..n {
            for j in 0..n {
                let d = g.distance(g.core()[i], g.core()[j]).unwrap();
                let c = table.pair_w(i, j).z_counts(r1, d)[d as usize];
                assert_eq!(c, 1);
            }
        }
    }

    #[test]
    fn bit_rows_round_trip() {
        let g = path_graph(5);
        let table = CorridorTable::build(&g, 0.5).unwrap();
        let rel = relation_w(&table, 1, 1);
        let text = rel.to_bit_rows();
        assert_eq!(text.lines().count(), g.core().len());
        let back = PairRelation::from_bit_rows(RelationKind::W, 1, 1, &text).unwrap();
        assert_eq!(back, rel);
    }

    #[test]
    fn paper_constants() {
        let p = CorridorParams::paper(1.0);
        assert_eq!((p.rho, p.r0, p.r1), (100.0, 201, 402));
        let g = gen_line(10).unwrap();
        let r = resolve(&g, CorridorMode::Paper, 1.0, &Overrides::default(), 4).unwrap();
        assert_eq!(r.r1_report.within_paper_bound, Some(true));
        // the corridor at level k is the whole shell {k−1, k} around x
        assert!(r.constants.c1 >= 2);
    }
}
