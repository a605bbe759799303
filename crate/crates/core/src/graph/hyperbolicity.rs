use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::geodesic::GeodesicInterval;
use super::{Graph, GraphError, VertexId};
use crate::halfint::HalfInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    /// All core triangles and quadruples.
    Exact,
    /// `budget` random triangles and `budget` random quadruples.
    Sampled { budget: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityProfile {
    /// Smallest δ such that every enumerated geodesic triangle is δ-thin.
    pub delta_thin: HalfInt,
    /// Gromov four-point constant over the enumerated quadruples.
    pub delta_four_point: HalfInt,
    pub sampled: bool,
    /// The δ handed to downstream modules.
    pub delta_impl: f64,
    pub triangles_checked: u64,
    pub quadruples_checked: u64,
    pub worst_triangle: Option<[VertexId; 3]>,
}

impl HyperbolicityProfile {
    pub fn with_delta_override(mut self, delta: f64) -> Self {
        self.delta_impl = delta;
        self
    }
}

/// Thinness of one geodesic triangle, maximised over all choices of sides:
/// for a point `q` on some geodesic of one side, the adversary picks the
/// geodesics of the other two sides that stay farthest from `q`.
fn triangle_thinness(graph: &Graph, x: VertexId, y: VertexId, z: VertexId) -> u32 {
    let sides = [
        GeodesicInterval::new(graph, x, y).expect("connected"),
        GeodesicInterval::new(graph, y, z).expect("connected"),
        GeodesicInterval::new(graph, z, x).expect("connected"),
    ];
    let mut worst = 0;
    for s in 0..3 {
        let (a, b) = (&sides[(s + 1) % 3], &sides[(s + 2) % 3]);
        for q in sides[s].vertices() {
            let dq = graph.distances_from(q).expect("valid id");
            let fa = a.bottleneck(graph, |v| dq[v as usize]);
            if fa <= worst {
                continue;
            }
            let fb = b.bottleneck(graph, |v| dq[v as usize]);
            worst = worst.max(fa.min(fb));
        }
    }
    worst
}

/// Four-point value of an unordered quadruple: half the gap between the
/// largest and middle of the three pair sums.
fn four_point(d: &[u32], n: usize, i: usize, j: usize, k: usize, l: usize) -> i64 {
    let s1 = d[i * n + j] as i64 + d[k * n + l] as i64;
    let s2 = d[i * n + k] as i64 + d[j * n + l] as i64;
    let s3 = d[i * n + l] as i64 + d[j * n + k] as i64;
    let mut s = [s1, s2, s3];
    s.sort_unstable();
    s[2] - s[1]
}

fn core_distance_matrix(graph: &Graph) -> Vec<u32> {
    let core = graph.core();
    let n = core.len();
    let mut d = vec![0u32; n * n];
    for (i, &x) in core.iter().enumerate() {
        let dx = graph.distances_from(x).expect("valid id");
        for (j, &y) in core.iter().enumerate() {
            d[i * n + j] = dx[y as usize];
        }
    }
    d
}

pub fn hyperbolicity_profile(
    graph: &Graph,
    mode: ProfileMode,
) -> Result<HyperbolicityProfile, GraphError> {
    let core = graph.core();
    let n = core.len();
    let dist = core_distance_matrix(graph);

    let (thin, worst_triangle, triangles, four_twice, quadruples) = match mode {
        ProfileMode::Exact => {
            let per_x: Vec<(u32, Option<[VertexId; 3]>, u64)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut best = 0;
                    let mut arg = None;
                    let mut count = 0;
                    for j in i..n {
                        for k in j..n {
                            let t = triangle_thinness(graph, core[i], core[j], core[k]);
                            count += 1;
                            if t > best || arg.is_none() {
                                best = best.max(t);
                                arg = Some([core[i], core[j], core[k]]);
                            }
                        }
                    }
                    (best, arg, count)
                })
                .collect();
            let (thin, arg) = per_x
                .iter()
                .fold((0, None), |(b, a), &(t, ta, _)| if t > b || a.is_none() { (t, ta) } else { (b, a) });
            let triangles = per_x.iter().map(|t| t.2).sum();
            let four: Vec<(i64, u64)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut best = 0;
                    let mut count = 0u64;
                    for j in i + 1..n {
                        for k in j + 1..n {
                            for l in k + 1..n {
                                best = best.max(four_point(&dist, n, i, j, k, l));
                                count += 1;
                            }
                        }
                    }
                    (best, count)
                })
                .collect();
            let four_twice = four.iter().map(|f| f.0).max().unwrap_or(0);
            let quadruples = four.iter().map(|f| f.1).sum();
            (thin, arg, triangles, four_twice, quadruples)
        }
        ProfileMode::Sampled { budget, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut thin = 0;
            let mut arg = None;
            for _ in 0..budget {
                let (a, b, c) = (
                    core[rng.random_range(0..n)],
                    core[rng.random_range(0..n)],
                    core[rng.random_range(0..n)],
                );
                let t = triangle_thinness(graph, a, b, c);
                if t > thin || arg.is_none() {
                    thin = thin.max(t);
                    arg = Some([a, b, c]);
                }
            }
            let mut four_twice = 0;
            for _ in 0..budget {
                let q: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..n));
                four_twice = four_twice.max(four_point(&dist, n, q[0], q[1], q[2], q[3]));
            }
            (thin, arg, budget as u64, four_twice, budget as u64)
        }
    };
    let delta_thin = HalfInt::from_int(thin as i64);
    Ok(HyperbolicityProfile {
        delta_thin,
        // (largest − middle)/2 is stored doubled as (largest − middle).
        delta_four_point: HalfInt::from_twice(four_twice),
        sampled: matches!(mode, ProfileMode::Sampled { .. }),
        delta_impl: delta_thin.to_f64().max(1.0),
        triangles_checked: triangles,
        quadruples_checked: quadruples,
        worst_triangle,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThinnessViolation {
    pub x: VertexId,
    pub y: VertexId,
    pub w: VertexId,
    pub distance_to_geodesic: u32,
    pub allowed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThinnessReport {
    pub delta: f64,
    pub multiplier: f64,
    pub triples_checked: u64,
    pub sampled: bool,
    /// Minimum of `⟨x,y⟩_w + multiplier·δ − d(w,[x,y])` over checked triples,
    /// with `[x,y]` ranging over all geodesics.
    pub worst_slack: f64,
    pub worst_triple: Option<[VertexId; 3]>,
    pub violations: Vec<ThinnessViolation>,
}

impl ThinnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `d(w,[x,y]) ≤ ⟨x,y⟩_w + multiplier·δ` for every geodesic `[x,y]`.
/// With `sample = None` all core triples are checked.
pub fn thinness_check(
    graph: &Graph,
    delta: f64,
    multiplier: f64,
    sample: Option<(usize, u64)>,
) -> Result<ThinnessReport, GraphError> {
    let core = graph.core();
    let n = core.len();
    let mut report = ThinnessReport {
        delta,
        multiplier,
        triples_checked: 0,
        sampled: sample.is_some(),
        worst_slack: f64::INFINITY,
        worst_triple: None,
        violations: Vec::new(),
    };
    let check = |x: VertexId, y: VertexId, ws: &[VertexId], report: &mut ThinnessReport| {
        let interval = GeodesicInterval::new(graph, x, y).expect("connected");
        for &w in ws {
            let dw = graph.distances_from(w).expect("valid id");
            let far = interval.bottleneck(graph, |v| dw[v as usize]);
            let allowed = graph.gromov(x, y, w).to_f64() + multiplier * delta;
            let slack = allowed - far as f64;
            report.triples_checked += 1;
            if slack < report.worst_slack {
                report.worst_slack = slack;
                report.worst_triple = Some([x, y, w]);
            }
            if slack < 0.0 {
                report.violations.push(ThinnessViolation {
                    x,
                    y,
                    w,
                    distance_to_geodesic: far,
                    allowed,
                });
            }
        }
    };
    match sample {
        None => {
            for i in 0..n {
                for j in i..n {
                    check(core[i], core[j], core, &mut report);
                }
            }
        }
        Some((budget, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget {
                let (x, y, w) = (
                    core[rng.random_range(0..n)],
                    core[rng.random_range(0..n)],
                    core[rng.random_range(0..n)],
                );
                check(x, y, &[w], &mut report);
            }
        }
    }
    Ok(report)
}
