//! Immutable graph snapshots with a base point, a designated base geodesic
//! and a core ball on which all downstream identities are checked.

mod geodesic;
mod hyperbolicity;

use std::collections::VecDeque;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::halfint::HalfInt;

pub use geodesic::{enumerate_geodesics, max_distance_to_geodesics, GeodesicInterval, GeodesicList};
pub use hyperbolicity::{
    hyperbolicity_profile, thinness_check, HyperbolicityProfile, ProfileMode, ThinnessReport,
    ThinnessViolation,
};

pub type VertexId = u32;

/// Marker for "not reachable from the source".
pub const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("adjacency is not symmetric: {0} lists {1} but not conversely")]
    Asymmetric(VertexId, VertexId),
    #[error("graph is disconnected: vertex {0} is unreachable from the base point")]
    Disconnected(VertexId),
    #[error("base path is not a geodesic: {0}")]
    NotGeodesic(String),
    #[error("vertex {0} has no geodesic merging into the base path")]
    NoMergingRay(VertexId),
    #[error("vertex {0} lies outside the core ball")]
    OutsideCore(VertexId),
}

/// Memoized single-source BFS distances. Each source is computed at most
/// once and can be shared across threads.
#[derive(Debug)]
pub struct DistanceOracle {
    rows: Vec<OnceLock<Box<[u32]>>>,
}

impl DistanceOracle {
    fn new(n: usize) -> Self {
        DistanceOracle {
            rows: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Number of sources whose distance rows are memoized.
    pub fn memoized(&self) -> usize {
        self.rows.iter().filter(|r| r.get().is_some()).count()
    }
}

/// A geodesic path inside the snapshot that runs into the base path `p` and
/// follows it to its far end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ray {
    pub origin: VertexId,
    pub path: Vec<VertexId>,
    /// Index into `path` from which the path coincides with the base path.
    pub merge_index: usize,
}

impl Ray {
    pub fn len(&self) -> usize {
        self.path.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.path.len() <= 1
    }

    /// The point at distance `k` from the origin, clamped to the far end.
    pub fn point_clamped(&self, k: usize) -> VertexId {
        self.path[k.min(self.path.len() - 1)]
    }
}

#[derive(Debug)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    base_point: VertexId,
    core_radius: u32,
    base_path: Vec<VertexId>,
    labels: Option<Vec<String>>,
    is_group: bool,
    core: Vec<VertexId>,
    oracle: DistanceOracle,
}

impl Graph {
    /// Validates and freezes a snapshot.
    ///
    /// Adjacency lists are sorted and deduplicated. The base path must be a
    /// geodesic of the snapshot; it plays the role of the fixed ray `p` and
    /// its last vertex is treated as the direction of infinity.
    pub fn new(
        mut adjacency: Vec<Vec<VertexId>>,
        base_point: VertexId,
        core_radius: u32,
        base_path: Vec<VertexId>,
        labels: Option<Vec<String>>,
        is_group: bool,
    ) -> Result<Self, GraphError> {
        let n = adjacency.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &u in list.iter() {
                if u as usize >= n {
                    return Err(GraphError::UnknownVertex(u));
                }
                if u as usize == v {
                    return Err(GraphError::SelfLoop(u));
                }
            }
        }
        for (v, list) in adjacency.iter().enumerate() {
            for &u in list {
                if adjacency[u as usize].binary_search(&(v as u32)).is_err() {
                    return Err(GraphError::Asymmetric(v as u32, u));
                }
            }
        }
        if base_point as usize >= n {
            return Err(GraphError::UnknownVertex(base_point));
        }
        if base_path.is_empty() {
            return Err(GraphError::NotGeodesic("empty base path".into()));
        }
        let mut graph = Graph {
            adjacency,
            base_point,
            core_radius,
            base_path,
            labels,
            is_group,
            core: Vec::new(),
            oracle: DistanceOracle::new(n),
        };
        let from_base = graph.distances_from(base_point)?.to_vec();
        if let Some(v) = from_base.iter().position(|&d| d == UNREACHED) {
            return Err(GraphError::Disconnected(v as u32));
        }
        graph.core = (0..n as u32)
            .filter(|&v| from_base[v as usize] <= core_radius)
            .collect();
        graph.check_path_geodesic(&graph.base_path)?;
        if let Some(labels) = &graph.labels {
            if labels.len() != n {
                return Err(GraphError::NotGeodesic(format!(
                    "label table has {} entries for {} vertices",
                    labels.len(),
                    n
                )));
            }
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v as usize]
    }

    pub fn adjacency(&self) -> &[Vec<VertexId>] {
        &self.adjacency
    }

    pub fn base_point(&self) -> VertexId {
        self.base_point
    }

    pub fn core_radius(&self) -> u32 {
        self.core_radius
    }

    /// The designated base geodesic `p`.
    pub fn base_path(&self) -> &[VertexId] {
        &self.base_path
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: VertexId) -> String {
        match &self.labels {
            Some(l) => l[v as usize].clone(),
            None => v.to_string(),
        }
    }

    /// Whether the snapshot is a ball in a Cayley graph with the base point
    /// at the identity.
    pub fn is_group(&self) -> bool {
        self.is_group
    }

    /// Sorted ids of the vertices within `core_radius` of the base point.
    pub fn core(&self) -> &[VertexId] {
        &self.core
    }

    pub fn in_core(&self, v: VertexId) -> bool {
        self.core.binary_search(&v).is_ok()
    }

    pub fn oracle(&self) -> &DistanceOracle {
        &self.oracle
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if (v as usize) < self.adjacency.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    /// BFS distances from `source` (memoized).
    pub fn distances_from(&self, source: VertexId) -> Result<&[u32], GraphError> {
        self.check_vertex(source)?;
        Ok(self.oracle.rows[source as usize].get_or_init(|| self.bfs(source)))
    }

    pub fn distance(&self, x: VertexId, y: VertexId) -> Result<u32, GraphError> {
        self.check_vertex(y)?;
        Ok(self.distances_from(x)?[y as usize])
    }

    /// Distance for ids already known to be valid.
    pub(crate) fn d(&self, x: VertexId, y: VertexId) -> u32 {
        self.oracle.rows[x as usize].get_or_init(|| self.bfs(x))[y as usize]
    }

    fn bfs(&self, source: VertexId) -> Box<[u32]> {
        let mut dist = vec![UNREACHED; self.adjacency.len()];
        let mut queue = VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            for &u in &self.adjacency[v as usize] {
                if dist[u as usize] == UNREACHED {
                    dist[u as usize] = dv + 1;
                    queue.push_back(u);
                }
            }
        }
        dist.into_boxed_slice()
    }

    /// Distances from the nearest vertex of `sources`, explored only up to
    /// `max_depth`; vertices further away are reported as [`UNREACHED`].
    pub fn multi_source_distances(&self, sources: &[VertexId], max_depth: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.adjacency.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] != 0 {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            if dv >= max_depth {
                continue;
            }
            for &u in &self.adjacency[v as usize] {
                if dist[u as usize] == UNREACHED {
                    dist[u as usize] = dv + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Gromov product `⟨x,y⟩_w = ½(d(x,w) + d(y,w) − d(x,y))`.
    pub fn gromov_product(
        &self,
        x: VertexId,
        y: VertexId,
        w: VertexId,
    ) -> Result<HalfInt, GraphError> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        self.check_vertex(w)?;
        Ok(self.gromov(x, y, w))
    }

    pub(crate) fn gromov(&self, x: VertexId, y: VertexId, w: VertexId) -> HalfInt {
        let dw = self.distances_from(w).expect("valid id");
        let twice = dw[x as usize] as i64 + dw[y as usize] as i64 - self.d(x, y) as i64;
        HalfInt::from_twice(twice)
    }

    pub fn check_path_geodesic(&self, path: &[VertexId]) -> Result<(), GraphError> {
        for &v in path {
            self.check_vertex(v)?;
        }
        for w in path.windows(2) {
            if self.adjacency[w[0] as usize].binary_search(&w[1]).is_err() {
                return Err(GraphError::NotGeodesic(format!(
                    "{} and {} are not adjacent",
                    w[0], w[1]
                )));
            }
        }
        let (first, last) = (path[0], path[path.len() - 1]);
        if self.d(first, last) as usize != path.len() - 1 {
            return Err(GraphError::NotGeodesic(format!(
                "endpoints {first} and {last} are at distance {} but the path has length {}",
                self.d(first, last),
                path.len() - 1
            )));
        }
        Ok(())
    }

    /// The base path as a [`Ray`] starting at its first vertex.
    pub fn build_base_ray(&self) -> Ray {
        Ray {
            origin: self.base_path[0],
            path: self.base_path.clone(),
            merge_index: 0,
        }
    }

    /// A geodesic from `x` that joins the base path as early as possible and
    /// then follows it to its far end. Among geodesics joining at that point
    /// the lexicographically smallest vertex sequence is taken.
    pub fn build_ray(&self, x: VertexId) -> Result<Ray, GraphError> {
        self.check_vertex(x)?;
        let p = &self.base_path;
        let last = p.len() - 1;
        let dx = self.distances_from(x)?;
        let d_end = dx[p[last] as usize];
        if d_end == UNREACHED {
            return Err(GraphError::NoMergingRay(x));
        }
        let join = (0..=last)
            .find(|&j| dx[p[j] as usize] as usize + (last - j) == d_end as usize)
            .ok_or(GraphError::NoMergingRay(x))?;
        let target = p[join];
        let dt = self.distances_from(target)?;
        let mut path = vec![x];
        let mut v = x;
        while v != target {
            let next = self.adjacency[v as usize]
                .iter()
                .copied()
                .find(|&u| dt[u as usize] + 1 == dt[v as usize])
                .ok_or(GraphError::NoMergingRay(x))?;
            path.push(next);
            v = next;
        }
        let merge_index = path.len() - 1;
        path.extend_from_slice(&p[join + 1..]);
        let ray = Ray {
            origin: x,
            path,
            merge_index,
        };
        self.check_path_geodesic(&ray.path)?;
        Ok(ray)
    }

    /// Largest distance from the base point.
    pub fn eccentricity(&self, v: VertexId) -> Result<u32, GraphError> {
        Ok(*self.distances_from(v)?.iter().max().expect("non-empty"))
    }

    /// Largest distance between two core vertices.
    pub fn core_diameter(&self) -> u32 {
        let mut best = 0;
        for &x in &self.core {
            let dx = self.distances_from(x).expect("valid id");
            for &y in &self.core {
                best = best.max(dx[y as usize]);
            }
        }
        best
    }

    /// Appends a pendant path of `length` new vertices at the far end of the
    /// base path and extends the base path along it.
    ///
    /// Distances among existing vertices are unchanged and the core is kept
    /// as the same set of vertices, so the extension only lengthens the rays
    /// `p_x` beyond the core.
    pub fn with_ray_extension(&self, length: u32) -> Result<Graph, GraphError> {
        if length == 0 {
            return Graph::new(
                self.adjacency.clone(),
                self.base_point,
                self.core_radius,
                self.base_path.clone(),
                self.labels.clone(),
                self.is_group,
            );
        }
        let mut adjacency = self.adjacency.clone();
        let mut base_path = self.base_path.clone();
        let mut labels = self.labels.clone();
        let mut tail = *base_path.last().expect("non-empty");
        let tail_label = self.label(tail);
        for i in 1..=length {
            let v = adjacency.len() as u32;
            adjacency.push(vec![tail]);
            adjacency[tail as usize].push(v);
            base_path.push(v);
            if let Some(l) = labels.as_mut() {
                l.push(format!("{tail_label}+{i}"));
            }
            tail = v;
        }
        let mut g = Graph::new(
            adjacency,
            self.base_point,
            self.core_radius,
            base_path,
            labels,
            self.is_group,
        )?;
        // A base path ending strictly inside the core ball would otherwise
        // pull spine vertices into the core.
        g.core = self.core.clone();
        Ok(g)
    }
}

/// `bfs_distances` as a free function: exact graph distances from `source`.
pub fn bfs_distances(graph: &Graph, source: VertexId) -> Result<Vec<u32>, GraphError> {
    Ok(graph.distances_from(source)?.to_vec())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn path_graph(n: u32) -> Graph {
        let adjacency = (0..=n)
            .map(|v| {
                let mut l = Vec::new();
                if v > 0 {
                    l.push(v - 1);
                }
                if v < n {
                    l.push(v + 1);
                }
                l
            })
            .collect();
        Graph::new(adjacency, 0, n, (0..=n).collect(), None, false).unwrap()
    }

    fn cycle(n: u32) -> Graph {
        let adjacency = (0..n).map(|v| vec![(v + n - 1) % n, (v + 1) % n]).collect();
        Graph::new(adjacency, 0, n / 2, (0..=n / 2).collect(), None, false).unwrap()
    }

    fn naive_distances(g: &Graph) -> Vec<Vec<u32>> {
        let n = g.vertex_count();
        let mut d = vec![vec![UNREACHED; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        loop {
            let mut changed = false;
            for v in 0..n {
                for &u in g.neighbors(v as u32) {
                    for s in 0..n {
                        if d[s][u as usize] != UNREACHED && d[s][u as usize] + 1 < d[s][v] {
                            d[s][v] = d[s][u as usize] + 1;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return d;
            }
        }
    }

    #[test]
    fn line_distances() {
        let g = path_graph(10);
        let d = bfs_distances(&g, 0).unwrap();
        assert_eq!(d, (0..=10).collect::<Vec<u32>>());
        assert_eq!(g.distance(7, 7).unwrap(), 0);
        assert_eq!(g.oracle().memoized(), 2);
    }

    #[test]
    fn bfs_matches_relaxation_on_small_graphs() {
        for g in [path_graph(9), cycle(7), cycle(12)] {
            let naive = naive_distances(&g);
            for v in 0..g.vertex_count() as u32 {
                assert_eq!(g.distances_from(v).unwrap(), naive[v as usize].as_slice());
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            Graph::new(vec![vec![1], vec![]], 0, 1, vec![0], None, false).unwrap_err(),
            GraphError::Asymmetric(0, 1)
        );
        assert_eq!(
            Graph::new(vec![vec![], vec![]], 0, 1, vec![0], None, false).unwrap_err(),
            GraphError::Disconnected(1)
        );
        assert_eq!(
            Graph::new(vec![vec![0]], 0, 0, vec![0], None, false).unwrap_err(),
            GraphError::SelfLoop(0)
        );
        let c = cycle(6);
        assert!(c.check_path_geodesic(&[0, 1, 2, 3, 4]).is_err());
        assert_eq!(c.distance(0, 99).unwrap_err(), GraphError::UnknownVertex(99));
    }

    #[test]
    fn gromov_products_on_cycle() {
        let g = cycle(8);
        assert_eq!(g.gromov_product(0, 4, 2).unwrap(), HalfInt::ZERO);
        assert_eq!(g.gromov_product(3, 5, 3).unwrap(), HalfInt::ZERO);
        // w opposite both: ½(3 + 3 − 2) = 2
        assert_eq!(g.gromov_product(0, 2, 5).unwrap(), HalfInt::from_int(2));
    }

    #[test]
    fn rays_on_line() {
        let g = path_graph(10);
        let r = g.build_ray(4).unwrap();
        assert_eq!(r.path, (4..=10).collect::<Vec<_>>());
        assert_eq!(r.merge_index, 0);
        assert_eq!(g.build_base_ray().path, (0..=10).collect::<Vec<_>>());
    }

    #[test]
    fn rays_on_cycle_join_early() {
        let g = cycle(8);
        // base path 0..4; from 6 the geodesic to 4 passes through 5.
        let r = g.build_ray(6).unwrap();
        assert_eq!(r.path, vec![6, 5, 4]);
        let r = g.build_ray(7).unwrap();
        assert_eq!(r.path, vec![7, 6, 5, 4]);
        assert_eq!(r.merge_index, 3);
        let r = g.build_ray(1).unwrap();
        assert_eq!(r.path, vec![1, 2, 3, 4]);
        assert_eq!(r.merge_index, 0);
    }

    #[test]
    fn extension_keeps_distances_and_core() {
        let g = path_graph(6);
        let h = g.with_ray_extension(5).unwrap();
        assert_eq!(h.vertex_count(), 12);
        assert_eq!(h.core(), g.core());
        for x in 0..7 {
            for y in 0..7 {
                assert_eq!(g.distance(x, y).unwrap(), h.distance(x, y).unwrap());
            }
        }
        assert_eq!(h.build_ray(3).unwrap().len(), 8);
    }
}
