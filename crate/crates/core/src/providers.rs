//! Graph snapshot providers: edge-list files and generators for free-group
//! balls, regular trees, lines and cycles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexId};

/// Generators refuse to build snapshots larger than this.
pub const DEFAULT_VERTEX_CAP: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("snapshot would have {count} vertices, above the cap of {cap}")]
    TooLarge { count: u128, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProviderKind {
    EdgeListFile { path: PathBuf },
    FreeGroup { rank: u32, radius: u32 },
    RegularTree { branching: u32, depth: u32 },
    Line { n: u32 },
    Cycle { n: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProviderSpec {
    #[serde(flatten)]
    pub kind: ProviderKind,
    /// Overrides the provider's base geodesic.
    pub base_ray_hint: Option<Vec<VertexId>>,
    /// Number of extra vertices appended along the far end of the base
    /// geodesic (outside the core).
    pub ray_extension: u32,
}

impl ProviderSpec {
    pub fn new(kind: ProviderKind) -> Self {
        ProviderSpec {
            kind,
            base_ray_hint: None,
            ray_extension: 0,
        }
    }

    pub fn with_ray_extension(mut self, length: u32) -> Self {
        self.ray_extension = length;
        self
    }

    /// Builds the snapshot; the second component collects ingestion warnings.
    pub fn build(&self) -> Result<(Graph, Vec<String>), ProviderError> {
        let (graph, warnings) = match &self.kind {
            ProviderKind::EdgeListFile { path } => {
                let loaded = load_edge_list(path)?;
                (loaded.graph, loaded.warnings)
            }
            ProviderKind::FreeGroup { rank, radius } => {
                (gen_free_group_ball(*rank, *radius)?, Vec::new())
            }
            ProviderKind::RegularTree { branching, depth } => {
                (gen_regular_tree(*branching, *depth)?, Vec::new())
            }
            ProviderKind::Line { n } => (gen_line(*n)?, Vec::new()),
            ProviderKind::Cycle { n } => (gen_cycle(*n)?, Vec::new()),
        };
        let graph = match &self.base_ray_hint {
            Some(hint) => Graph::new(
                graph.adjacency().to_vec(),
                graph.base_point(),
                graph.core_radius(),
                hint.clone(),
                graph.labels().map(<[String]>::to_vec),
                graph.is_group(),
            )?,
            None => graph,
        };
        let graph = if self.ray_extension > 0 {
            graph.with_ray_extension(self.ray_extension)?
        } else {
            graph
        };
        Ok((graph, warnings))
    }
}

fn check_cap(count: u128, cap: usize) -> Result<(), ProviderError> {
    if count > cap as u128 {
        Err(ProviderError::TooLarge { count, cap })
    } else {
        Ok(())
    }
}

/// `1 + Σ_{k=1..radius} 2·rank·(2·rank−1)^{k−1}`, saturating.
pub fn free_group_ball_size(rank: u32, radius: u32) -> u128 {
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * rank as u128;
    for _ in 0..radius {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul((2 * rank as u128).saturating_sub(1));
    }
    total
}

fn letter_name(letter: u8) -> char {
    let g = letter / 2;
    let base = if letter.is_multiple_of(2) { b'a' } else { b'A' };
    (base + g) as char
}

pub fn gen_free_group_ball(rank: u32, radius: u32) -> Result<Graph, ProviderError> {
    gen_free_group_ball_capped(rank, radius, DEFAULT_VERTEX_CAP)
}

/// Ball of the given radius in the Cayley graph of the free group on `rank`
/// generators. Vertices are reduced words in shortlex order over the
/// alphabet `a, A, b, B, …` (capitals are inverses); edges are right
/// multiplication by a generator. The base geodesic runs through the powers
/// of the first generator, from `A^radius` to `a^radius`.
pub fn gen_free_group_ball_capped(
    rank: u32,
    radius: u32,
    cap: usize,
) -> Result<Graph, ProviderError> {
    if rank == 0 || radius == 0 {
        return Err(ProviderError::InvalidParameter(
            "free group needs rank ≥ 1 and radius ≥ 1".into(),
        ));
    }
    if rank > 26 {
        return Err(ProviderError::InvalidParameter(
            "free group rank is limited to 26 letters".into(),
        ));
    }
    check_cap(free_group_ball_size(rank, radius), cap)?;
    let letters = (2 * rank) as u8;
    let mut words: Vec<Vec<u8>> = vec![Vec::new()];
    let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::new()];
    let mut frontier = vec![0u32];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &w in &frontier {
            for letter in 0..letters {
                if let Some(&last) = words[w as usize].last() {
                    if last ^ 1 == letter {
                        continue;
                    }
                }
                let id = words.len() as u32;
                let mut word = words[w as usize].clone();
                word.push(letter);
                words.push(word);
                adjacency.push(vec![w]);
                adjacency[w as usize].push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    let index: HashMap<&[u8], u32> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_slice(), i as u32))
        .collect();
    let power = |letter: u8, k: u32| index[vec![letter; k as usize].as_slice()];
    let mut base_path: Vec<VertexId> = (1..=radius).rev().map(|k| power(1, k)).collect();
    base_path.push(0);
    base_path.extend((1..=radius).map(|k| power(0, k)));
    let labels = words
        .iter()
        .map(|w| {
            if w.is_empty() {
                "e".to_string()
            } else {
                w.iter().map(|&l| letter_name(l)).collect()
            }
        })
        .collect();
    Ok(Graph::new(adjacency, 0, radius, base_path, Some(labels), true)?)
}

pub fn gen_regular_tree(branching: u32, depth: u32) -> Result<Graph, ProviderError> {
    gen_regular_tree_capped(branching, depth, DEFAULT_VERTEX_CAP)
}

/// Ball of radius `depth` around a vertex of the `branching`-regular tree:
/// the root has `branching` children and every other internal vertex has
/// `branching − 1`. Ids are assigned in BFS order. The base geodesic runs
/// from the deepest first-child descendant of child 1 through the root to
/// the deepest first-child descendant of child 0.
pub fn gen_regular_tree_capped(
    branching: u32,
    depth: u32,
    cap: usize,
) -> Result<Graph, ProviderError> {
    if branching == 0 {
        return Err(ProviderError::InvalidParameter("branching must be ≥ 1".into()));
    }
    let mut count: u128 = 1;
    let mut level: u128 = branching as u128;
    for _ in 0..depth {
        count = count.saturating_add(level);
        level = level.saturating_mul(branching.saturating_sub(1) as u128);
    }
    check_cap(count, cap)?;
    let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::new()];
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new()];
    let mut frontier = vec![0u32];
    for d in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let k = if d == 0 { branching } else { branching - 1 };
            for _ in 0..k {
                let id = adjacency.len() as u32;
                adjacency.push(vec![v]);
                children.push(Vec::new());
                adjacency[v as usize].push(id);
                children[v as usize].push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    let chain = |start: VertexId| {
        let mut out = vec![start];
        let mut v = start;
        while let Some(&c) = children[v as usize].first() {
            out.push(c);
            v = c;
        }
        out
    };
    let mut base_path = Vec::new();
    if let Some(&c1) = children[0].get(1) {
        base_path.extend(chain(c1).into_iter().rev());
    }
    base_path.push(0);
    if let Some(&c0) = children[0].first() {
        base_path.extend(chain(c0));
    }
    Ok(Graph::new(adjacency, 0, depth, base_path, None, false)?)
}

/// Path on `n + 1` vertices `0..=n` with the base point at the centre and
/// the whole path, left to right, as base geodesic.
pub fn gen_line(n: u32) -> Result<Graph, ProviderError> {
    check_cap(n as u128 + 1, DEFAULT_VERTEX_CAP)?;
    let adjacency = (0..=n)
        .map(|v| {
            let mut l = Vec::with_capacity(2);
            if v > 0 {
                l.push(v - 1);
            }
            if v < n {
                l.push(v + 1);
            }
            l
        })
        .collect();
    let centre = n / 2;
    Ok(Graph::new(adjacency, centre, n - centre, (0..=n).collect(), None, false)?)
}

/// Cycle on `n ≥ 3` vertices with base point 0 and base geodesic `0..=n/2`.
pub fn gen_cycle(n: u32) -> Result<Graph, ProviderError> {
    if n < 3 {
        return Err(ProviderError::InvalidParameter("cycle needs n ≥ 3".into()));
    }
    check_cap(n as u128, DEFAULT_VERTEX_CAP)?;
    let adjacency = (0..n).map(|v| vec![(v + n - 1) % n, (v + 1) % n]).collect();
    Ok(Graph::new(adjacency, 0, n / 2, (0..=n / 2).collect(), None, false)?)
}

#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub warnings: Vec<String>,
}

pub fn load_edge_list(path: &Path) -> Result<LoadedGraph, ProviderError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProviderError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(&text)
}

fn parse_id(tok: &str, line: usize) -> Result<u64, ProviderError> {
    tok.parse::<u64>().map_err(|_| ProviderError::Parse {
        line,
        msg: format!("expected a non-negative integer, found {tok:?}"),
    })
}

/// Parses the edge-list format: one edge per line as two whitespace
/// separated ids, `#` comments, an optional `base <id>` line and an optional
/// `ray <id> <id> …` line. Only the component of the base point is kept;
/// vertices are relabelled densely in increasing id order and the original
/// ids become the label table.
pub fn parse_edge_list(text: &str) -> Result<LoadedGraph, ProviderError> {
    let mut warnings = Vec::new();
    let mut edges: BTreeSet<(u64, u64)> = BTreeSet::new();
    let mut vertices: BTreeSet<u64> = BTreeSet::new();
    let mut base: Option<u64> = None;
    let mut ray: Option<Vec<u64>> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "base" => {
                if toks.len() != 2 {
                    return Err(ProviderError::Parse {
                        line,
                        msg: "expected `base <id>`".into(),
                    });
                }
                base = Some(parse_id(toks[1], line)?);
            }
            "ray" => {
                if toks.len() < 2 {
                    return Err(ProviderError::Parse {
                        line,
                        msg: "expected `ray <id> <id> ...`".into(),
                    });
                }
                ray = Some(
                    toks[1..]
                        .iter()
                        .map(|t| parse_id(t, line))
                        .collect::<Result<_, _>>()?,
                );
            }
            _ => {
                if toks.len() != 2 {
                    return Err(ProviderError::Parse {
                        line,
                        msg: format!("expected two vertex ids, found {} fields", toks.len()),
                    });
                }
                let a = parse_id(toks[0], line)?;
                let b = parse_id(toks[1], line)?;
                if a == b {
                    warnings.push(format!("line {line}: self-loop at {a} dropped"));
                    vertices.insert(a);
                    continue;
                }
                let key = (a.min(b), a.max(b));
                if !edges.insert(key) {
                    warnings.push(format!("line {line}: duplicate edge {a} {b} ignored"));
                }
                vertices.insert(a);
                vertices.insert(b);
            }
        }
    }
    let base = match base {
        Some(b) => b,
        None => *vertices.first().ok_or(ProviderError::Parse {
            line: 0,
            msg: "no edges".into(),
        })?,
    };
    if !vertices.contains(&base) {
        return Err(ProviderError::InvalidParameter(format!(
            "base point {base} does not occur in any edge"
        )));
    }
    let mut nbrs: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &(a, b) in &edges {
        nbrs.entry(a).or_default().push(b);
        nbrs.entry(b).or_default().push(a);
    }
    // component of the base point
    let mut seen: BTreeSet<u64> = BTreeSet::new();
    let mut stack = vec![base];
    seen.insert(base);
    while let Some(v) = stack.pop() {
        for &u in nbrs.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(u) {
                stack.push(u);
            }
        }
    }
    if seen.len() < vertices.len() {
        warnings.push(format!(
            "{} vertices outside the component of the base point dropped",
            vertices.len() - seen.len()
        ));
    }
    let ids: Vec<u64> = seen.iter().copied().collect();
    let dense: HashMap<u64, u32> = ids.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let adjacency: Vec<Vec<VertexId>> = ids
        .iter()
        .map(|v| {
            nbrs.get(v)
                .map(|l| l.iter().map(|u| dense[u]).collect())
                .unwrap_or_default()
        })
        .collect();
    let labels: Vec<String> = ids.iter().map(u64::to_string).collect();
    let base_id = dense[&base];

    // Provisional snapshot to measure distances from the base point.
    let probe = Graph::new(adjacency.clone(), base_id, 0, vec![base_id], None, false)?;
    let core_radius = probe.eccentricity(base_id)?;
    let base_path = match ray {
        Some(r) => r
            .iter()
            .map(|v| {
                dense.get(v).copied().ok_or_else(|| {
                    ProviderError::InvalidParameter(format!("ray vertex {v} not in the graph"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => {
            warnings.push("no `ray` line; the base ray is the longest geodesic from the base point".into());
            longest_geodesic_from(&probe, base_id)
        }
    };
    let graph = Graph::new(adjacency, base_id, core_radius, base_path, Some(labels), false)?;
    Ok(LoadedGraph { graph, warnings })
}

/// Lexicographically smallest geodesic from `o` to the smallest-id vertex at
/// maximal distance.
fn longest_geodesic_from(graph: &Graph, o: VertexId) -> Vec<VertexId> {
    let d = graph.distances_from(o).expect("valid id");
    let ecc = *d.iter().max().expect("non-empty");
    let far = d.iter().position(|&x| x == ecc).expect("present") as u32;
    let dfar = graph.distances_from(far).expect("valid id");
    let mut path = vec![o];
    let mut v = o;
    while v != far {
        v = *graph
            .neighbors(v)
            .iter()
            .find(|&&u| dfar[u as usize] + 1 == dfar[v as usize])
            .expect("geodesic step");
        path.push(v);
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_group_counts() {
        assert_eq!(gen_free_group_ball(1, 5).unwrap().vertex_count(), 11);
        assert_eq!(gen_free_group_ball(2, 2).unwrap().vertex_count(), 17);
        let g = gen_free_group_ball(2, 5).unwrap();
        assert_eq!(g.vertex_count(), 485);
        assert_eq!(free_group_ball_size(2, 5), 485);
        assert_eq!(g.edge_count(), 484);
        assert_eq!(g.core().len(), 485);
        assert!(g.is_group());
    }

    #[test]
    fn free_group_labels_and_distances() {
        let g = gen_free_group_ball(2, 3).unwrap();
        let labels = g.labels().unwrap();
        let id = |w: &str| labels.iter().position(|l| l == w).unwrap() as u32;
        assert_eq!(&labels[..5], &["e", "a", "A", "b", "B"]);
        assert_eq!(g.distance(id("e"), id("abA")).unwrap(), 3);
        assert_eq!(g.distance(id("ab"), id("aB")).unwrap(), 2);
        let path: Vec<String> = g.base_path().iter().map(|&v| g.label(v)).collect();
        assert_eq!(path, ["AAA", "AA", "A", "e", "a", "aa", "aaa"]);
        let r = g.build_ray(id("b")).unwrap();
        let labels: Vec<String> = r.path.iter().map(|&v| g.label(v)).collect();
        assert_eq!(labels, ["b", "e", "a", "aa", "aaa"]);
        assert_eq!(r.merge_index, 1);
    }

    #[test]
    fn rank_one_ball_is_a_line() {
        let n = 6;
        let f = gen_free_group_ball(1, n).unwrap();
        let l = gen_line(2 * n).unwrap();
        assert_eq!(l.base_point(), n);
        // a^k ↦ n + k, A^k ↦ n − k
        let relabel = |v: u32| -> u32 {
            let w = f.label(v);
            if w == "e" {
                n
            } else if w.starts_with('a') {
                n + w.len() as u32
            } else {
                n - w.len() as u32
            }
        };
        for x in 0..f.vertex_count() as u32 {
            for y in 0..f.vertex_count() as u32 {
                assert_eq!(
                    f.distance(x, y).unwrap(),
                    l.distance(relabel(x), relabel(y)).unwrap()
                );
            }
        }
        let fp: Vec<u32> = f.base_path().iter().map(|&v| relabel(v)).collect();
        assert_eq!(fp, l.base_path());
    }

    #[test]
    fn regular_tree_counts() {
        // brute-force node count of the generated structure
        let g = gen_regular_tree(3, 4).unwrap();
        let by_level = {
            let d = g.distances_from(0).unwrap();
            (0..=4).map(|k| d.iter().filter(|&&x| x == k).count()).collect::<Vec<_>>()
        };
        assert_eq!(by_level, vec![1, 3, 6, 12, 24]);
        assert_eq!(g.vertex_count(), 46);
        assert_eq!(g.edge_count(), 45);
        assert_eq!(gen_regular_tree(3, 5).unwrap().vertex_count(), 94);
        assert_eq!(g.base_path().len(), 9);
    }

    #[test]
    fn line_and_cycle() {
        let l = gen_line(10).unwrap();
        assert_eq!(l.vertex_count(), 11);
        assert_eq!(l.core_diameter(), 10);
        let c = gen_cycle(8).unwrap();
        assert!(c.adjacency().iter().all(|a| a.len() == 2));
        assert_eq!(c.core_diameter(), 4);
        assert!(gen_cycle(2).is_err());
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            gen_free_group_ball_capped(3, 10, 1000),
            Err(ProviderError::TooLarge { .. })
        ));
        assert!(gen_free_group_ball(0, 3).is_err());
    }

    #[test]
    fn edge_list_basics() {
        let g = parse_edge_list("0 1\n1 2").unwrap().graph;
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.core_radius(), 2);
        assert_eq!(g.base_path(), &[0, 1, 2]);

        let dup = parse_edge_list("# comment\n0 1\n1 0\n1 2\n0 1\n").unwrap();
        assert_eq!(dup.graph.edge_count(), 2);
        assert_eq!(dup.warnings.len(), 3);
        assert!(dup.warnings[2].contains("longest geodesic"));

        let err = parse_edge_list("0 1\n1 x\n").unwrap_err();
        assert!(matches!(err, ProviderError::Parse { line: 2, .. }));
    }

    #[test]
    fn edge_list_base_and_ray() {
        let text = "base 5\nray 3 5 7\n3 5\n5 7\n7 9\n20 21\n";
        let loaded = parse_edge_list(text).unwrap();
        let g = loaded.graph;
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.label(g.base_point()), "5");
        let ray: Vec<String> = g.base_path().iter().map(|&v| g.label(v)).collect();
        assert_eq!(ray, ["3", "5", "7"]);
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn petersen() {
        let mut text = String::new();
        for i in 0..5 {
            text += &format!("{} {}\n", i, (i + 1) % 5);
            text += &format!("{} {}\n", i, i + 5);
            text += &format!("{} {}\n", i + 5, (i + 2) % 5 + 5);
        }
        let g = parse_edge_list(&text).unwrap().graph;
        assert_eq!(g.vertex_count(), 10);
        assert_eq!(g.edge_count(), 15);
        // brute-force diameter over the loaded adjacency
        let mut diam = 0;
        for x in 0..10 {
            for y in 0..10 {
                diam = diam.max(g.distance(x, y).unwrap());
            }
        }
        assert_eq!(diam, 2);
        assert!(g.adjacency().iter().all(|a| a.len() == 3));
    }
}
