use serde::Serialize;

use super::{Graph, GraphError, VertexId, UNREACHED};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeodesicList {
    pub paths: Vec<Vec<VertexId>>,
    /// Set when the cap stopped the enumeration early.
    pub truncated: bool,
}

/// The union of all geodesics from `x` to `y`, stored layer by layer
/// (layer `i` holds the interval vertices at distance `i` from `x`).
#[derive(Debug, Clone)]
pub struct GeodesicInterval {
    pub layers: Vec<Vec<VertexId>>,
}

impl GeodesicInterval {
    pub fn new(graph: &Graph, x: VertexId, y: VertexId) -> Result<Self, GraphError> {
        let dy = graph.distances_from(y)?;
        let dxy = dy[x as usize];
        if dxy == UNREACHED {
            return Err(GraphError::Disconnected(x));
        }
        let mut layers = vec![vec![x]];
        for _ in 0..dxy {
            let prev = layers.last().expect("non-empty");
            let mut next: Vec<VertexId> = prev
                .iter()
                .flat_map(|&v| {
                    graph
                        .neighbors(v)
                        .iter()
                        .copied()
                        .filter(move |&u| dy[u as usize] + 1 == dy[v as usize])
                })
                .collect();
            next.sort_unstable();
            next.dedup();
            layers.push(next);
        }
        Ok(GeodesicInterval { layers })
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.layers.iter().flatten().copied()
    }

    /// `max over geodesics g of min over v ∈ g of weight(v)`, by dynamic
    /// programming over the layered interval.
    pub fn bottleneck<F: Fn(VertexId) -> u32>(&self, graph: &Graph, weight: F) -> u32 {
        let last = self.layers.len() - 1;
        let mut best: Vec<(VertexId, u32)> =
            self.layers[last].iter().map(|&v| (v, weight(v))).collect();
        for layer in self.layers[..last].iter().rev() {
            let cur: Vec<(VertexId, u32)> = layer
                .iter()
                .map(|&v| {
                    let onward = graph
                        .neighbors(v)
                        .iter()
                        .filter_map(|u| best.iter().find(|(b, _)| b == u).map(|&(_, s)| s))
                        .max()
                        .expect("interval layers are connected");
                    (v, weight(v).min(onward))
                })
                .collect();
            best = cur;
        }
        best[0].1
    }
}

/// Largest distance from `w` to a geodesic joining `x` and `y`, over all
/// such geodesics.
pub fn max_distance_to_geodesics(
    graph: &Graph,
    x: VertexId,
    y: VertexId,
    w: VertexId,
) -> Result<u32, GraphError> {
    let interval = GeodesicInterval::new(graph, x, y)?;
    let dw = graph.distances_from(w)?;
    Ok(interval.bottleneck(graph, |v| dw[v as usize]))
}

/// All geodesics from `x` to `y` in lexicographic order, at most `cap` of them.
pub fn enumerate_geodesics(
    graph: &Graph,
    x: VertexId,
    y: VertexId,
    cap: usize,
) -> Result<GeodesicList, GraphError> {
    let dy = graph.distances_from(y)?;
    graph.distances_from(x)?;
    if dy[x as usize] == UNREACHED {
        return Err(GraphError::Disconnected(x));
    }
    let mut out = GeodesicList {
        paths: Vec::new(),
        truncated: false,
    };
    let mut stack = vec![x];
    extend(graph, dy, y, cap, &mut stack, &mut out);
    Ok(out)
}

fn extend(
    graph: &Graph,
    dy: &[u32],
    y: VertexId,
    cap: usize,
    stack: &mut Vec<VertexId>,
    out: &mut GeodesicList,
) {
    let v = *stack.last().expect("non-empty");
    if v == y {
        if out.paths.len() >= cap {
            out.truncated = true;
        } else {
            out.paths.push(stack.clone());
        }
        return;
    }
    for &u in graph.neighbors(v) {
        if out.truncated {
            return;
        }
        if dy[u as usize] + 1 == dy[v as usize] {
            stack.push(u);
            extend(graph, dy, y, cap, stack, out);
            stack.pop();
        }
    }
}
