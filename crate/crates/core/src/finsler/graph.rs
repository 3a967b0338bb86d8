//! Directed grid-graph discretization of the Finsler distance.
//!
//! Lattice nodes cover the chart box; every node connects to the primitive
//! integer offsets within a Chebyshev stencil radius, with direction-dependent
//! edge weights given by the length quadrature of the straight edge. The
//! shortest directed path is an upper bound of the quasi-distance. Query
//! endpoints off the lattice are joined through virtual nodes connected to
//! their surrounding cells.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numeric::GaussLegendre;

use super::{segment_length, FinslerChart, PiecewisePath, DEFAULT_EDGE_QUADRATURE};

/// Snap tolerance for recognizing a query point as a lattice node,
/// relative to the axis spacing.
const SNAP_TOL: f64 = 1e-9;

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: u32,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct GridGraph<'a> {
    chart: &'a FinslerChart,
    counts: Vec<usize>,
    strides: Vec<usize>,
    node_count: usize,
    adjacency: Vec<Vec<(u32, f64)>>,
    rule: GaussLegendre,
}

impl<'a> GridGraph<'a> {
    pub fn new(chart: &'a FinslerChart) -> Result<Self> {
        Self::with_quadrature(chart, DEFAULT_EDGE_QUADRATURE)
    }

    pub fn with_quadrature(chart: &'a FinslerChart, order: usize) -> Result<Self> {
        chart.field.structure_check()?;
        let dim = chart.dim();
        let counts = chart.grid.counts.clone();
        let mut strides = vec![1usize; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * counts[a + 1];
        }
        let node_count: usize = counts.iter().product();
        let rule = GaussLegendre::new(order.clamp(1, 16));
        let offsets = primitive_offsets(dim, chart.grid.stencil_radius);

        let mut adjacency = vec![Vec::with_capacity(offsets.len()); node_count];
        let mut idx = vec![0i64; dim];
        for id in 0..node_count {
            let from = coord_of(chart, &idx);
            for off in &offsets {
                let mut ok = true;
                let mut nid = 0usize;
                for a in 0..dim {
                    let j = idx[a] + off[a];
                    if j < 0 || j as usize >= counts[a] {
                        ok = false;
                        break;
                    }
                    nid += j as usize * strides[a];
                }
                if !ok {
                    continue;
                }
                let mut to = from.clone();
                for a in 0..dim {
                    to[a] = coord_axis(chart, a, idx[a] + off[a]);
                }
                let w = segment_length(chart, &from, &to, &rule);
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidStructure(format!(
                        "edge weight {w} on segment {from:?} -> {to:?}"
                    )));
                }
                adjacency[id].push((nid as u32, w));
            }
            advance(&mut idx, &counts);
        }
        Ok(GridGraph { chart, counts, strides, node_count, adjacency, rule })
    }

    /// Shortest directed path from `x` to `y`: the distance upper bound and
    /// the realizing polyline.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<(f64, PiecewisePath)> {
        for p in [x, y] {
            if !self.chart.contains(p) {
                return Err(Error::OutOfDomain { point: p.to_vec() });
            }
        }
        let src = self.locate(x);
        let dst = self.locate(y);

        // virtual-target in-edges, keyed by lattice node
        let mut target_edges: HashMap<u32, f64> = HashMap::new();
        if dst.is_none() {
            for nid in self.cell_neighborhood(y) {
                let from = self.node_coord(nid);
                let w = segment_length(self.chart, &from, y, &self.rule);
                target_edges.insert(nid as u32, w);
            }
        }
        let target_id = dst.unwrap_or(self.node_count);

        let mut dist = vec![f64::INFINITY; self.node_count + 1];
        let mut pred = vec![u32::MAX; self.node_count + 1];
        let mut heap = BinaryHeap::new();

        match src {
            Some(s) => {
                dist[s] = 0.0;
                heap.push(State { cost: 0.0, node: s as u32 });
            }
            None => {
                for nid in self.cell_neighborhood(x) {
                    let to = self.node_coord(nid);
                    let w = segment_length(self.chart, x, &to, &self.rule);
                    if w < dist[nid] {
                        dist[nid] = w;
                        heap.push(State { cost: w, node: nid as u32 });
                    }
                }
                // both endpoints inside one stencil reach: direct segment
                if dst.is_none() && self.within_reach(x, y) {
                    let w = segment_length(self.chart, x, y, &self.rule);
                    dist[self.node_count] = w;
                    heap.push(State { cost: w, node: self.node_count as u32 });
                }
            }
        }

        while let Some(State { cost, node }) = heap.pop() {
            let u = node as usize;
            if cost > dist[u] {
                continue;
            }
            if u == target_id {
                break;
            }
            for &(v, w) in &self.adjacency[u] {
                let next = cost + w;
                if next < dist[v as usize] {
                    dist[v as usize] = next;
                    pred[v as usize] = node;
                    heap.push(State { cost: next, node: v });
                }
            }
            if let Some(&w) = target_edges.get(&node) {
                let next = cost + w;
                if next < dist[self.node_count] {
                    dist[self.node_count] = next;
                    pred[self.node_count] = node;
                    heap.push(State { cost: next, node: self.node_count as u32 });
                }
            }
        }

        let total = dist[target_id];
        if !total.is_finite() {
            return Err(Error::InvalidStructure(
                "grid graph is disconnected between the query points".into(),
            ));
        }

        // reconstruct node path
        let mut rev: Vec<Vec<f64>> = Vec::new();
        if dst.is_none() {
            rev.push(y.to_vec());
        }
        let mut cur = target_id;
        if dst.is_some() {
            rev.push(self.node_coord(target_id));
        }
        while pred[cur] != u32::MAX {
            cur = pred[cur] as usize;
            rev.push(self.node_coord(cur));
        }
        if src.is_none() {
            rev.push(x.to_vec());
        }
        rev.reverse();
        if rev.len() < 2 {
            // source and target coincide on the lattice
            rev = vec![x.to_vec(), y.to_vec()];
        }
        Ok((total, PiecewisePath { nodes: rev }))
    }

    fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut id = 0usize;
        for a in 0..self.chart.dim() {
            let h = self.chart.spacing(a);
            let t = (x[a] - self.chart.domain[a][0]) / h;
            let k = t.round();
            if (t - k).abs() > SNAP_TOL {
                return None;
            }
            let k = k as i64;
            if k < 0 || k as usize >= self.counts[a] {
                return None;
            }
            id += k as usize * self.strides[a];
        }
        Some(id)
    }

    fn node_coord(&self, mut id: usize) -> Vec<f64> {
        let dim = self.chart.dim();
        let mut out = vec![0.0; dim];
        for a in 0..dim {
            let k = id / self.strides[a];
            id %= self.strides[a];
            out[a] = coord_axis(self.chart, a, k as i64);
        }
        out
    }

    /// Lattice nodes within the stencil reach of an off-lattice point.
    fn cell_neighborhood(&self, x: &[f64]) -> Vec<usize> {
        let dim = self.chart.dim();
        let r = self.chart.grid.stencil_radius as i64;
        let mut ranges = Vec::with_capacity(dim);
        for a in 0..dim {
            let h = self.chart.spacing(a);
            let base = ((x[a] - self.chart.domain[a][0]) / h).floor() as i64;
            let lo = (base - (r - 1)).max(0);
            let hi = (base + r).min(self.counts[a] as i64 - 1);
            ranges.push((lo, hi));
        }
        let mut out = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            let id: usize = (0..dim)
                .map(|a| idx[a] as usize * self.strides[a])
                .sum();
            out.push(id);
            let mut a = dim;
            loop {
                if a == 0 {
                    break 'outer;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] <= ranges[a].1 {
                    break;
                }
                idx[a] = ranges[a].0;
            }
        }
        out
    }

    fn within_reach(&self, x: &[f64], y: &[f64]) -> bool {
        (0..self.chart.dim()).all(|a| {
            (x[a] - y[a]).abs() <= self.chart.grid.stencil_radius as f64 * self.chart.spacing(a)
        })
    }
}

fn coord_axis(chart: &FinslerChart, axis: usize, k: i64) -> f64 {
    chart.domain[axis][0] + k as f64 * chart.spacing(axis)
}

fn coord_of(chart: &FinslerChart, idx: &[i64]) -> Vec<f64> {
    idx.iter()
        .enumerate()
        .map(|(a, &k)| coord_axis(chart, a, k))
        .collect()
}

fn advance(idx: &mut [i64], counts: &[usize]) {
    let mut a = idx.len();
    loop {
        if a == 0 {
            return;
        }
        a -= 1;
        idx[a] += 1;
        if (idx[a] as usize) < counts[a] {
            return;
        }
        idx[a] = 0;
    }
}

/// All primitive integer offsets with Chebyshev norm <= r. Radius 2 in two
/// dimensions yields the 16-neighbor stencil.
fn primitive_offsets(dim: usize, r: usize) -> Vec<Vec<i64>> {
    let r = r as i64;
    let mut out = Vec::new();
    let mut cur = vec![-r; dim];
    loop {
        if cur.iter().any(|&c| c != 0) && gcd_all(&cur) == 1 {
            out.push(cur.clone());
        }
        let mut a = dim;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            cur[a] += 1;
            if cur[a] <= r {
                break;
            }
            cur[a] = -r;
        }
    }
}

fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |acc, &x| gcd(acc, x.abs()))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One-shot convenience wrapper: builds the graph and answers a single query.
pub fn finsler_distance_graph(
    chart: &FinslerChart,
    x: &[f64],
    y: &[f64],
) -> Result<(f64, PiecewisePath)> {
    GridGraph::new(chart)?.distance(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::{GridSpec, MinkowskiNormField};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn stencil_radius_two_has_sixteen_neighbors_in_2d() {
        assert_eq!(primitive_offsets(2, 2).len(), 16);
        assert_eq!(primitive_offsets(1, 1).len(), 2);
        assert_eq!(primitive_offsets(2, 1).len(), 8);
    }

    fn example31_line() -> FinslerChart {
        FinslerChart::line(MinkowskiNormField::Example31, -2.0, 3.0, 501).unwrap()
    }

    #[test]
    fn example31_graph_distances_match_closed_form() {
        let chart = example31_line();
        let graph = GridGraph::new(&chart).unwrap();
        let (d01, path) = graph.distance(&[0.0], &[1.0]).unwrap();
        assert!((d01 - FRAC_PI_4).abs() < 1e-3, "{d01}");
        assert!(path.nodes.len() > 50);
        let (d10, _) = graph.distance(&[1.0], &[0.0]).unwrap();
        assert!((d10 - (2.0 - FRAC_PI_4)).abs() < 1e-3, "{d10}");
    }

    #[test]
    fn graph_rejects_out_of_domain_and_bad_drift() {
        let chart = example31_line();
        let graph = GridGraph::new(&chart).unwrap();
        assert!(graph.distance(&[0.0], &[9.0]).is_err());

        let bad = FinslerChart::new(
            MinkowskiNormField::Randers { drift: vec![1.2, 0.0], base: None },
            vec![[0.0, 1.0], [0.0, 1.0]],
            GridSpec { counts: vec![3, 3], stencil_radius: 1 },
        )
        .unwrap();
        assert!(GridGraph::new(&bad).is_err());
    }

    #[test]
    fn constant_randers_straight_row_is_exact() {
        let chart = FinslerChart::new(
            MinkowskiNormField::Randers { drift: vec![0.5, 0.0], base: None },
            vec![[-0.5, 1.5], [-0.5, 0.5]],
            GridSpec { counts: vec![41, 21], stencil_radius: 2 },
        )
        .unwrap();
        let graph = GridGraph::new(&chart).unwrap();
        let (fwd, _) = graph.distance(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let (bwd, _) = graph.distance(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        // within 2%, in fact exact on an axis-aligned row
        assert!((fwd - 1.5).abs() < 0.03, "{fwd}");
        assert!((bwd - 0.5).abs() < 0.01, "{bwd}");
    }

    #[test]
    fn off_lattice_endpoints_use_virtual_nodes() {
        let chart = FinslerChart::new(
            MinkowskiNormField::Euclidean { dim: 2 },
            vec![[0.0, 1.0], [0.0, 1.0]],
            GridSpec { counts: vec![21, 21], stencil_radius: 2 },
        )
        .unwrap();
        let graph = GridGraph::new(&chart).unwrap();
        let (d, path) = graph.distance(&[0.013, 0.027], &[0.94, 0.81]).unwrap();
        let direct = ((0.94f64 - 0.013).powi(2) + (0.81f64 - 0.027).powi(2)).sqrt();
        assert!(d >= direct - 1e-12);
        assert!(d < direct * 1.03, "{d} vs {direct}");
        assert_eq!(path.nodes.first().unwrap(), &vec![0.013, 0.027]);
        assert_eq!(path.nodes.last().unwrap(), &vec![0.94, 0.81]);
    }

    #[test]
    fn graph_distance_upper_bounds_oracle() {
        let chart = FinslerChart::new(
            MinkowskiNormField::Randers { drift: vec![0.3, 0.2], base: None },
            vec![[-1.0, 1.0], [-1.0, 1.0]],
            GridSpec { counts: vec![33, 33], stencil_radius: 2 },
        )
        .unwrap();
        let graph = GridGraph::new(&chart).unwrap();
        for (x, y) in [
            (vec![0.0, 0.0], vec![0.75, 0.5]),
            (vec![0.5, -0.5], vec![-0.75, 0.25]),
            (vec![-1.0, -1.0], vec![1.0, 1.0]),
        ] {
            let oracle = chart.oracle_distance(&x, &y).unwrap();
            let (g, _) = graph.distance(&x, &y).unwrap();
            assert!(g >= oracle - 1e-9, "graph {g} below oracle {oracle}");
            assert!(g <= oracle * 1.05 + 1e-9, "graph {g} far above oracle {oracle}");
        }
    }
}
