//! Instance generators.

use pairpart_core::{Graph, NodeId, Weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connection radius `0.55 * sqrt(ln n / n)` of a random geometric graph.
pub fn rgg_radius(n: usize) -> f64 {
    let n = n as f64;
    0.55 * (n.ln() / n).sqrt()
}

/// Unit-weight graph joining every two points closer than `radius`.
/// Points must lie in the unit square.
pub fn geometric_graph(points: Vec<[f64; 2]>, radius: f64) -> Graph {
    let n = points.len();
    let cells = if radius > 0.0 {
        ((1.0 / radius).floor() as usize).clamp(1, 1 << 12)
    } else {
        1
    };
    let cell_of = |c: f64| ((c * cells as f64) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); cells * cells];
    for (i, p) in points.iter().enumerate() {
        buckets[cell_of(p[1]) * cells + cell_of(p[0])].push(i as NodeId);
    }
    let mut edges = Vec::new();
    for (u, p) in points.iter().enumerate() {
        let (cx, cy) = (cell_of(p[0]), cell_of(p[1]));
        for y in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for x in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &v in &buckets[y * cells + x] {
                    if (v as usize) <= u {
                        continue;
                    }
                    let q = points[v as usize];
                    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                    if (dx * dx + dy * dy).sqrt() < radius {
                        edges.push((u as NodeId, v, 1));
                    }
                }
            }
        }
    }
    Graph::unit(n, &edges)
        .and_then(|g| g.with_coords(points))
        .expect("generated edges are valid")
}

/// Random geometric graph on `2^exponent` uniform points in the unit square.
pub fn gen_rgg(exponent: u32, seed: u64) -> Graph {
    let n = 1usize << exponent;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
        .collect();
    geometric_graph(points, rgg_radius(n))
}

/// `rows x cols` grid with unit weights; node `r * cols + c` sits at `(c, r)`.
pub fn gen_grid(rows: usize, cols: usize) -> Graph {
    let id = |r: usize, c: usize| (r * cols + c) as NodeId;
    let mut edges: Vec<(NodeId, NodeId, Weight)> = Vec::new();
    let mut coords = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            coords.push([c as f64, r as f64]);
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1), 1));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c), 1));
            }
        }
    }
    Graph::unit(rows * cols, &edges)
        .and_then(|g| g.with_coords(coords))
        .expect("grid edges are valid")
}

/// Two communities of `size` nodes. Inside a community each pair is joined
/// with probability `degree / size`; `bridges` random edges join the two.
/// Node ids are interleaved between communities, so id order says nothing
/// about the structure. No coordinates.
pub fn gen_two_community(size: usize, degree: f64, bridges: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node = |community: usize, i: usize| (2 * i + community) as NodeId;
    let p = (degree / size as f64).min(1.0);
    let mut edges = Vec::new();
    for community in 0..2 {
        for i in 0..size {
            for j in i + 1..size {
                if rng.gen_bool(p) {
                    edges.push((node(community, i), node(community, j), 1));
                }
            }
        }
    }
    for _ in 0..bridges {
        let (i, j) = (rng.gen_range(0..size), rng.gen_range(0..size));
        edges.push((node(0, i), node(1, j), 1));
    }
    Graph::unit(2 * size, &edges).expect("generated edges are valid")
}

/// Two cliques of `size` nodes joined by a single edge.
pub fn gen_two_cliques(size: usize) -> Graph {
    let mut edges = Vec::new();
    for offset in [0, size] {
        for i in 0..size {
            for j in i + 1..size {
                edges.push(((offset + i) as NodeId, (offset + j) as NodeId, 1));
            }
        }
    }
    if size > 0 {
        edges.push(((size - 1) as NodeId, size as NodeId, 1));
    }
    Graph::unit(2 * size, &edges).expect("clique edges are valid")
}
