//! Edge ratings that decide which edges get contracted first.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::graph::Graph;
use crate::{EdgeId, Error, NodeId, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RatingKind {
    /// `ω(u,v)`
    Weight,
    /// `ω(u,v) / (c(u) + c(v))`
    Expansion,
    /// `ω(u,v) / (c(u) c(v))`
    ExpansionStar,
    /// `ω(u,v)² / (c(u) c(v))`
    ExpansionStar2,
    /// `ω(u,v) / (Out(u) + Out(v) - 2ω(u,v))`
    InnerOuter,
}

impl RatingKind {
    pub const ALL: [RatingKind; 5] = [
        RatingKind::Weight,
        RatingKind::Expansion,
        RatingKind::ExpansionStar,
        RatingKind::ExpansionStar2,
        RatingKind::InnerOuter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RatingKind::Weight => "weight",
            RatingKind::Expansion => "expansion",
            RatingKind::ExpansionStar => "expansion_star",
            RatingKind::ExpansionStar2 => "expansion_star2",
            RatingKind::InnerOuter => "inner_outer",
        }
    }
}

impl fmt::Display for RatingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RatingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RatingKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or(Error::InvalidConfig("unknown rating"))
    }
}

/// Sum of the weights of edges incident to `v`.
pub fn out_weight(g: &Graph, v: NodeId) -> Weight {
    g.neighbors(v).map(|(_, w)| w).sum()
}

fn rate(
    kind: RatingKind,
    omega: Weight,
    cu: Weight,
    cv: Weight,
    out_u: Weight,
    out_v: Weight,
) -> f64 {
    let w = omega as f64;
    let r = match kind {
        RatingKind::Weight => w,
        RatingKind::Expansion => w / (cu + cv) as f64,
        RatingKind::ExpansionStar => w / (cu as f64 * cv as f64),
        RatingKind::ExpansionStar2 => w * w / (cu as f64 * cv as f64),
        RatingKind::InnerOuter => {
            let outer = out_u + out_v - 2 * omega;
            if outer == 0 {
                f64::INFINITY
            } else {
                w / outer as f64
            }
        }
    };
    // c(u) + c(v) = 0 gives 0/0 under Expansion
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// Rating of edge `e`. Zero denominators (zero node weights, or an edge
/// whose endpoints have no other neighbors under `InnerOuter`) rate `+∞`.
pub fn rate_edge(g: &Graph, e: EdgeId, kind: RatingKind) -> f64 {
    let edge = g.edge(e);
    let (out_u, out_v) = match kind {
        RatingKind::InnerOuter => (out_weight(g, edge.u), out_weight(g, edge.v)),
        _ => (0, 0),
    };
    rate(
        kind,
        edge.weight,
        g.node_weight(edge.u),
        g.node_weight(edge.v),
        out_u,
        out_v,
    )
}

/// Ratings of all edges, indexed by edge id.
pub fn rate_all(g: &Graph, kind: RatingKind) -> Vec<f64> {
    let out: Vec<Weight> = match kind {
        RatingKind::InnerOuter => (0..g.n() as NodeId).map(|v| out_weight(g, v)).collect(),
        _ => Vec::new(),
    };
    g.edges()
        .iter()
        .map(|e| {
            let (ou, ov) = match kind {
                RatingKind::InnerOuter => (out[e.u as usize], out[e.v as usize]),
                _ => (0, 0),
            };
            rate(
                kind,
                e.weight,
                g.node_weight(e.u),
                g.node_weight(e.v),
                ou,
                ov,
            )
        })
        .collect()
}
