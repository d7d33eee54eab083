//! Block assignments with cached block weights and cut.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::{BlockId, Error, NodeId, Quality, Weight};

/// Balance constraint: no block may weigh more than `l_max`.
///
/// `l_max = floor((1 + epsilon) * c(V) / k) + max_v c(v)`, evaluated once on
/// the input graph and reused on every level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceSpec {
    pub epsilon: f64,
    pub k: u32,
    pub l_max: Weight,
}

impl BalanceSpec {
    pub fn new(g: &Graph, k: u32, epsilon: f64) -> Result<Self, Error> {
        Self::from_totals(g.total_node_weight(), g.max_node_weight(), k, epsilon)
    }

    pub fn from_totals(
        total: Weight,
        max_node: Weight,
        k: u32,
        epsilon: f64,
    ) -> Result<Self, Error> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(
                "epsilon must be a finite nonnegative number",
            ));
        }
        // truncation is floor for nonnegative values
        let share = ((1.0 + epsilon) * total as f64 / k as f64) as Weight;
        Ok(Self {
            epsilon,
            k,
            l_max: share + max_node,
        })
    }
}

/// Total weight of edges whose endpoints lie in different blocks.
pub fn cut_weight(g: &Graph, block_of: &[BlockId]) -> Weight {
    g.edges()
        .iter()
        .filter(|e| block_of[e.u as usize] != block_of[e.v as usize])
        .map(|e| e.weight)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<BlockId>,
    block_weight: Vec<Weight>,
    cut: Weight,
}

impl Partition {
    pub fn new(g: &Graph, block_of: Vec<BlockId>, k: u32) -> Result<Self, Error> {
        if block_of.len() != g.n() {
            return Err(Error::LengthMismatch {
                expected: g.n(),
                got: block_of.len(),
            });
        }
        if let Some(&block) = block_of.iter().find(|&&b| b >= k) {
            return Err(Error::BlockOutOfRange { block, k });
        }
        let mut block_weight = vec![0; k as usize];
        for (v, &b) in block_of.iter().enumerate() {
            block_weight[b as usize] += g.node_weight(v as NodeId);
        }
        let cut = cut_weight(g, &block_of);
        Ok(Self {
            block_of,
            block_weight,
            cut,
        })
    }

    /// Everything in block 0.
    pub fn single_block(g: &Graph) -> Self {
        Self {
            block_of: vec![0; g.n()],
            block_weight: vec![g.total_node_weight()],
            cut: 0,
        }
    }

    pub fn k(&self) -> u32 {
        self.block_weight.len() as u32
    }

    pub fn block(&self, v: NodeId) -> BlockId {
        self.block_of[v as usize]
    }

    pub fn block_of(&self) -> &[BlockId] {
        &self.block_of
    }

    pub fn into_block_of(self) -> Vec<BlockId> {
        self.block_of
    }

    pub fn block_weight(&self, b: BlockId) -> Weight {
        self.block_weight[b as usize]
    }

    pub fn block_weights(&self) -> &[Weight] {
        &self.block_weight
    }

    pub fn cut(&self) -> Weight {
        self.cut
    }

    /// Moves `v` to block `to`, updating the cached weights and cut.
    pub fn move_node(&mut self, g: &Graph, v: NodeId, to: BlockId) {
        let from = self.block_of[v as usize];
        if from == to {
            return;
        }
        for (w, weight) in g.neighbors(v) {
            let b = self.block_of[w as usize];
            if b == from {
                self.cut += weight;
            } else if b == to {
                self.cut -= weight;
            }
        }
        let c = g.node_weight(v);
        self.block_weight[from as usize] -= c;
        self.block_weight[to as usize] += c;
        self.block_of[v as usize] = to;
    }

    /// Largest amount by which any block exceeds `l_max`.
    pub fn imbalance(&self, spec: &BalanceSpec) -> Weight {
        imbalance_of(&self.block_weight, spec.l_max)
    }

    pub fn quality(&self, spec: &BalanceSpec) -> Quality {
        (self.imbalance(spec), self.cut)
    }

    /// True when the cached weights and cut match a recomputation on `g`.
    pub fn is_consistent(&self, g: &Graph) -> bool {
        match Self::new(g, self.block_of.clone(), self.k()) {
            Ok(fresh) => fresh == *self,
            Err(_) => false,
        }
    }

    /// Carries a coarse partition down to the finer graph through `coarse_map`.
    pub fn project(&self, fine: &Graph, coarse_map: &[NodeId]) -> Result<Self, Error> {
        if coarse_map.len() != fine.n() {
            return Err(Error::LengthMismatch {
                expected: fine.n(),
                got: coarse_map.len(),
            });
        }
        if let Some(&c) = coarse_map
            .iter()
            .find(|&&c| c as usize >= self.block_of.len())
        {
            return Err(Error::NodeOutOfRange {
                node: c as usize,
                n: self.block_of.len(),
            });
        }
        let block_of = coarse_map
            .iter()
            .map(|&c| self.block_of[c as usize])
            .collect();
        Self::new(fine, block_of, self.k())
    }
}

pub(crate) fn imbalance_of(weights: &[Weight], l_max: Weight) -> Weight {
    weights
        .iter()
        .map(|&w| (w - l_max).max(0))
        .max()
        .unwrap_or(0)
}
