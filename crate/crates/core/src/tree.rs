//! Failure call tree: the trie of the stacks captured at every suspicious
//! block's first boundary call, rooted at the process-entry method.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sib::SuspiciousInvocationBlock;
use crate::trace::MethodId;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub method: MethodId,
    pub depth: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Blocks whose representative call is this node.
    pub blocks: Vec<usize>,
}

/// A block attached to the node of its representative call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leaf {
    pub node: NodeId,
    pub weight: usize,
    /// Index into [`FailureCallTree::blocks`].
    pub block: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TreeStats {
    pub nodes: usize,
    pub height: usize,
    pub leaves: usize,
    pub total_weight: u64,
}

#[derive(Debug, Clone)]
pub struct FailureCallTree {
    nodes: Vec<TreeNode>,
    blocks: Vec<SuspiciousInvocationBlock>,
    leaves: Vec<Leaf>,
    subtree_weight: Vec<u64>,
    height: usize,
    total_weight: u64,
}

impl FailureCallTree {
    pub const ROOT: NodeId = 0;

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[Self::ROOT]
    }

    pub fn blocks(&self) -> &[SuspiciousInvocationBlock] {
        &self.blocks
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Sum of the weights of all blocks in the tree.
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    /// Sum of the weights of the blocks reachable from `node`.
    pub fn subtree_weight(&self, node: NodeId) -> u64 {
        self.subtree_weight[node]
    }

    pub fn stats(&self) -> TreeStats {
        TreeStats {
            nodes: self.nodes.len(),
            height: self.height,
            leaves: self.leaves.len(),
            total_weight: self.total_weight,
        }
    }

    /// Blocks whose representative lies in the subtree of `node`, in block order.
    pub fn reachable_blocks(&self, node: NodeId) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            out.extend_from_slice(&self.nodes[n].blocks);
            stack.extend_from_slice(&self.nodes[n].children);
        }
        out.sort_unstable();
        out
    }

    /// Root-to-node path.
    pub fn path(&self, node: NodeId) -> Vec<NodeId> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}

/// Builds the failure call tree for `blocks`. Stacks sharing a prefix share
/// nodes; the same method at different positions gets distinct nodes.
///
/// The call path of a block is its stack snapshot, extended by the
/// representative method when the snapshot does not already end with it.
pub fn build_failure_call_tree(blocks: &[SuspiciousInvocationBlock], root_name: &str) -> Result<FailureCallTree> {
    if blocks.is_empty() {
        return Err(Error::NothingToLocalize);
    }

    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut index: HashMap<(NodeId, &str), NodeId> = HashMap::new();
    let mut leaves = Vec::with_capacity(blocks.len());

    for (b, block) in blocks.iter().enumerate() {
        let rep = block.representative.as_ref().ok_or_else(|| {
            Error::Structural(format!(
                "block seq {}..={} has no begin event",
                block.start_seq, block.end_seq
            ))
        })?;
        let stack = rep.stack.as_ref().ok_or_else(|| {
            Error::Structural(format!(
                "block seq {}..={}: representative `{}` has no stack snapshot",
                block.start_seq, block.end_seq, rep.method
            ))
        })?;
        let frames = stack.frames();
        if frames[0].name() != root_name {
            return Err(Error::Structural(format!(
                "block seq {}..={}: stack starts at `{}`, expected root `{root_name}`",
                block.start_seq,
                block.end_seq,
                frames[0].name()
            )));
        }
        if nodes.is_empty() {
            nodes.push(TreeNode {
                method: frames[0].clone(),
                depth: 0,
                parent: None,
                children: Vec::new(),
                blocks: Vec::new(),
            });
        }

        let tail = (frames.last().map(MethodId::name) != Some(rep.method.name())).then_some(&rep.method);
        let mut cur = FailureCallTree::ROOT;
        for method in frames[1..].iter().chain(tail) {
            cur = match index.get(&(cur, method.name())) {
                Some(&child) => child,
                None => {
                    let id = nodes.len();
                    let depth = nodes[cur].depth + 1;
                    nodes.push(TreeNode {
                        method: method.clone(),
                        depth,
                        parent: Some(cur),
                        children: Vec::new(),
                        blocks: Vec::new(),
                    });
                    nodes[cur].children.push(id);
                    index.insert((cur, method.name()), id);
                    id
                }
            };
        }
        nodes[cur].blocks.push(b);
        leaves.push(Leaf {
            node: cur,
            weight: block.weight,
            block: b,
        });
    }

    // children are always created after their parent
    let mut subtree_weight = vec![0u64; nodes.len()];
    for leaf in &leaves {
        subtree_weight[leaf.node] += leaf.weight as u64;
    }
    for id in (1..nodes.len()).rev() {
        let parent = nodes[id].parent.expect("non-root node has a parent");
        subtree_weight[parent] += subtree_weight[id];
    }
    let height = nodes.iter().map(|n| n.depth).max().unwrap_or(0);
    let total_weight = subtree_weight[FailureCallTree::ROOT];

    Ok(FailureCallTree {
        nodes,
        blocks: blocks.to_vec(),
        leaves,
        subtree_weight,
        height,
        total_weight,
    })
}

/// Share of the total block weight reachable from `node`.
pub fn imp_blocks(tree: &FailureCallTree, node: NodeId) -> f64 {
    if tree.total_weight == 0 {
        return 0.0;
    }
    tree.subtree_weight[node] as f64 / tree.total_weight as f64
}

/// Depth of `node` relative to the tree height.
pub fn depth_score(tree: &FailureCallTree, node: NodeId) -> Result<f64> {
    if tree.height == 0 {
        return Err(Error::Structural("failure call tree has only a root node".into()));
    }
    Ok(tree.nodes[node].depth as f64 / tree.height as f64)
}
