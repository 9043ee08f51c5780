//! Print the failure call tree with ImpBlocks and Depth for every node.
//!
//! cargo run --example call_tree

use filo::fixtures::goodweather_pair;
use filo::sib::{detect_sibs, filter_sibs};
use filo::trace::{KeyPolicy, DEFAULT_ROOT};
use filo::tree::{build_failure_call_tree, depth_score, imp_blocks, FailureCallTree, NodeId};

fn show(tree: &FailureCallTree, id: NodeId) -> filo::Result<()> {
    let node = tree.node(id);
    println!(
        "{:indent$}{}  imp={:.3} depth={:.3}{}",
        "",
        node.method.name(),
        imp_blocks(tree, id),
        depth_score(tree, id)?,
        if node.blocks.is_empty() {
            String::new()
        } else {
            format!("  blocks {:?}", node.blocks)
        },
        indent = node.depth * 2
    );
    for &c in &node.children {
        show(tree, c)?;
    }
    Ok(())
}

fn main() -> filo::Result<()> {
    let (baseline, failure) = goodweather_pair();
    let kept = filter_sibs(&detect_sibs(&baseline, &failure, KeyPolicy::Full), 2)?;
    let tree = build_failure_call_tree(&kept.sibs, DEFAULT_ROOT)?;
    let stats = tree.stats();
    println!(
        "{} nodes, height {}, total weight {}",
        stats.nodes, stats.height, stats.total_weight
    );
    show(&tree, FailureCallTree::ROOT)
}
