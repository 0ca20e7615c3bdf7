//! Cross-module integration: hand-built trees with leaves at mixed depths,
//! chain structure, and a full synth-serialize-load-verify round trip.

use hcf_core::circuit::{compile, CircuitJson, ComputationChain};
use hcf_core::grid::{line_pattern, orbit};
use hcf_core::oracle::{hough_line_labels, verify_circuit};
use hcf_core::tree::{NodeContent, TreeNode};
use hcf_core::{Circuit, Ensemble, ImageDomain, Partition, PartitionTree};

fn dom(w: u32, h: u32) -> ImageDomain {
    ImageDomain::new(w, h).unwrap()
}

fn lam(d: ImageDomain, e: u32) -> Partition {
    Partition::new(orbit(&line_pattern(e, 0, d).unwrap())).unwrap()
}

/// Five leaves arranged with mixed depths: the root has a leaf child and a
/// merge child, one branch passes a single leaf through a one-child node.
/// The first cumulative level of the associated chain is U plus that leaf
/// plus the merge node.
#[test]
fn mixed_depth_tree_chain_levels() {
    let d = dom(6, 4);
    let lams: Vec<Partition> = (0..5).map(|e| lam(d, e)).collect();
    let d0 = lams[1].common_refinement(&lams[2]).unwrap();
    let s0 = lams[0].clone();
    let d1 = d0.common_refinement(&s0).unwrap();
    let d2 = d1.common_refinement(&lams[3]).unwrap();
    let node = |content: Partition, children: Vec<usize>, level: u32, index: u32| TreeNode {
        content: NodeContent::Image(content),
        children,
        level,
        index,
    };
    // ids: 0..4 leaves, 5 = D0, 6 = S0, 7 = D1, 8 = D2, 9 = root
    let nodes = vec![
        node(lams[0].clone(), vec![], 0, 0),
        node(lams[1].clone(), vec![], 0, 1),
        node(lams[2].clone(), vec![], 0, 2),
        node(lams[3].clone(), vec![], 0, 3),
        node(lams[4].clone(), vec![], 0, 4),
        node(d0.clone(), vec![1, 2], 1, 0),
        node(s0.clone(), vec![0], 1, 1),
        node(d1.clone(), vec![5, 6], 2, 0),
        node(d2.clone(), vec![7, 3], 3, 0),
        node(Partition::finest(d), vec![4, 8], 4, 0),
    ];
    let tree = PartitionTree::from_parts(d, nodes, 9).unwrap();
    assert_eq!(tree.depth(), 4);
    assert_eq!(tree.leaves(), vec![0, 1, 2, 3, 4]);

    let chain = ComputationChain::of_tree(&tree).unwrap();
    assert_eq!(chain.len(), 5); // R_0..R_3 plus the targets
    let r1: std::collections::BTreeSet<_> =
        chain.level_patterns(1).into_iter().cloned().collect();
    let mut expect = std::collections::BTreeSet::new();
    for p in Partition::finest(d).patterns() {
        expect.insert(p.clone());
    }
    for p in lams[4].patterns() {
        expect.insert(p.clone());
    }
    for p in d2.patterns() {
        expect.insert(p.clone());
    }
    assert_eq!(r1, expect);

    // the chain computes all five leaf partitions
    let targets: std::collections::BTreeSet<_> = chain.targets().into_iter().cloned().collect();
    let mut expect_targets = std::collections::BTreeSet::new();
    for l in &lams {
        for p in l.patterns() {
            expect_targets.insert(p.clone());
        }
    }
    assert_eq!(targets, expect_targets);

    // and compiles into a circuit that verifies against direct summation
    let circuit = compile(&chain).unwrap();
    assert!(circuit.size() as u64 <= tree.metrics().unwrap().weight);
    let pats: Vec<_> = expect_targets.into_iter().collect();
    let ens = Ensemble::new(d, pats).unwrap();
    let report = verify_circuit(&circuit, &ens, 20, 3).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure);
}

#[test]
fn synth_serialize_load_verify_round_trip() {
    let d = dom(8, 8);
    let tree = PartitionTree::build_hough(d, 8).unwrap();
    let chain = ComputationChain::of_tree(&tree).unwrap();
    let mut circuit = compile(&chain).unwrap();

    // label outputs by (elevation, shift)
    let labels = hough_line_labels(d, 8).unwrap();
    let mut by_pattern = std::collections::HashMap::new();
    for (key, pat) in &labels {
        by_pattern.entry(pat.clone()).or_insert_with(|| key.clone());
    }
    let out_patterns = circuit.output_patterns().unwrap();
    let keys: Vec<String> = out_patterns
        .iter()
        .map(|p| by_pattern[p].clone())
        .collect();
    circuit.set_output_keys(keys).unwrap();

    let json = circuit.to_json(Some(serde_json::json!({"kind": "hough", "w": 8, "h": 8, "elevations": 8})));
    let text = serde_json::to_string_pretty(&json).unwrap();
    let parsed: CircuitJson = serde_json::from_str(&text).unwrap();
    let (loaded, meta) = Circuit::from_json(&parsed).unwrap();
    assert_eq!(meta.unwrap()["kind"], "hough");
    assert_eq!(loaded.size(), circuit.size());

    let ens = Ensemble::new(d, labels.into_iter().map(|(_, p)| p).collect()).unwrap();
    let report = verify_circuit(&loaded, &ens, 30, 99).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure);

    // determinism: byte-identical re-synthesis
    let again = compile(&ComputationChain::of_tree(&tree).unwrap()).unwrap();
    assert_eq!(
        serde_json::to_string(&again.to_json(None)).unwrap(),
        serde_json::to_string(&{
            let mut c = circuit.clone();
            c.set_output_keys((0..c.outputs().len()).map(|i| format!("o{}", i)).collect())
                .unwrap();
            c.to_json(None)
        })
        .unwrap()
    );
}

#[test]
fn duplicate_lines_collapse_when_elevations_exceed_height() {
    // |E| > h: elevation e + h(w-1) repeats elevation e's table, so some
    // lines coincide; leaves stay distinct but the circuit computes each
    // distinct pattern once
    let d = dom(3, 2);
    let tree = PartitionTree::build_hough(d, 5).unwrap();
    assert_eq!(tree.leaves().len(), 5);
    let chain = ComputationChain::of_tree(&tree).unwrap();
    let circuit = compile(&chain).unwrap();
    let labels = hough_line_labels(d, 5).unwrap();
    let mut distinct = std::collections::BTreeSet::new();
    for (_, p) in &labels {
        distinct.insert(p.clone());
    }
    assert!(distinct.len() < labels.len());
    assert_eq!(circuit.outputs().len(), distinct.len());
    let ens = Ensemble::new(d, labels.into_iter().map(|(_, p)| p).collect()).unwrap();
    let report = verify_circuit(&circuit, &ens, 20, 5).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure);
}
