//! Binary partition trees computing partition-union ensembles.
//!
//! A tree is rooted at the finest partition; every parent refines its
//! children and the leaves are exactly the input partitions. The Hough
//! builder never materializes image partitions while building: each node
//! carries only its projection onto the column domain X plus one spanning
//! elevation, and the image partition is recovered by spanning on demand.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BaseFunction, ImageDomain};
use crate::oracle;
use crate::partition::{ceil_log2, span_partition, EqualityPartition, Partition, XPartition};

/// Payload of one tree node.
#[derive(Debug, Clone)]
pub enum NodeContent {
    /// Materialized image partition.
    Image(Partition),
    /// Compressed Hough node: X-partition plus a spanning elevation; the
    /// image partition is span(f_elevation, pset). `covered` is the
    /// half-open elevation interval the node's subtree computes.
    Span {
        pset: XPartition,
        elevation: u32,
        covered: (u32, u32),
    },
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub content: NodeContent,
    pub children: Vec<usize>,
    pub level: u32,
    pub index: u32,
}

#[derive(Debug, Clone)]
pub struct PartitionTree {
    domain: ImageDomain,
    nodes: Vec<TreeNode>,
    root: usize,
}

/// Weight, computation depth and per-level cardinalities of a tree.
#[derive(Debug, Clone, Serialize)]
pub struct TreeMetrics {
    /// Sum of edge weights |parent| - |child|; equals the closed form
    /// |U| + sum of two-children node cardinalities - sum of leaf
    /// cardinalities.
    pub weight: u64,
    /// Depth of the associated computation chain.
    pub comp_depth: u32,
    /// Per builder level: the largest X-cardinality (span nodes) or member
    /// count (image nodes) of any node on that level.
    pub level_cards: Vec<usize>,
}

/// Outcome of checking a Hough tree against its proven bounds.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub weight: u64,
    pub weight_bound: f64,
    pub comp_depth: u32,
    pub depth_bound: f64,
    pub naive_cost: u64,
    pub max_pset_by_level: Vec<usize>,
}

/// The proven weight bound: 4whE/(log2 w + 1) * (1 + sqrt(2/w)) + h(w - E).
pub fn weight_bound(domain: ImageDomain, elevations: u32) -> f64 {
    let (w, h, e) = (domain.w() as f64, domain.h() as f64, elevations as f64);
    4.0 * w * h * e / (w.log2() + 1.0) * (1.0 + (2.0 / w).sqrt()) + h * (w - e)
}

/// The proven chain-depth bound: log2(w) * (ceil(log2 E) + 1).
pub fn depth_bound(domain: ImageDomain, elevations: u32) -> f64 {
    (domain.w() as f64).log2() * (ceil_log2(elevations as u64) as f64 + 1.0)
}

/// Cap on |P^k_i| at level k: min(2^(2^k - 1), w).
pub fn pset_bound(level: u32, w: u32) -> u64 {
    if level >= 6 {
        return w as u64;
    }
    let bits = (1u64 << level) - 1;
    if bits >= 63 {
        w as u64
    } else {
        (1u64 << bits).min(w as u64)
    }
}

/// Additions spent by independent per-line summation: E * h * (w - 1).
pub fn naive_cost(domain: ImageDomain, elevations: u32) -> u64 {
    elevations as u64 * domain.h() as u64 * (domain.w() as u64 - 1)
}

impl PartitionTree {
    /// Level-by-level pairwise merging in input order; a trailing odd node is
    /// passed up as a one-child copy; the finest partition is attached as the
    /// root. The resulting depth is ceil(log2 m) + 1.
    pub fn build_fixed(inputs: Vec<Partition>) -> Result<Self> {
        let domain = Self::common_domain(&inputs)?;
        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        for (i, p) in inputs.into_iter().enumerate() {
            current.push(nodes.len());
            nodes.push(TreeNode {
                content: NodeContent::Image(p),
                children: vec![],
                level: 0,
                index: i as u32,
            });
        }
        let mut level = 1u32;
        while current.len() > 1 {
            let mut next = Vec::new();
            let mut i = 0usize;
            while 2 * i + 1 < current.len() {
                let a = current[2 * i];
                let b = current[2 * i + 1];
                let merged = Self::image_partition_of(&nodes[a])
                    .common_refinement(Self::image_partition_of(&nodes[b]))?;
                next.push(nodes.len());
                nodes.push(TreeNode {
                    content: NodeContent::Image(merged),
                    children: vec![a, b],
                    level,
                    index: i as u32,
                });
                i += 1;
            }
            if 2 * i < current.len() {
                let a = current[2 * i];
                let copy = Self::image_partition_of(&nodes[a]).clone();
                next.push(nodes.len());
                nodes.push(TreeNode {
                    content: NodeContent::Image(copy),
                    children: vec![a],
                    level,
                    index: i as u32,
                });
            }
            current = next;
            level += 1;
        }
        let root = nodes.len();
        nodes.push(TreeNode {
            content: NodeContent::Image(Partition::finest(domain)),
            children: vec![current[0]],
            level,
            index: 0,
        });
        Ok(PartitionTree {
            domain,
            nodes,
            root,
        })
    }

    /// Greedy construction: repeatedly merge the active pair with the
    /// smallest common-refinement cardinality, ties broken by canonical
    /// partition order. Pair costs are cached; a merge recomputes only the
    /// new node's row.
    pub fn build_greedy(inputs: Vec<Partition>) -> Result<Self> {
        let domain = Self::common_domain(&inputs)?;
        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut active: Vec<usize> = Vec::new();
        for (i, p) in inputs.into_iter().enumerate() {
            active.push(nodes.len());
            nodes.push(TreeNode {
                content: NodeContent::Image(p),
                children: vec![],
                level: 0,
                index: i as u32,
            });
        }
        let mut costs: HashMap<(usize, usize), usize> = HashMap::new();
        let mut merged: HashMap<(usize, usize), Partition> = HashMap::new();
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let c = Self::image_partition_of(&nodes[active[i]])
                    .common_refinement(Self::image_partition_of(&nodes[active[j]]))?;
                costs.insert((active[i], active[j]), c.len());
                merged.insert((active[i], active[j]), c);
            }
        }
        let mut merge_index = 0u32;
        while active.len() > 1 {
            let mut best: Option<(usize, usize)> = None;
            for i in 0..active.len() {
                for j in i + 1..active.len() {
                    let key = (active[i], active[j]);
                    let cost = costs[&key];
                    let better = match best {
                        None => true,
                        Some(b) => {
                            let bc = costs[&b];
                            if cost != bc {
                                cost < bc
                            } else {
                                Self::pair_key(&nodes, key) < Self::pair_key(&nodes, b)
                            }
                        }
                    };
                    if better {
                        best = Some(key);
                    }
                }
            }
            let (a, b) = best.expect("at least one pair");
            let part = merged.remove(&(a, b)).expect("cached");
            let level = nodes[a].level.max(nodes[b].level) + 1;
            let new_id = nodes.len();
            nodes.push(TreeNode {
                content: NodeContent::Image(part),
                children: vec![a, b],
                level,
                index: merge_index,
            });
            merge_index += 1;
            active.retain(|&x| x != a && x != b);
            costs.retain(|&(x, y), _| x != a && x != b && y != a && y != b);
            merged.retain(|&(x, y), _| x != a && x != b && y != a && y != b);
            for &x in &active {
                let key = (x.min(new_id), x.max(new_id));
                let c = Self::image_partition_of(&nodes[x])
                    .common_refinement(Self::image_partition_of(&nodes[new_id]))?;
                costs.insert(key, c.len());
                merged.insert(key, c);
            }
            active.push(new_id);
        }
        let top = active[0];
        let root = nodes.len();
        let level = nodes[top].level + 1;
        nodes.push(TreeNode {
            content: NodeContent::Image(Partition::finest(domain)),
            children: vec![top],
            level,
            index: 0,
        });
        Ok(PartitionTree {
            domain,
            nodes,
            root,
        })
    }

    fn pair_key<'a>(
        nodes: &'a [TreeNode],
        (a, b): (usize, usize),
    ) -> (&'a Partition, &'a Partition) {
        let pa = Self::image_partition_of(&nodes[a]);
        let pb = Self::image_partition_of(&nodes[b]);
        if pa <= pb {
            (pa, pb)
        } else {
            (pb, pa)
        }
    }

    fn image_partition_of(node: &TreeNode) -> &Partition {
        match &node.content {
            NodeContent::Image(p) => p,
            NodeContent::Span { .. } => {
                unreachable!("image-level builder holds only materialized nodes")
            }
        }
    }

    /// Fixed-order schedule on X-partitions: leaves are {X} with one
    /// elevation each; a two-children node refines its children's psets
    /// together with the equality partition of the boundary elevations
    /// (e1 = greatest of the left block, e2 = e1 + 1). Image partitions are
    /// only recovered later via spanning. Node cardinalities are asserted
    /// against min(2^(2^k - 1), w) as they are produced.
    pub fn build_hough(domain: ImageDomain, elevations: u32) -> Result<Self> {
        if domain.w() < 2 {
            return Err(Error::WidthTooSmall { w: domain.w() });
        }
        if elevations == 0 {
            return Err(Error::EmptyInput);
        }
        let w = domain.w();
        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        for e in 0..elevations {
            current.push(nodes.len());
            nodes.push(TreeNode {
                content: NodeContent::Span {
                    pset: XPartition::whole(w),
                    elevation: e,
                    covered: (e, e + 1),
                },
                children: vec![],
                level: 0,
                index: e,
            });
        }
        let mut level = 1u32;
        while current.len() > 1 {
            let mut next = Vec::new();
            let mut i = 0usize;
            while 2 * i + 1 < current.len() {
                let a = current[2 * i];
                let b = current[2 * i + 1];
                let (pa, ca) = Self::span_parts_of(&nodes[a]);
                let (pb, cb) = Self::span_parts_of(&nodes[b]);
                let e1 = ca.1 - 1;
                let e2 = cb.0;
                debug_assert_eq!(e2, e1 + 1);
                let f1 = BaseFunction::new(e1, domain)?;
                let f2 = BaseFunction::new(e2, domain)?;
                let eq = EqualityPartition::new(&f1, &f2)?.as_xpartition();
                let pset = XPartition::common_refinement3(pa, pb, &eq)?;
                let bound = pset_bound(level, w);
                if pset.len() as u64 > bound {
                    return Err(Error::BoundViolation(format!(
                        "|P^{}_{}| = {} exceeds min(2^(2^k-1), w) = {}",
                        level,
                        i,
                        pset.len(),
                        bound
                    )));
                }
                let covered = (ca.0, cb.1);
                next.push(nodes.len());
                nodes.push(TreeNode {
                    content: NodeContent::Span {
                        pset,
                        elevation: covered.0,
                        covered,
                    },
                    children: vec![a, b],
                    level,
                    index: i as u32,
                });
                i += 1;
            }
            if 2 * i < current.len() {
                let a = current[2 * i];
                let (pa, ca) = Self::span_parts_of(&nodes[a]);
                let content = NodeContent::Span {
                    pset: pa.clone(),
                    elevation: ca.0,
                    covered: *ca,
                };
                next.push(nodes.len());
                nodes.push(TreeNode {
                    content,
                    children: vec![a],
                    level,
                    index: i as u32,
                });
            }
            current = next;
            level += 1;
        }
        let root = nodes.len();
        nodes.push(TreeNode {
            content: NodeContent::Span {
                pset: XPartition::finest(w),
                elevation: 0,
                covered: (0, elevations),
            },
            children: vec![current[0]],
            level,
            index: 0,
        });
        Ok(PartitionTree {
            domain,
            nodes,
            root,
        })
    }

    fn span_parts_of(node: &TreeNode) -> (&XPartition, &(u32, u32)) {
        match &node.content {
            NodeContent::Span {
                pset, covered, ..
            } => (pset, covered),
            NodeContent::Image(_) => unreachable!("hough builder holds only span nodes"),
        }
    }

    /// Fixed-order tree over the dyadic line-pattern partitions; its weight
    /// is exactly n^2 * log2(n).
    pub fn build_fht(n: u32) -> Result<Self> {
        Self::build_fixed(oracle::fht_ensemble(n)?)
    }

    fn common_domain(inputs: &[Partition]) -> Result<ImageDomain> {
        let first = inputs.first().ok_or(Error::EmptyInput)?;
        let domain = first.domain();
        if inputs.iter().any(|p| p.domain() != domain) {
            return Err(Error::DomainMismatch);
        }
        Ok(domain)
    }

    /// Assembles a tree from explicit nodes and validates it (single root,
    /// every parent refines its children, root finest).
    pub fn from_parts(domain: ImageDomain, nodes: Vec<TreeNode>, root: usize) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::InvalidTree("root id out of range".into()));
        }
        let tree = PartitionTree {
            domain,
            nodes,
            root,
        };
        tree.validate()?;
        Ok(tree)
    }

    #[inline]
    pub fn domain(&self) -> ImageDomain {
        self.domain
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Leaf node ids in creation (input) order.
    pub fn leaves(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.children.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    /// Parent of each node, None for the root.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parents = vec![None; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                parents[c] = Some(id);
            }
        }
        parents
    }

    /// Edge distance from the root for each node.
    pub fn distances(&self) -> Vec<u32> {
        let mut dist = vec![0u32; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            for &c in &self.nodes[id].children {
                dist[c] = dist[id] + 1;
                stack.push(c);
            }
        }
        dist
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> u32 {
        self.distances().into_iter().max().unwrap_or(0)
    }

    /// Image-level cardinality of a node without materializing it.
    pub fn node_cardinality(&self, id: usize) -> usize {
        match &self.nodes[id].content {
            NodeContent::Image(p) => p.len(),
            NodeContent::Span { pset, .. } => self.domain.h() as usize * pset.len(),
        }
    }

    /// Materializes the node's image partition (spans on demand).
    pub fn node_partition(&self, id: usize) -> Result<Partition> {
        match &self.nodes[id].content {
            NodeContent::Image(p) => Ok(p.clone()),
            NodeContent::Span {
                pset, elevation, ..
            } => {
                let f = BaseFunction::new(*elevation, self.domain)?;
                span_partition(&f, pset)
            }
        }
    }

    /// Sum of edge weights |parent| - |child| over all edges.
    pub fn edge_weight_sum(&self) -> u64 {
        let mut total = 0u64;
        for node in &self.nodes {
            let pc = match &node.content {
                NodeContent::Image(p) => p.len(),
                NodeContent::Span { pset, .. } => self.domain.h() as usize * pset.len(),
            };
            for &c in &node.children {
                total += (pc - self.node_cardinality(c)) as u64;
            }
        }
        total
    }

    /// |U| + sum of two-children node cardinalities - sum of leaf
    /// cardinalities.
    pub fn closed_form_weight(&self) -> u64 {
        let mut total = self.node_cardinality(self.root) as i64;
        for (id, node) in self.nodes.iter().enumerate() {
            if node.children.len() == 2 {
                total += self.node_cardinality(id) as i64;
            }
            if node.children.is_empty() {
                total -= self.node_cardinality(id) as i64;
            }
        }
        debug_assert!(total >= 0);
        total as u64
    }

    /// Per builder level: (level, node count, two-children count).
    pub fn level_counts(&self) -> Vec<(u32, usize, usize)> {
        let max_level = self.nodes.iter().map(|n| n.level).max().unwrap_or(0);
        let mut out = Vec::new();
        for k in 0..=max_level {
            let nodes_at: Vec<&TreeNode> =
                self.nodes.iter().filter(|n| n.level == k).collect();
            let two = nodes_at.iter().filter(|n| n.children.len() == 2).count();
            out.push((k, nodes_at.len(), two));
        }
        out
    }

    /// Maximal number of pieces a member of `child` splits into within its
    /// parent, as a combination depth (ceil log2).
    fn node_decomp_depth(&self, child: usize, parent: usize) -> Result<u32> {
        match (&self.nodes[child].content, &self.nodes[parent].content) {
            (
                NodeContent::Span { pset: cp, .. },
                NodeContent::Span { pset: pp, .. },
            ) => {
                let mut depth = 0;
                for b in cp.classes() {
                    let pieces = pp.classes().iter().filter(|a| a.is_subset(b)).count();
                    depth = depth.max(ceil_log2(pieces as u64));
                }
                Ok(depth)
            }
            _ => {
                let cpart = self.node_partition(child)?;
                let ppart = self.node_partition(parent)?;
                let labels = ppart.labels();
                let d = self.domain;
                let mut depth = 0;
                for pat in cpart.patterns() {
                    let mut seen: Vec<u32> =
                        pat.pixels().map(|px| labels[d.pixel_index(px)]).collect();
                    seen.sort_unstable();
                    seen.dedup();
                    depth = depth.max(ceil_log2(seen.len() as u64));
                }
                Ok(depth)
            }
        }
    }

    /// Weight (edge sum, cross-checked against the closed form), computation
    /// depth of the associated chain, and per-level cardinalities.
    pub fn metrics(&self) -> Result<TreeMetrics> {
        let weight = self.edge_weight_sum();
        let closed = self.closed_form_weight();
        assert_eq!(
            weight, closed,
            "edge-sum weight and closed-form weight must agree"
        );
        let parents = self.parents();
        let dist = self.distances();
        let d = dist.iter().copied().max().unwrap_or(0);
        let mut comp_depth = 0u32;
        for t in 1..=d {
            let mut seg = 0u32;
            for (id, _) in self.nodes.iter().enumerate() {
                if dist[id] == t {
                    let p = parents[id].expect("non-root");
                    seg = seg.max(self.node_decomp_depth(id, p)?);
                }
            }
            comp_depth += seg;
        }
        let max_level = self.nodes.iter().map(|n| n.level).max().unwrap_or(0);
        let mut level_cards = vec![0usize; max_level as usize + 1];
        for node in &self.nodes {
            let card = match &node.content {
                NodeContent::Image(p) => p.len(),
                NodeContent::Span { pset, .. } => pset.len(),
            };
            let slot = &mut level_cards[node.level as usize];
            *slot = (*slot).max(card);
        }
        Ok(TreeMetrics {
            weight,
            comp_depth,
            level_cards,
        })
    }

    /// Asserts the proven bounds on a Hough (span) tree: weight strictly
    /// below the theorem's right-hand side, chain depth within
    /// log2(w)(ceil(log2 E)+1), per-level psets within min(2^(2^k-1), w),
    /// and leaf partitions of exactly h lines each.
    pub fn check_bounds(&self) -> Result<BoundReport> {
        if !self
            .nodes
            .iter()
            .all(|n| matches!(n.content, NodeContent::Span { .. }))
        {
            return Err(Error::InvalidTree(
                "bound check applies to span (Hough) trees".into(),
            ));
        }
        let leaves = self.leaves();
        let elevations = leaves.len() as u32;
        let w = self.domain.w();
        for &l in &leaves {
            let (pset, _) = Self::span_parts_of(&self.nodes[l]);
            if pset.len() != 1 {
                return Err(Error::InvalidTree(
                    "hough tree leaves must carry the single-class pset {X}".into(),
                ));
            }
        }
        let mut max_pset_by_level = Vec::new();
        for (k, _, _) in self.level_counts() {
            let max_pset = self
                .nodes
                .iter()
                .enumerate()
                .filter(|(id, n)| n.level == k && *id != self.root)
                .map(|(_, n)| Self::span_parts_of(n).0.len())
                .max()
                .unwrap_or(0);
            max_pset_by_level.push(max_pset);
            if max_pset as u64 > pset_bound(k, w) {
                return Err(Error::BoundViolation(format!(
                    "level {} pset cardinality {} exceeds {}",
                    k,
                    max_pset,
                    pset_bound(k, w)
                )));
            }
        }
        let metrics = self.metrics()?;
        let wb = weight_bound(self.domain, elevations);
        if (metrics.weight as f64) >= wb {
            return Err(Error::BoundViolation(format!(
                "tree weight {} is not strictly below {}",
                metrics.weight, wb
            )));
        }
        let db = depth_bound(self.domain, elevations);
        if metrics.comp_depth as f64 > db {
            return Err(Error::BoundViolation(format!(
                "computation depth {} exceeds {}",
                metrics.comp_depth, db
            )));
        }
        Ok(BoundReport {
            weight: metrics.weight,
            weight_bound: wb,
            comp_depth: metrics.comp_depth,
            depth_bound: db,
            naive_cost: naive_cost(self.domain, elevations),
            max_pset_by_level,
        })
    }

    /// Structural validation: unique root, every edge refines, root finest.
    /// Materializes nodes; intended for loaded trees and tests.
    pub fn validate(&self) -> Result<()> {
        let parents = self.parents();
        let mut root_count = 0;
        for (id, p) in parents.iter().enumerate() {
            if p.is_none() {
                root_count += 1;
                if id != self.root {
                    return Err(Error::InvalidTree("parentless node is not the root".into()));
                }
            }
        }
        if root_count != 1 {
            return Err(Error::InvalidTree("tree must have exactly one root".into()));
        }
        let mut reachable = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if reachable[id] {
                return Err(Error::InvalidTree("cycle detected".into()));
            }
            reachable[id] = true;
            for &c in &self.nodes[id].children {
                if c >= self.nodes.len() {
                    return Err(Error::InvalidTree("child id out of range".into()));
                }
                stack.push(c);
            }
        }
        if !reachable.iter().all(|&r| r) {
            return Err(Error::InvalidTree("unreachable nodes".into()));
        }
        if self.nodes.iter().any(|n| n.children.len() > 2) {
            return Err(Error::InvalidTree("node with more than two children".into()));
        }
        let root_part = self.node_partition(self.root)?;
        if root_part != Partition::finest(self.domain) {
            return Err(Error::InvalidTree("root must be the finest partition".into()));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            let p = self.node_partition(id)?;
            for &c in &node.children {
                let cp = self.node_partition(c)?;
                if !p.refines(&cp)? {
                    return Err(Error::InvalidTree(format!(
                        "node {} does not refine its child {}",
                        id, c
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> TreeJson {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| {
                let mut j = TreeNodeJson {
                    id,
                    level: n.level,
                    index: n.index,
                    children: n.children.clone(),
                    pset: None,
                    elevation: None,
                    covered: None,
                    members: None,
                };
                match &n.content {
                    NodeContent::Image(p) => j.members = Some(p.to_sorted_lists()),
                    NodeContent::Span {
                        pset,
                        elevation,
                        covered,
                    } => {
                        j.pset = Some(pset.to_sorted_lists());
                        j.elevation = Some(*elevation);
                        j.covered = Some(*covered);
                    }
                }
                j
            })
            .collect();
        TreeJson {
            w: self.domain.w(),
            h: self.domain.h(),
            root: self.root,
            nodes,
        }
    }

    pub fn from_json(json: &TreeJson) -> Result<Self> {
        let domain = ImageDomain::new(json.w, json.h)?;
        let mut nodes = Vec::with_capacity(json.nodes.len());
        for n in &json.nodes {
            let content = match (&n.pset, &n.members) {
                (Some(lists), None) => NodeContent::Span {
                    pset: XPartition::from_sorted_lists(json.w, lists)?,
                    elevation: n.elevation.ok_or_else(|| {
                        Error::InvalidTree("span node missing elevation".into())
                    })?,
                    covered: n.covered.unwrap_or((0, 0)),
                },
                (None, Some(lists)) => {
                    NodeContent::Image(Partition::from_sorted_lists(domain, lists)?)
                }
                _ => {
                    return Err(Error::InvalidTree(
                        "node must carry exactly one of pset/members".into(),
                    ))
                }
            };
            nodes.push(TreeNode {
                content,
                children: n.children.clone(),
                level: n.level,
                index: n.index,
            });
        }
        Self::from_parts(domain, nodes, json.root)
    }

    /// DOT digraph with one node per partition, edges parent -> child.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph partition_tree {\n  rankdir=LR;\n");
        for (id, node) in self.nodes.iter().enumerate() {
            let label = if id == self.root {
                format!("U* |{}|", self.node_cardinality(id))
            } else {
                format!(
                    "L{}_{} |{}|",
                    node.level,
                    node.index,
                    self.node_cardinality(id)
                )
            };
            out.push_str(&format!("  n{} [label=\"{}\"];\n", id, label));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                out.push_str(&format!("  n{} -> n{};\n", id, c));
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeJson {
    pub w: u32,
    pub h: u32,
    pub root: usize,
    pub nodes: Vec<TreeNodeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeNodeJson {
    pub id: usize,
    pub level: u32,
    pub index: u32,
    pub children: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pset: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevation: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covered: Option<(u32, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<Vec<u32>>>,
}
