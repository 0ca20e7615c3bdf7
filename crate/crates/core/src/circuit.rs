//! Computation chains and their compilation into executable summation
//! circuits: acyclic fanin-2 adder DAGs with one input per pixel and one
//! output per target pattern.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ImageDomain, ImageValues, Pattern};
use crate::partition::ceil_log2;
use crate::tree::PartitionTree;

#[derive(Debug, Clone)]
struct LevelEntry {
    pattern: u32,
    /// Pool ids of the disjoint pieces assembling this pattern from the
    /// previous level; None when the pattern is carried over unchanged.
    decomp: Option<Vec<u32>>,
}

/// Sequence of cumulative level ensembles R_0 = U* through the targets,
/// each level combining the next. Patterns are interned in a pool and each
/// fresh pattern records its canonical decomposition.
#[derive(Debug, Clone)]
pub struct ComputationChain {
    domain: ImageDomain,
    pool: Vec<Pattern>,
    levels: Vec<Vec<LevelEntry>>,
}

impl ComputationChain {
    /// Chain associated with a tree: R_k is the union of all node partitions
    /// within distance k of the root, and the final element is the union of
    /// the leaf partitions.
    pub fn of_tree(tree: &PartitionTree) -> Result<Self> {
        let domain = tree.domain();
        let dist = tree.distances();
        let parents = tree.parents();
        let d = dist.iter().copied().max().unwrap_or(0);
        if d == 0 {
            return Err(Error::InvalidTree("tree has no edges".into()));
        }

        let mut pool: Vec<Pattern> = Vec::new();
        let mut ids: HashMap<Pattern, u32> = HashMap::new();

        // Level 0: the root partition, which must be the finest one.
        let root_part = tree.node_partition(tree.root())?;
        if root_part.len() != domain.len() {
            return Err(Error::InvalidTree(
                "chain root must be the finest partition".into(),
            ));
        }
        let mut levels: Vec<Vec<LevelEntry>> = Vec::with_capacity(d as usize + 1);
        let mut level0 = Vec::with_capacity(root_part.len());
        for p in root_part.patterns() {
            let id = Self::intern_static(&mut pool, &mut ids, p.clone());
            level0.push(LevelEntry {
                pattern: id,
                decomp: None,
            });
        }
        levels.push(level0);

        // each node's partition is materialized once and freed after the
        // next distance level has consumed it
        let mut parts: Vec<Option<crate::partition::Partition>> = vec![None; tree.nodes().len()];
        parts[tree.root()] = Some(root_part);

        let leaf_set: std::collections::BTreeSet<usize> = tree.leaves().into_iter().collect();
        let mut target_entries: Vec<LevelEntry> = Vec::new();
        let mut target_seen: std::collections::HashSet<u32> = std::collections::HashSet::new();

        for t in 1..=d {
            let mut entries: Vec<LevelEntry> = levels[t as usize - 1]
                .iter()
                .map(|e| LevelEntry {
                    pattern: e.pattern,
                    decomp: None,
                })
                .collect();
            let mut fresh_here: Vec<LevelEntry> = Vec::new();
            for id in 0..tree.nodes().len() {
                if dist[id] != t {
                    continue;
                }
                if parts[id].is_none() {
                    parts[id] = Some(tree.node_partition(id)?);
                }
                let parent = parents[id].expect("non-root node");
                debug_assert!(parts[parent].is_some());
                let parent_part = parts[parent].as_ref().unwrap();
                let labels = parent_part.labels();
                let node_part = parts[id].as_ref().unwrap();
                // phase 1: collect fresh patterns with their parent pieces
                let mut fresh: Vec<(Pattern, Vec<u32>)> = Vec::new();
                for pat in node_part.patterns() {
                    if ids.contains_key(pat) {
                        continue;
                    }
                    let mut member_ids: Vec<u32> = pat
                        .pixels()
                        .map(|px| labels[domain.pixel_index(px)])
                        .collect();
                    member_ids.sort_unstable();
                    member_ids.dedup();
                    let piece_ids: Vec<u32> = member_ids
                        .iter()
                        .map(|&m| {
                            ids.get(&parent_part.patterns()[m as usize])
                                .copied()
                                .ok_or(Error::DecompositionFailure)
                        })
                        .collect::<Result<_>>()?;
                    fresh.push((pat.clone(), piece_ids));
                }
                // phase 2: intern them
                for (pat, piece_ids) in fresh {
                    let pid = Self::intern_static(&mut pool, &mut ids, pat);
                    fresh_here.push(LevelEntry {
                        pattern: pid,
                        decomp: Some(piece_ids),
                    });
                }
            }
            entries.extend(fresh_here.iter().cloned());
            // leaf patterns feed the final target element; a decomposition
            // travels with the target entry only when the final segment
            // introduces the pattern
            for id in 0..tree.nodes().len() {
                if dist[id] == t && leaf_set.contains(&id) {
                    for pat in parts[id].as_ref().unwrap().patterns() {
                        let pid = ids[pat];
                        if target_seen.insert(pid) {
                            let decomp = if t == d {
                                fresh_here
                                    .iter()
                                    .find(|e| e.pattern == pid)
                                    .and_then(|e| e.decomp.clone())
                            } else {
                                None
                            };
                            target_entries.push(LevelEntry {
                                pattern: pid,
                                decomp,
                            });
                        }
                    }
                }
            }
            // parents at distance t-1 will not be read again
            for id in 0..tree.nodes().len() {
                if dist[id] == t - 1 {
                    parts[id] = None;
                }
            }
            if t < d {
                levels.push(entries);
            }
        }
        target_entries.sort_by(|a, b| pool[a.pattern as usize].cmp(&pool[b.pattern as usize]));
        levels.push(target_entries);
        Ok(ComputationChain {
            domain,
            pool,
            levels,
        })
    }

    /// Chain from raw level ensembles. Level 0 must consist of singletons;
    /// each later pattern is either carried over or decomposed into a
    /// minimal disjoint cover of previous-level patterns.
    pub fn from_levels(domain: ImageDomain, raw: Vec<Vec<Pattern>>) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::DecompositionFailure);
        }
        let mut pool: Vec<Pattern> = Vec::new();
        let mut ids: HashMap<Pattern, u32> = HashMap::new();
        let mut levels: Vec<Vec<LevelEntry>> = Vec::new();
        for (t, level) in raw.into_iter().enumerate() {
            let mut patterns = level;
            patterns.sort();
            patterns.dedup();
            let mut entries = Vec::with_capacity(patterns.len());
            for pat in patterns {
                if pat.domain() != domain {
                    return Err(Error::DomainMismatch);
                }
                if t == 0 {
                    if pat.len() != 1 {
                        return Err(Error::InvalidCircuit(
                            "chain level 0 must consist of singletons".into(),
                        ));
                    }
                    let id = Self::intern_static(&mut pool, &mut ids, pat);
                    entries.push(LevelEntry {
                        pattern: id,
                        decomp: None,
                    });
                    continue;
                }
                let prev: Vec<u32> = levels[t - 1].iter().map(|e| e.pattern).collect();
                let carried = prev
                    .iter()
                    .any(|&pid| pool[pid as usize] == pat);
                if carried {
                    let id = Self::intern_static(&mut pool, &mut ids, pat);
                    entries.push(LevelEntry {
                        pattern: id,
                        decomp: None,
                    });
                    continue;
                }
                let cover = Self::min_cover_ids(&pool, &prev, &pat)
                    .ok_or(Error::DecompositionFailure)?;
                let id = Self::intern_static(&mut pool, &mut ids, pat);
                entries.push(LevelEntry {
                    pattern: id,
                    decomp: Some(cover),
                });
            }
            levels.push(entries);
        }
        Ok(ComputationChain {
            domain,
            pool,
            levels,
        })
    }

    fn intern_static(pool: &mut Vec<Pattern>, ids: &mut HashMap<Pattern, u32>, p: Pattern) -> u32 {
        if let Some(&id) = ids.get(&p) {
            id
        } else {
            let id = pool.len() as u32;
            pool.push(p.clone());
            ids.insert(p, id);
            id
        }
    }

    /// Deterministic minimal disjoint cover of `target` from the candidate
    /// pool ids; branches on the lowest uncovered pixel.
    fn min_cover_ids(pool: &[Pattern], candidates: &[u32], target: &Pattern) -> Option<Vec<u32>> {
        let usable: Vec<u32> = candidates
            .iter()
            .copied()
            .filter(|&id| pool[id as usize].is_subset(target))
            .collect();
        let mut best: Option<Vec<u32>> = None;
        fn dfs(
            pool: &[Pattern],
            usable: &[u32],
            remaining: &Pattern,
            chosen: &mut Vec<u32>,
            best: &mut Option<Vec<u32>>,
        ) {
            if remaining.is_empty() {
                if best.as_ref().map_or(true, |b| chosen.len() < b.len()) {
                    *best = Some(chosen.clone());
                }
                return;
            }
            if let Some(b) = best.as_ref() {
                if chosen.len() + 1 >= b.len() {
                    return;
                }
            }
            let lowest = remaining.first_index().expect("non-empty");
            let px = remaining.domain().pixel_at(lowest);
            for &id in usable {
                let cand = &pool[id as usize];
                if cand.contains(px) && cand.is_subset(remaining) {
                    chosen.push(id);
                    let next = remaining.difference(cand).expect("same domain");
                    dfs(pool, usable, &next, chosen, best);
                    chosen.pop();
                }
            }
        }
        dfs(pool, &usable, target, &mut Vec::new(), &mut best);
        best.map(|mut b| {
            b.sort_by(|&x, &y| pool[x as usize].cmp(&pool[y as usize]));
            b
        })
    }

    /// Number of chain elements (levels), including the target element.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    #[inline]
    pub fn domain(&self) -> ImageDomain {
        self.domain
    }

    pub fn level_patterns(&self, t: usize) -> Vec<&Pattern> {
        self.levels[t]
            .iter()
            .map(|e| &self.pool[e.pattern as usize])
            .collect()
    }

    pub fn targets(&self) -> Vec<&Pattern> {
        self.level_patterns(self.levels.len() - 1)
    }

    /// Weight of each segment R_{t-1} -> R_t: additions for fresh patterns.
    pub fn segment_weights(&self) -> Vec<u64> {
        self.levels[1..]
            .iter()
            .map(|level| {
                level
                    .iter()
                    .filter_map(|e| e.decomp.as_ref())
                    .map(|d| d.len() as u64 - 1)
                    .sum()
            })
            .collect()
    }

    pub fn weight(&self) -> u64 {
        self.segment_weights().iter().sum()
    }

    /// Chain depth: per segment, the deepest balanced combination tree.
    pub fn depth(&self) -> u32 {
        self.levels[1..]
            .iter()
            .map(|level| {
                level
                    .iter()
                    .filter_map(|e| e.decomp.as_ref())
                    .map(|d| ceil_log2(d.len() as u64))
                    .max()
                    .unwrap_or(0)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitOutput {
    pub key: String,
    pub node: Option<u32>,
}

/// Acyclic summation DAG. Node ids: inputs first (position in `inputs`, each
/// holding a pixel index), then adders in topological order.
#[derive(Debug, Clone)]
pub struct Circuit {
    domain: ImageDomain,
    inputs: Vec<u32>,
    adders: Vec<(u32, u32)>,
    outputs: Vec<CircuitOutput>,
}

/// Output sums, index-aligned with the circuit's outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub values: Vec<i64>,
}

/// Builds one balanced adder tree per fresh pattern of every chain level,
/// sharing nodes globally by their exact pixel set. The resulting adder
/// count equals the chain weight unless sharing finds duplicates, in which
/// case it is smaller.
pub fn compile(chain: &ComputationChain) -> Result<Circuit> {
    let domain = chain.domain;
    let wh = domain.len();
    let mut node_pattern: Vec<Pattern> = Vec::with_capacity(wh);
    let mut node_of: HashMap<Pattern, u32> = HashMap::with_capacity(wh * 2);
    for i in 0..wh {
        let p = Pattern::from_indices(domain, &[i as u32]).expect("in range");
        node_of.insert(p.clone(), i as u32);
        node_pattern.push(p);
    }
    let mut adders: Vec<(u32, u32)> = Vec::new();
    for level in &chain.levels[1..] {
        for entry in level {
            let pat = &chain.pool[entry.pattern as usize];
            if node_of.contains_key(pat) {
                continue;
            }
            let decomp = entry.decomp.as_ref().ok_or(Error::DecompositionFailure)?;
            let mut queue: Vec<u32> = decomp
                .iter()
                .map(|&pid| {
                    node_of
                        .get(&chain.pool[pid as usize])
                        .copied()
                        .ok_or(Error::DecompositionFailure)
                })
                .collect::<Result<_>>()?;
            while queue.len() > 1 {
                let mut next = Vec::with_capacity((queue.len() + 1) / 2);
                let mut i = 0usize;
                while 2 * i + 1 < queue.len() {
                    let a = queue[2 * i];
                    let b = queue[2 * i + 1];
                    debug_assert!(node_pattern[a as usize].is_disjoint(&node_pattern[b as usize]));
                    let upat = node_pattern[a as usize]
                        .union(&node_pattern[b as usize])
                        .expect("same domain");
                    let id = if let Some(&existing) = node_of.get(&upat) {
                        existing
                    } else {
                        let id = (wh + adders.len()) as u32;
                        adders.push((a, b));
                        node_of.insert(upat.clone(), id);
                        node_pattern.push(upat);
                        id
                    };
                    next.push(id);
                    i += 1;
                }
                if 2 * i < queue.len() {
                    next.push(queue[2 * i]);
                }
                queue = next;
            }
            debug_assert_eq!(&node_pattern[queue[0] as usize], pat);
        }
    }
    let outputs = chain
        .levels
        .last()
        .expect("non-empty chain")
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let pat = &chain.pool[e.pattern as usize];
            let node = node_of
                .get(pat)
                .copied()
                .ok_or(Error::DecompositionFailure)?;
            Ok(CircuitOutput {
                key: format!("o{}", i),
                node: Some(node),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Circuit {
        domain,
        inputs: (0..wh as u32).collect(),
        adders,
        outputs,
    })
}

impl Circuit {
    #[inline]
    pub fn domain(&self) -> ImageDomain {
        self.domain
    }

    /// Number of adders.
    pub fn size(&self) -> usize {
        self.adders.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.inputs.len() + self.adders.len()
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn adders(&self) -> &[(u32, u32)] {
        &self.adders
    }

    pub fn outputs(&self) -> &[CircuitOutput] {
        &self.outputs
    }

    pub fn set_output_keys(&mut self, keys: Vec<String>) -> Result<()> {
        if keys.len() != self.outputs.len() {
            return Err(Error::InvalidCircuit("output key count mismatch".into()));
        }
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != keys.len() {
            return Err(Error::InvalidCircuit("output keys must be unique".into()));
        }
        for (o, k) in self.outputs.iter_mut().zip(keys) {
            o.key = k;
        }
        Ok(())
    }

    /// The pixel set each node computes; validates wiring (operands precede,
    /// unions along adders disjoint).
    pub fn node_patterns(&self) -> Result<Vec<Pattern>> {
        let n_in = self.inputs.len();
        let mut pats: Vec<Pattern> = Vec::with_capacity(self.num_nodes());
        for &px in &self.inputs {
            if px as usize >= self.domain.len() {
                return Err(Error::InvalidCircuit("input pixel out of range".into()));
            }
            pats.push(Pattern::from_indices(self.domain, &[px])?);
        }
        for (j, &(a, b)) in self.adders.iter().enumerate() {
            let id = n_in + j;
            if a as usize >= id || b as usize >= id {
                return Err(Error::InvalidCircuit(
                    "adder operand does not precede it".into(),
                ));
            }
            let (pa, pb) = (&pats[a as usize], &pats[b as usize]);
            if !pa.is_disjoint(pb) {
                return Err(Error::InvalidCircuit(format!(
                    "adder {} operands overlap",
                    id
                )));
            }
            pats.push(pa.union(pb)?);
        }
        Ok(pats)
    }

    /// Patterns computed at the outputs (empty for constant-zero outputs).
    pub fn output_patterns(&self) -> Result<Vec<Pattern>> {
        let pats = self.node_patterns()?;
        Ok(self
            .outputs
            .iter()
            .map(|o| match o.node {
                Some(n) => pats[n as usize].clone(),
                None => Pattern::empty(self.domain),
            })
            .collect())
    }

    /// Longest input-to-output path, in adders.
    pub fn depth(&self) -> u32 {
        let n_in = self.inputs.len();
        let mut depth = vec![0u32; self.num_nodes()];
        for (j, &(a, b)) in self.adders.iter().enumerate() {
            depth[n_in + j] = 1 + depth[a as usize].max(depth[b as usize]);
        }
        self.outputs
            .iter()
            .filter_map(|o| o.node.map(|n| depth[n as usize]))
            .max()
            .unwrap_or(0)
    }

    /// Topological accumulation with exact 64-bit integers.
    pub fn evaluate(&self, img: &ImageValues) -> Result<Evaluation> {
        if img.domain() != self.domain {
            return Err(Error::DimensionMismatch);
        }
        let n_in = self.inputs.len();
        let mut vals = vec![0i64; self.num_nodes()];
        for (i, &px) in self.inputs.iter().enumerate() {
            vals[i] = img.value_at_index(px as usize);
        }
        for (j, &(a, b)) in self.adders.iter().enumerate() {
            vals[n_in + j] = vals[a as usize] + vals[b as usize];
        }
        Ok(Evaluation {
            values: self
                .outputs
                .iter()
                .map(|o| o.node.map(|n| vals[n as usize]).unwrap_or(0))
                .collect(),
        })
    }

    /// Removes the masked input pixels and every adder left without two live
    /// operands, rewiring unary pass-throughs. Outputs keep their keys; an
    /// output whose whole cone is masked becomes constant zero. On images
    /// that are zero over the mask the evaluation is unchanged.
    pub fn prune(&self, zero_mask: &Pattern) -> Result<Circuit> {
        if zero_mask.domain() != self.domain {
            return Err(Error::DomainMismatch);
        }
        let n_in = self.inputs.len();
        let mut remap: Vec<Option<u32>> = Vec::with_capacity(self.num_nodes());
        let mut inputs = Vec::new();
        for &px in &self.inputs {
            let pixel = self.domain.pixel_at(px as usize);
            if zero_mask.contains(pixel) {
                remap.push(None);
            } else {
                remap.push(Some(inputs.len() as u32));
                inputs.push(px);
            }
        }
        let mut adders = Vec::new();
        for &(a, b) in &self.adders {
            let (ra, rb) = (remap[a as usize], remap[b as usize]);
            let new = match (ra, rb) {
                (Some(x), Some(y)) => {
                    let id = (inputs.len() + adders.len()) as u32;
                    adders.push((x, y));
                    Some(id)
                }
                (Some(x), None) => Some(x),
                (None, Some(y)) => Some(y),
                (None, None) => None,
            };
            remap.push(new);
        }
        let outputs = self
            .outputs
            .iter()
            .map(|o| CircuitOutput {
                key: o.key.clone(),
                node: o.node.and_then(|n| remap[n as usize]),
            })
            .collect();
        debug_assert_eq!(remap.len(), n_in + self.adders.len());
        Ok(Circuit {
            domain: self.domain,
            inputs,
            adders,
            outputs,
        })
    }

    pub fn to_json(&self, meta: Option<serde_json::Value>) -> CircuitJson {
        CircuitJson {
            w: self.domain.w(),
            h: self.domain.h(),
            inputs: self.inputs.clone(),
            adders: self.adders.clone(),
            outputs: self
                .outputs
                .iter()
                .map(|o| (o.key.clone(), o.node))
                .collect(),
            meta,
        }
    }

    /// Loads and validates a circuit; returns it with any attached metadata.
    pub fn from_json(json: &CircuitJson) -> Result<(Circuit, Option<serde_json::Value>)> {
        let domain = ImageDomain::new(json.w, json.h)?;
        let outputs = json
            .outputs
            .iter()
            .map(|(k, n)| CircuitOutput {
                key: k.clone(),
                node: *n,
            })
            .collect::<Vec<_>>();
        let circuit = Circuit {
            domain,
            inputs: json.inputs.clone(),
            adders: json.adders.clone(),
            outputs,
        };
        for o in &circuit.outputs {
            if let Some(n) = o.node {
                if n as usize >= circuit.num_nodes() {
                    return Err(Error::InvalidCircuit("output node out of range".into()));
                }
            }
        }
        circuit.node_patterns()?;
        Ok((circuit, json.meta.clone()))
    }

    /// DOT digraph: inputs as boxes, adders as plus-circles, outputs carry
    /// their key as an extra label.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph circuit {\n  rankdir=BT;\n");
        let mut output_of: HashMap<u32, &str> = HashMap::new();
        for o in &self.outputs {
            if let Some(n) = o.node {
                output_of.entry(n).or_insert(o.key.as_str());
            }
        }
        for (i, &px) in self.inputs.iter().enumerate() {
            let p = self.domain.pixel_at(px as usize);
            out.push_str(&format!(
                "  n{} [shape=box,label=\"{},{}\"];\n",
                i, p.x, p.y
            ));
        }
        let n_in = self.inputs.len();
        for (j, _) in self.adders.iter().enumerate() {
            let id = n_in + j;
            match output_of.get(&(id as u32)) {
                Some(key) => out.push_str(&format!(
                    "  n{} [shape=doublecircle,label=\"+ {}\"];\n",
                    id, key
                )),
                None => out.push_str(&format!("  n{} [shape=circle,label=\"+\"];\n", id)),
            }
        }
        for (j, &(a, b)) in self.adders.iter().enumerate() {
            let id = n_in + j;
            out.push_str(&format!("  n{} -> n{};\n  n{} -> n{};\n", a, id, b, id));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitJson {
    pub w: u32,
    pub h: u32,
    pub inputs: Vec<u32>,
    pub adders: Vec<(u32, u32)>,
    pub outputs: BTreeMap<String, Option<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}
