//! Partition and ensemble algebra: refinement, common refinement, combination
//! weight and depth, equality partitions of base-function pairs, and span
//! partitions lifting X-partitions to image partitions.
//!
//! Partition members are kept in canonical order (lexicographic by smallest
//! element) so partitions have deterministic iteration and a hashable
//! identity.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{BaseFunction, ImageDomain, Pattern, XSet};

/// A non-empty collection of non-empty patterns with set semantics.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ensemble {
    domain: ImageDomain,
    patterns: Vec<Pattern>,
}

impl Ensemble {
    pub fn new(domain: ImageDomain, mut patterns: Vec<Pattern>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        for p in &patterns {
            if p.domain() != domain {
                return Err(Error::DomainMismatch);
            }
            if p.is_empty() {
                return Err(Error::EmptyPattern);
            }
        }
        patterns.sort();
        patterns.dedup();
        Ok(Ensemble { domain, patterns })
    }

    pub(crate) fn new_unchecked(domain: ImageDomain, patterns: Vec<Pattern>) -> Self {
        debug_assert!(patterns.windows(2).all(|w| w[0] < w[1]));
        Ensemble { domain, patterns }
    }

    #[inline]
    pub fn domain(&self) -> ImageDomain {
        self.domain
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        self.patterns.binary_search(p).is_ok()
    }

    /// Union of all members.
    pub fn support(&self) -> Pattern {
        let mut s = Pattern::empty(self.domain);
        for p in &self.patterns {
            s.union_in_place(p);
        }
        s
    }

    /// True iff members are pairwise disjoint and cover the domain exactly.
    pub fn is_partition(&self) -> bool {
        let total: usize = self.patterns.iter().map(|p| p.len()).sum();
        total == self.domain.len() && self.support().len() == self.domain.len()
    }
}

impl std::fmt::Debug for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.patterns.iter()).finish()
    }
}

/// An ensemble whose members tile the domain exactly.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    ens: Ensemble,
}

impl Partition {
    pub fn new(ens: Ensemble) -> Result<Self> {
        if !ens.is_partition() {
            return Err(Error::NotAPartition(
                "members must be disjoint and cover the domain",
            ));
        }
        Ok(Partition { ens })
    }

    pub fn from_patterns(domain: ImageDomain, patterns: Vec<Pattern>) -> Result<Self> {
        Self::new(Ensemble::new(domain, patterns)?)
    }

    pub(crate) fn new_unchecked(domain: ImageDomain, mut patterns: Vec<Pattern>) -> Self {
        patterns.sort();
        let p = Partition {
            ens: Ensemble::new_unchecked(domain, patterns),
        };
        debug_assert!(p.ens.is_partition());
        p
    }

    /// The finest partition: one singleton per pixel.
    pub fn finest(domain: ImageDomain) -> Self {
        let patterns = (0..domain.len())
            .map(|i| Pattern::from_indices(domain, &[i as u32]).expect("index in range"))
            .collect();
        Partition {
            ens: Ensemble::new_unchecked(domain, patterns),
        }
    }

    #[inline]
    pub fn domain(&self) -> ImageDomain {
        self.ens.domain
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ens.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        self.ens.patterns()
    }

    pub fn as_ensemble(&self) -> &Ensemble {
        &self.ens
    }

    pub fn into_ensemble(self) -> Ensemble {
        self.ens
    }

    /// Member index of every domain element.
    pub(crate) fn labels(&self) -> Vec<u32> {
        let mut labels = vec![u32::MAX; self.domain().len()];
        for (m, p) in self.patterns().iter().enumerate() {
            for px in p.pixels() {
                labels[self.domain().pixel_index(px)] = m as u32;
            }
        }
        debug_assert!(labels.iter().all(|&l| l != u32::MAX));
        labels
    }

    /// True iff every member of `self` is contained in some member of `other`.
    pub fn refines(&self, other: &Partition) -> Result<bool> {
        if self.domain() != other.domain() {
            return Err(Error::DomainMismatch);
        }
        let other_labels = other.labels();
        let d = self.domain();
        for p in self.patterns() {
            let mut seen = None;
            for px in p.pixels() {
                let l = other_labels[d.pixel_index(px)];
                match seen {
                    None => seen = Some(l),
                    Some(s) if s == l => {}
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }

    /// Coarsest common refinement: pairwise intersections, empties dropped.
    pub fn common_refinement(&self, other: &Partition) -> Result<Partition> {
        if self.domain() != other.domain() {
            return Err(Error::DomainMismatch);
        }
        let la = self.labels();
        let lb = other.labels();
        let d = self.domain();
        let mut buckets: HashMap<(u32, u32), Pattern> = HashMap::new();
        for i in 0..d.len() {
            let key = (la[i], lb[i]);
            buckets
                .entry(key)
                .or_insert_with(|| Pattern::empty(d))
                .set_index(i);
        }
        let patterns: Vec<Pattern> = buckets.into_values().collect();
        Ok(Partition::new_unchecked(d, patterns))
    }

    /// Number of disjoint unions needed to assemble `coarser` from `self`
    /// when `self` refines it: |self| - |coarser|.
    pub fn refinement_weight(&self, coarser: &Partition) -> Result<u64> {
        if !self.refines(coarser)? {
            return Err(Error::NotARefinement);
        }
        Ok(self.len() as u64 - coarser.len() as u64)
    }

    /// Sorted pixel-index lists, one per member; the debug JSON form.
    pub fn to_sorted_lists(&self) -> Vec<Vec<u32>> {
        self.patterns().iter().map(|p| p.indices()).collect()
    }

    pub fn from_sorted_lists(domain: ImageDomain, lists: &[Vec<u32>]) -> Result<Partition> {
        let patterns = lists
            .iter()
            .map(|l| Pattern::from_indices(domain, l))
            .collect::<Result<Vec<_>>>()?;
        Partition::from_patterns(domain, patterns)
    }
}

impl std::fmt::Debug for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.ens.fmt(f)
    }
}

/// Weight and depth of one combination: `weight` binary disjoint unions,
/// realizable by a balanced tree of depth `ceil(log2(weight+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct WeightReport {
    pub weight: u64,
    pub depth: u32,
}

pub(crate) fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        (x - 1).ilog2() + 1
    }
}

impl WeightReport {
    pub fn from_weight(weight: u64) -> Self {
        WeightReport {
            weight,
            depth: ceil_log2(weight + 1),
        }
    }
}

/// Minimal number of binary disjoint unions assembling `target` from members
/// of `source`. Exact; for a partition refining the target's partition the
/// decomposition is unique and found directly.
pub fn combination_weight(source: &Ensemble, target: &Pattern) -> Result<WeightReport> {
    if source.domain() != target.domain() {
        return Err(Error::DomainMismatch);
    }
    let candidates: Vec<&Pattern> = source
        .patterns()
        .iter()
        .filter(|p| p.is_subset(target))
        .collect();
    // elements of the target each need a covering candidate
    let best = min_cover(&candidates, target).ok_or(Error::NotCombinable)?;
    Ok(WeightReport::from_weight(best as u64 - 1))
}

/// Branch-and-bound exact cover: branch on the lowest uncovered element.
fn min_cover(candidates: &[&Pattern], target: &Pattern) -> Option<usize> {
    if target.is_empty() {
        return None;
    }
    let mut best: Option<usize> = None;
    fn dfs(
        candidates: &[&Pattern],
        remaining: &Pattern,
        used: usize,
        best: &mut Option<usize>,
    ) {
        if remaining.is_empty() {
            if best.map_or(true, |b| used < b) {
                *best = Some(used);
            }
            return;
        }
        if let Some(b) = *best {
            if used + 1 >= b {
                return;
            }
        }
        let lowest = remaining.first_index().expect("non-empty");
        let d = remaining.domain();
        let lowest_px = d.pixel_at(lowest);
        for c in candidates {
            if c.contains(lowest_px) && c.is_subset(remaining) {
                let next = remaining.difference(c).expect("same domain");
                dfs(candidates, &next, used + 1, best);
            }
        }
    }
    dfs(candidates, target, 0, &mut best);
    best
}

/// A partition of the 1-D column domain X = {0, ..., w-1}.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XPartition {
    w: u32,
    classes: Vec<XSet>,
}

impl XPartition {
    pub fn new(w: u32, mut classes: Vec<XSet>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let mut seen = vec![false; w as usize];
        let mut total = 0usize;
        for c in &classes {
            if c.w() != w {
                return Err(Error::DomainMismatch);
            }
            if c.is_empty() {
                return Err(Error::EmptyPattern);
            }
            for x in c.columns() {
                if seen[x as usize] {
                    return Err(Error::NotAPartition("classes overlap"));
                }
                seen[x as usize] = true;
                total += 1;
            }
        }
        if total != w as usize {
            return Err(Error::NotAPartition("classes do not cover X"));
        }
        classes.sort();
        Ok(XPartition { w, classes })
    }

    pub(crate) fn new_unchecked(w: u32, mut classes: Vec<XSet>) -> Self {
        classes.sort();
        let p = XPartition { w, classes };
        debug_assert!(XPartition::new(p.w, p.classes.clone()).is_ok());
        p
    }

    /// The single-class partition {X}.
    pub fn whole(w: u32) -> Self {
        XPartition {
            w,
            classes: vec![XSet::whole(w)],
        }
    }

    /// All singletons.
    pub fn finest(w: u32) -> Self {
        XPartition {
            w,
            classes: (0..w).map(|x| XSet::singleton(w, x)).collect(),
        }
    }

    #[inline]
    pub fn w(&self) -> u32 {
        self.w
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[XSet] {
        &self.classes
    }

    pub(crate) fn labels(&self) -> Vec<u32> {
        let mut labels = vec![u32::MAX; self.w as usize];
        for (m, c) in self.classes.iter().enumerate() {
            for x in c.columns() {
                labels[x as usize] = m as u32;
            }
        }
        labels
    }

    pub fn refines(&self, other: &XPartition) -> Result<bool> {
        if self.w != other.w {
            return Err(Error::DomainMismatch);
        }
        let lo = other.labels();
        for c in &self.classes {
            let mut seen = None;
            for x in c.columns() {
                let l = lo[x as usize];
                match seen {
                    None => seen = Some(l),
                    Some(s) if s == l => {}
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }

    pub fn common_refinement(&self, other: &XPartition) -> Result<XPartition> {
        if self.w != other.w {
            return Err(Error::DomainMismatch);
        }
        Ok(Self::refine_by_labels(self.w, &[self.labels(), other.labels()]))
    }

    /// Three-way common refinement in one pass.
    pub fn common_refinement3(
        a: &XPartition,
        b: &XPartition,
        c: &XPartition,
    ) -> Result<XPartition> {
        if a.w != b.w || a.w != c.w {
            return Err(Error::DomainMismatch);
        }
        Ok(Self::refine_by_labels(
            a.w,
            &[a.labels(), b.labels(), c.labels()],
        ))
    }

    fn refine_by_labels(w: u32, labels: &[Vec<u32>]) -> XPartition {
        let mut buckets: HashMap<Vec<u32>, XSet> = HashMap::new();
        for x in 0..w {
            let key: Vec<u32> = labels.iter().map(|l| l[x as usize]).collect();
            buckets.entry(key).or_insert_with(|| XSet::empty(w)).set(x);
        }
        XPartition::new_unchecked(w, buckets.into_values().collect())
    }

    pub fn to_sorted_lists(&self) -> Vec<Vec<u32>> {
        self.classes
            .iter()
            .map(|c| c.columns().collect())
            .collect()
    }

    pub fn from_sorted_lists(w: u32, lists: &[Vec<u32>]) -> Result<XPartition> {
        let classes = lists
            .iter()
            .map(|l| XSet::from_columns(w, l.iter().copied()))
            .collect();
        XPartition::new(w, classes)
    }
}

impl std::fmt::Debug for XPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.classes.iter()).finish()
    }
}

/// Partition of X by the wrap-around difference of two base functions:
/// class n = { x | g(x) = f(x) + n (mod h) }, empty classes omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityPartition {
    w: u32,
    h: u32,
    classes: Vec<(u32, XSet)>,
}

impl EqualityPartition {
    pub fn new(f: &BaseFunction, g: &BaseFunction) -> Result<Self> {
        if f.domain() != g.domain() {
            return Err(Error::DomainMismatch);
        }
        let d = f.domain();
        let (w, h) = (d.w(), d.h());
        let mut by_n: Vec<Option<XSet>> = vec![None; h as usize];
        for x in 0..w {
            let n = (g.value(x) + h - f.value(x)) % h;
            by_n[n as usize].get_or_insert_with(|| XSet::empty(w)).set(x);
        }
        let classes = by_n
            .into_iter()
            .enumerate()
            .filter_map(|(n, c)| c.map(|c| (n as u32, c)))
            .collect();
        Ok(EqualityPartition { w, h, classes })
    }

    #[inline]
    pub fn w(&self) -> u32 {
        self.w
    }

    #[inline]
    pub fn h(&self) -> u32 {
        self.h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    /// Classes as (n, column set), ascending in n.
    pub fn classes(&self) -> &[(u32, XSet)] {
        &self.classes
    }

    pub fn class(&self, n: u32) -> Option<&XSet> {
        self.classes
            .iter()
            .find(|(m, _)| *m == n)
            .map(|(_, c)| c)
    }

    pub fn as_xpartition(&self) -> XPartition {
        XPartition::new_unchecked(self.w, self.classes.iter().map(|(_, c)| c.clone()).collect())
    }
}

/// Lifts an X-partition to an image partition by spanning the graph of `f`
/// over each class through all h vertical shifts. Cardinality is h * |xs|.
pub fn span_partition(f: &BaseFunction, xs: &XPartition) -> Result<Partition> {
    if f.domain().w() != xs.w() {
        return Err(Error::DomainMismatch);
    }
    let h = f.domain().h();
    let mut patterns = Vec::with_capacity(xs.len() * h as usize);
    for class in xs.classes() {
        let base = f.graph_over(class);
        for s in 0..h {
            patterns.push(base.shift(s as i64));
        }
    }
    Ok(Partition::new_unchecked(f.domain(), patterns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{line_pattern, orbit, Pixel};

    fn dom(w: u32, h: u32) -> ImageDomain {
        ImageDomain::new(w, h).unwrap()
    }

    fn pat(d: ImageDomain, pts: &[(u32, u32)]) -> Pattern {
        Pattern::from_pixels(d, pts.iter().map(|&(x, y)| Pixel::new(x, y))).unwrap()
    }

    #[test]
    fn is_partition_examples() {
        let d = dom(3, 1);
        let fine = Partition::finest(d);
        assert!(fine.as_ensemble().is_partition());
        // overlap: {{0,1},{1,2}} over a 3x1 domain
        let e = Ensemble::new(d, vec![pat(d, &[(0, 0), (1, 0)]), pat(d, &[(1, 0), (2, 0)])])
            .unwrap();
        assert!(!e.is_partition());
        // line orbit is an image partition
        let d2 = dom(6, 4);
        let orb = orbit(&line_pattern(2, 0, d2).unwrap());
        assert!(orb.is_partition());
    }

    #[test]
    fn refines_examples() {
        let d = dom(3, 1);
        let fine = Partition::finest(d);
        let coarse =
            Partition::from_patterns(d, vec![pat(d, &[(0, 0), (1, 0)]), pat(d, &[(2, 0)])])
                .unwrap();
        assert!(fine.refines(&coarse).unwrap());
        assert!(coarse.refines(&coarse).unwrap());
        // {{0},{1,2}} does not refine {{0,1},{2}}
        let a = Partition::from_patterns(d, vec![pat(d, &[(0, 0)]), pat(d, &[(1, 0), (2, 0)])])
            .unwrap();
        assert!(!a.refines(&coarse).unwrap());
        // mismatched domains error
        assert!(fine.refines(&Partition::finest(dom(4, 1))).is_err());
    }

    #[test]
    fn common_refinement_on_x15() {
        // {{0..6},{7..14}} v {{0..9},{10..14}} = {{0..6},{7..9},{10..14}}
        let a = XPartition::new(
            15,
            vec![
                XSet::from_columns(15, 0..7),
                XSet::from_columns(15, 7..15),
            ],
        )
        .unwrap();
        let b = XPartition::new(
            15,
            vec![
                XSet::from_columns(15, 0..10),
                XSet::from_columns(15, 10..15),
            ],
        )
        .unwrap();
        let c = a.common_refinement(&b).unwrap();
        let expect = XPartition::new(
            15,
            vec![
                XSet::from_columns(15, 0..7),
                XSet::from_columns(15, 7..10),
                XSet::from_columns(15, 10..15),
            ],
        )
        .unwrap();
        assert_eq!(c, expect);
        // idempotent; finest absorbs
        assert_eq!(a.common_refinement(&a).unwrap(), a);
        let fine = XPartition::finest(15);
        assert_eq!(a.common_refinement(&fine).unwrap(), fine);
    }

    #[test]
    fn common_refinement_image_level() {
        let d = dom(6, 4);
        let a = Partition::new(orbit(&line_pattern(0, 0, d).unwrap())).unwrap();
        let b = Partition::new(orbit(&line_pattern(3, 0, d).unwrap())).unwrap();
        let c = a.common_refinement(&b).unwrap();
        assert!(c.refines(&a).unwrap());
        assert!(c.refines(&b).unwrap());
        assert!(c.len() <= a.len() * b.len());
        assert_eq!(a.common_refinement(&a).unwrap(), a);
        let fine = Partition::finest(d);
        assert_eq!(a.common_refinement(&fine).unwrap(), fine);
    }

    #[test]
    fn refinement_weight_examples() {
        let d = dom(4, 4);
        let lam = Partition::new(orbit(&line_pattern(1, 0, d).unwrap())).unwrap();
        assert_eq!(lam.refinement_weight(&lam).unwrap(), 0);
        let fine = Partition::finest(d);
        assert_eq!(fine.refinement_weight(&lam).unwrap(), (16 - 4) as u64);
        // not a refinement
        let other = Partition::new(orbit(&line_pattern(2, 0, d).unwrap())).unwrap();
        assert!(lam.refinement_weight(&other).is_err());
    }

    #[test]
    fn combination_weight_examples() {
        let d = dom(4, 2);
        let fine = Partition::finest(d);
        // a member combines itself with weight 0
        let member = fine.patterns()[0].clone();
        let r = combination_weight(fine.as_ensemble(), &member).unwrap();
        assert_eq!((r.weight, r.depth), (0, 0));
        // four singletons -> weight 3, depth 2
        let target = pat(d, &[(0, 0), (1, 0), (2, 0), (3, 0)]);
        let r = combination_weight(fine.as_ensemble(), &target).unwrap();
        assert_eq!((r.weight, r.depth), (3, 2));
        // not combinable: no candidate covers the lone pixel of a foreign cell
        let half = Ensemble::new(d, vec![pat(d, &[(0, 0)])]).unwrap();
        assert!(combination_weight(&half, &pat(d, &[(1, 1)])).is_err());
    }

    #[test]
    fn combination_weight_two_arc_line() {
        // the elevation-5 line decomposes into two pieces of the
        // elevation-4 span over the (4,5) equality classes: weight 1
        let d = dom(15, 8);
        let f4 = BaseFunction::new(4, d).unwrap();
        let f5 = BaseFunction::new(5, d).unwrap();
        let eq = EqualityPartition::new(&f4, &f5).unwrap();
        let spanned = span_partition(&f4, &eq.as_xpartition()).unwrap();
        let line5 = f5.line(0);
        let r = combination_weight(spanned.as_ensemble(), &line5).unwrap();
        assert_eq!((r.weight, r.depth), (1, 1));
    }

    #[test]
    fn combination_weight_picks_minimum() {
        // overlapping source: {u}, {v}, {u,v}; target {u,v} has weight 0
        let d = dom(2, 1);
        let e = Ensemble::new(
            d,
            vec![
                pat(d, &[(0, 0)]),
                pat(d, &[(1, 0)]),
                pat(d, &[(0, 0), (1, 0)]),
            ],
        )
        .unwrap();
        let r = combination_weight(&e, &pat(d, &[(0, 0), (1, 0)])).unwrap();
        assert_eq!(r.weight, 0);
    }

    #[test]
    fn equality_partition_frozen_classes() {
        let d = dom(15, 8);
        let f4 = BaseFunction::new(4, d).unwrap();
        let f5 = BaseFunction::new(5, d).unwrap();
        let eq = EqualityPartition::new(&f4, &f5).unwrap();
        assert_eq!(eq.len(), 2);
        assert_eq!(
            eq.class(0).unwrap().columns().collect::<Vec<_>>(),
            vec![0, 1, 2, 3, 4, 6, 9]
        );
        assert_eq!(
            eq.class(1).unwrap().columns().collect::<Vec<_>>(),
            vec![5, 7, 8, 10, 11, 12, 13, 14]
        );
    }

    #[test]
    fn equality_partition_same_function() {
        let d = dom(9, 5);
        let f = BaseFunction::new(3, d).unwrap();
        let eq = EqualityPartition::new(&f, &f).unwrap();
        assert_eq!(eq.len(), 1);
        assert_eq!(eq.class(0).unwrap(), &XSet::whole(9));
    }

    #[test]
    fn equality_partition_class_bound() {
        // |classes| <= e2 - e1 + 1 (the proof's bound), and always a partition
        for w in [4u32, 9, 15, 16] {
            let d = dom(w, w);
            for e1 in 0..w.min(8) {
                for e2 in e1 + 1..w.min(8) {
                    let f = BaseFunction::new(e1, d).unwrap();
                    let g = BaseFunction::new(e2, d).unwrap();
                    let eq = EqualityPartition::new(&f, &g).unwrap();
                    assert!(eq.len() as u32 <= e2 - e1 + 1);
                    let xp = eq.as_xpartition();
                    assert_eq!(xp.classes().iter().map(|c| c.len()).sum::<usize>(), w as usize);
                }
            }
        }
    }

    #[test]
    fn span_partition_examples() {
        let d = dom(15, 8);
        let f4 = BaseFunction::new(4, d).unwrap();
        // single class spans to the orbit: h members
        let whole = span_partition(&f4, &XPartition::whole(15)).unwrap();
        assert_eq!(whole.len(), 8);
        assert_eq!(
            whole.as_ensemble(),
            Partition::new(orbit(&f4.graph())).unwrap().as_ensemble()
        );
        // finest X spans to all singletons
        let fine = span_partition(&f4, &XPartition::finest(15)).unwrap();
        assert_eq!(fine, Partition::finest(d));
        // equality classes span to a 2h-arc partition
        let f5 = BaseFunction::new(5, d).unwrap();
        let eq = EqualityPartition::new(&f4, &f5).unwrap();
        let arcs = span_partition(&f4, &eq.as_xpartition()).unwrap();
        assert_eq!(arcs.len(), 16);
        assert!(arcs.as_ensemble().is_partition());
    }

    #[test]
    fn span_projection_recovers_classes() {
        let d = dom(10, 6);
        let f = BaseFunction::new(3, d).unwrap();
        let xs = XPartition::new(
            10,
            vec![XSet::from_columns(10, 0..4), XSet::from_columns(10, 4..10)],
        )
        .unwrap();
        let spanned = span_partition(&f, &xs).unwrap();
        assert_eq!(spanned.len(), 6 * 2);
        let mut proj: Vec<XSet> = spanned.patterns().iter().map(|p| p.project()).collect();
        proj.sort();
        proj.dedup();
        assert_eq!(XPartition::new(10, proj).unwrap(), xs);
    }

    #[test]
    fn span_of_common_refinement_matches_image_refinement() {
        // span(f, A v B v eq(f,g)) = span(f,A) v span(g,B) extensionally
        let d = dom(6, 4);
        let f = BaseFunction::new(1, d).unwrap();
        let g = BaseFunction::new(2, d).unwrap();
        let a = XPartition::whole(6);
        let b = XPartition::new(
            6,
            vec![XSet::from_columns(6, 0..3), XSet::from_columns(6, 3..6)],
        )
        .unwrap();
        let eq = EqualityPartition::new(&f, &g).unwrap().as_xpartition();
        let mixed = XPartition::common_refinement3(&a, &b, &eq).unwrap();
        let left = span_partition(&f, &mixed).unwrap();
        let right = span_partition(&f, &a)
            .unwrap()
            .common_refinement(&span_partition(&g, &b).unwrap())
            .unwrap();
        assert_eq!(left, right);
        // the same span with g as spanning function
        assert_eq!(span_partition(&g, &mixed).unwrap(), right);
    }

    #[test]
    fn span_refinement_weight_scales_by_height() {
        let d = dom(8, 5);
        let f = BaseFunction::new(2, d).unwrap();
        let a = XPartition::new(
            8,
            vec![
                XSet::from_columns(8, 0..2),
                XSet::from_columns(8, 2..5),
                XSet::from_columns(8, 5..8),
            ],
        )
        .unwrap();
        let b = XPartition::new(
            8,
            vec![XSet::from_columns(8, 0..5), XSet::from_columns(8, 5..8)],
        )
        .unwrap();
        assert!(a.refines(&b).unwrap());
        let sa = span_partition(&f, &a).unwrap();
        let sb = span_partition(&f, &b).unwrap();
        assert_eq!(
            sa.refinement_weight(&sb).unwrap(),
            5 * (a.len() as u64 - b.len() as u64)
        );
    }

    #[test]
    fn weight_report_depth_formula() {
        assert_eq!(WeightReport::from_weight(0).depth, 0);
        assert_eq!(WeightReport::from_weight(1).depth, 1);
        assert_eq!(WeightReport::from_weight(3).depth, 2);
        assert_eq!(WeightReport::from_weight(7).depth, 3);
        assert_eq!(WeightReport::from_weight(8).depth, 4);
    }

    #[test]
    fn sorted_lists_round_trip() {
        let d = dom(4, 3);
        let p = Partition::new(orbit(&line_pattern(1, 0, d).unwrap())).unwrap();
        let lists = p.to_sorted_lists();
        assert_eq!(Partition::from_sorted_lists(d, &lists).unwrap(), p);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_domain() -> impl Strategy<Value = ImageDomain> {
            (2u32..9, 1u32..7).prop_map(|(w, h)| ImageDomain::new(w, h).unwrap())
        }

        fn arb_elevation() -> impl Strategy<Value = u32> {
            0u32..12
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn equality_partition_is_partition(d in arb_domain(), e1 in arb_elevation(), e2 in arb_elevation()) {
                let f = BaseFunction::new(e1, d).unwrap();
                let g = BaseFunction::new(e2, d).unwrap();
                let eq = EqualityPartition::new(&f, &g).unwrap();
                let xp = eq.as_xpartition();
                prop_assert_eq!(xp.classes().iter().map(|c| c.len()).sum::<usize>(), d.w() as usize);
            }

            #[test]
            fn comref_refines_both(d in arb_domain(), e1 in arb_elevation(), e2 in arb_elevation()) {
                let a = Partition::new(orbit(&line_pattern(e1, 0, d).unwrap())).unwrap();
                let b = Partition::new(orbit(&line_pattern(e2, 0, d).unwrap())).unwrap();
                let c = a.common_refinement(&b).unwrap();
                prop_assert!(c.refines(&a).unwrap());
                prop_assert!(c.refines(&b).unwrap());
                prop_assert!(c.len() <= a.len() * b.len());
                // commutative
                prop_assert_eq!(b.common_refinement(&a).unwrap(), c);
            }

            #[test]
            fn span_cardinality(d in arb_domain(), e in arb_elevation()) {
                let f = BaseFunction::new(e, d).unwrap();
                let g = BaseFunction::new(e.wrapping_add(1), d).unwrap();
                let xs = EqualityPartition::new(&f, &g).unwrap().as_xpartition();
                let s = span_partition(&f, &xs).unwrap();
                prop_assert_eq!(s.len(), d.h() as usize * xs.len());
                prop_assert!(s.as_ensemble().is_partition());
            }
        }
    }
}
