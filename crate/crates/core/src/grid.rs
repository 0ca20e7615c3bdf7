//! Image domain, pixels, patterns, the vertical-shift group action and
//! generators for digital-line patterns.
//!
//! The image is a w x h grid, cyclic in y. Patterns are pixel sets stored as
//! fixed-size bit vectors indexed by `x*h + y`, which makes set algebra and
//! canonical equality cheap.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::partition::Ensemble;

/// Rectangular pixel grid of width `w` and height `h`, cyclic in y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ImageDomain {
    w: u32,
    h: u32,
}

impl ImageDomain {
    pub fn new(w: u32, h: u32) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::InvalidDomain { w, h });
        }
        Ok(ImageDomain { w, h })
    }

    #[inline]
    pub fn w(&self) -> u32 {
        self.w
    }

    #[inline]
    pub fn h(&self) -> u32 {
        self.h
    }

    /// Total pixel count w*h.
    #[inline]
    pub fn len(&self) -> usize {
        self.w as usize * self.h as usize
    }

    /// Bit index of pixel (x, y): column-major `x*h + y`.
    #[inline]
    pub fn pixel_index(&self, p: Pixel) -> usize {
        p.x as usize * self.h as usize + p.y as usize
    }

    #[inline]
    pub fn pixel_at(&self, index: usize) -> Pixel {
        Pixel {
            x: (index / self.h as usize) as u32,
            y: (index % self.h as usize) as u32,
        }
    }

    #[inline]
    pub fn contains(&self, p: Pixel) -> bool {
        p.x < self.w && p.y < self.h
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        let h = self.h;
        (0..self.w).flat_map(move |x| (0..h).map(move |y| Pixel { x, y }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub x: u32,
    pub y: u32,
}

impl Pixel {
    pub fn new(x: u32, y: u32) -> Self {
        Pixel { x, y }
    }
}

/// Remainder of `v` modulo `m` in [0, m), defined for negative `v` as well.
#[inline]
pub fn wrap(v: i64, m: u32) -> u32 {
    v.rem_euclid(m as i64) as u32
}

/// round(num/den) = floor(num/den + 1/2) in exact integer arithmetic,
/// for num >= 0, den > 0.
#[inline]
pub fn round_ratio(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

/// A set of pixels on an image domain; the unit of summation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    domain: ImageDomain,
    bits: Bits,
}

impl Pattern {
    pub fn empty(domain: ImageDomain) -> Self {
        Pattern {
            domain,
            bits: Bits::zeros(domain.len()),
        }
    }

    pub fn full(domain: ImageDomain) -> Self {
        Pattern {
            domain,
            bits: Bits::ones(domain.len()),
        }
    }

    pub fn singleton(domain: ImageDomain, p: Pixel) -> Result<Self> {
        let mut pat = Self::empty(domain);
        pat.insert(p)?;
        Ok(pat)
    }

    pub fn from_pixels<I: IntoIterator<Item = Pixel>>(domain: ImageDomain, iter: I) -> Result<Self> {
        let mut pat = Self::empty(domain);
        for p in iter {
            pat.insert(p)?;
        }
        Ok(pat)
    }

    fn insert(&mut self, p: Pixel) -> Result<()> {
        if !self.domain.contains(p) {
            return Err(Error::PixelOutOfBounds {
                x: p.x,
                y: p.y,
                w: self.domain.w,
                h: self.domain.h,
            });
        }
        self.bits.set(self.domain.pixel_index(p));
        Ok(())
    }

    #[inline]
    pub fn domain(&self) -> ImageDomain {
        self.domain
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn contains(&self, p: Pixel) -> bool {
        self.domain.contains(p) && self.bits.get(self.domain.pixel_index(p))
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.bits.iter_ones().map(move |i| self.domain.pixel_at(i))
    }

    /// Sorted pixel indices (`x*h + y`).
    pub fn indices(&self) -> Vec<u32> {
        self.bits.iter_ones().map(|i| i as u32).collect()
    }

    pub fn from_indices(domain: ImageDomain, indices: &[u32]) -> Result<Self> {
        let mut pat = Self::empty(domain);
        for &i in indices {
            if i as usize >= domain.len() {
                let p = Pixel {
                    x: i / domain.h,
                    y: i % domain.h,
                };
                return Err(Error::PixelOutOfBounds {
                    x: p.x,
                    y: p.y,
                    w: domain.w,
                    h: domain.h,
                });
            }
            pat.bits.set(i as usize);
        }
        Ok(pat)
    }

    /// Vertical cyclic shift by `s` (reduced mod h); a bijection on patterns.
    pub fn shift(&self, s: i64) -> Pattern {
        let h = self.domain.h;
        let s = wrap(s, h);
        if s == 0 {
            return self.clone();
        }
        let mut out = Pattern::empty(self.domain);
        for i in self.bits.iter_ones() {
            let x = i / h as usize;
            let y = (i as u32 % h + s) % h;
            out.bits.set(x * h as usize + y as usize);
        }
        out
    }

    /// Projection onto the column domain X; shift-invariant.
    pub fn project(&self) -> XSet {
        let h = self.domain.h as usize;
        let mut xs = XSet::empty(self.domain.w);
        for i in self.bits.iter_ones() {
            xs.bits.set(i / h);
        }
        xs
    }

    pub fn union(&self, other: &Pattern) -> Result<Pattern> {
        self.check_domain(other)?;
        Ok(Pattern {
            domain: self.domain,
            bits: self.bits.union(&other.bits),
        })
    }

    pub fn intersection(&self, other: &Pattern) -> Result<Pattern> {
        self.check_domain(other)?;
        Ok(Pattern {
            domain: self.domain,
            bits: self.bits.intersection(&other.bits),
        })
    }

    pub fn difference(&self, other: &Pattern) -> Result<Pattern> {
        self.check_domain(other)?;
        Ok(Pattern {
            domain: self.domain,
            bits: self.bits.difference(&other.bits),
        })
    }

    pub fn is_disjoint(&self, other: &Pattern) -> bool {
        self.domain == other.domain && self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &Pattern) -> bool {
        self.domain == other.domain && self.bits.is_subset(&other.bits)
    }

    fn check_domain(&self, other: &Pattern) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }

    pub(crate) fn union_in_place(&mut self, other: &Pattern) {
        debug_assert_eq!(self.domain, other.domain);
        self.bits.union_in_place(&other.bits);
    }

    pub(crate) fn set_index(&mut self, i: usize) {
        debug_assert!(i < self.domain.len());
        self.bits.set(i);
    }

    pub(crate) fn first_index(&self) -> Option<usize> {
        self.bits.first_one()
    }
}

impl Ord for Pattern {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.domain
            .cmp(&other.domain)
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for Pattern {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set()
            .entries(self.pixels().map(|p| (p.x, p.y)))
            .finish()
    }
}

/// Subset of the column domain X = {0, ..., w-1}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct XSet {
    w: u32,
    bits: Bits,
}

impl XSet {
    pub fn empty(w: u32) -> Self {
        XSet {
            w,
            bits: Bits::zeros(w as usize),
        }
    }

    pub fn whole(w: u32) -> Self {
        XSet {
            w,
            bits: Bits::ones(w as usize),
        }
    }

    pub fn singleton(w: u32, x: u32) -> Self {
        let mut s = Self::empty(w);
        s.bits.set(x as usize);
        s
    }

    pub fn from_columns<I: IntoIterator<Item = u32>>(w: u32, iter: I) -> Self {
        let mut s = Self::empty(w);
        for x in iter {
            debug_assert!(x < w);
            s.bits.set(x as usize);
        }
        s
    }

    #[inline]
    pub fn w(&self) -> u32 {
        self.w
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        x < self.w && self.bits.get(x as usize)
    }

    pub fn columns(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.iter_ones().map(|i| i as u32)
    }

    pub fn is_subset(&self, other: &XSet) -> bool {
        self.w == other.w && self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &XSet) -> bool {
        self.w == other.w && self.bits.is_disjoint(&other.bits)
    }

    pub(crate) fn set(&mut self, x: u32) {
        debug_assert!(x < self.w);
        self.bits.set(x as usize);
    }
}

impl Ord for XSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.w
            .cmp(&other.w)
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for XSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for XSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.columns()).finish()
    }
}

/// Table of the cyclic line base function for one elevation:
/// `f_e(x) = (round(e*x/(w-1))) mod h`, with round(t) = floor(t + 1/2)
/// computed in exact integer arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseFunction {
    domain: ImageDomain,
    elevation: u32,
    values: Vec<u32>,
}

impl BaseFunction {
    pub fn new(elevation: u32, domain: ImageDomain) -> Result<Self> {
        if domain.w < 2 {
            return Err(Error::WidthTooSmall { w: domain.w });
        }
        let den = (domain.w - 1) as u64;
        let values = (0..domain.w)
            .map(|x| (round_ratio(elevation as u64 * x as u64, den) % domain.h as u64) as u32)
            .collect();
        Ok(BaseFunction {
            domain,
            elevation,
            values,
        })
    }

    /// Base function backed by an explicit table (values are reduced mod h).
    /// Used for non-Hough line families such as the dyadic patterns.
    pub fn from_values(domain: ImageDomain, elevation: u32, values: Vec<u32>) -> Result<Self> {
        if values.len() != domain.w as usize {
            return Err(Error::DomainMismatch);
        }
        let values = values.into_iter().map(|v| v % domain.h).collect();
        Ok(BaseFunction {
            domain,
            elevation,
            values,
        })
    }

    #[inline]
    pub fn domain(&self) -> ImageDomain {
        self.domain
    }

    #[inline]
    pub fn elevation(&self) -> u32 {
        self.elevation
    }

    #[inline]
    pub fn value(&self, x: u32) -> u32 {
        self.values[x as usize]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Graph of the function restricted to a column set.
    pub fn graph_over(&self, xs: &XSet) -> Pattern {
        let mut pat = Pattern::empty(self.domain);
        for x in xs.columns() {
            pat.bits
                .set(x as usize * self.domain.h as usize + self.values[x as usize] as usize);
        }
        pat
    }

    /// Full graph over X: one pixel per column.
    pub fn graph(&self) -> Pattern {
        self.graph_over(&XSet::whole(self.domain.w))
    }

    /// The line with this elevation and shift `s`.
    pub fn line(&self, s: i64) -> Pattern {
        let h = self.domain.h;
        let s = wrap(s, h);
        let mut pat = Pattern::empty(self.domain);
        for x in 0..self.domain.w {
            let y = (self.values[x as usize] + s) % h;
            pat.bits.set(x as usize * h as usize + y as usize);
        }
        pat
    }
}

/// The line with elevation `e` and shift `s`: the graph of f_e shifted by s.
pub fn line_pattern(e: u32, s: i64, domain: ImageDomain) -> Result<Pattern> {
    Ok(BaseFunction::new(e, domain)?.line(s))
}

/// Shift orbit of a pattern: all h vertical translates, duplicates removed.
/// For a function graph this is an image partition of size h.
pub fn orbit(p: &Pattern) -> Ensemble {
    let h = p.domain().h();
    let mut members: Vec<Pattern> = (0..h as i64).map(|s| p.shift(s)).collect();
    members.sort();
    members.dedup();
    Ensemble::new_unchecked(p.domain(), members)
}

/// Integer-valued image on an ImageDomain, stored in pattern index order
/// (`x*h + y`). Row y=0 is the bottom row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageValues {
    domain: ImageDomain,
    values: Vec<i64>,
}

impl ImageValues {
    /// Largest value magnitude that keeps any pattern sum within 2^31.
    pub fn value_limit(domain: ImageDomain) -> i64 {
        ((1i64 << 31) / domain.len() as i64).max(1)
    }

    pub fn new(domain: ImageDomain, values: Vec<i64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::DimensionMismatch);
        }
        let limit = Self::value_limit(domain);
        for &v in &values {
            if v.abs() > limit {
                return Err(Error::ValueOutOfRange {
                    value: v,
                    limit,
                    w: domain.w,
                    h: domain.h,
                });
            }
        }
        Ok(ImageValues { domain, values })
    }

    /// Builds from rows, rows[y][x] with row 0 = y 0 (bottom).
    pub fn from_rows(domain: ImageDomain, rows: &[Vec<i64>]) -> Result<Self> {
        if rows.len() != domain.h as usize || rows.iter().any(|r| r.len() != domain.w as usize) {
            return Err(Error::DimensionMismatch);
        }
        let mut values = vec![0i64; domain.len()];
        for (y, row) in rows.iter().enumerate() {
            for (x, &v) in row.iter().enumerate() {
                values[x * domain.h as usize + y] = v;
            }
        }
        Self::new(domain, values)
    }

    pub fn zeros(domain: ImageDomain) -> Self {
        ImageValues {
            domain,
            values: vec![0; domain.len()],
        }
    }

    pub fn ones(domain: ImageDomain) -> Self {
        ImageValues {
            domain,
            values: vec![1; domain.len()],
        }
    }

    /// Zero image with a single 1 at pixel `p`.
    pub fn delta(domain: ImageDomain, p: Pixel) -> Result<Self> {
        if !domain.contains(p) {
            return Err(Error::PixelOutOfBounds {
                x: p.x,
                y: p.y,
                w: domain.w,
                h: domain.h,
            });
        }
        let mut img = Self::zeros(domain);
        img.values[domain.pixel_index(p)] = 1;
        Ok(img)
    }

    #[inline]
    pub fn domain(&self) -> ImageDomain {
        self.domain
    }

    #[inline]
    pub fn get(&self, p: Pixel) -> i64 {
        self.values[self.domain.pixel_index(p)]
    }

    #[inline]
    pub fn value_at_index(&self, i: usize) -> i64 {
        self.values[i]
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Sum of values over a pattern's pixels.
    pub fn sum_over(&self, pat: &Pattern) -> Result<i64> {
        if pat.domain() != self.domain {
            return Err(Error::DimensionMismatch);
        }
        Ok(pat.bits.iter_ones().map(|i| self.values[i]).sum())
    }

    /// Swaps x and y (and w with h). Applying twice is the identity.
    pub fn transpose(&self) -> ImageValues {
        let t = ImageDomain {
            w: self.domain.h,
            h: self.domain.w,
        };
        let mut values = vec![0i64; t.len()];
        for x in 0..self.domain.w {
            for y in 0..self.domain.h {
                values[y as usize * t.h as usize + x as usize] =
                    self.values[x as usize * self.domain.h as usize + y as usize];
            }
        }
        ImageValues { domain: t, values }
    }
}
