//! Ground-truth generators and verifiers: direct per-line summation, dyadic
//! line-pattern families, segment (non-cyclic) ensembles via zero-padding,
//! and randomized circuit-equivalence testing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::grid::{
    line_pattern, orbit, round_ratio, wrap, BaseFunction, ImageDomain, ImageValues, Pattern,
    Pixel,
};
use crate::partition::{Ensemble, Partition};

/// Direct summation over each pattern; the reference for all circuit checks.
pub fn naive_sums(img: &ImageValues, patterns: &[Pattern]) -> Result<Vec<i64>> {
    patterns.iter().map(|p| img.sum_over(p)).collect()
}

pub fn naive_hough(img: &ImageValues, ens: &Ensemble) -> Result<Vec<i64>> {
    naive_sums(img, ens.patterns())
}

/// Additions spent by direct summation: sum of (|P| - 1) over the patterns.
pub fn naive_addition_count(patterns: &[Pattern]) -> u64 {
    patterns
        .iter()
        .map(|p| p.len().saturating_sub(1) as u64)
        .sum()
}

/// Height table of the dyadic line pattern of width n and elevation e:
/// the left half repeats the half-width pattern of elevation floor(e/2),
/// the right half repeats it lifted by ceil(e/2).
pub fn fht_values(n: u32, e: u32) -> Vec<u32> {
    if n == 1 {
        return vec![0];
    }
    let half = fht_values(n / 2, e / 2);
    let lift = (e + 1) / 2;
    let mut out = half.clone();
    out.extend(half.iter().map(|v| v + lift));
    out
}

/// One partition per elevation over an n x n grid, each the orbit of a
/// dyadic line pattern. Consecutive elevations overlap on dyadic halves, so
/// the fixed-order tree over these reaches exactly n^2 log2(n) additions.
pub fn fht_ensemble(n: u32) -> Result<Vec<Partition>> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo {
            what: "dyadic pattern width",
            n: n as u64,
        });
    }
    let domain = ImageDomain::new(n, n)?;
    (0..n)
        .map(|e| {
            let f = BaseFunction::from_values(domain, e, fht_values(n, e))?;
            Partition::new(orbit(&f.graph()))
        })
        .collect()
}

/// A digital line segment y = round(e*x/(n-1)) + s clipped to the n x n
/// image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub n: u32,
    pub e: u32,
    pub s: i64,
}

impl SegmentSpec {
    pub fn pixels(&self) -> Vec<Pixel> {
        let mut out = Vec::new();
        for x in 0..self.n {
            let y = round_ratio(self.e as u64 * x as u64, (self.n - 1) as u64) as i64 + self.s;
            if y >= 0 && y < self.n as i64 {
                out.push(Pixel::new(x, y as u32));
            }
        }
        out
    }

    /// The clipped segment as a pattern on a domain of width n (the inner
    /// image or the padded one).
    pub fn pattern_on(&self, domain: ImageDomain) -> Result<Pattern> {
        Pattern::from_pixels(domain, self.pixels())
    }
}

#[derive(Debug, Clone)]
pub struct SegmentEntry {
    pub spec: SegmentSpec,
    /// Shift of the cyclic line on the padded domain realizing this segment.
    pub cyclic_shift: u32,
}

/// Embedding of all digital line segments of an n x n image into cyclic
/// lines on a domain padded to height 2n; the pad rows form the zero mask.
#[derive(Debug, Clone)]
pub struct SegmentReduction {
    pub inner: ImageDomain,
    pub padded: ImageDomain,
    pub zero_mask: Pattern,
    pub entries: Vec<SegmentEntry>,
}

pub fn segment_reduction(n: u32) -> Result<SegmentReduction> {
    if n < 2 {
        return Err(Error::WidthTooSmall { w: n });
    }
    let inner = ImageDomain::new(n, n)?;
    let padded = ImageDomain::new(n, 2 * n)?;
    let zero_mask = Pattern::from_pixels(
        padded,
        (0..n).flat_map(|x| (n..2 * n).map(move |y| Pixel::new(x, y))),
    )?;
    let mut entries = Vec::new();
    for e in 0..n {
        for s in -(n as i64 - 1)..n as i64 {
            entries.push(SegmentEntry {
                spec: SegmentSpec { n, e, s },
                cyclic_shift: wrap(s, 2 * n),
            });
        }
    }
    Ok(SegmentReduction {
        inner,
        padded,
        zero_mask,
        entries,
    })
}

impl SegmentReduction {
    /// Copies an n x n image into the padded domain, pad rows zero.
    pub fn embed(&self, img: &ImageValues) -> Result<ImageValues> {
        if img.domain() != self.inner {
            return Err(Error::DimensionMismatch);
        }
        let n = self.inner.w();
        let mut values = vec![0i64; self.padded.len()];
        for x in 0..n {
            for y in 0..n {
                values[(x * 2 * n + y) as usize] = img.get(Pixel::new(x, y));
            }
        }
        ImageValues::new(self.padded, values)
    }

    /// Number of segments with at least one pixel inside the image.
    pub fn non_empty_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|en| !en.spec.pixels().is_empty())
            .count()
    }

    /// Key and full cyclic-line pattern (on the padded domain) per cyclic
    /// shift; shifts realizing a segment are keyed by the segment's original
    /// (e, s).
    pub fn cyclic_labels(&self) -> Result<Vec<(String, Pattern)>> {
        let n = self.inner.w();
        let mut out = Vec::new();
        for e in 0..n {
            for cyc in 0..2 * n {
                let s_orig = if cyc < n {
                    cyc as i64
                } else if cyc > n {
                    cyc as i64 - 2 * n as i64
                } else {
                    // the one cyclic shift no segment maps to
                    cyc as i64
                };
                let key = format!("{},{}", e, s_orig);
                let pat = line_pattern(e, cyc as i64, self.padded)?;
                out.push((key, pat));
            }
        }
        Ok(out)
    }

    /// Expected clipped patterns after pruning: the non-empty segments on
    /// the padded domain, keyed by their original (e, s).
    pub fn expected_clipped(&self) -> Result<Vec<(String, Pattern)>> {
        self.entries
            .iter()
            .filter(|en| !en.spec.pixels().is_empty())
            .map(|en| {
                Ok((
                    format!("{},{}", en.spec.e, en.spec.s),
                    en.spec.pattern_on(self.padded)?,
                ))
            })
            .collect()
    }
}

/// All (elevation, shift) lines with labels, in (e, s) order. Duplicate
/// patterns (possible when the elevation count exceeds the height) are
/// retained; callers dedup as needed.
pub fn hough_line_labels(domain: ImageDomain, elevations: u32) -> Result<Vec<(String, Pattern)>> {
    let mut out = Vec::new();
    for e in 0..elevations {
        let f = BaseFunction::new(e, domain)?;
        for s in 0..domain.h() {
            out.push((format!("{},{}", e, s), f.line(s as i64)));
        }
    }
    Ok(out)
}

/// All dyadic-family lines with labels for an n x n grid.
pub fn fht_line_labels(n: u32) -> Result<Vec<(String, Pattern)>> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo {
            what: "dyadic pattern width",
            n: n as u64,
        });
    }
    let domain = ImageDomain::new(n, n)?;
    let mut out = Vec::new();
    for e in 0..n {
        let f = BaseFunction::from_values(domain, e, fht_values(n, e))?;
        for s in 0..n {
            out.push((format!("{},{}", e, s), f.line(s as i64)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationFailure {
    pub image: String,
    pub output: String,
    pub expected: i64,
    pub actual: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub trials: u32,
    pub seed: u64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<VerificationFailure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

fn trial_seed(seed: u64, trial: u32) -> u64 {
    seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Seeded random image with values uniform in [0, 255] (clamped to the safe
/// magnitude for very large domains).
pub fn random_image(domain: ImageDomain, seed: u64) -> ImageValues {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let upper = ImageValues::value_limit(domain).min(255);
    let values = (0..domain.len())
        .map(|_| rng.gen_range(0..=upper))
        .collect();
    ImageValues::new(domain, values).expect("values within limit")
}

/// Checks the circuit against direct summation over the expected ensemble:
/// on the all-zeros and all-ones images, on every delta image when the
/// domain has at most 256 pixels, and on `trials` seeded random images.
/// A mismatch is reported, not raised.
pub fn verify_circuit(
    circuit: &Circuit,
    expected: &Ensemble,
    trials: u32,
    seed: u64,
) -> Result<VerificationReport> {
    let domain = circuit.domain();
    if expected.domain() != domain {
        return Err(Error::DomainMismatch);
    }
    let out_patterns = circuit.output_patterns()?;
    let mut index: std::collections::HashMap<&Pattern, usize> = std::collections::HashMap::new();
    for (i, p) in out_patterns.iter().enumerate() {
        index.entry(p).or_insert(i);
    }
    // coverage: every expected pattern must be computed by some output
    let mut matched: Vec<usize> = Vec::with_capacity(expected.len());
    for p in expected.patterns() {
        match index.get(p) {
            Some(&i) => matched.push(i),
            None => {
                return Ok(VerificationReport {
                    trials,
                    seed,
                    status: "fail".into(),
                    first_failure: Some(VerificationFailure {
                        image: "(output coverage)".into(),
                        output: format!(
                            "no output computes the expected {}-pixel pattern",
                            p.len()
                        ),
                        expected: 0,
                        actual: 0,
                    }),
                })
            }
        }
    }

    let check_image = |name: &str, img: &ImageValues| -> Result<Option<VerificationFailure>> {
        let eval = circuit.evaluate(img)?;
        for (pi, p) in expected.patterns().iter().enumerate() {
            let want = img.sum_over(p)?;
            let got = eval.values[matched[pi]];
            if want != got {
                return Ok(Some(VerificationFailure {
                    image: name.to_string(),
                    output: circuit.outputs()[matched[pi]].key.clone(),
                    expected: want,
                    actual: got,
                }));
            }
        }
        Ok(None)
    };

    let mut failure: Option<VerificationFailure> = None;
    for (name, img) in [
        ("zeros".to_string(), ImageValues::zeros(domain)),
        ("ones".to_string(), ImageValues::ones(domain)),
    ] {
        if failure.is_none() {
            failure = check_image(&name, &img)?;
        }
    }
    if failure.is_none() && domain.len() <= 256 {
        for px in domain.pixels() {
            let img = ImageValues::delta(domain, px)?;
            failure = check_image(&format!("delta:{},{}", px.x, px.y), &img)?;
            if failure.is_some() {
                break;
            }
        }
    }
    if failure.is_none() {
        let trial_failures: Vec<Option<VerificationFailure>> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let img = random_image(domain, trial_seed(seed, i));
                check_image(&format!("random:{}", i), &img).unwrap_or_else(|_| {
                    Some(VerificationFailure {
                        image: format!("random:{}", i),
                        output: "(evaluation error)".into(),
                        expected: 0,
                        actual: 0,
                    })
                })
            })
            .collect();
        failure = trial_failures.into_iter().flatten().next();
    }
    Ok(VerificationReport {
        trials,
        seed,
        status: if failure.is_none() { "pass" } else { "fail" }.into(),
        first_failure: failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{compile, ComputationChain};
    use crate::tree::PartitionTree;

    fn dom(w: u32, h: u32) -> ImageDomain {
        ImageDomain::new(w, h).unwrap()
    }

    #[test]
    fn naive_on_ones_and_zeros() {
        let d = dom(6, 4);
        let lines: Vec<Pattern> = (0..4)
            .map(|e| line_pattern(e, 0, d).unwrap())
            .collect();
        let ones = ImageValues::ones(d);
        for v in naive_sums(&ones, &lines).unwrap() {
            assert_eq!(v, 6);
        }
        let zeros = ImageValues::zeros(d);
        assert!(naive_sums(&zeros, &lines).unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn naive_table_4cubed_frozen() {
        // image v[i] = (7i + 3) % 11 in pattern index order; sums per (e, s)
        // frozen from the independent oracle
        let d = dom(4, 4);
        let img = ImageValues::new(d, (0..16).map(|i| (7 * i + 3) % 11).collect()).unwrap();
        let expected: [i64; 16] = [
            26, 21, 16, 22, 18, 24, 19, 24, 10, 27, 27, 21, 24, 24, 24, 13,
        ];
        let mut idx = 0;
        for e in 0..4 {
            for s in 0..4 {
                let line = line_pattern(e, s, d).unwrap();
                assert_eq!(
                    img.sum_over(&line).unwrap(),
                    expected[idx],
                    "e={} s={}",
                    e,
                    s
                );
                idx += 1;
            }
        }
    }

    #[test]
    fn naive_cost_is_trivial_bound() {
        let d = dom(8, 8);
        let labels = hough_line_labels(d, 8).unwrap();
        let patterns: Vec<Pattern> = labels.into_iter().map(|(_, p)| p).collect();
        assert_eq!(naive_addition_count(&patterns), 8 * 8 * 7);
    }

    #[test]
    fn fht_values_smallest_and_figure_tables() {
        assert_eq!(fht_values(2, 0), vec![0, 0]);
        assert_eq!(fht_values(2, 1), vec![0, 1]);
        // width-8 tables frozen from the dyadic recursion
        let expected: [[u32; 8]; 8] = [
            [0, 0, 0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 1, 1, 1, 1],
            [0, 0, 1, 1, 1, 1, 2, 2],
            [0, 0, 1, 1, 2, 2, 3, 3],
            [0, 1, 1, 2, 2, 3, 3, 4],
            [0, 1, 1, 2, 3, 4, 4, 5],
            [0, 1, 2, 3, 3, 4, 5, 6],
            [0, 1, 2, 3, 4, 5, 6, 7],
        ];
        for e in 0..8 {
            assert_eq!(fht_values(8, e as u32), expected[e], "e={}", e);
        }
    }

    #[test]
    fn fht_ensemble_members_are_function_graph_partitions() {
        let parts = fht_ensemble(8).unwrap();
        assert_eq!(parts.len(), 8);
        for p in &parts {
            assert_eq!(p.len(), 8);
            for pat in p.patterns() {
                assert_eq!(pat.len(), 8);
                assert_eq!(pat.project().len(), 8);
            }
        }
        assert!(fht_ensemble(6).is_err());
        assert!(fht_ensemble(1).is_err());
    }

    #[test]
    fn segment_counts_and_spots() {
        // frozen from the independent enumeration
        let r2 = segment_reduction(2).unwrap();
        assert_eq!(r2.entries.len(), 2 * 3);
        assert_eq!(r2.non_empty_count(), 5);
        // e=0, s=0 is the bottom row
        let s00 = SegmentSpec { n: 2, e: 0, s: 0 };
        assert_eq!(s00.pixels(), vec![Pixel::new(0, 0), Pixel::new(1, 0)]);
        // n=4: e=n-1, s=-(n-1) leaves only the last column's pixel
        let steep = SegmentSpec { n: 4, e: 3, s: -3 };
        assert_eq!(steep.pixels(), vec![Pixel::new(3, 0)]);
        let r4 = segment_reduction(4).unwrap();
        assert_eq!(r4.non_empty_count(), 22);
    }

    #[test]
    fn segment_reduction_matches_cyclic_sums() {
        // the cyclic line on the padded image sums to the clipped segment
        // when the pad rows are zero
        let n = 4u32;
        let red = segment_reduction(n).unwrap();
        let img = ImageValues::new(red.inner, (0..16).map(|i| (3 * i + 2) % 9).collect()).unwrap();
        let padded = red.embed(&img).unwrap();
        for entry in &red.entries {
            let cyc = line_pattern(entry.spec.e, entry.cyclic_shift as i64, red.padded).unwrap();
            let seg_sum: i64 = entry
                .spec
                .pixels()
                .iter()
                .map(|&p| img.get(p))
                .sum();
            assert_eq!(padded.sum_over(&cyc).unwrap(), seg_sum);
        }
    }

    #[test]
    fn random_image_is_deterministic() {
        let d = dom(5, 5);
        assert_eq!(random_image(d, 7), random_image(d, 7));
        assert_ne!(random_image(d, 7), random_image(d, 8));
    }

    #[test]
    fn verify_passes_fresh_circuit_and_catches_tampering() {
        let d = dom(4, 4);
        let t = PartitionTree::build_hough(d, 4).unwrap();
        let c = compile(&ComputationChain::of_tree(&t).unwrap()).unwrap();
        let labels = hough_line_labels(d, 4).unwrap();
        let ens = Ensemble::new(d, labels.iter().map(|(_, p)| p.clone()).collect()).unwrap();
        let report = verify_circuit(&c, &ens, 10, 42).unwrap();
        assert!(report.passed(), "{:?}", report.first_failure);

        // rewire one output to a wrong node: the expected pattern loses
        // coverage and verification fails
        let mut json = c.to_json(None);
        let some_key = json.outputs.keys().next().unwrap().clone();
        json.outputs.insert(some_key, Some(0));
        let (tampered, _) = Circuit::from_json(&json).unwrap();
        let report = verify_circuit(&tampered, &ens, 10, 42).unwrap();
        assert!(!report.passed());
        assert!(report.first_failure.is_some());
    }

    #[test]
    fn verify_replay_is_identical() {
        let d = dom(4, 4);
        let t = PartitionTree::build_hough(d, 4).unwrap();
        let c = compile(&ComputationChain::of_tree(&t).unwrap()).unwrap();
        let labels = hough_line_labels(d, 4).unwrap();
        let ens = Ensemble::new(d, labels.iter().map(|(_, p)| p.clone()).collect()).unwrap();
        let a = verify_circuit(&c, &ens, 25, 9).unwrap();
        let b = verify_circuit(&c, &ens, 25, 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
