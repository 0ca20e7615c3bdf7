//! Fixed-size bit vector used as the backing store for patterns and column
//! sets. Words past `len` bits are kept zero so equality and hashing work on
//! the raw words.

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bits {
    len: usize,
    words: Box<[u64]>,
}

#[inline]
fn div_rem(i: usize) -> (usize, usize) {
    (i / WORD_BITS, i % WORD_BITS)
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        let nwords = (len + WORD_BITS - 1) / WORD_BITS;
        Bits {
            len,
            words: vec![0; nwords].into_boxed_slice(),
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self::zeros(len);
        for w in b.words.iter_mut() {
            *w = !0;
        }
        b.mask_tail();
        b
    }

    fn mask_tail(&mut self) {
        let extra = self.len % WORD_BITS;
        if extra != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << extra) - 1;
            }
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        let (w, b) = div_rem(i);
        self.words[w] |= 1 << b;
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        let (w, b) = div_rem(i);
        self.words[w] & (1 << b) != 0
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.len, other.len);
        let words = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| a | b)
            .collect::<Vec<_>>()
            .into_boxed_slice();
        Bits {
            len: self.len,
            words,
        }
    }

    pub fn union_in_place(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn intersection(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.len, other.len);
        let words = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| a & b)
            .collect::<Vec<_>>()
            .into_boxed_slice();
        Bits {
            len: self.len,
            words,
        }
    }

    pub fn difference(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.len, other.len);
        let words = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| a & !b)
            .collect::<Vec<_>>()
            .into_boxed_slice();
        Bits {
            len: self.len,
            words,
        }
    }

    pub fn is_disjoint(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .position(|&w| w != 0)
            .map(|wi| wi * WORD_BITS + self.words[wi].trailing_zeros() as usize)
    }
}

// Ordered as sorted index sequences compared lexicographically; a strict
// prefix sorts first.
impl Ord for Bits {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        debug_assert_eq!(self.len, other.len);
        self.iter_ones().cmp(other.iter_ones())
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter_ones()).finish()
    }
}
