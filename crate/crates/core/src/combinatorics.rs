//! Lexicographic subset enumeration shared by the exhaustive searches.

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Iterates the `k`-subsets of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        // Find the rightmost position that can still be incremented.
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if self.current[pos] < self.n - k + pos {
                self.current[pos] += 1;
                for q in pos + 1..k {
                    self.current[q] = self.current[q - 1] + 1;
                }
                return Some(out);
            }
        }
        self.done = true;
        Some(out)
    }
}

/// Iterates every element of the Cartesian product `0..sizes[0] x 0..sizes[1] x ...`
/// with the last coordinate varying fastest.
#[derive(Debug, Clone)]
pub struct Product {
    sizes: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl Product {
    pub fn new(sizes: Vec<usize>) -> Self {
        let done = sizes.iter().any(|&s| s == 0);
        let current = vec![0; sizes.len()];
        Self {
            sizes,
            current,
            done,
        }
    }
}

impl Iterator for Product {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut pos = self.sizes.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.current[pos] += 1;
            if self.current[pos] < self.sizes[pos] {
                break;
            }
            self.current[pos] = 0;
        }
        Some(out)
    }
}
