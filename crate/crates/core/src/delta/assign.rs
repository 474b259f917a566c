//! Assignment of frame columns to blocks for a fixed frame.

use crate::scalar::Real;

/// Above this many distinct assignments the search switches to greedy swaps.
pub(crate) const EXHAUSTIVE_LIMIT: f64 = 20_000.0;

/// Number of distinct ways to place the blocks among `n` columns.
pub(crate) fn assignment_count(n: usize, parts: &[usize]) -> f64 {
    let fact = |m: usize| (1..=m).fold(1.0f64, |a, i| a * i as f64);
    let used: usize = parts.iter().sum();
    let mut denom = fact(n - used);
    for &p in parts {
        denom *= fact(p);
    }
    let mut i = 0;
    while i < parts.len() {
        let j = parts[i..].iter().take_while(|&&p| p == parts[i]).count();
        denom *= fact(j);
        i += j;
    }
    fact(n) / denom
}

fn block_value<T: Real>(w: &[T], n: usize, cols: &[usize]) -> T {
    let mut s = T::zero();
    for (i, &a) in cols.iter().enumerate() {
        for &b in &cols[i + 1..] {
            s += w[a * n + b];
        }
    }
    s
}

/// Column order with the blocks first (each ascending) and the unused
/// columns after them in ascending order.
pub(crate) fn layout(n: usize, blocks: &[Vec<usize>]) -> Vec<usize> {
    let mut used = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for b in blocks {
        let mut b = b.clone();
        b.sort_unstable();
        for c in b {
            used[c] = true;
            order.push(c);
        }
    }
    order.extend((0..n).filter(|&c| !used[c]));
    order
}

struct Search<'a, T> {
    w: &'a [T],
    n: usize,
    parts: &'a [usize],
    best: Option<(T, Vec<Vec<usize>>)>,
    cur: Vec<Vec<usize>>,
    used: Vec<bool>,
}

impl<T: Real> Search<'_, T> {
    fn run(&mut self, j: usize, acc: T) {
        if j == self.parts.len() {
            if self.best.as_ref().is_none_or(|(b, _)| acc < *b) {
                self.best = Some((acc, self.cur.clone()));
            }
            return;
        }
        let min_first = if j > 0 && self.parts[j] == self.parts[j - 1] {
            self.cur[j - 1][0] + 1
        } else {
            0
        };
        let mut pick = Vec::with_capacity(self.parts[j]);
        self.choose(j, min_first, &mut pick, acc);
    }

    fn choose(&mut self, j: usize, from: usize, pick: &mut Vec<usize>, acc: T) {
        if pick.len() == self.parts[j] {
            let v = block_value(self.w, self.n, pick);
            for &c in pick.iter() {
                self.used[c] = true;
            }
            self.cur.push(pick.clone());
            self.run(j + 1, acc + v);
            self.cur.pop();
            for &c in pick.iter() {
                self.used[c] = false;
            }
            return;
        }
        for c in from..self.n {
            if self.used[c] {
                continue;
            }
            pick.push(c);
            self.choose(j, c + 1, pick, acc);
            pick.pop();
        }
    }
}

/// Best blocks for the pair weights `w[a*n+b] = K(e_a, e_b)`. Exhaustive in
/// lexicographic order (strict improvement only, so ties keep the
/// lexicographically smallest) when the count is small, else greedy swaps
/// from the contiguous layout.
pub(crate) fn best_assignment<T: Real>(w: &[T], n: usize, parts: &[usize]) -> (T, Vec<Vec<usize>>) {
    if assignment_count(n, parts) <= EXHAUSTIVE_LIMIT {
        let mut s = Search {
            w,
            n,
            parts,
            best: None,
            cur: Vec::new(),
            used: vec![false; n],
        };
        s.run(0, T::zero());
        return s.best.expect("at least one assignment");
    }
    greedy(w, n, parts)
}

fn greedy<T: Real>(w: &[T], n: usize, parts: &[usize]) -> (T, Vec<Vec<usize>>) {
    // group[c] = block index, or k for unassigned
    let k = parts.len();
    let mut group = vec![k; n];
    let mut start = 0;
    for (j, &p) in parts.iter().enumerate() {
        for g in group.iter_mut().skip(start).take(p) {
            *g = j;
        }
        start += p;
    }
    let gain_of = |group: &[usize], c: usize, g: usize, skip: usize| -> T {
        if g == k {
            return T::zero();
        }
        (0..n)
            .filter(|&d| d != c && d != skip && group[d] == g)
            .fold(T::zero(), |s, d| s + w[c * n + d])
    };
    loop {
        let mut best: Option<(T, usize, usize)> = None;
        for x in 0..n {
            for y in (x + 1)..n {
                let (gx, gy) = (group[x], group[y]);
                if gx == gy {
                    continue;
                }
                let before = gain_of(&group, x, gx, y) + gain_of(&group, y, gy, x);
                let after = gain_of(&group, y, gx, x) + gain_of(&group, x, gy, y);
                let d = after - before;
                if d < -T::eps() * (T::one() + before.abs()) && best.is_none_or(|(b, _, _)| d < b) {
                    best = Some((d, x, y));
                }
            }
        }
        match best {
            Some((_, x, y)) => group.swap(x, y),
            None => break,
        }
    }
    let blocks: Vec<Vec<usize>> = (0..k)
        .map(|j| (0..n).filter(|&c| group[c] == j).collect())
        .collect();
    let v = blocks.iter().fold(T::zero(), |s, b| s + block_value(w, n, b));
    (v, blocks)
}
