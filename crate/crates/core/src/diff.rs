//! Minimal edit-script alignment of two line sequences.
//!
//! The alignment is canonical: among all minimal edit scripts it is the one
//! that takes a match whenever the current lines are equal, and otherwise
//! consumes a line of the new sequence before a line of the old one. Greedy
//! choices are checked against the exact distance-to-end of every candidate
//! point, which comes from a reverse Myers frontier.
//!
//! Storing every frontier level would cost O(D²) memory for an edit distance
//! D. Only every `B`-th level (B ≈ √D) is kept; the levels in between are
//! recomputed block by block while the walk consumes them in decreasing
//! order, for O(D^1.5) memory and about three frontier passes in total.

use std::ops::Range;

const UNREACHED: u32 = u32::MAX;

/// A maximal region between two matched lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    /// Lines of the old sequence deleted by this hunk.
    pub old: Range<usize>,
    /// Lines of the new sequence inserted by this hunk.
    pub new: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Equal,
    Delete,
    Insert,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alignment {
    /// Number of inserted plus deleted lines.
    pub distance: usize,
    pub hunks: Vec<Hunk>,
}

impl Alignment {
    /// Unit edit script equivalent to the hunks, deletions before insertions
    /// inside each hunk.
    pub fn ops(&self, old_len: usize) -> Vec<EditOp> {
        let mut ops = Vec::new();
        let mut x = 0;
        for h in &self.hunks {
            ops.extend(std::iter::repeat_n(EditOp::Equal, h.old.start - x));
            ops.extend(std::iter::repeat_n(EditOp::Delete, h.old.len()));
            ops.extend(std::iter::repeat_n(EditOp::Insert, h.new.len()));
            x = h.old.end;
        }
        ops.extend(std::iter::repeat_n(EditOp::Equal, old_len - x));
        ops
    }

    /// Pairs `(old index, new index)` of matched lines.
    pub fn matches(&self, old_len: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let (mut x, mut y) = (0, 0);
        for h in &self.hunks {
            while x < h.old.start {
                out.push((x, y));
                x += 1;
                y += 1;
            }
            x = h.old.end;
            y = h.new.end;
        }
        while x < old_len {
            out.push((x, y));
            x += 1;
            y += 1;
        }
        out
    }
}

/// Aligns `old` against `new`.
pub fn align<T: PartialEq>(old: &[T], new: &[T]) -> Alignment {
    let prefix = old.iter().zip(new).take_while(|(a, b)| a == b).count();
    let a = &old[prefix..];
    let b = &new[prefix..];
    let mut hunks = Vec::new();
    let distance = if a.is_empty() || b.is_empty() {
        if !a.is_empty() || !b.is_empty() {
            hunks.push(Hunk {
                old: 0..a.len(),
                new: 0..b.len(),
            });
        }
        a.len() + b.len()
    } else {
        Walker::new(a, b).run(&mut hunks)
    };
    for h in &mut hunks {
        h.old = h.old.start + prefix..h.old.end + prefix;
        h.new = h.new.start + prefix..h.new.end + prefix;
    }
    Alignment { distance, hunks }
}

/// Reverse furthest-reaching frontier: level `d` holds, for every diagonal
/// `k = x - y` with `k ≡ delta + d (mod 2)` and `|k - delta| <= d`, the
/// smallest `x` from which the end is reachable with `d` edits.
struct Frontier<'s, T> {
    a: &'s [T],
    b: &'s [T],
    delta: i64,
}

impl<'s, T: PartialEq> Frontier<'s, T> {
    fn slide_back(&self, mut x: usize, mut y: usize) -> usize {
        while x > 0 && y > 0 && self.a[x - 1] == self.b[y - 1] {
            x -= 1;
            y -= 1;
        }
        x
    }

    fn first(&self) -> Vec<u32> {
        vec![self.slide_back(self.a.len(), self.b.len()) as u32]
    }

    fn next(&self, prev: &[u32], d: usize) -> Vec<u32> {
        let (n, m) = (self.a.len() as i64, self.b.len() as i64);
        let mut level = vec![UNREACHED; d + 1];
        for (j, slot) in level.iter_mut().enumerate() {
            let k = self.delta - d as i64 + 2 * j as i64;
            let mut best: Option<i64> = None;
            // one step back from diagonal k+1 undoes a deletion
            if j < d && prev[j] != UNREACHED && prev[j] >= 1 {
                best = Some(prev[j] as i64 - 1);
            }
            // one step back from diagonal k-1 undoes an insertion
            if j >= 1 && prev[j - 1] != UNREACHED {
                let x = prev[j - 1] as i64;
                if x - (k - 1) >= 1 {
                    best = Some(best.map_or(x, |b| b.min(x)));
                }
            }
            if let Some(x) = best {
                let y = x - k;
                if (0..=n).contains(&x) && (0..=m).contains(&y) {
                    *slot = self.slide_back(x as usize, y as usize) as u32;
                }
            }
        }
        level
    }

    fn reaches_start(&self, level: &[u32], d: usize) -> bool {
        let offset = -self.delta + d as i64;
        offset >= 0 && offset % 2 == 0 && {
            let j = (offset / 2) as usize;
            j < level.len() && level[j] == 0
        }
    }
}

struct Walker<'s, T> {
    frontier: Frontier<'s, T>,
    distance: usize,
    block: usize,
    checkpoints: Vec<Vec<u32>>,
    cached_from: usize,
    cached: Vec<Vec<u32>>,
}

impl<'s, T: PartialEq> Walker<'s, T> {
    fn new(a: &'s [T], b: &'s [T]) -> Self {
        let frontier = Frontier {
            a,
            b,
            delta: a.len() as i64 - b.len() as i64,
        };
        let mut level = frontier.first();
        let mut d = 0;
        while !frontier.reaches_start(&level, d) {
            d += 1;
            level = frontier.next(&level, d);
        }
        let distance = d;
        let block = ((distance + 1) as f64).sqrt().ceil() as usize;

        let mut checkpoints = Vec::with_capacity(distance / block + 1);
        let mut level = frontier.first();
        for d in 0..=distance {
            if d > 0 {
                level = frontier.next(&level, d);
            }
            if d % block == 0 {
                checkpoints.push(level.clone());
            }
        }
        Self {
            frontier,
            distance,
            block,
            checkpoints,
            cached_from: usize::MAX,
            cached: Vec::new(),
        }
    }

    fn level(&mut self, d: usize) -> &[u32] {
        let from = d / self.block * self.block;
        if from != self.cached_from {
            let to = (from + self.block - 1).min(self.distance);
            let mut levels = Vec::with_capacity(to - from + 1);
            levels.push(self.checkpoints[from / self.block].clone());
            for dd in from + 1..=to {
                let next = self.frontier.next(levels.last().unwrap(), dd);
                levels.push(next);
            }
            self.cached = levels;
            self.cached_from = from;
        }
        &self.cached[d - from]
    }

    /// True iff the end is reachable from `(x, y)` with exactly `d` edits.
    fn on_optimal_path(&mut self, x: usize, y: usize, d: usize) -> bool {
        let k = x as i64 - y as i64;
        let offset = k - self.frontier.delta + d as i64;
        if offset < 0 || offset % 2 != 0 || offset > 2 * d as i64 {
            return false;
        }
        let v = self.level(d)[(offset / 2) as usize];
        v != UNREACHED && v as usize <= x
    }

    fn run(mut self, hunks: &mut Vec<Hunk>) -> usize {
        let (n, m) = (self.frontier.a.len(), self.frontier.b.len());
        let (mut x, mut y, mut cost) = (0, 0, 0);
        let mut open: Option<(usize, usize)> = None;
        while x < n || y < m {
            if x < n && y < m && self.frontier.a[x] == self.frontier.b[y] {
                if let Some((ox, oy)) = open.take() {
                    hunks.push(Hunk { old: ox..x, new: oy..y });
                }
                x += 1;
                y += 1;
                continue;
            }
            open.get_or_insert((x, y));
            let remaining = self.distance - cost - 1;
            if y < m && self.on_optimal_path(x, y + 1, remaining) {
                y += 1;
            } else {
                debug_assert!(x < n && self.on_optimal_path(x + 1, y, remaining));
                x += 1;
            }
            cost += 1;
        }
        if let Some((ox, oy)) = open {
            hunks.push(Hunk { old: ox..n, new: oy..m });
        }
        debug_assert_eq!(cost, self.distance);
        self.distance
    }
}
