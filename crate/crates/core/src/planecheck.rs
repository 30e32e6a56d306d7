//! Plane tiling checks for polyominoes: boundary words, the
//! Beauquier-Nivat factorization test, and brute-force region oracles.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::voxel::CellSet;

/// A unit square of the plane, by its lower-left corner.
pub type Square = (i32, i32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    U,
    D,
    L,
    R,
}

impl Step {
    pub fn inverse(self) -> Step {
        match self {
            Step::U => Step::D,
            Step::D => Step::U,
            Step::L => Step::R,
            Step::R => Step::L,
        }
    }

    fn delta(self) -> (i32, i32) {
        match self {
            Step::U => (0, 1),
            Step::D => (0, -1),
            Step::L => (-1, 0),
            Step::R => (1, 0),
        }
    }

    fn letter(self) -> char {
        match self {
            Step::U => 'U',
            Step::D => 'D',
            Step::L => 'L',
            Step::R => 'R',
        }
    }
}

/// A closed lattice path, read cyclically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryWord(Vec<Step>);

impl BoundaryWord {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let (dx, dy) = steps.iter().fold((0, 0), |(x, y), s| {
            let (a, b) = s.delta();
            (x + a, y + b)
        });
        if (dx, dy) != (0, 0) {
            return Err(Error::invalid("boundary word is not closed"));
        }
        Ok(Self(steps))
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff `other` is a cyclic rotation of this word.
    pub fn is_rotation_of(&self, other: &BoundaryWord) -> bool {
        let n = self.len();
        n == other.len() && (0..n.max(1)).any(|r| (0..n).all(|i| self.0[(r + i) % n] == other.0[i]))
    }
}

impl fmt::Display for BoundaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{}", s.letter()))
    }
}

impl FromStr for BoundaryWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let steps = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c.to_ascii_uppercase() {
                'U' => Ok(Step::U),
                'D' => Ok(Step::D),
                'L' => Ok(Step::L),
                'R' => Ok(Step::R),
                other => Err(Error::invalid(format!("`{other}` is not a step"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BoundaryWord::new(steps)
    }
}

/// Projects a cell set onto the `xy` plane.
pub fn project(c: &CellSet) -> Vec<Square> {
    let set: BTreeSet<Square> = c.iter().map(|p| (p.x, p.y)).collect();
    set.into_iter().collect()
}

fn squares(p: &[Square]) -> BTreeSet<Square> {
    p.iter().copied().collect()
}

/// Counterclockwise boundary trace from the least boundary vertex (by `x`,
/// then `y`). Polyominoes that are empty, disconnected, or have holes are
/// rejected as unsupported.
pub fn boundary_word(p: &[Square]) -> Result<BoundaryWord> {
    let set = squares(p);
    if set.is_empty() {
        return Err(Error::Unsupported("empty polyomino".into()));
    }
    let mut out: HashMap<(i32, i32), Vec<Step>> = HashMap::new();
    let mut edges = 0usize;
    for &(x, y) in &set {
        let mut add = |v: (i32, i32), s: Step| {
            out.entry(v).or_default().push(s);
            edges += 1;
        };
        if !set.contains(&(x, y - 1)) {
            add((x, y), Step::R);
        }
        if !set.contains(&(x + 1, y)) {
            add((x + 1, y), Step::U);
        }
        if !set.contains(&(x, y + 1)) {
            add((x + 1, y + 1), Step::L);
        }
        if !set.contains(&(x - 1, y)) {
            add((x, y + 1), Step::D);
        }
    }
    if out.values().any(|v| v.len() > 1) {
        return Err(Error::Unsupported(
            "boundary touches itself at a vertex".into(),
        ));
    }
    let start = *out.keys().min().expect("nonempty set has a boundary");
    let mut word = Vec::with_capacity(edges);
    let mut v = start;
    loop {
        let s = out[&v][0];
        word.push(s);
        let (dx, dy) = s.delta();
        v = (v.0 + dx, v.1 + dy);
        if v == start {
            break;
        }
    }
    if word.len() != edges {
        return Err(Error::Unsupported(
            "polyomino has holes or is disconnected".into(),
        ));
    }
    BoundaryWord::new(word)
}

/// A cyclic factorization `A B C Â B̂ Ĉ` of a boundary word, where `X̂` is
/// `X` reversed with every step inverted. `C` may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BnFactorization {
    pub start: usize,
    pub lengths: [usize; 3],
}

impl BnFactorization {
    /// The factors `A`, `B`, `C` as step sequences.
    pub fn factors(&self, w: &BoundaryWord) -> [Vec<Step>; 3] {
        let n = w.len();
        let at = |i: usize| w.steps()[(self.start + i) % n];
        let [a, b, c] = self.lengths;
        [
            (0..a).map(at).collect(),
            (a..a + b).map(at).collect(),
            (a + b..a + b + c).map(at).collect(),
        ]
    }
}

/// Naive search over every rotation and split. Returns the first
/// factorization found, or `None` when the word admits none, which for the
/// boundary of a polyomino means it does not tile the plane by translations.
pub fn bn_exact_factorization(w: &BoundaryWord) -> Option<BnFactorization> {
    let n = w.len();
    if n == 0 || n % 2 == 1 {
        return None;
    }
    let half = n / 2;
    let s = w.steps();
    for start in 0..n {
        let at = |i: usize| s[(start + i) % n];
        // hat factor of the segment [lo, lo + len) sits at half + lo
        let mirrored = |lo: usize, len: usize| {
            (0..len).all(|i| at(half + lo + i) == at(lo + len - 1 - i).inverse())
        };
        for a in 1..half {
            if !mirrored(0, a) {
                continue;
            }
            for b in 1..=half - a {
                let c = half - a - b;
                if mirrored(a, b) && mirrored(a + b, c) {
                    return Some(BnFactorization {
                        start,
                        lengths: [a, b, c],
                    });
                }
            }
        }
    }
    None
}

/// Convenience: does the polyomino tile the plane by translations?
pub fn is_exact_tile(p: &[Square]) -> Result<bool> {
    Ok(bn_exact_factorization(&boundary_word(p)?).is_some())
}

fn normalized(tile: &[Square]) -> Vec<Square> {
    let mut t: Vec<Square> = squares(tile).into_iter().collect();
    // order by row then column, so t[0] is the least cell in scan order
    t.sort_by_key(|&(x, y)| (y, x));
    t
}

/// True iff `region` is exactly partitioned by translates of `tile`.
///
/// In scan order the least uncovered square can only be covered by the copy
/// whose own least square lands on it, so the search never branches.
pub fn brute_force_region_tileable(tile: &[Square], region: &[Square]) -> bool {
    let t = normalized(tile);
    if t.is_empty() {
        return region.is_empty();
    }
    let mut left: BTreeSet<(i32, i32)> = region.iter().map(|&(x, y)| (y, x)).collect();
    let (ax, ay) = t[0];
    while let Some(&(y, x)) = left.iter().next() {
        let (dx, dy) = (x - ax, y - ay);
        for &(tx, ty) in &t {
            if !left.remove(&(ty + dy, tx + dx)) {
                return false;
            }
        }
    }
    true
}

/// Dense occupancy over a padded window, for the covering search.
struct Board {
    lo: Square,
    w: i32,
    h: i32,
    cells: Vec<bool>,
}

impl Board {
    fn new(lo: Square, hi: Square) -> Self {
        let (w, h) = (hi.0 - lo.0 + 1, hi.1 - lo.1 + 1);
        Self {
            lo,
            w,
            h,
            cells: vec![false; (w * h) as usize],
        }
    }

    fn idx(&self, (x, y): Square) -> usize {
        ((y - self.lo.1) * self.w + (x - self.lo.0)) as usize
    }
}

fn bounds(p: &[Square]) -> (Square, Square) {
    let xs = p.iter().map(|c| c.0);
    let ys = p.iter().map(|c| c.1);
    (
        (xs.clone().min().unwrap_or(0), ys.clone().min().unwrap_or(0)),
        (xs.max().unwrap_or(0), ys.max().unwrap_or(0)),
    )
}

/// True iff pairwise disjoint translates of `tile` can cover every square of
/// `region`; copies may stick out of the region. A plane tiling restricts to
/// such a cover, so a region that cannot be covered certifies that `tile`
/// does not tile the plane.
pub fn region_coverable(tile: &[Square], region: &[Square]) -> bool {
    let t = normalized(tile);
    if t.is_empty() {
        return region.is_empty();
    }
    let mut targets: Vec<Square> = squares(region).into_iter().collect();
    targets.sort_by_key(|&(x, y)| (y, x));
    if targets.is_empty() {
        return true;
    }
    let ((rx0, ry0), (rx1, ry1)) = bounds(&targets);
    let ((tx0, ty0), (tx1, ty1)) = bounds(&t);
    let (ex, ey) = (tx1 - tx0, ty1 - ty0);
    let mut board = Board::new((rx0 - ex, ry0 - ey), (rx1 + ex, ry1 + ey));
    debug_assert!(board.w > 0 && board.h > 0);
    cover(&t, &targets, 0, &mut board)
}

fn cover(t: &[Square], targets: &[Square], from: usize, board: &mut Board) -> bool {
    let Some(k) = (from..targets.len()).find(|&k| !board.cells[board.idx(targets[k])]) else {
        return true;
    };
    let (x, y) = targets[k];
    for &(ax, ay) in t {
        let (dx, dy) = (x - ax, y - ay);
        let fits = t
            .iter()
            .all(|&(tx, ty)| !board.cells[board.idx((tx + dx, ty + dy))]);
        if !fits {
            continue;
        }
        for &(tx, ty) in t {
            let i = board.idx((tx + dx, ty + dy));
            board.cells[i] = true;
        }
        if cover(t, targets, k + 1, board) {
            return true;
        }
        for &(tx, ty) in t {
            let i = board.idx((tx + dx, ty + dy));
            board.cells[i] = false;
        }
    }
    false
}

/// The smallest `k x k` square, `k <= max_side`, that translates of `tile`
/// cannot cover.
pub fn witness_region(tile: &[Square], max_side: i32) -> Option<Vec<Square>> {
    (1..=max_side).find_map(|k| {
        let region: Vec<Square> = (0..k).flat_map(|y| (0..k).map(move |x| (x, y))).collect();
        (!region_coverable(tile, &region)).then_some(region)
    })
}
