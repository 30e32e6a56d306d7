//! Integer-lattice voxel geometry.
//!
//! Coordinates follow the usual convention: `x` grows east, `y` grows north,
//! `z` grows up. A [`CellSet`] is a sorted, duplicate-free list of cells; the
//! sort key is `(z, y, x)` so horizontal slabs are contiguous ranges.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// A unit voxel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Cell {
    pub const ORIGIN: Cell = Cell { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn neighbors(self) -> [Cell; 6] {
        let Cell { x, y, z } = self;
        [
            Cell::new(x + 1, y, z),
            Cell::new(x - 1, y, z),
            Cell::new(x, y + 1, z),
            Cell::new(x, y - 1, z),
            Cell::new(x, y, z + 1),
            Cell::new(x, y, z - 1),
        ]
    }

    fn key(&self) -> (i32, i32, i32) {
        (self.z, self.y, self.x)
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Cell {
    type Output = Cell;
    fn add(self, o: Cell) -> Cell {
        Cell::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Cell {
    type Output = Cell;
    fn sub(self, o: Cell) -> Cell {
        Cell::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Cell {
    type Output = Cell;
    fn neg(self) -> Cell {
        Cell::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.x, self.y, self.z)
    }
}

/// Coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Sense of a quarter turn, by the right-hand rule about the positive axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Turn {
    CounterClockwise,
    Clockwise,
}

/// A finite set of cells in canonical (sorted) order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct CellSet {
    cells: Vec<Cell>,
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.len() <= 16 {
            f.debug_set()
                .entries(self.cells.iter().map(|c| (c.x, c.y, c.z)))
                .finish()
        } else {
            write!(
                f,
                "CellSet({} cells, bbox {:?})",
                self.cells.len(),
                self.bbox()
            )
        }
    }
}

impl FromIterator<Cell> for CellSet {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        Self::from_vec(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a CellSet {
    type Item = &'a Cell;
    type IntoIter = std::slice::Iter<'a, Cell>;
    fn into_iter(self) -> Self::IntoIter {
        self.cells.iter()
    }
}

impl CellSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) const EMPTY: CellSet = CellSet { cells: Vec::new() };

    pub fn from_vec(mut cells: Vec<Cell>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        Self { cells }
    }

    /// Wraps cells already in canonical order without re-sorting.
    pub(crate) fn from_sorted_unchecked(cells: Vec<Cell>) -> Self {
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        Self { cells }
    }

    /// Axis-aligned box `[lo, hi)` filled with cells.
    pub fn cuboid(lo: Cell, hi: Cell) -> Self {
        let mut cells = Vec::new();
        for z in lo.z..hi.z {
            for y in lo.y..hi.y {
                for x in lo.x..hi.x {
                    cells.push(Cell::new(x, y, z));
                }
            }
        }
        Self::from_sorted_unchecked(cells)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Cell> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn volume(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, c: &Cell) -> bool {
        self.cells.binary_search(c).is_ok()
    }

    /// Inclusive bounding box `(min, max)`, or `None` for the empty set.
    pub fn bbox(&self) -> Option<(Cell, Cell)> {
        let first = *self.cells.first()?;
        let (mut lo, mut hi) = (first, first);
        for c in &self.cells {
            lo = Cell::new(lo.x.min(c.x), lo.y.min(c.y), lo.z.min(c.z));
            hi = Cell::new(hi.x.max(c.x), hi.y.max(c.y), hi.z.max(c.z));
        }
        Some((lo, hi))
    }

    pub fn translate(&self, v: Cell) -> CellSet {
        // translation preserves the lexicographic order
        Self::from_sorted_unchecked(self.cells.iter().map(|&c| c + v).collect())
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.cells, &other.cells);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self::from_sorted_unchecked(out)
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        self.merge_filter(other, true)
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        self.merge_filter(other, false)
    }

    fn merge_filter(&self, other: &CellSet, keep_common: bool) -> CellSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.cells, &other.cells);
        while i < a.len() {
            if j >= b.len() {
                if !keep_common {
                    out.extend_from_slice(&a[i..]);
                }
                break;
            }
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    if !keep_common {
                        out.push(a[i]);
                    }
                    i += 1;
                }
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    if keep_common {
                        out.push(a[i]);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Self::from_sorted_unchecked(out)
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Cells with `z` in `[z_lo, z_hi)`.
    pub fn z_slab(&self, z_lo: i32, z_hi: i32) -> &[Cell] {
        let start = self.cells.partition_point(|c| c.z < z_lo);
        let end = self.cells.partition_point(|c| c.z < z_hi);
        &self.cells[start..end]
    }

    /// Translate so the bounding-box minimum corner sits at the origin.
    pub fn canonical(&self) -> CellSet {
        match self.bbox() {
            Some((lo, _)) => self.translate(-lo),
            None => CellSet::new(),
        }
    }

    pub fn map(&self, f: impl Fn(Cell) -> Cell) -> CellSet {
        self.cells.iter().map(|&c| f(c)).collect()
    }

    /// Half turn about the vertical axis, renormalized to the origin.
    pub fn rotate_z_180(&self) -> CellSet {
        self.map(|c| Cell::new(-c.x, -c.y, c.z)).canonical()
    }

    /// Quarter turn about `axis`, renormalized to the origin.
    pub fn rotate_axis_90(&self, axis: Axis, turn: Turn) -> CellSet {
        let ccw = turn == Turn::CounterClockwise;
        self.map(|Cell { x, y, z }| match (axis, ccw) {
            (Axis::Z, true) => Cell::new(-y, x, z),
            (Axis::Z, false) => Cell::new(y, -x, z),
            (Axis::Y, true) => Cell::new(z, y, -x),
            (Axis::Y, false) => Cell::new(-z, y, x),
            (Axis::X, true) => Cell::new(x, -z, y),
            (Axis::X, false) => Cell::new(x, z, -y),
        })
        .canonical()
    }

    pub fn overlaps(&self, other: &CellSet) -> bool {
        overlaps(self, other)
    }

    pub fn is_connected(&self) -> bool {
        is_connected(self)
    }

    /// Connected components under face adjacency, each in canonical order.
    pub fn components(&self) -> Vec<CellSet> {
        let index: HashMap<Cell, usize> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i))
            .collect();
        let mut seen = vec![false; self.cells.len()];
        let mut out = Vec::new();
        for start in 0..self.cells.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(i) = stack.pop() {
                comp.push(self.cells[i]);
                for n in self.cells[i].neighbors() {
                    if let Some(&j) = index.get(&n) {
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
            out.push(CellSet::from_vec(comp));
        }
        out
    }
}

/// Image of `c` under translation by `v`.
pub fn translate(c: &CellSet, v: Cell) -> CellSet {
    c.translate(v)
}

/// True iff the two sets share a cell.
pub fn overlaps(a: &CellSet, b: &CellSet) -> bool {
    let (mut i, mut j) = (0, 0);
    let (a, b) = (a.cells(), b.cells());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => return true,
        }
    }
    false
}

pub fn volume(c: &CellSet) -> usize {
    c.volume()
}

pub fn bbox(c: &CellSet) -> Option<(Cell, Cell)> {
    c.bbox()
}

pub fn rotate_z_180(c: &CellSet) -> CellSet {
    c.rotate_z_180()
}

pub fn rotate_axis_90(c: &CellSet, axis: Axis, turn: Turn) -> CellSet {
    c.rotate_axis_90(axis, turn)
}

/// Dense occupancy grid over an inclusive bounding box.
pub(crate) struct Grid {
    lo: Cell,
    dims: [usize; 3],
    bits: Vec<u64>,
}

impl Grid {
    pub(crate) fn new(lo: Cell, hi: Cell) -> Self {
        let dims = [
            (hi.x - lo.x + 1) as usize,
            (hi.y - lo.y + 1) as usize,
            (hi.z - lo.z + 1) as usize,
        ];
        let n = dims[0] * dims[1] * dims[2];
        Self {
            lo,
            dims,
            bits: vec![0; n.div_ceil(64)],
        }
    }

    pub(crate) fn volume_of(lo: Cell, hi: Cell) -> u128 {
        (hi.x - lo.x + 1) as u128 * (hi.y - lo.y + 1) as u128 * (hi.z - lo.z + 1) as u128
    }

    #[inline]
    pub(crate) fn index(&self, c: Cell) -> Option<usize> {
        let d = c - self.lo;
        if d.x < 0 || d.y < 0 || d.z < 0 {
            return None;
        }
        let (x, y, z) = (d.x as usize, d.y as usize, d.z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return None;
        }
        Some((z * self.dims[1] + y) * self.dims[0] + x)
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        self.bits[i >> 6] >> (i & 63) & 1 == 1
    }

    /// Sets bit `i` and returns its previous value.
    #[inline]
    pub(crate) fn set(&mut self, i: usize) -> bool {
        let w = &mut self.bits[i >> 6];
        let mask = 1u64 << (i & 63);
        let old = *w & mask != 0;
        *w |= mask;
        old
    }

    pub(crate) fn contains(&self, c: Cell) -> bool {
        self.index(c).is_some_and(|i| self.get(i))
    }

    pub(crate) fn from_cells(cells: &CellSet) -> Option<Self> {
        let (lo, hi) = cells.bbox()?;
        let mut g = Grid::new(lo, hi);
        for &c in cells {
            let i = g.index(c).expect("cell inside its own bbox");
            g.set(i);
        }
        Some(g)
    }

    fn cell_at(&self, i: usize) -> Cell {
        let x = i % self.dims[0];
        let y = (i / self.dims[0]) % self.dims[1];
        let z = i / (self.dims[0] * self.dims[1]);
        self.lo + Cell::new(x as i32, y as i32, z as i32)
    }
}

const DENSE_LIMIT: u128 = 1 << 32;

/// True iff the face-adjacency graph of `c` is connected. The empty set
/// counts as connected.
pub fn is_connected(c: &CellSet) -> bool {
    let Some((lo, hi)) = c.bbox() else {
        return true;
    };
    if Grid::volume_of(lo, hi) > DENSE_LIMIT {
        return c.components().len() == 1;
    }
    let occupied = Grid::from_cells(c).expect("nonempty");
    let mut seen = Grid::new(lo, hi);
    let start = occupied.index(c.cells()[0]).expect("inside bbox");
    seen.set(start);
    let mut stack = vec![start];
    let mut reached = 1usize;
    while let Some(i) = stack.pop() {
        for n in occupied.cell_at(i).neighbors() {
            if let Some(j) = occupied.index(n) {
                if occupied.get(j) && !seen.set(j) {
                    reached += 1;
                    stack.push(j);
                }
            }
        }
    }
    reached == c.len()
}

/// A nonempty, face-connected cell set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polycube(CellSet);

impl Polycube {
    pub fn new(cells: CellSet) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::invalid("a polycube needs at least one cell"));
        }
        if !cells.is_connected() {
            return Err(Error::Construction("cells are not face-connected".into()));
        }
        Ok(Self(cells))
    }

    pub fn cells(&self) -> &CellSet {
        &self.0
    }

    pub fn into_cells(self) -> CellSet {
        self.0
    }

    pub fn volume(&self) -> usize {
        self.0.len()
    }
}

impl AsRef<CellSet> for Polycube {
    fn as_ref(&self) -> &CellSet {
        &self.0
    }
}

/// Integer lattice spanned by three row vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeBasis {
    rows: [[i64; 3]; 3],
}

impl LatticeBasis {
    pub fn new(b1: [i64; 3], b2: [i64; 3], b3: [i64; 3]) -> Result<Self> {
        let basis = Self { rows: [b1, b2, b3] };
        if basis.determinant() == 0 {
            return Err(Error::invalid("lattice basis is degenerate"));
        }
        Ok(basis)
    }

    pub fn rows(&self) -> [[i64; 3]; 3] {
        self.rows
    }

    pub fn determinant(&self) -> i64 {
        let [a, b, c] = self.rows;
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
    }

    /// Scale each basis vector by the matching factor.
    pub fn scaled(&self, k: [i64; 3]) -> Self {
        let mut rows = self.rows;
        for (row, f) in rows.iter_mut().zip(k) {
            for v in row.iter_mut() {
                *v *= f;
            }
        }
        Self { rows }
    }

    /// Upper-triangular Hermite normal form of the row lattice.
    pub fn hermite(&self) -> [[i64; 3]; 3] {
        hermite_rows(self.rows)
    }

    pub fn contains(&self, v: Cell) -> bool {
        let r = ResidueMap::new(self);
        r.reduce(v) == Cell::ORIGIN
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

fn hermite_rows(mut m: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
    for col in 0..3 {
        // fold every lower row into row `col` with unimodular 2x2 steps
        for r in col + 1..3 {
            let (a, b) = (m[col][col], m[r][col]);
            if b == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(a, b);
            let (ag, bg) = (a / g, b / g);
            let top = m[col];
            let bot = m[r];
            for k in 0..3 {
                m[col][k] = x * top[k] + y * bot[k];
                m[r][k] = -bg * top[k] + ag * bot[k];
            }
        }
        if m[col][col] < 0 {
            for v in m[col].iter_mut() {
                *v = -*v;
            }
        }
    }
    // reduce entries above the diagonal
    for col in 1..3 {
        let d = m[col][col];
        for r in 0..col {
            let q = m[r][col].div_euclid(d);
            let pivot = m[col];
            for (x, p) in m[r].iter_mut().zip(pivot) {
                *x -= q * p;
            }
        }
    }
    m
}

/// Maps cells to canonical representatives of `Z^3 / lattice`.
#[derive(Clone, Debug)]
pub struct ResidueMap {
    h: [[i64; 3]; 3],
    dims: [i64; 3],
}

impl ResidueMap {
    pub fn new(basis: &LatticeBasis) -> Self {
        let h = basis.hermite();
        Self {
            h,
            dims: [h[0][0], h[1][1], h[2][2]],
        }
    }

    /// Number of residue classes, `|det|`.
    pub fn size(&self) -> u64 {
        (self.dims[0] * self.dims[1] * self.dims[2]) as u64
    }

    pub fn dims(&self) -> [i64; 3] {
        self.dims
    }

    #[inline]
    fn reduce_i64(&self, v: [i64; 3]) -> [i64; 3] {
        let mut v = v;
        for i in 0..3 {
            let q = v[i].div_euclid(self.dims[i]);
            if q != 0 {
                for (x, h) in v.iter_mut().zip(self.h[i]).skip(i) {
                    *x -= q * h;
                }
            }
        }
        v
    }

    /// Canonical representative, with `0 <= rep[i] < dims[i]`.
    pub fn reduce(&self, c: Cell) -> Cell {
        let v = self.reduce_i64([c.x as i64, c.y as i64, c.z as i64]);
        Cell::new(v[0] as i32, v[1] as i32, v[2] as i32)
    }

    #[inline]
    pub fn index(&self, c: Cell) -> u64 {
        let v = self.reduce_i64([c.x as i64, c.y as i64, c.z as i64]);
        ((v[0] * self.dims[1] + v[1]) * self.dims[2] + v[2]) as u64
    }

    pub fn representative(&self, index: u64) -> Cell {
        let i = index as i64;
        let z = i % self.dims[2];
        let y = (i / self.dims[2]) % self.dims[1];
        let x = i / (self.dims[2] * self.dims[1]);
        Cell::new(x as i32, y as i32, z as i32)
    }
}

/// Outcome of a finite packing check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingReport {
    /// Cells covered two or more times.
    pub overlap_cells: CellSet,
    pub multiplicity_ok: bool,
}

/// Checks that the translated sets are pairwise disjoint.
pub fn verify_packing(ps: &[(&CellSet, Cell)]) -> PackingReport {
    let mut lo: Option<Cell> = None;
    let mut hi = Cell::ORIGIN;
    for (set, off) in ps {
        if let Some((a, b)) = set.bbox() {
            let (a, b) = (a + *off, b + *off);
            lo = Some(match lo {
                None => {
                    hi = b;
                    a
                }
                Some(l) => {
                    hi = Cell::new(hi.x.max(b.x), hi.y.max(b.y), hi.z.max(b.z));
                    Cell::new(l.x.min(a.x), l.y.min(a.y), l.z.min(a.z))
                }
            });
        }
    }
    let Some(lo) = lo else {
        return PackingReport {
            overlap_cells: CellSet::new(),
            multiplicity_ok: true,
        };
    };
    let mut overlap = Vec::new();
    if Grid::volume_of(lo, hi) <= DENSE_LIMIT {
        let mut seen = Grid::new(lo, hi);
        for (set, off) in ps {
            for &c in set.iter() {
                let c = c + *off;
                let i = seen.index(c).expect("inside joint bbox");
                if seen.set(i) {
                    overlap.push(c);
                }
            }
        }
    } else {
        let mut seen = std::collections::HashSet::new();
        for (set, off) in ps {
            for &c in set.iter() {
                let c = c + *off;
                if !seen.insert(c) {
                    overlap.push(c);
                }
            }
        }
    }
    let overlap_cells = CellSet::from_vec(overlap);
    PackingReport {
        multiplicity_ok: overlap_cells.is_empty(),
        overlap_cells,
    }
}

/// Multiplicity of every residue class under a periodic arrangement.
pub struct ResidueCoverage {
    map: ResidueMap,
    covered: Vec<u64>,
    /// Representatives of residue classes hit more than once (capped sample).
    pub overlaps: Vec<Cell>,
    pub overlap_count: u64,
    pub covered_count: u64,
    pub placed_volume: u64,
}

const OVERLAP_SAMPLE: usize = 64;

impl ResidueCoverage {
    /// Empty coverage: every residue class uncovered.
    pub fn new(basis: &LatticeBasis) -> Self {
        let map = ResidueMap::new(basis);
        let covered = vec![0u64; map.size().div_ceil(64) as usize];
        Self {
            map,
            covered,
            overlaps: Vec::new(),
            overlap_count: 0,
            covered_count: 0,
            placed_volume: 0,
        }
    }

    pub fn compute(ps: &[(&CellSet, Cell)], basis: &LatticeBasis) -> Self {
        let mut cov = Self::new(basis);
        for (set, off) in ps {
            cov.add(set, *off);
        }
        cov
    }

    /// Adds one translated set, counting repeated residues as overlaps.
    pub fn add(&mut self, set: &CellSet, off: Cell) {
        self.placed_volume += set.len() as u64;
        for &c in set.iter() {
            let i = self.map.index(c + off);
            let w = &mut self.covered[(i >> 6) as usize];
            let mask = 1u64 << (i & 63);
            if *w & mask != 0 {
                self.overlap_count += 1;
                if self.overlaps.len() < OVERLAP_SAMPLE {
                    self.overlaps.push(c + off);
                }
            } else {
                *w |= mask;
                self.covered_count += 1;
            }
        }
    }

    pub fn residues(&self) -> &ResidueMap {
        &self.map
    }

    pub fn is_covered(&self, c: Cell) -> bool {
        let i = self.map.index(c);
        self.covered[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    pub fn uncovered_count(&self) -> u64 {
        self.map.size() - self.covered_count
    }

    /// Representatives of all uncovered residue classes, ascending by index.
    pub fn uncovered(&self) -> impl Iterator<Item = Cell> + '_ {
        let size = self.map.size();
        self.covered.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut free = !w;
            std::iter::from_fn(move || {
                while free != 0 {
                    let b = free.trailing_zeros() as u64;
                    free &= free - 1;
                    let i = wi as u64 * 64 + b;
                    if i < size {
                        return Some(self.map.representative(i));
                    }
                }
                None
            })
        })
    }

    pub fn is_exact_partition(&self) -> bool {
        self.overlap_count == 0 && self.covered_count == self.map.size()
    }
}

/// True iff the translated sets, repeated over `basis`, cover every residue
/// class of `Z^3 / basis` exactly once.
pub fn verify_periodic_partition(ps: &[(&CellSet, Cell)], basis: &LatticeBasis) -> Result<bool> {
    if basis.determinant() == 0 {
        return Err(Error::invalid("lattice basis is degenerate"));
    }
    let total: u64 = ps.iter().map(|(s, _)| s.len() as u64).sum();
    if total != basis.determinant().unsigned_abs() {
        return Ok(false);
    }
    Ok(ResidueCoverage::compute(ps, basis).is_exact_partition())
}

/// Parses the cell-list text format: one `x y z` triple per line. Blank
/// lines and `#` comments are skipped.
pub fn parse_cell_list(text: &str) -> Result<CellSet> {
    let mut cells = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::parse(n + 1, "expected three integers `x y z`"));
        }
        let mut v = [0i32; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::parse(n + 1, format!("`{p}` is not an integer")))?;
        }
        cells.push(Cell::new(v[0], v[1], v[2]));
    }
    Ok(CellSet::from_vec(cells))
}

pub fn write_cell_list(c: &CellSet, out: &mut impl std::io::Write) -> std::io::Result<()> {
    for cell in c {
        writeln!(out, "{cell}")?;
    }
    Ok(())
}

/// ASCII art, one block per `z` slice from the bottom up. Rows run north
/// (largest `y`) to south, `#` marks a filled cell.
pub fn write_layers(c: &CellSet, out: &mut impl std::io::Write) -> std::io::Result<()> {
    let Some((lo, hi)) = c.bbox() else {
        return Ok(());
    };
    for z in lo.z..=hi.z {
        if z > lo.z {
            writeln!(out)?;
        }
        writeln!(out, "z={z}")?;
        for y in (lo.y..=hi.y).rev() {
            let row: String = (lo.x..=hi.x)
                .map(|x| {
                    if c.contains(&Cell::new(x, y, z)) {
                        '#'
                    } else {
                        '.'
                    }
                })
                .collect();
            writeln!(out, "{row}")?;
        }
    }
    Ok(())
}

/// Surface mesh of unit cubes as Wavefront OBJ: every exposed face becomes
/// one quad, corners are shared between faces, and quads wind
/// counter-clockwise seen from outside.
pub fn write_obj(c: &CellSet, out: &mut impl std::io::Write) -> std::io::Result<()> {
    // outward normal, then the four corner offsets in counter-clockwise order
    const FACES: [([i32; 3], [[i32; 3]; 4]); 6] = [
        ([1, 0, 0], [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 0, 1]]),
        ([-1, 0, 0], [[0, 0, 0], [0, 0, 1], [0, 1, 1], [0, 1, 0]]),
        ([0, 1, 0], [[0, 1, 0], [0, 1, 1], [1, 1, 1], [1, 1, 0]]),
        ([0, -1, 0], [[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]]),
        ([0, 0, 1], [[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]]),
        ([0, 0, -1], [[0, 0, 0], [0, 1, 0], [1, 1, 0], [1, 0, 0]]),
    ];
    let mut index: std::collections::HashMap<Cell, usize> = std::collections::HashMap::new();
    let mut vertices = Vec::new();
    let mut quads = Vec::new();
    for &cell in c {
        for (n, corners) in FACES {
            if c.contains(&(cell + Cell::new(n[0], n[1], n[2]))) {
                continue;
            }
            let quad = corners.map(|d| {
                let v = cell + Cell::new(d[0], d[1], d[2]);
                *index.entry(v).or_insert_with(|| {
                    vertices.push(v);
                    vertices.len()
                })
            });
            quads.push(quad);
        }
    }
    for v in &vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for q in &quads {
        writeln!(out, "f {} {} {} {}", q[0], q[1], q[2], q[3])?;
    }
    Ok(())
}

const BITMAP_MAGIC: &[u8; 4] = b"PCBM";

/// Packed bitmap of the bounding box: magic `PCBM`, the box size as three
/// little-endian `u32`, its low corner as three little-endian `i32`, then one
/// bit per cell in `z`, `y`, `x` order, least significant bit first.
pub fn write_bitmap(c: &CellSet, out: &mut impl std::io::Write) -> std::io::Result<()> {
    let (lo, hi) = c.bbox().unwrap_or_default();
    let dims = if c.is_empty() {
        [0u32; 3]
    } else {
        [hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1].map(|d| d as u32)
    };
    out.write_all(BITMAP_MAGIC)?;
    for d in dims {
        out.write_all(&d.to_le_bytes())?;
    }
    for o in [lo.x, lo.y, lo.z] {
        out.write_all(&o.to_le_bytes())?;
    }
    let total = dims.iter().map(|&d| d as usize).product::<usize>();
    let mut bits = vec![0u8; total.div_ceil(8)];
    for &cell in c {
        let d = cell - lo;
        let i = (d.z as usize * dims[1] as usize + d.y as usize) * dims[0] as usize + d.x as usize;
        bits[i / 8] |= 1 << (i % 8);
    }
    out.write_all(&bits)
}

/// Inverse of [`write_bitmap`].
pub fn read_bitmap(bytes: &[u8]) -> Result<CellSet> {
    let bad = |m: &str| Error::invalid(format!("bitmap: {m}"));
    if bytes.len() < 28 || &bytes[..4] != BITMAP_MAGIC {
        return Err(bad("missing header"));
    }
    let word = |k: usize| <[u8; 4]>::try_from(&bytes[4 + 4 * k..8 + 4 * k]).expect("four bytes");
    let dims = [0, 1, 2].map(|k| u32::from_le_bytes(word(k)) as usize);
    let lo = [3, 4, 5].map(|k| i32::from_le_bytes(word(k)));
    let total = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or_else(|| bad("size overflow"))?;
    let body = &bytes[28..];
    if body.len() != total.div_ceil(8) {
        return Err(bad("body length does not match the header"));
    }
    let mut cells = Vec::new();
    for i in (0..total).filter(|&i| body[i / 8] >> (i % 8) & 1 == 1) {
        let x = i % dims[0];
        let y = (i / dims[0]) % dims[1];
        let z = i / (dims[0] * dims[1]);
        cells.push(Cell::new(
            lo[0] + x as i32,
            lo[1] + y as i32,
            lo[2] + z as i32,
        ));
    }
    Ok(CellSet::from_vec(cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cross() -> CellSet {
        let mut v = Vec::new();
        for i in 0..5 {
            v.push(Cell::new(i, 2, 0));
            v.push(Cell::new(2, i, 0));
        }
        CellSet::from_vec(v)
    }

    #[test]
    fn layers_of_cross() {
        let mut out = Vec::new();
        write_layers(&cross(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "z=0\n..#..\n..#..\n#####\n..#..\n..#..\n");
    }

    /// Exposed faces counted directly: six per cell minus two per adjacent pair.
    fn exposed_faces(c: &CellSet) -> usize {
        let pairs: usize = c
            .iter()
            .map(|&a| {
                [Cell::new(1, 0, 0), Cell::new(0, 1, 0), Cell::new(0, 0, 1)]
                    .iter()
                    .filter(|&&d| c.contains(&(a + d)))
                    .count()
            })
            .sum();
        6 * c.len() - 2 * pairs
    }

    #[test]
    fn obj_of_cross() {
        let mut out = Vec::new();
        write_obj(&cross(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let faces = text.lines().filter(|l| l.starts_with("f ")).count();
        let verts: Vec<&str> = text.lines().filter(|l| l.starts_with("v ")).collect();
        assert_eq!(faces, 38);
        assert_eq!(faces, exposed_faces(&cross()));
        let distinct: std::collections::HashSet<_> = verts.iter().collect();
        assert_eq!(distinct.len(), verts.len());
        // 20 distinct square corners on each of the two z planes
        assert_eq!(verts.len(), 2 * 20);
    }

    #[test]
    fn obj_quads_face_outward() {
        let one = CellSet::from_vec(vec![Cell::ORIGIN]);
        let mut out = Vec::new();
        write_obj(&one, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let verts: Vec<[f64; 3]> = text
            .lines()
            .filter_map(|l| l.strip_prefix("v "))
            .map(|l| {
                let v: Vec<f64> = l.split(' ').map(|w| w.parse().unwrap()).collect();
                [v[0], v[1], v[2]]
            })
            .collect();
        for l in text.lines().filter_map(|l| l.strip_prefix("f ")) {
            let q: Vec<[f64; 3]> = l
                .split(' ')
                .map(|w| verts[w.parse::<usize>().unwrap() - 1])
                .collect();
            let u = [q[1][0] - q[0][0], q[1][1] - q[0][1], q[1][2] - q[0][2]];
            let v = [q[2][0] - q[0][0], q[2][1] - q[0][1], q[2][2] - q[0][2]];
            let n = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            let centroid: Vec<f64> = (0..3)
                .map(|k| q.iter().map(|p| p[k]).sum::<f64>() / 4.0 - 0.5)
                .collect();
            let dot: f64 = (0..3).map(|k| n[k] * centroid[k]).sum();
            assert!(dot > 0.0, "face {l} points inward");
        }
    }

    #[test]
    fn bitmap_round_trip() {
        let c = cross()
            .translate(Cell::new(-3, 4, 9))
            .union(&CellSet::from_vec(vec![Cell::new(0, 0, 11)]));
        let mut out = Vec::new();
        write_bitmap(&c, &mut out).unwrap();
        assert_eq!(&out[..4], b"PCBM");
        assert_eq!(read_bitmap(&out).unwrap(), c);
        assert!(read_bitmap(&out[..out.len() - 1]).is_err());
        let mut empty = Vec::new();
        write_bitmap(&CellSet::new(), &mut empty).unwrap();
        assert!(read_bitmap(&empty).unwrap().is_empty());
    }

    #[test]
    fn translate_examples() {
        let one = CellSet::from_vec(vec![Cell::ORIGIN]);
        assert_eq!(
            one.translate(Cell::new(1, 2, 3)).cells(),
            &[Cell::new(1, 2, 3)]
        );
        assert_eq!(cross().translate(Cell::ORIGIN), cross());
        assert!(cross()
            .translate(Cell::new(7, 0, 0))
            .intersection(&cross())
            .is_empty());
    }

    #[test]
    fn overlap_examples() {
        let c = cross();
        assert!(overlaps(&c, &c));
        assert!(!overlaps(&c, &c.translate(Cell::new(5, 0, 0))));
        assert!(!overlaps(&c, &c.translate(Cell::new(3, 3, 0))));
        assert!(overlaps(&c, &c.translate(Cell::new(3, 0, 0))));
        assert!(!overlaps(&CellSet::new(), &c));
    }

    #[test]
    fn connectivity_examples() {
        assert!(cross().is_connected());
        assert!(CellSet::new().is_connected());
        let apart = CellSet::from_vec(vec![Cell::new(0, 0, 0), Cell::new(2, 0, 0)]);
        assert!(!apart.is_connected());
        assert_eq!(apart.components().len(), 2);
        // diagonal contact is not adjacency
        let diag = CellSet::from_vec(vec![Cell::new(0, 0, 0), Cell::new(1, 1, 0)]);
        assert!(!diag.is_connected());
    }

    #[test]
    fn volume_and_bbox() {
        assert_eq!(volume(&cross()), 9);
        assert_eq!(volume(&CellSet::new()), 0);
        assert_eq!(
            bbox(&cross()),
            Some((Cell::new(0, 0, 0), Cell::new(4, 4, 0)))
        );
        assert_eq!(bbox(&CellSet::new()), None);
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(cross().rotate_z_180(), cross());
        let l = CellSet::from_vec(vec![
            Cell::new(0, 0, 0),
            Cell::new(1, 0, 0),
            Cell::new(2, 0, 0),
            Cell::new(0, 1, 0),
            Cell::new(0, 0, 1),
        ]);
        assert_eq!(l.rotate_z_180().rotate_z_180(), l.canonical());
        assert_ne!(l.rotate_z_180(), l.canonical());
        // +x arm goes to +y under a counterclockwise turn about z
        let arm = CellSet::from_vec(vec![Cell::new(0, 0, 0), Cell::new(1, 0, 0)]);
        let turned = arm.rotate_axis_90(Axis::Z, Turn::CounterClockwise);
        assert_eq!(turned.cells(), &[Cell::new(0, 0, 0), Cell::new(0, 1, 0)]);
        let up = arm.rotate_axis_90(Axis::Y, Turn::Clockwise);
        assert_eq!(up.cells(), &[Cell::new(0, 0, 0), Cell::new(0, 0, 1)]);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let back = l
                .rotate_axis_90(axis, Turn::CounterClockwise)
                .rotate_axis_90(axis, Turn::Clockwise);
            assert_eq!(back, l.canonical());
        }
    }

    #[test]
    fn set_algebra() {
        let a = CellSet::cuboid(Cell::new(0, 0, 0), Cell::new(2, 2, 1));
        let b = CellSet::cuboid(Cell::new(1, 0, 0), Cell::new(3, 2, 1));
        assert_eq!(a.union(&b).len(), 6);
        assert_eq!(a.intersection(&b).len(), 2);
        assert_eq!(a.difference(&b).len(), 2);
        assert!(a.intersection(&b).is_subset(&a));
        assert_eq!(a.z_slab(0, 1).len(), 4);
        assert_eq!(a.z_slab(1, 5).len(), 0);
    }

    #[test]
    fn packing_examples() {
        let c = cross();
        let far = Cell::new(10, 0, 0);
        let r = verify_packing(&[(&c, Cell::ORIGIN), (&c, far)]);
        assert!(r.multiplicity_ok);
        let r = verify_packing(&[(&c, Cell::ORIGIN), (&c, Cell::ORIGIN)]);
        assert!(!r.multiplicity_ok);
        assert_eq!(r.overlap_cells.len(), 9);
    }

    #[test]
    fn hermite_form_is_upper_triangular_and_same_lattice() {
        let b = LatticeBasis::new([56, 28, 0], [-56, 28, 0], [0, 0, 126]).unwrap();
        let h = b.hermite();
        assert_eq!(h[1][0], 0);
        assert_eq!(h[2][0], 0);
        assert_eq!(h[2][1], 0);
        assert_eq!(h[0][0] * h[1][1] * h[2][2], b.determinant().abs());
        for row in b.rows() {
            assert!(b.contains(Cell::new(row[0] as i32, row[1] as i32, row[2] as i32)));
        }
        assert!(!b.contains(Cell::new(1, 0, 0)));
    }

    #[test]
    fn degenerate_basis_rejected() {
        assert!(LatticeBasis::new([1, 0, 0], [2, 0, 0], [0, 0, 1]).is_err());
    }

    #[test]
    fn periodic_partition_examples() {
        let unit = CellSet::from_vec(vec![Cell::ORIGIN]);
        let id = LatticeBasis::new([1, 0, 0], [0, 1, 0], [0, 0, 1]).unwrap();
        assert!(verify_periodic_partition(&[(&unit, Cell::ORIGIN)], &id).unwrap());

        // a 2x1x1 brick tiles with a sheared lattice
        let brick = CellSet::cuboid(Cell::ORIGIN, Cell::new(2, 1, 1));
        let sheared = LatticeBasis::new([2, 0, 0], [1, 1, 0], [0, 0, 1]).unwrap();
        assert!(verify_periodic_partition(&[(&brick, Cell::ORIGIN)], &sheared).unwrap());

        // the cross under assorted determinant-9 lattices never partitions
        let c = cross();
        for basis in [
            LatticeBasis::new([9, 0, 0], [0, 1, 0], [0, 0, 1]).unwrap(),
            LatticeBasis::new([3, 0, 0], [0, 3, 0], [0, 0, 1]).unwrap(),
            LatticeBasis::new([3, 1, 0], [0, 3, 0], [0, 0, 1]).unwrap(),
            LatticeBasis::new([2, 1, 0], [-1, 4, 0], [0, 0, 1]).unwrap(),
        ] {
            assert!(!verify_periodic_partition(&[(&c, Cell::ORIGIN)], &basis).unwrap());
        }
    }

    #[test]
    fn uncovered_residues_enumerate() {
        let unit = CellSet::from_vec(vec![Cell::ORIGIN]);
        let b = LatticeBasis::new([2, 0, 0], [0, 2, 0], [0, 0, 1]).unwrap();
        let cov = ResidueCoverage::compute(&[(&unit, Cell::ORIGIN)], &b);
        let free: Vec<Cell> = cov.uncovered().collect();
        assert_eq!(free.len(), 3);
        assert_eq!(cov.uncovered_count(), 3);
        assert!(!free.contains(&Cell::ORIGIN));
    }

    #[test]
    fn cell_list_round_trip() {
        let mut buf = Vec::new();
        write_cell_list(&cross(), &mut buf).unwrap();
        let back = parse_cell_list(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, cross());
        assert!(matches!(
            parse_cell_list("1 2"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_cell_list("0 0 0\n1 x 2"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    fn arb_set() -> impl Strategy<Value = CellSet> {
        proptest::collection::vec((-4i32..4, -4i32..4, -4i32..4), 1..30)
            .prop_map(|v| v.into_iter().map(|(x, y, z)| Cell::new(x, y, z)).collect())
    }

    fn sq_dist(a: Cell, b: Cell) -> i64 {
        let d = a - b;
        (d.x as i64).pow(2) + (d.y as i64).pow(2) + (d.z as i64).pow(2)
    }

    fn distance_multiset(s: &CellSet) -> Vec<i64> {
        let c = s.cells();
        let mut d: Vec<i64> = (0..c.len())
            .flat_map(|i| (i + 1..c.len()).map(move |j| (i, j)))
            .map(|(i, j)| sq_dist(c[i], c[j]))
            .collect();
        d.sort_unstable();
        d
    }

    proptest! {
        #[test]
        fn motions_preserve_volume_connectivity_distances(
            s in arb_set(),
            v in (-50i32..50, -50i32..50, -50i32..50),
            axis in prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)],
        ) {
            let t = s.translate(Cell::new(v.0, v.1, v.2));
            prop_assert_eq!(t.len(), s.len());
            prop_assert_eq!(t.is_connected(), s.is_connected());
            let r = s.rotate_axis_90(axis, Turn::CounterClockwise);
            prop_assert_eq!(r.len(), s.len());
            prop_assert_eq!(r.is_connected(), s.is_connected());
            prop_assert_eq!(distance_multiset(&r), distance_multiset(&s));
            let h = s.rotate_z_180();
            prop_assert_eq!(h.rotate_z_180(), s.canonical());
        }

        #[test]
        fn partition_implies_finite_packing(
            dx in 1i64..4, dy in 1i64..4, shear in 0i64..3,
        ) {
            let brick = CellSet::cuboid(Cell::ORIGIN, Cell::new(dx as i32, dy as i32, 1));
            let basis = LatticeBasis::new([dx, 0, 0], [shear, dy, 0], [0, 0, 1]).unwrap();
            prop_assert!(verify_periodic_partition(&[(&brick, Cell::ORIGIN)], &basis).unwrap());
            let copies: Vec<(&CellSet, Cell)> = (-2..=2)
                .flat_map(|a| (-2..=2).map(move |b| (a, b)))
                .map(|(a, b)| (&brick, Cell::new((a * dx + b * shear) as i32, (b * dy) as i32, 0)))
                .collect();
            prop_assert!(verify_packing(&copies).multiplicity_ok);
        }

        #[test]
        fn residue_reduce_is_canonical(
            x in -500i32..500, y in -500i32..500, z in -500i32..500,
            a in -3i32..3, b in -3i32..3, c in -3i32..3,
        ) {
            let basis = LatticeBasis::new([56, 28, 0], [-56, 28, 0], [0, 0, 126]).unwrap();
            let map = ResidueMap::new(&basis);
            let p = Cell::new(x, y, z);
            let shift = Cell::new(56 * a - 56 * b, 28 * a + 28 * b, 126 * c);
            prop_assert_eq!(map.reduce(p), map.reduce(p + shift));
            let r = map.reduce(p);
            let d = map.dims();
            prop_assert!(r.x >= 0 && (r.x as i64) < d[0]);
            prop_assert!(r.y >= 0 && (r.y as i64) < d[1]);
            prop_assert!(r.z >= 0 && (r.z as i64) < d[2]);
            prop_assert_eq!(map.representative(map.index(p)), r);
        }
    }
}
