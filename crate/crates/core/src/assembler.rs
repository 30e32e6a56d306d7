//! Turns a periodic Wang tiling into a periodic tiling of space by the
//! filler, encoder and linker.
//!
//! Linkers sit on the lattice spanned by `E = (28t, 28, 0)`,
//! `W = (-28t, 28, 0)` and `(0, 0, 7L)`. Wang cell `(i, j)` owns the linker
//! at `i E + j W` and the encoder column just north of it, at
//! `i E + j W + (28t, 14, 0)` shifted vertically so that one of its tile's
//! three encoding levels meets the linker's top (matching) level. The
//! encoder of `(i+1, j)` is its north-east neighbor and stands for the Wang
//! east neighbor; `(i, j+1)` is north-west and stands for the Wang north
//! neighbor.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::blocks::{
    block_cells, cross_cells, feature_cells, BlockKind, Facing, Feature, OffsetWindow,
};
use crate::blocks::{mating_offsets, CLASS1_LEN, CUBE};
use crate::error::{Error, Result};
use crate::reduction::{
    build_encoder_with_flip, decode_encoding_layer, level_slice, linker_specials,
};
use crate::reduction::{LayerDecode, LevelPlan, Reduction, LEVEL_HEIGHT};
use crate::voxel::{Cell, CellSet, LatticeBasis, ResidueCoverage};
use crate::wang::{TorusTiling, WangTile, WangTileSet};

/// Pipeline stage that reported a failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Offsets,
    Frame,
    Overlap,
    MatchingOverlap,
    Gaps,
    Partition,
    Decode,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Offsets => "offset assignment",
            Stage::Frame => "linker frame",
            Stage::Overlap => "overlap",
            Stage::MatchingOverlap => "matching-layer overlap",
            Stage::Gaps => "gap filling",
            Stage::Partition => "partition",
            Stage::Decode => "decode",
        })
    }
}

fn fail(stage: Stage, detail: impl Into<String>) -> Error {
    Error::Assembly {
        stage,
        detail: detail.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    Filler,
    Encoder,
    Linker,
}

impl PieceKind {
    pub fn name(self) -> &'static str {
        match self {
            PieceKind::Filler => "filler",
            PieceKind::Encoder => "encoder",
            PieceKind::Linker => "linker",
        }
    }
}

impl FromStr for PieceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "filler" => Ok(PieceKind::Filler),
            "encoder" => Ok(PieceKind::Encoder),
            "linker" => Ok(PieceKind::Linker),
            _ => Err(Error::invalid(format!("unknown piece kind `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Placement {
    pub kind: PieceKind,
    pub offset: Cell,
}

/// Encoding level of column `(i, j)` that meets the matching level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ColumnOffset {
    pub i: usize,
    pub j: usize,
    pub tile: usize,
    pub level: u64,
}

/// One aligned level per torus cell, stored row-major by `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OffsetAssignment {
    width: usize,
    height: usize,
    columns: Vec<ColumnOffset>,
}

impl OffsetAssignment {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn columns(&self) -> &[ColumnOffset] {
        &self.columns
    }

    /// Aligned level of `(i, j)`, with wrap-around.
    pub fn level(&self, i: i64, j: i64) -> u64 {
        let i = i.rem_euclid(self.width as i64) as usize;
        let j = j.rem_euclid(self.height as i64) as usize;
        self.columns[j * self.width + i].level
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assembly {
    pub placements: Vec<Placement>,
    pub basis: LatticeBasis,
    pub offsets: Vec<ColumnOffset>,
}

impl Assembly {
    /// Placements resolved against the three polycubes of `red`.
    pub fn pieces<'a>(&self, red: &'a Reduction) -> Vec<(&'a CellSet, Cell)> {
        self.placements
            .iter()
            .map(|p| (piece(red, p.kind), p.offset))
            .collect()
    }

    pub fn count(&self, kind: PieceKind) -> usize {
        self.placements.iter().filter(|p| p.kind == kind).count()
    }

    pub fn to_manifest(&self) -> String {
        let mut out = String::from("# polytile assembly\n");
        for row in self.basis.rows() {
            out.push_str(&format!("basis {} {} {}\n", row[0], row[1], row[2]));
        }
        for c in &self.offsets {
            out.push_str(&format!("offset {} {} {} {}\n", c.i, c.j, c.tile, c.level));
        }
        for p in &self.placements {
            let o = p.offset;
            out.push_str(&format!(
                "placement {} {} {} {}\n",
                p.kind.name(),
                o.x,
                o.y,
                o.z
            ));
        }
        out
    }

    pub fn from_manifest(text: &str) -> Result<Self> {
        let mut basis = Vec::new();
        let mut offsets = Vec::new();
        let mut placements = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let n = n + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let tag = words.next().unwrap_or_default();
            let rest: Vec<&str> = words.collect();
            let ints = |k: usize| -> Result<Vec<i64>> {
                if rest.len() != k {
                    return Err(Error::parse(n, format!("`{tag}` takes {k} values")));
                }
                rest.iter()
                    .map(|w| {
                        w.parse::<i64>()
                            .map_err(|_| Error::parse(n, format!("`{w}` is not an integer")))
                    })
                    .collect()
            };
            match tag {
                "basis" => {
                    let v = ints(3)?;
                    basis.push([v[0], v[1], v[2]]);
                }
                "offset" => {
                    let v = ints(4)?;
                    if v.iter().any(|&x| x < 0) {
                        return Err(Error::parse(n, "offset fields must be non-negative"));
                    }
                    offsets.push(ColumnOffset {
                        i: v[0] as usize,
                        j: v[1] as usize,
                        tile: v[2] as usize,
                        level: v[3] as u64,
                    });
                }
                "placement" => {
                    let Some((kind, coords)) = rest.split_first() else {
                        return Err(Error::parse(
                            n,
                            "placement needs a kind and three coordinates",
                        ));
                    };
                    let kind: PieceKind = kind
                        .parse()
                        .map_err(|e: Error| Error::parse(n, e.to_string()))?;
                    if coords.len() != 3 {
                        return Err(Error::parse(n, "placement needs three coordinates"));
                    }
                    let mut xyz = [0i32; 3];
                    for (slot, w) in xyz.iter_mut().zip(coords) {
                        *slot = w
                            .parse()
                            .map_err(|_| Error::parse(n, format!("`{w}` is not an integer")))?;
                    }
                    placements.push(Placement {
                        kind,
                        offset: Cell::new(xyz[0], xyz[1], xyz[2]),
                    });
                }
                _ => return Err(Error::parse(n, format!("unknown record `{tag}`"))),
            }
        }
        if basis.len() != 3 {
            return Err(Error::parse(0, "manifest needs exactly three basis lines"));
        }
        let basis = LatticeBasis::new(basis[0], basis[1], basis[2])?;
        Ok(Self {
            placements,
            basis,
            offsets,
        })
    }
}

fn piece(red: &Reduction, kind: PieceKind) -> &CellSet {
    match kind {
        PieceKind::Filler => red.filler.cells(),
        PieceKind::Encoder => red.encoder.cells(),
        PieceKind::Linker => red.linker.cells(),
    }
}

/// Lattice step to the north-east neighbor (Wang east).
pub fn east_step(t: u32) -> Cell {
    Cell::new(CLASS1_LEN * t as i32, 4 * CUBE, 0)
}

/// Lattice step to the north-west neighbor (Wang north).
pub fn north_step(t: u32) -> Cell {
    Cell::new(-CLASS1_LEN * (t as i32), 4 * CUBE, 0)
}

fn vertical_step(plan: &LevelPlan) -> Cell {
    Cell::new(0, 0, LEVEL_HEIGHT * plan.total_levels() as i32)
}

fn as_row(c: Cell) -> [i64; 3] {
    [c.x as i64, c.y as i64, c.z as i64]
}

/// Basis of the linker lattice.
pub fn linker_lattice(t: u32, plan: &LevelPlan) -> LatticeBasis {
    LatticeBasis::new(
        as_row(east_step(t)),
        as_row(north_step(t)),
        as_row(vertical_step(plan)),
    )
    .expect("linker lattice is full rank")
}

/// Basis of the period lattice of a `w x h` torus assembly.
pub fn torus_lattice(t: u32, plan: &LevelPlan, w: usize, h: usize) -> LatticeBasis {
    linker_lattice(t, plan).scaled([w as i64, h as i64, 1])
}

fn linker_at(t: u32, i: i64, j: i64) -> Cell {
    let (e, n) = (east_step(t), north_step(t));
    Cell::new(
        e.x * i as i32 + n.x * j as i32,
        e.y * i as i32 + n.y * j as i32,
        0,
    )
}

/// Where the encoder of column `(i, j)` goes when `level` is aligned.
pub fn encoder_at(t: u32, plan: &LevelPlan, i: i64, j: i64, level: u64) -> Cell {
    let dz = LEVEL_HEIGHT * (plan.total_levels() - level) as i32;
    linker_at(t, i, j) + Cell::new(CLASS1_LEN * t as i32, 2 * CUBE, dz)
}

/// Inverse of the horizontal part of [`encoder_at`].
fn column_of(t: u32, offset: Cell) -> Option<(i64, i64)> {
    let x = offset.x - CLASS1_LEN * t as i32;
    let y = offset.y - 2 * CUBE;
    let (ex, ey) = (CLASS1_LEN * t as i32, 4 * CUBE);
    if x % ex != 0 || y % ey != 0 {
        return None;
    }
    let (a, b) = (x / ex, y / ey);
    if (a + b) % 2 != 0 {
        return None;
    }
    Some((((a + b) / 2) as i64, ((b - a) / 2) as i64))
}

/// Cube pairs that the axis constructs join: (plus kind, minus kind, lattice
/// vector from a linker to the neighbor holding the dent).
fn axis_pairs(t: u32, plan: &LevelPlan) -> [(BlockKind, BlockKind, Cell); 3] {
    let e = east_step(t);
    let n = north_step(t);
    [
        (BlockKind::XPlus, BlockKind::XMinus, e - n),
        (BlockKind::YPlus, BlockKind::YMinus, e),
        (BlockKind::ZPlus, BlockKind::ZMinus, vertical_step(plan)),
    ]
}

/// Checks that every plus construct of a linker flush-mates the minus
/// construct of the neighbor it faces.
pub fn check_frame_mating(t: u32, plan: &LevelPlan) -> Result<()> {
    let specials = linker_specials(t, plan.total_levels());
    let at = |k: BlockKind| {
        specials
            .iter()
            .find(|(kind, _)| *kind == k)
            .map(|&(_, c)| c)
            .expect("special present")
    };
    let lattice = linker_lattice(t, plan);
    for (plus, minus, v) in axis_pairs(t, plan) {
        if !lattice.contains(v) {
            return Err(fail(
                Stage::Frame,
                format!("{plus}/{minus} neighbor {v} is off the lattice"),
            ));
        }
        let a = block_cells(minus, None)?;
        let cavity = feature_cells(minus, None, Feature::Dent)?;
        let b = block_cells(plus, None)?;
        let rel = at(plus) - (at(minus) + v);
        let found = mating_offsets(
            &a,
            &cavity,
            &b,
            OffsetWindow::around(rel, Cell::new(2, 2, 2)),
        );
        if found != [rel] {
            return Err(fail(
                Stage::Frame,
                format!("{plus} does not flush-mate {minus} at {rel}: mates at {found:?}"),
            ));
        }
    }
    Ok(())
}

/// Linkers alone over `repeats` copies of the linker lattice's fundamental
/// domain, after checking that the axis constructs mate and that the frame
/// packs without overlap.
pub fn linker_frame(red: &Reduction, repeats: [usize; 3]) -> Result<Assembly> {
    if repeats.contains(&0) {
        return Err(Error::invalid("repeats must be positive"));
    }
    let t = red.t;
    let plan = &red.plan;
    check_frame_mating(t, plan)?;
    let basis = linker_lattice(t, plan).scaled(repeats.map(|r| r as i64));
    let up = vertical_step(plan);
    let mut placements = Vec::new();
    for c in 0..repeats[2] {
        for j in 0..repeats[1] {
            for i in 0..repeats[0] {
                let offset = linker_at(t, i as i64, j as i64) + Cell::new(0, 0, up.z * c as i32);
                placements.push(Placement {
                    kind: PieceKind::Linker,
                    offset,
                });
            }
        }
    }
    let frame = Assembly {
        placements,
        basis,
        offsets: Vec::new(),
    };
    let cov = ResidueCoverage::compute(&frame.pieces(red), &basis);
    if cov.overlap_count > 0 {
        return Err(fail(
            Stage::Frame,
            format!("linkers overlap at {:?}", cov.overlaps.first()),
        ));
    }
    Ok(frame)
}

/// Whether full alignment of two neighbors would put different colors
/// against each other. `east` selects the north-east relation, otherwise
/// north-west.
fn full_alignment_harmful(s: &WangTileSet, east: bool) -> bool {
    s.tiles().iter().any(|t| {
        if east {
            t.east != t.west
        } else {
            t.north != t.south
        }
    })
}

/// Picks one encoding level per torus cell so that no two diagonal
/// neighbors are fully aligned, unless full alignment is harmless for the
/// whole tile set. Cells are visited from the middle row outwards;
/// backtracking closes the torus cycles.
pub fn choose_offsets(torus: &TorusTiling, s: &WangTileSet) -> Result<OffsetAssignment> {
    let (w, h) = (torus.width(), torus.height());
    let plan = LevelPlan::new(s.n())?;
    if torus.cells().iter().any(|&c| c >= s.n()) {
        return Err(Error::invalid("torus uses a tile outside the set"));
    }
    let harm = [
        full_alignment_harmful(s, true),
        full_alignment_harmful(s, false),
    ];
    if (w == 1 && harm[0]) || (h == 1 && harm[1]) {
        return Err(fail(
            Stage::Offsets,
            "a column is its own diagonal neighbor and full alignment would conflict",
        ));
    }
    let mid = (w + h - 2) / 2;
    let mut order: Vec<(usize, usize)> = (0..h).flat_map(|j| (0..w).map(move |i| (i, j))).collect();
    order.sort_by_key(|&(i, j)| ((i + j).abs_diff(mid), i + j, i));

    let idx =
        |i: i64, j: i64| (j.rem_euclid(h as i64) as usize) * w + i.rem_euclid(w as i64) as usize;
    let mut level: Vec<Option<u64>> = vec![None; w * h];
    let mut choice = vec![0usize; order.len()];
    let mut k = 0usize;
    while k < order.len() {
        let (i, j) = (order[k].0 as i64, order[k].1 as i64);
        let here = idx(i, j);
        let options = plan.levels_of(torus.cells()[here]);
        let mut placed = false;
        while choice[k] < 3 {
            let cand = options[choice[k]];
            choice[k] += 1;
            let clash =
                [(1, 0, 0), (-1, 0, 0), (0, 1, 1), (0, -1, 1)]
                    .iter()
                    .any(|&(di, dj, dir)| {
                        let other = idx(i + di, j + dj);
                        other != here && harm[dir] && level[other] == Some(cand)
                    });
            if !clash {
                level[here] = Some(cand);
                placed = true;
                break;
            }
        }
        if placed {
            k += 1;
        } else {
            level[here] = None;
            choice[k] = 0;
            if k == 0 {
                return Err(fail(Stage::Offsets, "no assignment avoids full alignment"));
            }
            k -= 1;
            let (pi, pj) = order[k];
            level[pj * w + pi] = None;
        }
    }
    let columns = (0..h)
        .flat_map(|j| (0..w).map(move |i| (i, j)))
        .map(|(i, j)| ColumnOffset {
            i,
            j,
            tile: torus.cells()[j * w + i],
            level: level[j * w + i].expect("every cell assigned"),
        })
        .collect();
    Ok(OffsetAssignment {
        width: w,
        height: h,
        columns,
    })
}

/// Linker and encoder placements for every torus cell.
pub fn place_encoders(red: &Reduction, offsets: &OffsetAssignment) -> Assembly {
    let t = red.t;
    let basis = torus_lattice(t, &red.plan, offsets.width(), offsets.height());
    let mut placements = Vec::with_capacity(2 * offsets.columns().len());
    for c in offsets.columns() {
        let (i, j) = (c.i as i64, c.j as i64);
        placements.push(Placement {
            kind: PieceKind::Linker,
            offset: linker_at(t, i, j),
        });
        placements.push(Placement {
            kind: PieceKind::Encoder,
            offset: encoder_at(t, &red.plan, i, j, c.level),
        });
    }
    Assembly {
        placements,
        basis,
        offsets: offsets.columns().to_vec(),
    }
}

/// 1-based linker level of an absolute `z`.
fn level_of_z(plan: &LevelPlan, z: i32) -> u64 {
    let period = LEVEL_HEIGHT as i64 * plan.total_levels() as i64;
    (z as i64).rem_euclid(period) as u64 / LEVEL_HEIGHT as u64 + 1
}

fn overlap_error(plan: &LevelPlan, cov: &ResidueCoverage) -> Error {
    let matching = cov
        .overlaps
        .iter()
        .find(|c| level_of_z(plan, c.z) == plan.matching_level());
    let (stage, at) = match matching {
        Some(&c) => (Stage::MatchingOverlap, c),
        None => (Stage::Overlap, cov.overlaps[0]),
    };
    fail(
        stage,
        format!(
            "{} cells covered twice, first at {at} (level {})",
            cov.overlap_count,
            level_of_z(plan, at.z)
        ),
    )
}

/// Grows the uncovered component containing `start`, giving up once it is
/// larger than a cross.
fn gap_component(cov: &ResidueCoverage, start: Cell, limit: usize) -> Vec<Cell> {
    let mut seen = HashSet::from([cov.residues().index(start)]);
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(c) = queue.pop_front() {
        out.push(c);
        if out.len() > limit {
            break;
        }
        for nb in c.neighbors() {
            if !cov.is_covered(nb) && seen.insert(cov.residues().index(nb)) {
                queue.push_back(nb);
            }
        }
    }
    out
}

fn fill_coverage(
    cov: &mut ResidueCoverage,
    placements: &mut Vec<Placement>,
    filler: &CellSet,
) -> Result<()> {
    let cross = cross_cells();
    let holes: Vec<Cell> = cov.uncovered().collect();
    for start in holes {
        if cov.is_covered(start) {
            continue;
        }
        let comp = CellSet::from_vec(gap_component(cov, start, cross.len()));
        let (lo, _) = comp.bbox().expect("component holds its start");
        if comp.translate(-lo) != cross {
            let dump: Vec<String> = comp.iter().take(16).map(|c| c.to_string()).collect();
            return Err(fail(
                Stage::Gaps,
                format!(
                    "residual component of {}+ cells is not a cross: {}",
                    comp.len(),
                    dump.join(" ")
                ),
            ));
        }
        cov.add(filler, lo);
        placements.push(Placement {
            kind: PieceKind::Filler,
            offset: lo,
        });
    }
    Ok(())
}

/// Fills every residual hole of a packed partial assembly with a filler.
pub fn fill_gaps(partial: &Assembly, red: &Reduction) -> Result<Assembly> {
    let mut cov = ResidueCoverage::compute(&partial.pieces(red), &partial.basis);
    if cov.overlap_count > 0 {
        return Err(overlap_error(&red.plan, &cov));
    }
    let mut out = partial.clone();
    fill_coverage(&mut cov, &mut out.placements, red.filler.cells())?;
    Ok(out)
}

/// A single flipped code bit in one encoder, for fault injection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitFlip {
    pub i: usize,
    pub j: usize,
    pub row: Facing,
    pub col: usize,
}

/// The torus repeated twice along any direction of length 1 in which a
/// column would be its own neighbor under a harmful full alignment. The
/// doubled period still describes the same plane tiling.
pub fn closable_period(s: &WangTileSet, torus: &TorusTiling) -> Result<TorusTiling> {
    let w = if torus.width() == 1 && full_alignment_harmful(s, true) {
        2
    } else {
        1
    } * torus.width();
    let h = if torus.height() == 1 && full_alignment_harmful(s, false) {
        2
    } else {
        1
    } * torus.height();
    if (w, h) == (torus.width(), torus.height()) {
        return Ok(torus.clone());
    }
    let cells = (0..h)
        .flat_map(|j| (0..w).map(move |i| (i, j)))
        .map(|(i, j)| torus.at(i as i64, j as i64));
    TorusTiling::new(w, h, cells.collect())
}

fn run(
    s: &WangTileSet,
    red: &Reduction,
    torus: &TorusTiling,
    flip: Option<BitFlip>,
) -> Result<Assembly> {
    if red.plan.n_tiles() != s.n() || red.t != s.t() {
        return Err(Error::invalid(
            "reduction was built for a different tile set",
        ));
    }
    let offsets = choose_offsets(&closable_period(s, torus)?, s)?;
    check_frame_mating(red.t, &red.plan)?;
    let partial = place_encoders(red, &offsets);
    let faulty = match flip {
        Some(f) => {
            let level = offsets.level(f.i as i64, f.j as i64);
            Some(build_encoder_with_flip(s, level, f.row, f.col)?)
        }
        None => None,
    };
    let mut cov = ResidueCoverage::new(&partial.basis);
    for p in &partial.placements {
        let set = match (&faulty, flip) {
            (Some(bad), Some(f))
                if p.kind == PieceKind::Encoder
                    && column_of(red.t, p.offset) == Some((f.i as i64, f.j as i64)) =>
            {
                bad.cells()
            }
            _ => piece(red, p.kind),
        };
        cov.add(set, p.offset);
    }
    if cov.overlap_count > 0 {
        return Err(overlap_error(&red.plan, &cov));
    }
    let mut out = partial;
    fill_coverage(&mut cov, &mut out.placements, red.filler.cells())?;
    let det = out.basis.determinant().unsigned_abs();
    if !cov.is_exact_partition() || cov.placed_volume != det {
        return Err(fail(
            Stage::Partition,
            format!(
                "placed volume {} over a domain of {det} with {} holes",
                cov.placed_volume,
                cov.uncovered_count()
            ),
        ));
    }
    Ok(out)
}

/// Builds the assembly without checking the torus first, so that a bad
/// tiling surfaces as the stage where the geometry breaks. The period may be
/// doubled, see [`closable_period`].
pub fn assemble(s: &WangTileSet, red: &Reduction, torus: &TorusTiling) -> Result<Assembly> {
    run(s, red, torus, None)
}

/// Like [`assemble`] with one encoder's aligned code bit flipped.
pub fn assemble_with_flip(
    s: &WangTileSet,
    red: &Reduction,
    torus: &TorusTiling,
    flip: BitFlip,
) -> Result<Assembly> {
    run(s, red, torus, Some(flip))
}

/// Full pipeline for a valid torus: assembly, exact-partition check and
/// decoding of every matching layer back to the torus.
pub fn assemble_and_verify(
    s: &WangTileSet,
    red: &Reduction,
    torus: &TorusTiling,
) -> Result<Assembly> {
    if !crate::wang::valid_torus(s, torus)? {
        return Err(Error::invalid(
            "the torus tiling is not valid for this tile set",
        ));
    }
    let a = assemble(s, red, torus)?;
    let decoded = decode_matching_layers(&a, red)?;
    for (i, j, tile) in decoded {
        let want = s.tile(torus.at(i as i64, j as i64));
        if tile != want {
            return Err(fail(
                Stage::Decode,
                format!("column ({i}, {j}) reads {tile}, expected {want}"),
            ));
        }
    }
    check_alignment_exclusivity(&a, &red.plan)?;
    Ok(a)
}

/// Reads the tile shown at the matching level by every encoder placement,
/// locating its column from the placement offset alone.
pub fn decode_matching_layers(
    a: &Assembly,
    red: &Reduction,
) -> Result<Vec<(usize, usize, WangTile)>> {
    let plan = &red.plan;
    let (w, h) = torus_size(a, red.t)?;
    let mut out = Vec::new();
    for p in a.placements.iter().filter(|p| p.kind == PieceKind::Encoder) {
        let (i, j) = column_of(red.t, p.offset).ok_or_else(|| {
            fail(
                Stage::Decode,
                format!("encoder at {} is off the column grid", p.offset),
            )
        })?;
        // encoder level that sits at the matching level
        let shift = (p.offset.z / LEVEL_HEIGHT) as i64;
        let level = (plan.total_levels() as i64 - shift) as u64;
        if !(1..=plan.total_levels()).contains(&level) {
            return Err(fail(
                Stage::Decode,
                format!("encoder at {} is not level-aligned", p.offset),
            ));
        }
        match decode_encoding_layer(&level_slice(red.encoder.cells(), level), red.t)? {
            LayerDecode::Tile(tile) => out.push((
                i.rem_euclid(w as i64) as usize,
                j.rem_euclid(h as i64) as usize,
                tile,
            )),
            LayerDecode::NoTile => {
                return Err(fail(
                    Stage::Decode,
                    format!("column ({i}, {j}) shows no tile at the matching level"),
                ))
            }
        }
    }
    out.sort_by_key(|&(i, j, _)| (j, i));
    Ok(out)
}

fn torus_size(a: &Assembly, t: u32) -> Result<(usize, usize)> {
    let rows = a.basis.rows();
    let e = east_step(t);
    let n = north_step(t);
    let w = rows[0][1] / e.y as i64;
    let h = rows[1][1] / n.y as i64;
    if w <= 0
        || h <= 0
        || rows[0] != [e.x as i64 * w, e.y as i64 * w, 0]
        || rows[1] != [n.x as i64 * h, n.y as i64 * h, 0]
    {
        return Err(Error::invalid("basis is not a torus lattice"));
    }
    Ok((w as usize, h as usize))
}

/// Co-level pairs of encoding levels between two columns aligned at `la`
/// and `lb`.
pub fn co_level_pairs(plan: &LevelPlan, la: u64, lb: u64) -> Vec<(u64, u64)> {
    let total = plan.total_levels() as i64;
    let shift = (la as i64 - lb as i64).rem_euclid(total);
    let mut out = Vec::new();
    for &a in plan.encoding_levels() {
        for &b in plan.encoding_levels() {
            if (a as i64 - b as i64).rem_euclid(total) == shift {
                out.push((a, b));
            }
        }
    }
    out
}

/// Diagonal neighbors share exactly one co-level pair of encoding levels,
/// or all of them when fully aligned.
pub fn check_alignment_exclusivity(a: &Assembly, plan: &LevelPlan) -> Result<()> {
    let (w, h) = match (
        a.offsets.iter().map(|c| c.i).max(),
        a.offsets.iter().map(|c| c.j).max(),
    ) {
        (Some(i), Some(j)) => (i + 1, j + 1),
        _ => return Ok(()),
    };
    let level = |i: usize, j: usize| a.offsets[(j % h) * w + (i % w)].level;
    for c in &a.offsets {
        for (ni, nj) in [(c.i + 1, c.j), (c.i, c.j + 1)] {
            let other = level(ni, nj);
            let pairs = co_level_pairs(plan, c.level, other);
            let ok = if c.level == other {
                pairs.len() == plan.encoding_levels().len()
            } else {
                pairs == [(c.level, other)]
            };
            if !ok {
                return Err(fail(
                    Stage::Partition,
                    format!(
                        "columns ({}, {}) and ({ni}, {nj}) share {} encoding levels",
                        c.i,
                        c.j,
                        pairs.len()
                    ),
                ));
            }
        }
    }
    Ok(())
}
