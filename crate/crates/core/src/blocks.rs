//! The eleven building blocks and the cross filler.
//!
//! Class-1 blocks (`N`, `F`, `E`, `M`, `M+`) are 28 x 7 x 7 slabs whose
//! middle layer carries dents and bumps on one long side. Axis blocks
//! (`X±`, `Y±`, `Z±`) are 7-cubes with a single asymmetric bump or dent.
//! Feature coordinates come from the shipped geometry table; the mating
//! oracle [`mating_offsets`] is what certifies that table.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::voxel::{Cell, CellSet, Grid, Polycube};

/// Edge length of the coarse 7-cube grid.
pub const CUBE: i32 = 7;
/// Length of a class-1 block along x (four 7-cubes).
pub const CLASS1_LEN: i32 = 4 * CUBE;
/// The layer (within a block or a level) that carries every feature.
pub const FEATURE_Z: i32 = 3;

const BUILTIN_TABLE: &str = include_str!("../data/geometry.table");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    N,
    F,
    E,
    M,
    MPlus,
    XPlus,
    XMinus,
    YPlus,
    YMinus,
    ZPlus,
    ZMinus,
    Cross,
}

impl BlockKind {
    pub const ALL: [BlockKind; 12] = [
        BlockKind::N,
        BlockKind::F,
        BlockKind::E,
        BlockKind::M,
        BlockKind::MPlus,
        BlockKind::XPlus,
        BlockKind::XMinus,
        BlockKind::YPlus,
        BlockKind::YMinus,
        BlockKind::ZPlus,
        BlockKind::ZMinus,
        BlockKind::Cross,
    ];

    pub fn is_class1(self) -> bool {
        matches!(self, Self::N | Self::F | Self::E | Self::M | Self::MPlus)
    }

    pub fn is_axis(self) -> bool {
        matches!(
            self,
            Self::XPlus | Self::XMinus | Self::YPlus | Self::YMinus | Self::ZPlus | Self::ZMinus
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::N => "N",
            Self::F => "F",
            Self::E => "E",
            Self::M => "M",
            Self::MPlus => "MPLUS",
            Self::XPlus => "XPLUS",
            Self::XMinus => "XMINUS",
            Self::YPlus => "YPLUS",
            Self::YMinus => "YMINUS",
            Self::ZPlus => "ZPLUS",
            Self::ZMinus => "ZMINUS",
            Self::Cross => "CROSS",
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BlockKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BlockKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown block kind `{s}`")))
    }
}

/// Side of a class-1 block that carries its features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Facing {
    North,
    South,
}

/// Bump footprints used across the blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BumpShape {
    CrossBump,
    LBump,
    LCrossCompound,
    AxisBump,
}

impl BumpShape {
    /// Footprint in the plane `z = 0`, normalized to the origin.
    pub fn footprint(self) -> CellSet {
        let t = GeometryTable::builtin();
        let flat = |s: &CellSet| s.map(|c| Cell::new(c.x, c.y, 0)).canonical();
        match self {
            BumpShape::CrossBump => cross_cells(),
            BumpShape::LBump => flat(t.features(BlockKind::E, Feature::Bump)),
            BumpShape::LCrossCompound => flat(t.features(BlockKind::N, Feature::Bump)),
            BumpShape::AxisBump => flat(t.features(BlockKind::XPlus, Feature::Bump)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Bump,
    Dent,
}

impl Feature {
    fn name(self) -> &'static str {
        match self {
            Feature::Bump => "bump",
            Feature::Dent => "dent",
        }
    }
}

/// Feature cells of the table-driven kinds, in canonical orientation
/// (class-1 blocks facing north, axis blocks as `X±`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometryTable {
    bodies: BTreeMap<BlockKind, Cell>,
    features: BTreeMap<(BlockKind, Feature), CellSet>,
}

const TABLE_KINDS: [BlockKind; 7] = [
    BlockKind::N,
    BlockKind::F,
    BlockKind::E,
    BlockKind::M,
    BlockKind::MPlus,
    BlockKind::XPlus,
    BlockKind::XMinus,
];

impl GeometryTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut bodies = BTreeMap::new();
        let mut raw: BTreeMap<(BlockKind, Feature), Vec<Cell>> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let ints = |s: &[&str]| -> Result<Vec<i32>> {
                s.iter()
                    .map(|p| {
                        p.parse::<i32>()
                            .map_err(|_| Error::parse(n + 1, format!("`{p}` is not an integer")))
                    })
                    .collect()
            };
            match parts.as_slice() {
                ["body", kind, rest @ ..] if rest.len() == 3 => {
                    let kind: BlockKind = kind
                        .parse()
                        .map_err(|e: Error| Error::parse(n + 1, e.to_string()))?;
                    let v = ints(rest)?;
                    bodies.insert(kind, Cell::new(v[0], v[1], v[2]));
                }
                [kind, feat, rest @ ..] if rest.len() == 3 => {
                    let kind: BlockKind = kind
                        .parse()
                        .map_err(|e: Error| Error::parse(n + 1, e.to_string()))?;
                    let feat = match *feat {
                        "bump" => Feature::Bump,
                        "dent" => Feature::Dent,
                        other => {
                            return Err(Error::parse(n + 1, format!("unknown feature `{other}`")))
                        }
                    };
                    let v = ints(rest)?;
                    raw.entry((kind, feat))
                        .or_default()
                        .push(Cell::new(v[0], v[1], v[2]));
                }
                _ => return Err(Error::parse(n + 1, "expected `<kind> <bump|dent> x y z`")),
            }
        }
        for kind in TABLE_KINDS {
            if !bodies.contains_key(&kind) {
                return Err(Error::Construction(format!(
                    "geometry table lacks a body for {kind}"
                )));
            }
        }
        let features = raw
            .into_iter()
            .map(|(k, v)| (k, CellSet::from_vec(v)))
            .collect();
        let table = Self { bodies, features };
        table.check()?;
        Ok(table)
    }

    /// The table shipped with the crate.
    pub fn builtin() -> &'static GeometryTable {
        static TABLE: OnceLock<GeometryTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            GeometryTable::parse(BUILTIN_TABLE).expect("shipped geometry table is valid")
        })
    }

    pub fn builtin_text() -> &'static str {
        BUILTIN_TABLE
    }

    fn check(&self) -> Result<()> {
        for (&(kind, feat), cells) in &self.features {
            let body = self.body(kind);
            let inside = |c: &Cell| {
                (0..body.x).contains(&c.x)
                    && (0..body.y).contains(&c.y)
                    && (0..body.z).contains(&c.z)
            };
            let ok = match feat {
                Feature::Dent => cells.iter().all(inside),
                Feature::Bump => !cells.iter().any(inside),
            };
            if !ok {
                return Err(Error::Construction(format!(
                    "{kind} {} cells are on the wrong side of the body boundary",
                    feat.name()
                )));
            }
        }
        Ok(())
    }

    pub fn body(&self, kind: BlockKind) -> Cell {
        self.bodies[&kind]
    }

    pub fn features(&self, kind: BlockKind, feat: Feature) -> &CellSet {
        static EMPTY: CellSet = CellSet::EMPTY;
        self.features.get(&(kind, feat)).unwrap_or(&EMPTY)
    }

    /// Renders the feature section in the table's line format.
    pub fn render_features(&self) -> String {
        let mut out = String::new();
        for kind in TABLE_KINDS {
            for feat in [Feature::Dent, Feature::Bump] {
                let mut cells: Vec<Cell> = self.features(kind, feat).cells().to_vec();
                cells.sort_by_key(|c| (c.z, c.y, c.x));
                for c in cells {
                    out.push_str(&format!(
                        "{} {} {} {} {}\n",
                        kind.name(),
                        feat.name(),
                        c.x,
                        c.y,
                        c.z
                    ));
                }
            }
        }
        out
    }
}

/// The 9-cell cross: a centre cell with four arms of length two, lying in a
/// single layer with its bounding box at the origin.
pub fn cross_cells() -> CellSet {
    let mut v = Vec::with_capacity(9);
    for i in 0..5 {
        v.push(Cell::new(i, 2, 0));
        v.push(Cell::new(2, i, 0));
    }
    CellSet::from_vec(v)
}

pub fn build_cross() -> Polycube {
    Polycube::new(cross_cells()).expect("cross is connected")
}

fn half_turn_in_body(c: Cell) -> Cell {
    Cell::new(CLASS1_LEN - 1 - c.x, CUBE - 1 - c.y, c.z)
}

fn x_to_y(c: Cell) -> Cell {
    Cell::new(CUBE - 1 - c.y, c.x, c.z)
}

fn x_to_z(c: Cell) -> Cell {
    Cell::new(CUBE - 1 - c.z, c.y, c.x)
}

/// Feature cells of a block in the block's own frame. The body occupies
/// `[0, len) x [0, 7) x [0, 7)` for every orientation.
pub fn feature_cells(kind: BlockKind, facing: Option<Facing>, feat: Feature) -> Result<CellSet> {
    check_facing(kind, facing)?;
    let t = GeometryTable::builtin();
    Ok(match kind {
        BlockKind::Cross => CellSet::new(),
        k if k.is_class1() => {
            let cells = t.features(k, feat);
            match facing {
                Some(Facing::South) => cells.map(half_turn_in_body),
                _ => cells.clone(),
            }
        }
        BlockKind::XPlus | BlockKind::XMinus => t.features(kind, feat).clone(),
        BlockKind::YPlus => t.features(BlockKind::XPlus, feat).map(x_to_y),
        BlockKind::YMinus => t.features(BlockKind::XMinus, feat).map(x_to_y),
        BlockKind::ZPlus => t.features(BlockKind::XPlus, feat).map(x_to_z),
        BlockKind::ZMinus => t.features(BlockKind::XMinus, feat).map(x_to_z),
        _ => unreachable!(),
    })
}

fn check_facing(kind: BlockKind, facing: Option<Facing>) -> Result<()> {
    match (kind.is_class1(), facing) {
        (true, Some(_)) | (false, None) => Ok(()),
        (true, None) => Err(Error::invalid(format!("{kind} needs a facing"))),
        (false, Some(_)) => Err(Error::invalid(format!("{kind} has no facing"))),
    }
}

/// Raw cells of a block (body minus dents plus bumps).
pub fn block_cells(kind: BlockKind, facing: Option<Facing>) -> Result<CellSet> {
    check_facing(kind, facing)?;
    if kind == BlockKind::Cross {
        return Ok(cross_cells());
    }
    let len = if kind.is_class1() { CLASS1_LEN } else { CUBE };
    let body = CellSet::cuboid(Cell::ORIGIN, Cell::new(len, CUBE, CUBE));
    let dents = feature_cells(kind, facing, Feature::Dent)?;
    let bumps = feature_cells(kind, facing, Feature::Bump)?;
    Ok(body.difference(&dents).union(&bumps))
}

/// Builds one of the blocks as a polycube. Class-1 kinds need a facing;
/// the others must be called without one.
pub fn build_block(kind: BlockKind, facing: Option<Facing>) -> Result<Polycube> {
    Polycube::new(block_cells(kind, facing)?)
}

/// Cells added on top of a 7-cube by a `Z+` construct, relative to the
/// cube's origin.
pub fn up_bump_cells() -> CellSet {
    feature_cells(BlockKind::ZPlus, None, Feature::Bump).expect("axis kinds take no facing")
}

/// Inclusive range of candidate offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OffsetWindow {
    pub lo: Cell,
    pub hi: Cell,
}

impl OffsetWindow {
    pub fn around(center: Cell, radius: Cell) -> Self {
        Self {
            lo: center - radius,
            hi: center + radius,
        }
    }

    /// Every offset at which the bounding boxes of `a` and a translate of `b`
    /// meet.
    pub fn touching(a: &CellSet, b: &CellSet) -> Self {
        let (alo, ahi) = a.bbox().unwrap_or_default();
        let (blo, bhi) = b.bbox().unwrap_or_default();
        Self {
            lo: alo - bhi,
            hi: ahi - blo,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.lo.z..=self.hi.z).flat_map(move |z| {
            (self.lo.y..=self.hi.y)
                .flat_map(move |y| (self.lo.x..=self.hi.x).map(move |x| Cell::new(x, y, z)))
        })
    }
}

fn disjoint_from(grid: &Grid, b: &CellSet, v: Cell) -> bool {
    b.iter().all(|&c| !grid.contains(c + v))
}

/// All offsets `v` in the window at which `b + v` avoids `a` and covers
/// every cell of `cavity` (a flush fill).
pub fn mating_offsets(
    a: &CellSet,
    cavity: &CellSet,
    b: &CellSet,
    window: OffsetWindow,
) -> Vec<Cell> {
    let Some(grid) = Grid::from_cells(a) else {
        return window
            .iter()
            .filter(|&v| cavity.iter().all(|&c| b.contains(&(c - v))))
            .collect();
    };
    window
        .iter()
        .filter(|&v| cavity.iter().all(|&c| b.contains(&(c - v))) && disjoint_from(&grid, b, v))
        .collect()
}

/// Offset pairs `(v1, v2)` at which `b1 + v1` and `b2 + v2` jointly fill
/// `cavity` without overlapping `a` or each other. Only translates that reach
/// into the cavity are considered, which is exhaustive whenever neither body
/// can fill the cavity alone.
pub fn pair_mating_offsets(
    a: &CellSet,
    cavity: &CellSet,
    (b1, w1): (&CellSet, OffsetWindow),
    (b2, w2): (&CellSet, OffsetWindow),
) -> Vec<(Cell, Cell)> {
    let grid = Grid::from_cells(a);
    let reaching = |b: &CellSet, w: OffsetWindow| -> Vec<Cell> {
        w.iter()
            .filter(|&v| cavity.iter().any(|&c| b.contains(&(c - v))))
            .filter(|&v| grid.as_ref().is_none_or(|g| disjoint_from(g, b, v)))
            .collect()
    };
    let c1 = reaching(b1, w1);
    let c2 = reaching(b2, w2);
    let mut out = Vec::new();
    for &v1 in &c1 {
        let rest: Vec<Cell> = cavity
            .iter()
            .copied()
            .filter(|&c| !b1.contains(&(c - v1)))
            .collect();
        let t1 = b1.translate(v1);
        for &v2 in &c2 {
            if rest.iter().all(|&c| b2.contains(&(c - v2))) && !t1.overlaps(&b2.translate(v2)) {
                out.push((v1, v2));
            }
        }
    }
    out
}

/// A back-to-back pair of class-1 blocks as found in a linker: the south
/// block faces south at `y in [0, 7)`, the north block faces north at
/// `y in [7, 14)`. Returns the pair's cells and its joint cavity.
pub fn back_to_back(kind: BlockKind) -> Result<(CellSet, CellSet)> {
    let lift = Cell::new(0, CUBE, 0);
    let cells = block_cells(kind, Some(Facing::South))?
        .union(&block_cells(kind, Some(Facing::North))?.translate(lift));
    let cavity = feature_cells(kind, Some(Facing::South), Feature::Dent)?
        .union(&feature_cells(kind, Some(Facing::North), Feature::Dent)?.translate(lift));
    Ok((cells, cavity))
}

/// One row of the mating matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatingCase {
    pub name: String,
    pub expected: usize,
    pub found: usize,
}

impl MatingCase {
    pub fn holds(&self) -> bool {
        self.expected == self.found
    }
}

/// Offset of the bump-bearing encoder block south of a back-to-back pair.
const SOUTH_OF_PAIR: Cell = Cell::new(0, -CUBE, 0);
/// Offset of the encoder block north of a back-to-back pair.
const NORTH_OF_PAIR: Cell = Cell::new(0, 2 * CUBE, 0);

/// Runs the bounded exhaustive mating matrix over the builtin geometry.
pub fn mating_matrix() -> Result<Vec<MatingCase>> {
    let radius = Cell::new(CLASS1_LEN, 2 * CUBE, FEATURE_Z);
    let mut cases = Vec::new();
    let (pair, cavity) = back_to_back(BlockKind::M)?;
    let north_facing = |k| block_cells(k, Some(Facing::North));
    let south_facing = |k| block_cells(k, Some(Facing::South));

    for (k1, k2, expected) in [
        (BlockKind::N, BlockKind::N, 1),
        (BlockKind::F, BlockKind::F, 1),
        (BlockKind::N, BlockKind::F, 0),
        (BlockKind::F, BlockKind::N, 0),
        (BlockKind::E, BlockKind::E, 0),
        (BlockKind::N, BlockKind::E, 0),
        (BlockKind::E, BlockKind::F, 0),
    ] {
        let b1 = north_facing(k1)?;
        let b2 = south_facing(k2)?;
        let found = pair_mating_offsets(
            &pair,
            &cavity,
            (&b1, OffsetWindow::around(SOUTH_OF_PAIR, radius)),
            (&b2, OffsetWindow::around(NORTH_OF_PAIR, radius)),
        )
        .len();
        cases.push(MatingCase {
            name: format!("M-pair cavity <- {k1} + {k2}"),
            expected,
            found,
        });
    }
    // no single block fills the joint cavity, so the pair search is exhaustive
    for k in [BlockKind::N, BlockKind::F, BlockKind::E] {
        let b = north_facing(k)?;
        let found = mating_offsets(&pair, &cavity, &b, OffsetWindow::touching(&pair, &b)).len();
        cases.push(MatingCase {
            name: format!("M-pair cavity <- {k} alone"),
            expected: 0,
            found,
        });
    }

    // side cross bumps of M+ against the side dents of N, F and E
    let mplus = south_facing(BlockKind::MPlus)?;
    for (k, expected) in [(BlockKind::N, 1), (BlockKind::F, 1)] {
        let a = north_facing(k)?;
        let dents = feature_cells(k, Some(Facing::North), Feature::Dent)?;
        let found = mating_offsets(
            &a,
            &dents,
            &mplus,
            OffsetWindow::around(Cell::new(0, CUBE, 0), radius),
        )
        .len();
        cases.push(MatingCase {
            name: format!("{k} side dents <- M+"),
            expected,
            found,
        });
    }
    {
        let e = north_facing(BlockKind::E)?;
        let clash = e.overlaps(&mplus.translate(Cell::new(0, CUBE, 0)));
        cases.push(MatingCase {
            name: "E against M+ collides".into(),
            expected: 1,
            found: usize::from(clash),
        });
        let dents = feature_cells(BlockKind::E, Some(Facing::North), Feature::Dent)?;
        cases.push(MatingCase {
            name: "E has no side dents".into(),
            expected: 0,
            found: dents.len(),
        });
    }

    let axis = [
        (BlockKind::XPlus, BlockKind::XMinus),
        (BlockKind::YPlus, BlockKind::YMinus),
        (BlockKind::ZPlus, BlockKind::ZMinus),
    ];
    for (plus, _) in axis {
        let b = build_block(plus, None)?.into_cells();
        for (_, minus) in axis {
            let a = build_block(minus, None)?.into_cells();
            let dent = feature_cells(minus, None, Feature::Dent)?;
            let found = mating_offsets(&a, &dent, &b, OffsetWindow::touching(&a, &b)).len();
            let expected = usize::from(plus_pairs_with(plus, minus));
            cases.push(MatingCase {
                name: format!("{minus} dent <- {plus}"),
                expected,
                found,
            });
        }
        for (target, dent) in [
            (
                "N side dent",
                feature_cells(BlockKind::N, Some(Facing::North), Feature::Dent)?,
            ),
            (
                "M dent",
                feature_cells(BlockKind::M, Some(Facing::North), Feature::Dent)?,
            ),
        ] {
            let a = if target.starts_with('N') {
                north_facing(BlockKind::N)?
            } else {
                north_facing(BlockKind::M)?
            };
            let found = mating_offsets(&a, &dent, &b, OffsetWindow::touching(&a, &b)).len();
            cases.push(MatingCase {
                name: format!("{target} <- {plus}"),
                expected: 0,
                found,
            });
        }
    }
    {
        let a = build_block(BlockKind::XMinus, None)?.into_cells();
        let dent = feature_cells(BlockKind::XMinus, None, Feature::Dent)?;
        let cross = cross_cells();
        let found = mating_offsets(&a, &dent, &cross, OffsetWindow::touching(&a, &cross)).len();
        cases.push(MatingCase {
            name: "XMINUS dent <- cross".into(),
            expected: 0,
            found,
        });
    }
    Ok(cases)
}

fn plus_pairs_with(plus: BlockKind, minus: BlockKind) -> bool {
    matches!(
        (plus, minus),
        (BlockKind::XPlus, BlockKind::XMinus)
            | (BlockKind::YPlus, BlockKind::YMinus)
            | (BlockKind::ZPlus, BlockKind::ZMinus)
    )
}

/// Renders the geometry table text for the given table (header excluded).
pub fn render_geometry_table(t: &GeometryTable) -> String {
    let mut out = String::new();
    for kind in TABLE_KINDS {
        let b = t.body(kind);
        out.push_str(&format!("body {} {} {} {}\n", kind.name(), b.x, b.y, b.z));
    }
    out.push_str(&t.render_features());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::{Axis, Turn};

    fn north(k: BlockKind) -> CellSet {
        block_cells(k, Some(Facing::North)).unwrap()
    }

    #[test]
    fn cross_shape() {
        let c = build_cross();
        assert_eq!(c.volume(), 9);
        let (lo, hi) = c.cells().bbox().unwrap();
        assert_eq!(hi.z - lo.z, 0);
        assert_eq!(c.cells().rotate_z_180(), *c.cells());
        assert_eq!(
            c.cells().rotate_axis_90(Axis::Z, Turn::CounterClockwise),
            *c.cells()
        );
    }

    #[test]
    fn all_blocks_are_connected() {
        for kind in BlockKind::ALL {
            if kind.is_class1() {
                for f in [Facing::North, Facing::South] {
                    assert!(build_block(kind, Some(f)).is_ok(), "{kind} {f:?}");
                }
            } else {
                assert!(build_block(kind, None).is_ok(), "{kind}");
            }
        }
    }

    #[test]
    fn m_middle_layer_alone_is_disconnected() {
        for kind in [BlockKind::M, BlockKind::MPlus] {
            let cells = north(kind);
            let layer = CellSet::from_vec(cells.z_slab(FEATURE_Z, FEATURE_Z + 1).to_vec());
            assert!(!layer.is_connected(), "{kind}");
            assert!(cells.is_connected());
        }
    }

    #[test]
    fn facing_mismatch_is_rejected() {
        assert!(matches!(
            build_block(BlockKind::N, None),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_block(BlockKind::XPlus, Some(Facing::North)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn south_is_half_turn_of_north() {
        for kind in [
            BlockKind::N,
            BlockKind::F,
            BlockKind::E,
            BlockKind::M,
            BlockKind::MPlus,
        ] {
            let n = north(kind);
            let s = block_cells(kind, Some(Facing::South)).unwrap();
            assert_eq!(s.canonical(), n.rotate_z_180(), "{kind}");
        }
    }

    #[test]
    fn volumes() {
        let body = 28 * 7 * 7;
        // golden values from the table: L bump 10 cells, crosses 9 cells
        assert_eq!(north(BlockKind::E).len(), body + 10);
        assert_eq!(north(BlockKind::N).len(), body - 18 + 19);
        assert_eq!(north(BlockKind::N).len(), north(BlockKind::F).len());
        assert_eq!(north(BlockKind::M).len(), body - 19);
        assert_eq!(
            north(BlockKind::MPlus).len() - north(BlockKind::M).len(),
            18
        );
        assert_eq!(
            build_block(BlockKind::XPlus, None).unwrap().volume(),
            343 + 5
        );
        assert_eq!(
            build_block(BlockKind::ZMinus, None).unwrap().volume(),
            343 - 5
        );
    }

    #[test]
    fn class1_blocks_share_outer_layers() {
        let n = north(BlockKind::N);
        for kind in [BlockKind::F, BlockKind::E, BlockKind::M, BlockKind::MPlus] {
            let other = north(kind);
            for z in (0..7).filter(|&z| z != FEATURE_Z) {
                assert_eq!(
                    n.z_slab(z, z + 1),
                    other.z_slab(z, z + 1),
                    "{kind} layer {z}"
                );
            }
        }
        // N and F differ only by where the cross sits on the L bump
        let diff = n
            .difference(&north(BlockKind::F))
            .union(&north(BlockKind::F).difference(&n));
        assert_eq!(diff.len(), 18);
        assert!(diff.iter().all(|c| c.z == FEATURE_Z && c.y >= CUBE));
        let cross = cross_cells();
        let comps = diff.components();
        assert_eq!(comps.len(), 2);
        assert!(comps
            .iter()
            .all(|c| c.map(|p| Cell::new(p.x, p.y, 0)).canonical() == cross));
    }

    #[test]
    fn axis_blocks_are_quarter_turns() {
        let xp = build_block(BlockKind::XPlus, None).unwrap().into_cells();
        let yp = build_block(BlockKind::YPlus, None).unwrap().into_cells();
        let zp = build_block(BlockKind::ZPlus, None).unwrap().into_cells();
        assert_eq!(
            xp.rotate_axis_90(Axis::Z, Turn::CounterClockwise),
            yp.canonical()
        );
        assert_eq!(xp.rotate_axis_90(Axis::Y, Turn::Clockwise), zp.canonical());
        // bumps point east, north and up respectively
        let bump = |k| feature_cells(k, None, Feature::Bump).unwrap();
        assert!(bump(BlockKind::XPlus).iter().all(|c| c.x >= CUBE));
        assert!(bump(BlockKind::YPlus).iter().all(|c| c.y >= CUBE));
        assert!(bump(BlockKind::ZPlus).iter().all(|c| c.z >= CUBE));
        let dent = |k| feature_cells(k, None, Feature::Dent).unwrap();
        assert!(dent(BlockKind::XMinus).iter().any(|c| c.x == 0));
        assert!(dent(BlockKind::YMinus).iter().any(|c| c.y == 0));
        assert!(dent(BlockKind::ZMinus).iter().any(|c| c.z == 0));
    }

    #[test]
    fn bump_shapes() {
        let l = BumpShape::LBump.footprint();
        let (lo, hi) = l.bbox().unwrap();
        let mut arms = [hi.x - lo.x + 1, hi.y - lo.y + 1];
        arms.sort();
        assert_eq!(arms, [4, 7]);
        assert_eq!(l.len(), 7 + 4 - 1);
        assert_eq!(BumpShape::CrossBump.footprint(), cross_cells());
        assert_eq!(BumpShape::LCrossCompound.footprint().len(), 19);
        let axis = BumpShape::AxisBump.footprint();
        for other in [
            BumpShape::CrossBump,
            BumpShape::LBump,
            BumpShape::LCrossCompound,
        ] {
            let o = other.footprint();
            let mut rot = o.clone();
            for _ in 0..4 {
                assert_ne!(rot, axis);
                rot = rot.rotate_axis_90(Axis::Z, Turn::CounterClockwise);
            }
        }
        // the axis bump has no symmetry, so quarter and half turns are distinct
        let q = axis.rotate_axis_90(Axis::Z, Turn::CounterClockwise);
        assert_ne!(q, axis);
        assert_ne!(axis.rotate_z_180(), axis);
    }

    #[test]
    fn up_bump_disjoint_from_mplus_side_bump() {
        // Z+ overlays the east cube of a south-facing M+
        let mplus = block_cells(BlockKind::MPlus, Some(Facing::South)).unwrap();
        let side = feature_cells(BlockKind::MPlus, Some(Facing::South), Feature::Bump).unwrap();
        let up = up_bump_cells().translate(Cell::new(CLASS1_LEN - CUBE, 0, 0));
        assert!(!up.overlaps(&mplus));
        assert!(side.iter().any(|c| c.x >= CLASS1_LEN - CUBE));
        assert!(mplus.union(&up).is_connected());
    }

    #[test]
    fn geometry_table_renders_back() {
        let t = GeometryTable::builtin();
        let body: String = GeometryTable::builtin_text()
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(render_geometry_table(t), body);
        assert_eq!(GeometryTable::parse(&render_geometry_table(t)).unwrap(), *t);
    }

    #[test]
    fn geometry_table_rejects_bad_input() {
        assert!(matches!(
            GeometryTable::parse("N bump 1 2"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(GeometryTable::parse("body N 28 7 7\nN dent 40 0 3").is_err());
        // a bump inside the body is not a bump
        let mut text = String::new();
        for k in TABLE_KINDS {
            let len = if k.is_class1() { 28 } else { 7 };
            text.push_str(&format!("body {} {len} 7 7\n", k.name()));
        }
        assert!(GeometryTable::parse(&format!("{text}N bump 1 1 3\n")).is_err());
        assert!(GeometryTable::parse(&format!("{text}N dent 1 1 3\n")).is_ok());
    }

    #[test]
    fn mating_matrix_holds() {
        for case in mating_matrix().unwrap() {
            assert!(case.holds(), "{case:?}");
        }
    }
}
