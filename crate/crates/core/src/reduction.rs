//! Synthesis of the filler, encoder and linker polycubes from a Wang tile set.
//!
//! Both tall polycubes are stacks of levels 7 voxels high. Odd levels are
//! structural, even levels are functional rows of class-1 blocks. Level `l`
//! (1-based) occupies `z` in `[7(l-1), 7l)`.
//!
//! Local layout of a functional level, in voxels:
//!
//! ```text
//!   y 7..14   north row, 2t blocks facing north
//!   y 0..7    south row, 2t blocks facing south
//!             x = 0 .. 56t
//! ```
//!
//! An encoding level splits each row into a west and an east group of `t`
//! blocks. North row: west group = north edge, east group = east edge.
//! South row: west group = west edge, east group = south edge.

use crate::blocks::{
    block_cells, build_cross, feature_cells, up_bump_cells, BlockKind, Facing, Feature, CLASS1_LEN,
    CUBE,
};
use crate::diffsets::encoder_levels;
use crate::error::{Error, Result};
use crate::voxel::{Cell, CellSet, Polycube};
use crate::wang::{WangTile, WangTileSet};

/// Height of one level in voxels.
pub const LEVEL_HEIGHT: i32 = CUBE;

/// Refuse to build polycubes larger than this many cells.
const MAX_CELLS: u64 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LevelRole {
    Structural,
    /// Functional level carrying the code of tile `tile` (0-based).
    Encoding {
        tile: usize,
    },
    /// Functional level made of `E` blocks only.
    Plain,
}

/// Which level does what, shared by encoder and linker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelPlan {
    n_tiles: usize,
    total: u64,
    encoding: Vec<u64>,
}

impl LevelPlan {
    pub fn new(n_tiles: usize) -> Result<Self> {
        let n = u32::try_from(n_tiles).map_err(|_| Error::invalid("too many tiles"))?;
        let (set, total) = encoder_levels::<u64>(n)?;
        Ok(Self {
            n_tiles,
            total,
            encoding: set.elements().to_vec(),
        })
    }

    pub fn n_tiles(&self) -> usize {
        self.n_tiles
    }

    pub fn total_levels(&self) -> u64 {
        self.total
    }

    /// The linker's matching level is its top level.
    pub fn matching_level(&self) -> u64 {
        self.total
    }

    /// Encoding levels in increasing order.
    pub fn encoding_levels(&self) -> &[u64] {
        &self.encoding
    }

    /// The three levels encoding tile `tile` (0-based), lowest first.
    pub fn levels_of(&self, tile: usize) -> [u64; 3] {
        assert!(tile < self.n_tiles, "tile {tile} out of range");
        [
            self.encoding[3 * tile],
            self.encoding[3 * tile + 1],
            self.encoding[3 * tile + 2],
        ]
    }

    /// Role of 1-based level `level`.
    pub fn role(&self, level: u64) -> LevelRole {
        assert!(
            (1..=self.total).contains(&level),
            "level {level} out of range"
        );
        if level % 2 == 1 {
            return LevelRole::Structural;
        }
        match self.encoding.binary_search(&level) {
            Ok(i) => LevelRole::Encoding { tile: i / 3 },
            Err(_) => LevelRole::Plain,
        }
    }

    /// Height in voxels.
    pub fn height(&self) -> i64 {
        self.total as i64 * LEVEL_HEIGHT as i64
    }
}

/// Big-endian binary of `c` over `t` digits, `0 -> N`, `1 -> F`.
pub fn encode_color(c: u32, t: u32) -> Result<Vec<BlockKind>> {
    if t == 0 || t > 31 || c >> t != 0 {
        return Err(Error::invalid(format!(
            "color {c} does not fit in {t} bits"
        )));
    }
    Ok((0..t)
        .rev()
        .map(|b| {
            if (c >> b) & 1 == 1 {
                BlockKind::F
            } else {
                BlockKind::N
            }
        })
        .collect())
}

/// Inverse of [`encode_color`]. `None` if any block is not `N` or `F`.
pub fn decode_color(word: &[BlockKind]) -> Option<u32> {
    word.iter().try_fold(0u32, |acc, k| match k {
        BlockKind::N => Some(acc << 1),
        BlockKind::F => Some((acc << 1) | 1),
        _ => None,
    })
}

/// Block kinds of one functional level: the south row and the north row,
/// each listed west to east.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowKinds {
    pub south: Vec<BlockKind>,
    pub north: Vec<BlockKind>,
}

impl RowKinds {
    pub fn uniform(kind: BlockKind, t: u32) -> Self {
        let cols = 2 * t as usize;
        Self {
            south: vec![kind; cols],
            north: vec![kind; cols],
        }
    }

    /// The encoding of `tile` with `t` bits per edge.
    pub fn encoding(tile: WangTile, t: u32) -> Result<Self> {
        let mut north = encode_color(tile.north, t)?;
        north.extend(encode_color(tile.east, t)?);
        let mut south = encode_color(tile.west, t)?;
        south.extend(encode_color(tile.south, t)?);
        Ok(Self { south, north })
    }

    pub fn row(&self, facing: Facing) -> &[BlockKind] {
        match facing {
            Facing::North => &self.north,
            Facing::South => &self.south,
        }
    }

    pub fn row_mut(&mut self, facing: Facing) -> &mut Vec<BlockKind> {
        match facing {
            Facing::North => &mut self.north,
            Facing::South => &mut self.south,
        }
    }

    /// Reads the tile back. `Ok(None)` when every block is `E`.
    pub fn decode(&self, t: u32) -> Result<Option<WangTile>> {
        let t = t as usize;
        if self.south.len() != 2 * t || self.north.len() != 2 * t {
            return Err(Error::invalid("row length does not match t"));
        }
        let all = self.south.iter().chain(&self.north);
        if all.clone().all(|&k| k == BlockKind::E) {
            return Ok(None);
        }
        let word = |w: &[BlockKind]| {
            decode_color(w)
                .ok_or_else(|| Error::Construction("layer mixes E with N/F blocks".into()))
        };
        Ok(Some(WangTile::new(
            word(&self.north[..t])?,
            word(&self.north[t..])?,
            word(&self.south[t..])?,
            word(&self.south[..t])?,
        )))
    }
}

/// Where the block in column `col` of a row sits, relative to the level.
fn block_origin(facing: Facing, col: usize) -> Cell {
    let y = match facing {
        Facing::North => CUBE,
        Facing::South => 0,
    };
    Cell::new(CLASS1_LEN * col as i32, y, 0)
}

/// One functional level built from explicit block kinds.
pub fn functional_level(rows: &RowKinds) -> Result<CellSet> {
    let mut cells = Vec::new();
    for facing in [Facing::South, Facing::North] {
        for (col, &kind) in rows.row(facing).iter().enumerate() {
            let b = block_cells(kind, Some(facing))?;
            cells.extend(b.translate(block_origin(facing, col)).iter().copied());
        }
    }
    Ok(CellSet::from_vec(cells))
}

/// Structural level of the encoder: a 14 x 14 x 7 cuboid centered on the
/// functional footprint.
pub fn encoder_structural_level(t: u32) -> CellSet {
    let mid = CLASS1_LEN * t as i32;
    CellSet::cuboid(
        Cell::new(mid - CUBE, 0, 0),
        Cell::new(mid + CUBE, 2 * CUBE, CUBE),
    )
}

/// Plain structural level of the linker: the 56t x 14 main part plus the
/// northern extension inset one cube on each side.
pub fn linker_structural_level(t: u32) -> CellSet {
    let w = 2 * CLASS1_LEN * t as i32;
    let main = CellSet::cuboid(Cell::ORIGIN, Cell::new(w, 2 * CUBE, CUBE));
    let ext = CellSet::cuboid(
        Cell::new(CUBE, 2 * CUBE, 0),
        Cell::new(w - CUBE, 4 * CUBE, CUBE),
    );
    main.union(&ext)
}

/// The six axis constructs of a linker as (kind, cube origin). `Z+` sits on
/// the top level and only adds its bump; the others replace a cube of
/// level 1.
pub fn linker_specials(t: u32, total_levels: u64) -> Vec<(BlockKind, Cell)> {
    let w = 2 * CLASS1_LEN * t as i32;
    let top = LEVEL_HEIGHT * (total_levels as i32 - 1);
    vec![
        (BlockKind::XMinus, Cell::new(0, CUBE, 0)),
        (BlockKind::XPlus, Cell::new(w - CUBE, CUBE, 0)),
        (BlockKind::YMinus, Cell::ORIGIN),
        (BlockKind::YPlus, Cell::new(w / 2, 3 * CUBE, 0)),
        (BlockKind::ZMinus, Cell::new(w - CUBE, 0, 0)),
        (BlockKind::ZPlus, Cell::new(w - CUBE, 0, top)),
    ]
}

/// Level 1 of the linker, with the five level-1 constructs carved in.
pub fn linker_base_level(t: u32) -> Result<CellSet> {
    let mut dents = Vec::new();
    let mut bumps = Vec::new();
    for (kind, at) in linker_specials(t, 1) {
        if kind == BlockKind::ZPlus {
            continue;
        }
        dents.extend(
            feature_cells(kind, None, Feature::Dent)?
                .translate(at)
                .iter()
                .copied(),
        );
        bumps.extend(
            feature_cells(kind, None, Feature::Bump)?
                .translate(at)
                .iter()
                .copied(),
        );
    }
    Ok(linker_structural_level(t)
        .difference(&CellSet::from_vec(dents))
        .union(&CellSet::from_vec(bumps)))
}

/// Per-level templates, stacked bottom to top.
fn stack(plan: &LevelPlan, template: impl Fn(u64) -> Result<CellSet>) -> Result<CellSet> {
    let total = plan.total_levels();
    if total > (i32::MAX / LEVEL_HEIGHT - 2) as u64 {
        return Err(Error::Unsupported(format!(
            "{total} levels exceed the coordinate range"
        )));
    }
    let mut levels = Vec::with_capacity(total as usize);
    let mut count: u64 = 0;
    for level in 1..=total {
        let cells = template(level)?;
        count += cells.len() as u64;
        if count > MAX_CELLS {
            return Err(Error::Unsupported(format!(
                "polycube exceeds {MAX_CELLS} cells"
            )));
        }
        levels.push(cells);
    }
    let mut out = Vec::with_capacity(count as usize);
    for (i, cells) in levels.iter().enumerate() {
        let dz = LEVEL_HEIGHT * i as i32;
        out.extend(cells.iter().map(|&c| c + Cell::new(0, 0, dz)));
    }
    // every template lives in its own z slab, so the concatenation is sorted
    Ok(CellSet::from_sorted_unchecked(out))
}

/// Level templates of an encoder; shared so that variants only rebuild what
/// differs.
struct EncoderTemplates {
    structural: CellSet,
    plain: CellSet,
    tiles: Vec<CellSet>,
}

impl EncoderTemplates {
    fn new(s: &WangTileSet) -> Result<Self> {
        let t = s.t();
        let tiles = s
            .tiles()
            .iter()
            .map(|&tile| functional_level(&RowKinds::encoding(tile, t)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            structural: encoder_structural_level(t),
            plain: functional_level(&RowKinds::uniform(BlockKind::E, t))?,
            tiles,
        })
    }

    fn level(&self, plan: &LevelPlan, level: u64) -> &CellSet {
        match plan.role(level) {
            LevelRole::Structural => &self.structural,
            LevelRole::Plain => &self.plain,
            LevelRole::Encoding { tile } => &self.tiles[tile],
        }
    }
}

fn check_nonempty(s: &WangTileSet) -> Result<()> {
    if s.n() == 0 {
        return Err(Error::invalid("empty tile set"));
    }
    Ok(())
}

/// The filler: the 9-cell cross, independent of the tile set.
pub fn build_filler_tile() -> Polycube {
    build_cross()
}

pub fn build_encoder(s: &WangTileSet) -> Result<Polycube> {
    check_nonempty(s)?;
    let plan = LevelPlan::new(s.n())?;
    let tpl = EncoderTemplates::new(s)?;
    Polycube::new(stack(&plan, |l| Ok(tpl.level(&plan, l).clone()))?)
}

/// An encoder whose block at (`level`, `row`, `col`) has its bit flipped
/// (`N <-> F`). Used for fault injection.
pub fn build_encoder_with_flip(
    s: &WangTileSet,
    level: u64,
    row: Facing,
    col: usize,
) -> Result<Polycube> {
    check_nonempty(s)?;
    let plan = LevelPlan::new(s.n())?;
    if level == 0 || level > plan.total_levels() {
        return Err(Error::invalid(format!("level {level} out of range")));
    }
    let LevelRole::Encoding { tile } = plan.role(level) else {
        return Err(Error::invalid(format!(
            "level {level} is not an encoding level"
        )));
    };
    let mut rows = RowKinds::encoding(s.tile(tile), s.t())?;
    let slot = rows
        .row_mut(row)
        .get_mut(col)
        .ok_or_else(|| Error::invalid(format!("column {col} out of range")))?;
    *slot = if *slot == BlockKind::N {
        BlockKind::F
    } else {
        BlockKind::N
    };
    let flipped = functional_level(&rows)?;
    let tpl = EncoderTemplates::new(s)?;
    Polycube::new(stack(&plan, |l| {
        Ok(if l == level {
            flipped.clone()
        } else {
            tpl.level(&plan, l).clone()
        })
    })?)
}

pub fn build_linker(s: &WangTileSet) -> Result<Polycube> {
    check_nonempty(s)?;
    let t = s.t();
    let plan = LevelPlan::new(s.n())?;
    let total = plan.total_levels();
    let base = linker_base_level(t)?;
    let structural = linker_structural_level(t);
    let plain = functional_level(&RowKinds::uniform(BlockKind::M, t))?;
    let (_, zplus) = linker_specials(t, 1)[5];
    let top = functional_level(&RowKinds::uniform(BlockKind::MPlus, t))?
        .union(&up_bump_cells().translate(zplus));
    Polycube::new(stack(&plan, |l| {
        Ok(match l {
            1 => base.clone(),
            l if l == total => top.clone(),
            l if l % 2 == 1 => structural.clone(),
            _ => plain.clone(),
        })
    })?)
}

/// The three polycubes of a reduction together with the shared level plan.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub filler: Polycube,
    pub encoder: Polycube,
    pub linker: Polycube,
    pub plan: LevelPlan,
    pub t: u32,
}

pub fn reduce(s: &WangTileSet) -> Result<Reduction> {
    Ok(Reduction {
        filler: build_filler_tile(),
        encoder: build_encoder(s)?,
        linker: build_linker(s)?,
        plan: LevelPlan::new(s.n())?,
        t: s.t(),
    })
}

/// Outcome of reading one encoder level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerDecode {
    Tile(WangTile),
    NoTile,
}

/// Recognizes the block kinds of a functional level given in level-local
/// coordinates (`z` in `0..7`).
pub fn read_functional_level(layer: &CellSet, t: u32) -> Result<RowKinds> {
    let cols = 2 * t as usize;
    let candidates = [
        BlockKind::N,
        BlockKind::F,
        BlockKind::E,
        BlockKind::M,
        BlockKind::MPlus,
    ];
    let mut buckets: Vec<Vec<Cell>> = vec![Vec::new(); 2 * cols];
    for &c in layer.iter() {
        let col = c.x.div_euclid(CLASS1_LEN);
        if !(0..cols as i32).contains(&col) || !(0..CUBE).contains(&c.z) {
            return Err(Error::Construction(format!(
                "cell {c} outside the functional footprint"
            )));
        }
        let north = usize::from(c.y >= CUBE);
        buckets[north * cols + col as usize].push(c);
    }
    let mut rows = RowKinds {
        south: Vec::with_capacity(cols),
        north: Vec::with_capacity(cols),
    };
    for (i, bucket) in buckets.into_iter().enumerate() {
        let facing = if i < cols {
            Facing::South
        } else {
            Facing::North
        };
        let got = CellSet::from_vec(bucket).translate(-block_origin(facing, i % cols));
        let mut found = None;
        for kind in candidates {
            if block_cells(kind, Some(facing))? == got {
                found = Some(kind);
                break;
            }
        }
        let kind = found.ok_or_else(|| {
            Error::Construction(format!(
                "unrecognized block in {facing:?} row, column {}",
                i % cols
            ))
        })?;
        rows.row_mut(facing).push(kind);
    }
    Ok(rows)
}

/// Reads the Wang tile encoded by one encoder level (level-local
/// coordinates). All-`E` levels give [`LayerDecode::NoTile`].
pub fn decode_encoding_layer(layer: &CellSet, t: u32) -> Result<LayerDecode> {
    let rows = read_functional_level(layer, t)?;
    Ok(match rows.decode(t)? {
        Some(tile) => LayerDecode::Tile(tile),
        None => LayerDecode::NoTile,
    })
}

/// Cells of 1-based level `level` of a stacked polycube, shifted to
/// level-local coordinates.
pub fn level_slice(p: &CellSet, level: u64) -> CellSet {
    let z0 = LEVEL_HEIGHT * (level as i32 - 1);
    CellSet::from_sorted_unchecked(
        p.z_slab(z0, z0 + LEVEL_HEIGHT)
            .iter()
            .map(|&c| c - Cell::new(0, 0, z0))
            .collect(),
    )
}
