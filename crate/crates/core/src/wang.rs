//! Wang tile sets and a bounded torus solver.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A unit square with colored edges. Colors are dense ids into the owning
/// set's palette.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WangTile {
    pub north: u32,
    pub east: u32,
    pub south: u32,
    pub west: u32,
}

impl WangTile {
    pub const fn new(north: u32, east: u32, south: u32, west: u32) -> Self {
        Self {
            north,
            east,
            south,
            west,
        }
    }

    /// Edges in the order north, east, south, west.
    pub fn edges(&self) -> [u32; 4] {
        [self.north, self.east, self.south, self.west]
    }
}

impl fmt::Display for WangTile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.north, self.east, self.south, self.west
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WangTileSet {
    tiles: Vec<WangTile>,
    palette: Vec<String>,
}

impl WangTileSet {
    /// Builds a set from tiles whose color ids are already dense: every id
    /// below the number of distinct colors must be in use.
    pub fn new(tiles: Vec<WangTile>) -> Result<Self> {
        if tiles.is_empty() {
            return Err(Error::invalid("a tile set needs at least one tile"));
        }
        let mut used: Vec<u32> = tiles.iter().flat_map(|t| t.edges()).collect();
        used.sort_unstable();
        used.dedup();
        let m = used.len() as u32;
        if used.last().copied() != Some(m - 1) {
            return Err(Error::invalid(format!("color ids must be dense in 0..{m}")));
        }
        let palette = (0..m).map(|c| c.to_string()).collect();
        Ok(Self { tiles, palette })
    }

    pub fn tiles(&self) -> &[WangTile] {
        &self.tiles
    }

    pub fn tile(&self, i: usize) -> WangTile {
        self.tiles[i]
    }

    /// Color names in id order, as they appeared in the source text.
    pub fn palette(&self) -> &[String] {
        &self.palette
    }

    /// Number of tiles.
    pub fn n(&self) -> usize {
        self.tiles.len()
    }

    /// Number of distinct colors.
    pub fn m(&self) -> usize {
        self.palette.len()
    }

    /// Bits per color code: `ceil(log2 m)`, but never less than one.
    pub fn t(&self) -> u32 {
        let m = self.m() as u32;
        (u32::BITS - (m - 1).leading_zeros()).max(1)
    }

    pub fn to_text(&self) -> String {
        self.tiles
            .iter()
            .map(|t| {
                let e = t.edges().map(|c| self.palette[c as usize].as_str());
                format!("{} {} {} {}\n", e[0], e[1], e[2], e[3])
            })
            .collect()
    }
}

/// Parses one tile per nonblank line: four color tokens in the order
/// north, east, south, west. Tokens are interned to ids in order of first
/// appearance. Text after `#` is ignored.
pub fn parse_wang_set(text: &str) -> Result<WangTileSet> {
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut palette = Vec::new();
    let mut tiles = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 4 {
            return Err(Error::parse(
                n + 1,
                format!("expected 4 colors, found {}", tokens.len()),
            ));
        }
        let mut e = [0u32; 4];
        for (slot, tok) in e.iter_mut().zip(&tokens) {
            *slot = *ids.entry(tok).or_insert_with(|| {
                palette.push(tok.to_string());
                palette.len() as u32 - 1
            });
        }
        tiles.push(WangTile::new(e[0], e[1], e[2], e[3]));
    }
    if tiles.is_empty() {
        return Err(Error::parse(text.lines().count().max(1), "no tiles"));
    }
    Ok(WangTileSet { tiles, palette })
}

/// A `w x h` grid of tile indices, row-major with row 0 southmost.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusTiling {
    width: usize,
    height: usize,
    cells: Vec<usize>,
}

impl TorusTiling {
    pub fn new(width: usize, height: usize, cells: Vec<usize>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("torus dimensions must be positive"));
        }
        if cells.len() != width * height {
            return Err(Error::invalid(format!(
                "expected {} cells for a {width}x{height} torus, found {}",
                width * height,
                cells.len()
            )));
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn uniform(width: usize, height: usize, tile: usize) -> Result<Self> {
        Self::new(width, height, vec![tile; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Tile index at `(x, y)`, wrapping both coordinates.
    pub fn at(&self, x: i64, y: i64) -> usize {
        let x = x.rem_euclid(self.width as i64) as usize;
        let y = y.rem_euclid(self.height as i64) as usize;
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, tile: usize) {
        self.cells[y * self.width + x] = tile;
    }

    /// `w h` on the first line, then one row per line from row 0.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.width, self.height);
        for row in self.cells.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut nums = Vec::new();
        for (n, line) in text.lines().enumerate() {
            for tok in line.split('#').next().unwrap_or("").split_whitespace() {
                let v = tok
                    .parse::<usize>()
                    .map_err(|_| Error::parse(n + 1, format!("`{tok}` is not a tile index")))?;
                nums.push(v);
            }
        }
        if nums.len() < 2 {
            return Err(Error::parse(1, "missing torus dimensions"));
        }
        Self::new(nums[0], nums[1], nums[2..].to_vec())
    }
}

/// True iff every pair of edge-adjacent cells (with wraparound) agrees on
/// the shared edge color.
pub fn valid_torus(s: &WangTileSet, g: &TorusTiling) -> Result<bool> {
    if let Some(&bad) = g.cells.iter().find(|&&i| i >= s.n()) {
        return Err(Error::invalid(format!(
            "tile index {bad} out of range for {} tiles",
            s.n()
        )));
    }
    for y in 0..g.height as i64 {
        for x in 0..g.width as i64 {
            let here = s.tile(g.at(x, y));
            if here.east != s.tile(g.at(x + 1, y)).west
                || here.north != s.tile(g.at(x, y + 1)).south
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TorusSearch {
    Found(TorusTiling),
    /// The search space was exhausted without a tiling.
    NoTiling,
    /// The node budget ran out first.
    BudgetExhausted,
}

/// Backtracking search for a `w x h` torus tiling. Cells are filled in
/// row-major order and tiles tried in index order, so the first tiling in
/// that order is returned. Every tile placement attempt costs one unit of
/// `budget`.
pub fn solve_torus(s: &WangTileSet, w: usize, h: usize, budget: u64) -> Result<TorusSearch> {
    if w == 0 || h == 0 {
        return Err(Error::invalid("torus dimensions must be positive"));
    }
    let n = s.n();
    let total = w * h;
    let tiles = s.tiles();
    let fits = |grid: &[usize], k: usize, t: usize| -> bool {
        let (x, y) = (k % w, k / w);
        let tile = tiles[t];
        // wraparound partners may be the cell itself on thin tori
        let at = |i: usize| if i == k { tile } else { tiles[grid[i]] };
        (x == 0 || at(k - 1).east == tile.west)
            && (x + 1 < w || tile.east == at(k + 1 - w).west)
            && (y == 0 || at(k - w).north == tile.south)
            && (y + 1 < h || tile.north == at(x).south)
    };
    // next[k] is the next tile index to try at cell k
    let mut grid = vec![0usize; total];
    let mut next = vec![0usize; total];
    let mut k = 0usize;
    let mut spent = 0u64;
    loop {
        let mut placed = false;
        while next[k] < n {
            let t = next[k];
            next[k] += 1;
            if spent == budget {
                return Ok(TorusSearch::BudgetExhausted);
            }
            spent += 1;
            if fits(&grid, k, t) {
                grid[k] = t;
                placed = true;
                break;
            }
        }
        if placed {
            if k + 1 == total {
                return Ok(TorusSearch::Found(TorusTiling::new(w, h, grid)?));
            }
            k += 1;
            next[k] = 0;
        } else {
            if k == 0 {
                return Ok(TorusSearch::NoTiling);
            }
            k -= 1;
        }
    }
}
