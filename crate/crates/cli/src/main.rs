mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polytile::assembler::{assemble, assemble_and_verify, Assembly, PieceKind};
use polytile::blocks::GeometryTable;
use polytile::diffsets::search_min_ruler;
use polytile::diffsets::{
    encoder_levels, is_golomb, is_modular_golomb, modular_powers_ruler, powers_ruler,
};
use polytile::planecheck::{bn_exact_factorization, boundary_word, project};
use polytile::reduction::reduce;
use polytile::voxel::{
    parse_cell_list, verify_periodic_partition, write_bitmap, write_cell_list, write_layers,
    write_obj,
};
use polytile::voxel::{Cell, CellSet};
use polytile::wang::{
    parse_wang_set, solve_torus, valid_torus, TorusSearch, TorusTiling, WangTileSet,
};
use polytile::{Error, Ruler};

use config::Config;

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const INPUT: u8 = 2;
const BUDGET: u8 = 3;

/// A failed command: exit code and message for stderr.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::Unsupported(_) => INPUT,
            Error::Construction(_) | Error::Assembly { .. } => NEGATIVE,
        };
        Failure(code, e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

#[derive(Parser)]
#[command(
    name = "polytile",
    version,
    about = "Wang tiles to three polycubes, with verified assemblies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and check difference sets.
    Ruler {
        #[command(subcommand)]
        action: RulerAction,
    },
    /// Write the filler, encoder and linker of a tile set as cell lists.
    Reduce {
        tileset: PathBuf,
        outdir: Option<PathBuf>,
    },
    /// Search for a torus tiling.
    Solve {
        tileset: PathBuf,
        width: usize,
        height: usize,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble and verify a periodic tiling of space from a torus tiling.
    Assemble {
        tileset: PathBuf,
        tiling: PathBuf,
        outdir: Option<PathBuf>,
    },
    /// Re-verify an assembly manifest.
    Verify { tileset: PathBuf, manifest: PathBuf },
    /// Convert a cell list or an assembly manifest.
    Export {
        input: PathBuf,
        #[arg(long)]
        format: Option<String>,
        /// Tile set the manifest was assembled from.
        #[arg(long)]
        tileset: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a polyomino tiles the plane by translation.
    Planecheck { polyomino: PathBuf },
    /// Print the built-in block geometry table.
    Geometry,
}

#[derive(Subcommand)]
enum RulerAction {
    /// `{1, 2, 4, ..., 2^(n-1)}`.
    Powers { n: u32 },
    /// `{4, 8, ..., 2^n}` modulo `2^n + 2`.
    Modpowers { n: u32 },
    /// Encoder levels for a set of `n` tiles.
    Levels { n: u32 },
    /// Golomb check of a comma-separated set.
    Check { set: Vec<String> },
    /// Modular Golomb check, modulus given as `mod=<m>`.
    Modcheck { set: Vec<String> },
    /// Shortest Golomb ruler with the given number of marks.
    Search { order: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Cells,
    Layers,
    Obj,
    Bitmap,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = Config::from_env()
        .map_err(|e| Failure(INPUT, format!("config: {e}")))
        .and_then(|cfg| run(cli, &cfg));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli, cfg: &Config) -> Outcome {
    match cli.command {
        Command::Ruler { action } => cmd_ruler(action, cfg),
        Command::Reduce { tileset, outdir } => {
            cmd_reduce(&tileset, &outdir.unwrap_or_else(|| cfg.out_dir.clone()))
        }
        Command::Solve {
            tileset,
            width,
            height,
            budget,
            out,
        } => cmd_solve(
            &tileset,
            width,
            height,
            budget.unwrap_or(cfg.solve_budget),
            out.as_deref(),
            cfg,
        ),
        Command::Assemble {
            tileset,
            tiling,
            outdir,
        } => cmd_assemble(
            &tileset,
            &tiling,
            &outdir.unwrap_or_else(|| cfg.out_dir.clone()),
            cfg,
        ),
        Command::Verify { tileset, manifest } => cmd_verify(&tileset, &manifest),
        Command::Export {
            input,
            format,
            tileset,
            out,
        } => {
            let format = format.unwrap_or_else(|| cfg.export_format.clone());
            cmd_export(&input, &format, tileset.as_deref(), out.as_deref())
        }
        Command::Planecheck { polyomino } => cmd_planecheck(&polyomino),
        Command::Geometry => {
            print!("{}", GeometryTable::builtin_text());
            Ok(OK)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(INPUT, format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure(INPUT, format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure(INPUT, format!("{}: {e}", dir.display())))
}

fn load_set(path: &Path) -> Result<WangTileSet, Failure> {
    parse_wang_set(&read(path)?).map_err(|e| Failure(INPUT, format!("{}: {e}", path.display())))
}

fn cmd_ruler(action: RulerAction, cfg: &Config) -> Outcome {
    match action {
        RulerAction::Powers { n } => println!("{}", powers_ruler::<u64>(n)?),
        RulerAction::Modpowers { n } => println!("{}", modular_powers_ruler::<u64>(n)?),
        RulerAction::Levels { n } => println!("{}", encoder_levels::<u64>(n)?.0),
        RulerAction::Check { set } => {
            let r: Ruler = set.join(" ").parse()?;
            if is_golomb(&r) {
                println!("Golomb");
            } else {
                println!("not Golomb");
                return Ok(NEGATIVE);
            }
        }
        RulerAction::Modcheck { set } => {
            let r: Ruler = set.join(" ").parse()?;
            if is_modular_golomb(&r)? {
                println!("modular Golomb");
            } else {
                println!("not modular Golomb");
                return Ok(NEGATIVE);
            }
        }
        RulerAction::Search { order } => {
            match search_min_ruler::<u64>(order, cfg.ruler_budget as usize) {
                Some(r) => println!("{r}"),
                None => {
                    println!("no ruler of length <= {}", cfg.ruler_budget);
                    return Ok(BUDGET);
                }
            }
        }
    }
    Ok(OK)
}

fn cell_list_bytes(c: &CellSet) -> Vec<u8> {
    let mut out = Vec::new();
    write_cell_list(c, &mut out).expect("writing to memory");
    out
}

fn cmd_reduce(tileset: &Path, outdir: &Path) -> Outcome {
    let s = load_set(tileset)?;
    let r = reduce(&s)?;
    create_dir(outdir)?;
    for (name, p) in [
        ("filler", &r.filler),
        ("encoder", &r.encoder),
        ("linker", &r.linker),
    ] {
        write(
            &outdir.join(format!("{name}.cells")),
            &cell_list_bytes(p.cells()),
        )?;
    }
    let levels: Vec<String> = r
        .plan
        .encoding_levels()
        .iter()
        .map(u64::to_string)
        .collect();
    let manifest = format!(
        "n {}\nm {}\nt {}\nlevels {}\nencoding_levels {}\nfiller_volume {}\nencoder_volume {}\nlinker_volume {}\n",
        s.n(),
        s.m(),
        s.t(),
        r.plan.total_levels(),
        levels.join(","),
        r.filler.volume(),
        r.encoder.volume(),
        r.linker.volume(),
    );
    write(&outdir.join("reduce.manifest"), manifest.as_bytes())?;
    print!("{manifest}");
    Ok(OK)
}

fn check_torus_size(w: usize, h: usize, cfg: &Config) -> Result<(), Failure> {
    if w.saturating_mul(h) > cfg.max_torus_cells {
        return Err(Failure(
            INPUT,
            format!(
                "torus {w}x{h} exceeds max_torus_cells = {}",
                cfg.max_torus_cells
            ),
        ));
    }
    Ok(())
}

fn cmd_solve(
    tileset: &Path,
    w: usize,
    h: usize,
    budget: u64,
    out: Option<&Path>,
    cfg: &Config,
) -> Outcome {
    let s = load_set(tileset)?;
    check_torus_size(w, h, cfg)?;
    match solve_torus(&s, w, h, budget)? {
        TorusSearch::Found(g) => {
            match out {
                Some(p) => write(p, g.to_text().as_bytes())?,
                None => print!("{}", g.to_text()),
            }
            Ok(OK)
        }
        TorusSearch::NoTiling => {
            println!("no {w}x{h} torus tiling");
            Ok(NEGATIVE)
        }
        TorusSearch::BudgetExhausted => {
            println!("unknown: budget of {budget} nodes exhausted");
            Ok(BUDGET)
        }
    }
}

fn cmd_assemble(tileset: &Path, tiling: &Path, outdir: &Path, cfg: &Config) -> Outcome {
    let s = load_set(tileset)?;
    let g = TorusTiling::parse(&read(tiling)?)
        .map_err(|e| Failure(INPUT, format!("{}: {e}", tiling.display())))?;
    check_torus_size(g.width(), g.height(), cfg)?;
    if g.cells().iter().any(|&t| t >= s.n()) {
        return Err(Failure(
            INPUT,
            format!("{}: tile index out of range", tiling.display()),
        ));
    }
    let r = reduce(&s)?;
    let result = if valid_torus(&s, &g)? {
        assemble_and_verify(&s, &r, &g)
    } else {
        assemble(&s, &r, &g)
    };
    let a = match result {
        Ok(a) => a,
        Err(Error::Assembly { stage, detail }) => {
            println!("failed stage: {stage}");
            println!("{detail}");
            return Ok(NEGATIVE);
        }
        Err(e) => return Err(e.into()),
    };
    if !valid_torus(&s, &g)? {
        // the geometry closed up even though the tiling does not
        println!("failed stage: tiling check");
        return Ok(NEGATIVE);
    }
    create_dir(outdir)?;
    write(
        &outdir.join("assembly.manifest"),
        a.to_manifest().as_bytes(),
    )?;
    println!(
        "verified: {} linkers, {} encoders, {} fillers over a domain of {} voxels",
        a.count(PieceKind::Linker),
        a.count(PieceKind::Encoder),
        a.count(PieceKind::Filler),
        a.basis.determinant().unsigned_abs()
    );
    Ok(OK)
}

fn load_manifest(path: &Path) -> Result<Assembly, Failure> {
    Assembly::from_manifest(&read(path)?)
        .map_err(|e| Failure(INPUT, format!("{}: {e}", path.display())))
}

fn cmd_verify(tileset: &Path, manifest: &Path) -> Outcome {
    let s = load_set(tileset)?;
    let a = load_manifest(manifest)?;
    let r = reduce(&s)?;
    if verify_periodic_partition(&a.pieces(&r), &a.basis)? {
        println!("exact partition: yes");
        Ok(OK)
    } else {
        println!("exact partition: no");
        Ok(NEGATIVE)
    }
}

fn is_manifest(text: &str) -> bool {
    text.lines().any(|l| l.trim_start().starts_with("basis"))
}

fn cmd_export(input: &Path, format: &str, tileset: Option<&Path>, out: Option<&Path>) -> Outcome {
    let format = Format::from_str(format, true)
        .map_err(|_| Failure(INPUT, format!("unknown format `{format}`")))?;
    let text = read(input)?;
    let cells = if is_manifest(&text) {
        let tileset = tileset
            .ok_or_else(|| Failure(INPUT, "exporting an assembly needs --tileset".into()))?;
        let a = Assembly::from_manifest(&text)
            .map_err(|e| Failure(INPUT, format!("{}: {e}", input.display())))?;
        let r = reduce(&load_set(tileset)?)?;
        let all: Vec<Cell> = a
            .pieces(&r)
            .iter()
            .flat_map(|(c, off)| c.iter().map(move |&v| v + *off))
            .collect();
        CellSet::from_vec(all)
    } else {
        parse_cell_list(&text).map_err(|e| Failure(INPUT, format!("{}: {e}", input.display())))?
    };
    let mut bytes = Vec::new();
    match format {
        Format::Cells => write_cell_list(&cells, &mut bytes),
        Format::Layers => write_layers(&cells, &mut bytes),
        Format::Obj => write_obj(&cells, &mut bytes),
        Format::Bitmap => write_bitmap(&cells, &mut bytes),
    }
    .expect("writing to memory");
    match out {
        Some(p) => write(p, &bytes)?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure(INPUT, format!("stdout: {e}")))?,
    }
    Ok(OK)
}

fn cmd_planecheck(path: &Path) -> Outcome {
    let text = read(path)?;
    let cells =
        parse_cell_list(&text).map_err(|e| Failure(INPUT, format!("{}: {e}", path.display())))?;
    if cells.iter().any(|c| c.z != cells.cells()[0].z) {
        return Err(Failure(INPUT, "polyomino cells must share one z".into()));
    }
    let word = boundary_word(&project(&cells))?;
    println!("boundary word: {word}");
    match bn_exact_factorization(&word) {
        Some(f) => {
            let [a, b, c] = f
                .factors(&word)
                .map(|s| s.iter().map(|st| format!("{st:?}")).collect::<String>());
            println!("exact tile: yes");
            println!("factors: A={a} B={b} C={c}");
            Ok(OK)
        }
        None => {
            println!("exact tile: no");
            Ok(NEGATIVE)
        }
    }
}
