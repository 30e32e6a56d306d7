//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use polytile::assembler::{
    assemble_and_verify, assemble_with_flip, decode_matching_layers, BitFlip, Stage,
};
use polytile::blocks::{block_cells, build_block, mating_matrix, BlockKind, Facing};
use polytile::diffsets::{
    encoder_levels, is_golomb, is_modular_golomb, modular_powers_ruler, powers_ruler,
};
use polytile::planecheck::{
    bn_exact_factorization, boundary_word, project, region_coverable, witness_region,
};
use polytile::reduction::{level_slice, reduce};
use polytile::voxel::{verify_periodic_partition, CellSet};
use polytile::wang::{
    parse_wang_set, solve_torus, valid_torus, TorusSearch, TorusTiling, WangTile, WangTileSet,
};
use polytile::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))
}

fn p1_rulers() -> Result<(), String> {
    let start = Instant::now();
    for n in 1..=20 {
        ensure(
            is_golomb(&powers_ruler::<u64>(n).unwrap()),
            format!("powers_ruler({n})"),
        )?;
    }
    for n in 2..=16 {
        ensure(
            is_modular_golomb(&modular_powers_ruler::<u64>(n).unwrap()).unwrap(),
            format!("modular({n})"),
        )?;
    }
    for n in 1..=5u32 {
        let (set, total) = encoder_levels::<u64>(n).unwrap();
        ensure(total == (1 << (3 * n + 1)) + 2, format!("total for n={n}"))?;
        ensure(set.modulus() == Some(total), "modulus")?;
        ensure(
            is_modular_golomb(&set).unwrap(),
            format!("encoder_levels({n})"),
        )?;
    }
    within(start, Duration::from_secs(1))
}

fn level_count(cells: &CellSet) -> u64 {
    let mut l = 1;
    while !level_slice(cells, l + 1).is_empty() {
        l += 1;
    }
    l
}

fn p2_constants() -> Result<(), String> {
    let s = parse_wang_set("0 1 2 3\n1 2 3 0\n2 3 0 1\n").unwrap();
    ensure(s.n() == 3 && s.m() == 4 && s.t() == 2, "set shape")?;
    let r = reduce(&s).map_err(|e| e.to_string())?;
    ensure(r.plan.total_levels() == 1026, "plan levels")?;
    let enc = level_count(r.encoder.cells());
    let link = level_count(r.linker.cells());
    // the linker's up bump pokes two voxels into what would be level 1027
    ensure(enc == 1026, format!("encoder has {enc} levels"))?;
    ensure(
        link == 1027
            && level_slice(r.linker.cells(), 1027).len() == polytile::blocks::up_bump_cells().len(),
        format!("linker has {link} levels"),
    )?;
    let want: Vec<u64> = (2..=10).map(|k| 1u64 << k).collect();
    ensure(
        r.plan.encoding_levels() == want.as_slice(),
        "encoding levels",
    )?;
    ensure(r.filler.volume() == 9, "filler volume")
}

fn p3_blocks() -> Result<(), String> {
    let start = Instant::now();
    let class1 = [
        BlockKind::N,
        BlockKind::F,
        BlockKind::E,
        BlockKind::M,
        BlockKind::MPlus,
    ];
    let mut count = 0;
    for kind in BlockKind::ALL
        .into_iter()
        .filter(|&k| k != BlockKind::Cross)
    {
        count += 1;
        let facings: &[Option<Facing>] = if class1.contains(&kind) {
            &[Some(Facing::North), Some(Facing::South)]
        } else {
            &[None]
        };
        for &f in facings {
            let b = build_block(kind, f).map_err(|e| e.to_string())?;
            ensure(
                b.cells().is_connected(),
                format!("{kind} {f:?} disconnected"),
            )?;
        }
        if class1.contains(&kind) {
            let n = block_cells(kind, Some(Facing::North)).unwrap();
            let s = block_cells(kind, Some(Facing::South)).unwrap();
            ensure(
                n.rotate_z_180() == s.canonical(),
                format!("{kind} south is not the turned north"),
            )?;
        }
    }
    ensure(count == 11, "eleven blocks")?;
    for case in mating_matrix().map_err(|e| e.to_string())? {
        ensure(
            case.holds(),
            format!(
                "mating case {}: expected {}, found {}",
                case.name, case.expected, case.found
            ),
        )?;
    }
    within(start, Duration::from_secs(30))
}

fn p4_planecheck() -> Result<(), String> {
    let start = Instant::now();
    let cells = |v: &[(i32, i32)]| -> CellSet {
        v.iter()
            .map(|&(x, y)| polytile::voxel::Cell::new(x, y, 0))
            .collect()
    };
    let square = project(&cells(&[(0, 0)]));
    let domino = project(&cells(&[(0, 0), (1, 0)]));
    let big_square = project(&cells(&[(0, 0), (1, 0), (0, 1), (1, 1)]));
    for p in [&square, &domino, &big_square] {
        ensure(
            bn_exact_factorization(&boundary_word(p).unwrap()).is_some(),
            "tiler without factorization",
        )?;
    }
    let cross = project(polytile::blocks::build_cross().cells());
    ensure(
        bn_exact_factorization(&boundary_word(&cross).unwrap()).is_none(),
        "cross factorizes",
    )?;
    let region = witness_region(&cross, 15).ok_or("no witness within 15 x 15")?;
    ensure(!region_coverable(&cross, &region), "witness is coverable")?;
    within(start, Duration::from_secs(60))
}

fn decode_matches(
    s: &WangTileSet,
    g: &TorusTiling,
    a: &polytile::assembler::Assembly,
    r: &polytile::reduction::Reduction,
) -> Result<(), String> {
    let got = decode_matching_layers(a, r).map_err(|e| e.to_string())?;
    ensure(got.len() == g.width() * g.height(), "one decode per column")?;
    for (i, j, tile) in got {
        ensure(
            tile == s.tile(g.at(i as i64, j as i64)),
            format!("column ({i}, {j}) decodes to {tile}"),
        )?;
    }
    Ok(())
}

fn p5_small() -> Result<(), String> {
    let start = Instant::now();
    let s = parse_wang_set("0 0 0 0\n").unwrap();
    ensure(s.n() == 1 && s.t() == 1, "set shape")?;
    let r = reduce(&s).map_err(|e| e.to_string())?;
    let g = TorusTiling::uniform(1, 1, 0).unwrap();
    let a = assemble_and_verify(&s, &r, &g).map_err(|e| e.to_string())?;
    ensure(
        verify_periodic_partition(&a.pieces(&r), &a.basis).unwrap(),
        "not a partition",
    )?;
    decode_matches(&s, &g, &a, &r)?;
    within(start, Duration::from_secs(60))
}

fn p6_medium() -> Result<(), String> {
    let start = Instant::now();
    let s = parse_wang_set("0 1 0 1\n0 0 0 0\n").unwrap();
    let g = match solve_torus(&s, 2, 1, 1_000_000).unwrap() {
        TorusSearch::Found(g) => g,
        other => return Err(format!("solver: {other:?}")),
    };
    let r = reduce(&s).map_err(|e| e.to_string())?;
    let a = assemble_and_verify(&s, &r, &g).map_err(|e| e.to_string())?;
    ensure(
        verify_periodic_partition(&a.pieces(&r), &a.basis).unwrap(),
        "not a partition",
    )?;
    decode_matches(&s, &g, &a, &r)?;
    let flip = BitFlip {
        i: 0,
        j: 0,
        row: Facing::North,
        col: 0,
    };
    match assemble_with_flip(&s, &r, &g, flip) {
        Err(Error::Assembly {
            stage: Stage::MatchingOverlap,
            ..
        }) => {}
        other => return Err(format!("bit flip gave {other:?}")),
    }
    within(start, Duration::from_secs(300))
}

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn p7_scale() -> Result<(), String> {
    let start = Instant::now();
    let s = parse_wang_set("0 1 2 1\n2 1 0 1\n3 3 3 3\n").unwrap();
    ensure(s.n() == 3 && s.t() == 2, "set shape")?;
    let g = match solve_torus(&s, 2, 2, 1_000_000).unwrap() {
        TorusSearch::Found(g) => g,
        other => return Err(format!("solver: {other:?}")),
    };
    let r = reduce(&s).map_err(|e| e.to_string())?;
    let a = assemble_and_verify(&s, &r, &g).map_err(|e| e.to_string())?;
    let det = a.basis.determinant().unsigned_abs();
    ensure(
        (50_000_000..200_000_000).contains(&det),
        format!("domain of {det} voxels"),
    )?;
    decode_matches(&s, &g, &a, &r)?;
    if let Some(kib) = peak_rss_kib() {
        ensure(kib < 1024 * 1024, format!("peak memory {kib} KiB"))?;
    }
    within(start, Duration::from_secs(600))
}

fn enumerate_exists(s: &WangTileSet, w: usize, h: usize) -> bool {
    let n = s.n();
    let mut cells = vec![0usize; w * h];
    loop {
        let g = TorusTiling::new(w, h, cells.clone()).unwrap();
        let ok = (0..h).all(|y| {
            (0..w).all(|x| {
                let here: WangTile = s.tile(cells[y * w + x]);
                let east = s.tile(cells[y * w + (x + 1) % w]);
                let north = s.tile(cells[((y + 1) % h) * w + x]);
                here.east == east.west && here.north == north.south
            })
        });
        if ok {
            assert!(valid_torus(s, &g).unwrap());
            return true;
        }
        let mut k = 0;
        loop {
            if k == cells.len() {
                return false;
            }
            cells[k] += 1;
            if cells[k] < n {
                break;
            }
            cells[k] = 0;
            k += 1;
        }
    }
}

fn p8_solver() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for round in 0..100 {
        let n = rng.gen_range(1..=3);
        let colors = rng.gen_range(1..=3u32);
        let text: String = (0..n)
            .map(|_| {
                let e: Vec<String> = (0..4)
                    .map(|_| rng.gen_range(0..colors).to_string())
                    .collect();
                e.join(" ") + "\n"
            })
            .collect();
        let s = parse_wang_set(&text).unwrap();
        for w in 1..=9 {
            for h in 1..=9 / w {
                let oracle = enumerate_exists(&s, w, h);
                let got = solve_torus(&s, w, h, u64::MAX).unwrap();
                let agree = match &got {
                    TorusSearch::Found(g) => oracle && valid_torus(&s, g).unwrap(),
                    TorusSearch::NoTiling => !oracle,
                    TorusSearch::BudgetExhausted => false,
                };
                ensure(
                    agree,
                    format!("round {round}: {w}x{h} on\n{text}solver {got:?}, oracle {oracle}"),
                )?;
            }
        }
    }
    Ok(())
}

fn main() {
    let checks: [(&str, &str, Check); 8] = [
        ("P1", "ruler suite", p1_rulers),
        ("P2", "construction constants", p2_constants),
        ("P3", "block suite", p3_blocks),
        ("P4", "plane check", p4_planecheck),
        ("P5", "end-to-end small", p5_small),
        ("P6", "end-to-end medium", p6_medium),
        ("P7", "scale check", p7_scale),
        ("P8", "solver oracle", p8_solver),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in checks {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(_) => Err("panicked".to_string()),
        };
        let took = start.elapsed();
        match outcome {
            Ok(()) => println!("{id} PASS {name} ({took:.2?})"),
            Err(why) => {
                println!("{id} FAIL {name} ({took:.2?}): {why}");
                failed.push(id);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
