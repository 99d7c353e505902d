use std::fmt::Write as _;
use std::path::Path;

use super::grid::TestGrid;
use super::pipeline::CellStats;
use super::reconstruct::{ReconstructionResult, ResponseTable};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::geometry::Region;

const ENERGY_HEADER: &str = "i,j,k,energy";

/// One `i,j,k,energy` row per potential.
pub fn write_energy_table(path: impl AsRef<Path>, table: &ResponseTable) -> Result<()> {
    let mut out = String::from(ENERGY_HEADER);
    out.push('\n');
    for ((i, j, k), e) in table {
        writeln!(out, "{i},{j},{k},{e:e}").expect("writing to a string");
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_energy_table(path: impl AsRef<Path>) -> Result<ResponseTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MissingArtifact(format!("{}: {e}", path.display())))?;
    let bad = |n: usize, msg: &str| Error::Parse(format!("{} line {}: {msg}", path.display(), n + 1));
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, h)| h.trim()) != Some(ENERGY_HEADER) {
        return Err(bad(0, "expected header `i,j,k,energy`"));
    }
    let mut table = ResponseTable::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let [i, j, k, e] = cols.as_slice() else {
            return Err(bad(n, "expected four columns"));
        };
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(n, "bad index"));
        let energy = e.parse::<f64>().map_err(|_| bad(n, "bad energy"))?;
        table.insert((int(i)?, int(j)?, int(k)?), energy);
    }
    Ok(table)
}

/// Plain PGM raster of the verdicts, top row first: 255 kept, 0 discarded.
pub fn write_pgm(path: impl AsRef<Path>, grid: &TestGrid, result: &ReconstructionResult) -> Result<()> {
    let n = grid.cells;
    let mut out = format!("P2\n{n} {n}\n255\n");
    for row in (0..n).rev() {
        let line: Vec<&str> = (0..n)
            .map(|col| {
                let kept = result.cells.get(grid.index(row, col)).is_some_and(|c| c.kept());
                if kept { "255" } else { "0" }
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a raster written by [`write_pgm`] into `(row, col) → kept`, rows counted upward.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Vec<Vec<bool>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut tokens = text.split_whitespace();
    let bad = || Error::Parse(format!("{}: not a plain PGM raster", path.display()));
    if tokens.next() != Some("P2") {
        return Err(bad());
    }
    let mut num = || tokens.next().and_then(|t| t.parse::<usize>().ok()).ok_or_else(bad);
    let (w, h, _max) = (num()?, num()?, num()?);
    let mut rows = vec![vec![false; w]; h];
    for r in (0..h).rev() {
        for c in 0..w {
            rows[r][c] = num()? > 0;
        }
    }
    Ok(rows)
}

/// `part,x,y` vertices of the region outline.
pub fn write_outline_csv(path: impl AsRef<Path>, region: &Region, samples: usize) -> Result<()> {
    let mut out = String::from("part,x,y\n");
    for (part, ring) in region.outline(samples).iter().enumerate() {
        for p in ring {
            writeln!(out, "{part},{:e},{:e}", p.x, p.y).expect("writing to a string");
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Text summary followed by one row per test anomaly.
pub fn write_results_manifest(
    path: impl AsRef<Path>,
    scenario: &Scenario,
    grid: &TestGrid,
    result: &ReconstructionResult,
    stats: &[CellStats],
) -> Result<()> {
    let (coeff_unit, _, energy_unit) = scenario.physics.units();
    let kept = result.cells.iter().filter(|c| c.kept()).count();
    let mut out = String::new();
    writeln!(out, "# physics {}", scenario.physics.name()).unwrap();
    writeln!(out, "# background {:e} {coeff_unit}", scenario.background).unwrap();
    writeln!(out, "# transducer {:e} V per {energy_unit}", scenario.transducer).unwrap();
    writeln!(out, "# grid {0}x{0}, cell side {1:e} m", grid.cells, grid.side).unwrap();
    writeln!(out, "# potentials {}", result.potential_count).unwrap();
    writeln!(out, "# seed {}", result.seed).unwrap();
    writeln!(out, "# kept {kept} of {}", result.cells.len()).unwrap();
    writeln!(out, "test,row,col,verdict,worst_margin,worst_j,worst_k,evaluated,missing,potentials").unwrap();
    for c in &result.cells {
        let (row, col) = grid.position(c.test);
        let verdict = if c.kept() { "kept" } else { "discarded" };
        let margin = c.worst_margin.map_or(String::new(), |m| format!("{m:e}"));
        let (j, k) = c.worst.map_or((String::new(), String::new()), |(j, k)| (j.to_string(), k.to_string()));
        let count = stats.get(c.test).map_or(0, |s| s.potentials);
        writeln!(out, "{},{row},{col},{verdict},{margin},{j},{k},{},{},{count}", c.test, c.evaluated, c.missing).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}
