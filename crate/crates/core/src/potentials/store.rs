use std::fmt::Write as _;
use std::path::Path;

use super::TestPotential;
use crate::error::{Error, Result};
use crate::fem::BoundaryPotential;

const MANIFEST: &str = "manifest.csv";
const HEADER: &str = "i,j,k,delta,lambda,file";

/// Writes `manifest.csv` and one single-column CSV of unit trace values per potential.
pub fn save_potentials(dir: impl AsRef<Path>, potentials: &[TestPotential]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir.join("traces"))?;
    let mut manifest = String::from(HEADER);
    manifest.push('\n');
    for p in potentials {
        let (i, j, k) = p.key();
        let file = format!("traces/p_{i}_{j}_{k}.csv");
        let mut body = String::with_capacity(24 * p.trace.values().len());
        for v in p.trace.values() {
            writeln!(body, "{v:e}").expect("writing to a string");
        }
        std::fs::write(dir.join(&file), body)?;
        writeln!(manifest, "{i},{j},{k},{:e},{:e},{file}", p.delta, p.lambda()).expect("writing to a string");
    }
    std::fs::write(dir.join(MANIFEST), manifest)?;
    Ok(())
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{MANIFEST} line {line}: {msg}"))
}

/// Reads a directory written by [`save_potentials`].
pub fn load_potentials(dir: impl AsRef<Path>) -> Result<Vec<TestPotential>> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::MissingArtifact(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(parse_err(1, format!("expected header `{HEADER}`"))),
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let [i, j, k, delta, lambda, file] = cols.as_slice() else {
            return Err(parse_err(n + 1, "expected six columns"));
        };
        let int = |s: &str| s.trim().parse::<usize>().map_err(|e| parse_err(n + 1, e));
        let real = |s: &str| s.trim().parse::<f64>().map_err(|e| parse_err(n + 1, e));
        let trace_path = dir.join(file.trim());
        let body = std::fs::read_to_string(&trace_path)
            .map_err(|e| Error::MissingArtifact(format!("{}: {e}", trace_path.display())))?;
        let values = body
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{}: {e}", trace_path.display())))?;
        out.push(TestPotential {
            trace: BoundaryPotential::from_parts(values, real(lambda)?),
            delta: real(delta)?,
            test: int(i)?,
            fictitious: int(j)?,
            index: int(k)?,
        });
    }
    Ok(out)
}
