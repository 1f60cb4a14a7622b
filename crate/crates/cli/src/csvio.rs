//! CSV files with a header row and 17 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use selfsim::{BoundaryPair, Grid, Profile};

use crate::error::CliError;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_table(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>, flush_every: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(header)?;
    for (i, row) in rows.enumerate() {
        w.write_record(row.iter().map(|&x| fmt(x)))?;
        if (i + 1) % flush_every.max(1) == 0 {
            w.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `y, U_1..U_m, Q_1..Q_m`.
pub fn write_profile(path: &Path, p: &Profile) -> Result<(), CliError> {
    let m = p.dim();
    let mut header = vec!["y".to_string()];
    header.extend((1..=m).map(|k| format!("U_{k}")));
    header.extend((1..=m).map(|k| format!("Q_{k}")));
    let rows = (0..p.grid.n_points()).map(|i| {
        let mut r = vec![p.grid.node(i)];
        r.extend((0..m).map(|k| p.u[k][i]));
        r.extend((0..m).map(|k| p.q[k][i]));
        r
    });
    write_table(path, &header, rows, usize::MAX)
}

/// Columns `y, C_1..C_n` of a lifted profile.
pub fn write_columns(path: &Path, grid: &Grid, prefix: &str, cols: &[Vec<f64>]) -> Result<(), CliError> {
    let mut header = vec!["y".to_string()];
    header.extend((1..=cols.len()).map(|k| format!("{prefix}_{k}")));
    let rows = (0..grid.n_points()).map(|i| {
        let mut r = vec![grid.node(i)];
        r.extend(cols.iter().map(|c| c[i]));
        r
    });
    write_table(path, &header, rows, usize::MAX)
}

/// Reads a profile written by [`write_profile`]; the boundary limits come from the caller.
pub fn read_profile(path: &Path, boundary: Option<BoundaryPair>) -> Result<Profile, CliError> {
    let bad = |msg: String| CliError::Validation(vec![format!("{}: {msg}", path.display())]);
    let mut r = csv::Reader::from_reader(File::open(path)?);
    let header = r.headers()?.clone();
    let cols = header.len();
    if cols < 3 || cols % 2 == 0 || &header[0] != "y" {
        return Err(bad("expected columns y, U_1..U_m, Q_1..Q_m".into()));
    }
    let m = (cols - 1) / 2;
    for k in 0..m {
        if header[1 + k] != format!("U_{}", k + 1) || header[1 + m + k] != format!("Q_{}", k + 1) {
            return Err(bad(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
        }
    }
    let mut y = Vec::new();
    let mut u = vec![Vec::new(); m];
    let mut q = vec![Vec::new(); m];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", line + 2)))?;
        y.push(vals[0]);
        for k in 0..m {
            u[k].push(vals[1 + k]);
            q[k].push(vals[1 + m + k]);
        }
    }
    let grid = grid_for(&y).ok_or_else(|| bad("y column is not a symmetric uniform grid".into()))?;
    let boundary = match boundary {
        Some(b) => b,
        None => BoundaryPair::new(
            u.iter().map(|c| c[0]).collect(),
            u.iter().map(|c| c[c.len() - 1]).collect(),
        )?,
    };
    Ok(Profile::new(grid, u, q, boundary)?)
}

/// The grid whose nodes reproduce `y` exactly. Several half-widths a few ulps apart can
/// do so; the one with the shortest decimal form is taken.
fn grid_for(y: &[f64]) -> Option<Grid> {
    let n = y.len();
    let start = -y[0];
    (-8i64..=8)
        .filter_map(|k| {
            let half = f64::from_bits((start.to_bits() as i64 + k) as u64);
            let g = Grid::new(half, n).ok()?;
            (0..n).all(|i| g.node(i) == y[i]).then(|| (half.to_string().len(), k.abs(), g))
        })
        .min_by_key(|&(len, dist, _)| (len, dist))
        .map(|(_, _, g)| g)
}

pub fn write_json(path: &Path, v: &serde_json::Value) -> Result<(), CliError> {
    let mut f = File::create(path)?;
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_round_trip_is_exact() {
        let grid = Grid::new(7.3, 101).unwrap();
        let u: Vec<f64> = grid.nodes().iter().map(|y| (0.3 * y).tanh() / 3.0).collect();
        let q: Vec<f64> = grid.nodes().iter().map(|y| (-y * y).exp() * std::f64::consts::PI).collect();
        let b = BoundaryPair::scalar(-1.0 / 3.0, 1.0 / 3.0).unwrap();
        let p = Profile::new(grid, vec![u], vec![q], b.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_profile(&path, &p).unwrap();
        let back = read_profile(&path, Some(b)).unwrap();
        assert_eq!(back, p);
    }
}
