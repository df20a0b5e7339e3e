//! Plain-text profile dumps: a metadata header followed by rows `t, rho, r, v1, v2, v3`.

use std::io::{BufRead, Write};

use crate::grid::RadialGrid;
use crate::{Error, Result, Vec3};

pub const SNAPSHOT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub v: Vec<Vec3>,
}

/// Header fields needed to rebuild the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub m: u32,
    pub rho_min: f64,
    pub rho_max: f64,
    pub n: usize,
}

impl SnapshotMeta {
    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.rho_min, self.rho_max, self.n)
    }
}

pub fn write_snapshots<W: Write>(
    mut w: W,
    m: u32,
    grid: &RadialGrid,
    snaps: &[(f64, Vec<Vec3>)],
) -> Result<()> {
    writeln!(w, "# equiflow snapshot schema {SNAPSHOT_SCHEMA}")?;
    writeln!(w, "# m = {m}")?;
    writeln!(w, "# rho_min = {:.17e}", grid.rho_min())?;
    writeln!(w, "# rho_max = {:.17e}", grid.rho_max())?;
    writeln!(w, "# n = {}", grid.n())?;
    writeln!(w, "# t: time; rho: ln r; r: radius; v1, v2, v3: profile components")?;
    writeln!(w, "t,rho,r,v1,v2,v3")?;
    for (t, v) in snaps {
        grid.check(v)?;
        for (i, x) in v.iter().enumerate() {
            writeln!(
                w,
                "{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                grid.rho()[i],
                grid.r()[i],
                x.x,
                x.y,
                x.z
            )?;
        }
    }
    Ok(())
}

fn meta_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?.trim();
    let (k, v) = rest.split_once('=')?;
    (k.trim() == key).then(|| v.trim())
}

pub fn read_snapshots<R: BufRead>(r: R) -> Result<(SnapshotMeta, Vec<Snapshot>)> {
    let mut m = None;
    let mut rho_min = None;
    let mut rho_max = None;
    let mut n = None;
    let mut header = false;
    let mut snaps: Vec<Snapshot> = Vec::new();
    let bad = |line: usize, msg: String| Error::Parse { line, msg };
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let ln = k + 1;
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(v) = meta_value(line, "m") {
                m = Some(v.parse::<u32>().map_err(|e| bad(ln, e.to_string()))?);
            } else if let Some(v) = meta_value(line, "rho_min") {
                rho_min = Some(v.parse::<f64>().map_err(|e| bad(ln, e.to_string()))?);
            } else if let Some(v) = meta_value(line, "rho_max") {
                rho_max = Some(v.parse::<f64>().map_err(|e| bad(ln, e.to_string()))?);
            } else if let Some(v) = meta_value(line, "n") {
                n = Some(v.parse::<usize>().map_err(|e| bad(ln, e.to_string()))?);
            }
            continue;
        }
        if !header {
            header = true;
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(ln, e.to_string()))?;
        if vals.len() != 6 {
            return Err(bad(ln, format!("expected 6 columns, got {}", vals.len())));
        }
        let point = Vec3::new(vals[3], vals[4], vals[5]);
        match snaps.last_mut() {
            Some(s) if s.t == vals[0] => s.v.push(point),
            _ => snaps.push(Snapshot { t: vals[0], v: vec![point] }),
        }
    }
    let missing = |what: &str| Error::Parse { line: 0, msg: format!("missing header field {what}") };
    let meta = SnapshotMeta {
        m: m.ok_or_else(|| missing("m"))?,
        rho_min: rho_min.ok_or_else(|| missing("rho_min"))?,
        rho_max: rho_max.ok_or_else(|| missing("rho_max"))?,
        n: n.ok_or_else(|| missing("n"))?,
    };
    for s in &snaps {
        if s.v.len() != meta.n {
            return Err(Error::GridMismatch { expected: meta.n, got: s.v.len() });
        }
    }
    Ok((meta, snaps))
}
