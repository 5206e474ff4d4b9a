//! Point sets in the unit cube.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::numeric::dist;

/// Default cap on the number of points in a uniform grid.
pub const DEFAULT_GRID_CAP: usize = 4096;

/// Number of quasi-random probe points used for non-grid fill distances.
pub const DEFAULT_PROBE_POINTS: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointSetRepr", into = "PointSetRepr")]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    grid_m: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSetRepr {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_m: Option<usize>,
    points: Vec<Vec<f64>>,
}

impl From<PointSet> for PointSetRepr {
    fn from(p: PointSet) -> Self {
        Self {
            dim: p.dim,
            grid_m: p.grid_m,
            points: p.iter().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl TryFrom<PointSetRepr> for PointSet {
    type Error = Error;

    fn try_from(r: PointSetRepr) -> Result<Self> {
        let mut p = PointSet::new(r.dim, &r.points)?;
        if let Some(m) = r.grid_m {
            let g = uniform_grid_capped(m, r.dim, usize::MAX)?;
            if g.coords != p.coords {
                return arg("grid_m does not match the listed points");
            }
            p.grid_m = Some(m);
        }
        Ok(p)
    }
}

impl PointSet {
    /// Validated point set: coordinates in `[0, 1]`, no duplicates.
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if dim == 0 {
            return arg("point dimension must be >= 1");
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return arg(format!("point {i} has dimension {}, expected {dim}", p.len()));
            }
            if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return arg(format!("point {i} has coordinate {x} outside [0, 1]"));
            }
            coords.extend_from_slice(p);
        }
        let set = Self {
            dim,
            coords,
            grid_m: None,
        };
        for i in 0..set.len() {
            for j in 0..i {
                if set.point(i) == set.point(j) {
                    return arg(format!("duplicate points at indices {j} and {i}"));
                }
            }
        }
        Ok(set)
    }

    /// Unvalidated construction for evaluation sets built internally.
    fn from_coords(dim: usize, coords: Vec<f64>, grid_m: Option<usize>) -> Self {
        debug_assert_eq!(coords.len() % dim, 0);
        Self {
            dim,
            coords,
            grid_m,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn grid_m(&self) -> Option<usize> {
        self.grid_m
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.dim).map(|k| format!("x{k}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let dim = rdr.headers()?.len();
        let mut pts = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let p: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            pts.push(p.map_err(|e| Error::Argument(format!("bad coordinate: {e}")))?);
        }
        Self::new(dim, &pts)
    }
}

/// `{0, 1/m, ..., 1}^d` in row-major order (last coordinate fastest).
pub fn uniform_grid(m: usize, d: usize) -> Result<PointSet> {
    uniform_grid_capped(m, d, DEFAULT_GRID_CAP)
}

pub fn uniform_grid_capped(m: usize, d: usize, cap: usize) -> Result<PointSet> {
    if m == 0 || d == 0 {
        return arg(format!("uniform grid needs m >= 1 and d >= 1, got m={m}, d={d}"));
    }
    let n = lattice_size(m + 1, d)
        .filter(|&n| n <= cap)
        .ok_or_else(|| Error::ResourceLimit(format!("grid (m+1)^d with m={m}, d={d} exceeds cap {cap}")))?;
    let step = 1.0 / m as f64;
    Ok(PointSet::from_coords(
        d,
        lattice(n, m + 1, d, |k| k as f64 * step),
        Some(m),
    ))
}

/// Cell centres `((j + 1/2) / n)` of an `n^d` partition of the cube. They
/// avoid the nodes of every uniform grid whose `m` divides `n`.
pub fn cell_centers(n: usize, d: usize) -> Result<PointSet> {
    if n == 0 || d == 0 {
        return arg("cell_centers needs n >= 1 and d >= 1");
    }
    let total = lattice_size(n, d).ok_or_else(|| Error::ResourceLimit(format!("{n}^{d} cells")))?;
    let inv = 1.0 / n as f64;
    Ok(PointSet::from_coords(
        d,
        lattice(total, n, d, |k| (k as f64 + 0.5) * inv),
        None,
    ))
}

/// First `n` points of the Halton sequence in `[0,1]^d`.
pub fn halton(n: usize, d: usize) -> Result<PointSet> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    if d == 0 || d > PRIMES.len() {
        return arg(format!("halton sequence supports 1..={} dimensions", PRIMES.len()));
    }
    let mut coords = Vec::with_capacity(n * d);
    for i in 1..=n as u64 {
        for &b in &PRIMES[..d] {
            let (mut f, mut r, mut k) = (1.0, 0.0, i);
            while k > 0 {
                f /= b as f64;
                r += f * (k % b) as f64;
                k /= b;
            }
            coords.push(r);
        }
    }
    Ok(PointSet::from_coords(d, coords, None))
}

fn lattice_size(per_axis: usize, d: usize) -> Option<usize> {
    (0..d).try_fold(1usize, |acc, _| acc.checked_mul(per_axis))
}

fn lattice(total: usize, per_axis: usize, d: usize, coord: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        coords.extend(idx.iter().map(|&k| coord(k)));
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
        }
    }
    coords
}

/// Probe used when the caller passes none: a grid 8× finer than the node grid,
/// or 2048 Halton points.
pub fn default_probe(points: &PointSet) -> Result<PointSet> {
    match points.grid_m {
        Some(m) => uniform_grid_capped(8 * m, points.dim, usize::MAX),
        None => halton(DEFAULT_PROBE_POINTS, points.dim),
    }
}

/// `h = sup_x min_j |x - t_j|`. Exact `√d / 2m` for uniform grids, otherwise
/// the maximum over the probe set (a lower estimate).
pub fn fill_distance(points: &PointSet, probe: Option<&PointSet>) -> Result<f64> {
    if points.is_empty() {
        return arg("fill distance of an empty point set");
    }
    if let Some(m) = points.grid_m {
        return Ok((points.dim as f64).sqrt() / (2.0 * m as f64));
    }
    let owned;
    let probe = match probe {
        Some(p) => p,
        None => {
            owned = default_probe(points)?;
            &owned
        }
    };
    if probe.dim != points.dim {
        return arg("probe dimension differs from point dimension");
    }
    Ok(probe
        .iter()
        .map(|x| points.iter().map(|t| dist(x, t)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

/// `q = ½ min_{i≠j} |t_i - t_j|`.
pub fn separation_radius(points: &PointSet) -> Result<f64> {
    if points.len() < 2 {
        return arg("separation radius needs at least two points");
    }
    if let Some(m) = points.grid_m {
        return Ok(0.5 / m as f64);
    }
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            best = best.min(dist(points.point(i), points.point(j)));
        }
    }
    Ok(0.5 * best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = uniform_grid(2, 1).unwrap();
        assert_eq!(g.iter().map(|p| p[0]).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        let g = uniform_grid(1, 2).unwrap();
        let pts: Vec<Vec<f64>> = g.iter().map(<[f64]>::to_vec).collect();
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(uniform_grid(3, 2).unwrap().len(), 16);
        assert!(matches!(uniform_grid(64, 2), Err(Error::ResourceLimit(_))));
        assert!(matches!(uniform_grid(0, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn fill_and_separation() {
        let g = uniform_grid(2, 1).unwrap();
        assert_eq!(fill_distance(&g, None).unwrap(), 0.25);
        assert_eq!(separation_radius(&g).unwrap(), 0.25);
        let g2 = uniform_grid(2, 2).unwrap();
        assert!((fill_distance(&g2, None).unwrap() - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert_eq!(separation_radius(&uniform_grid(4, 3).unwrap()).unwrap(), 0.125);
        let p = PointSet::new(1, &[vec![0.0], vec![0.1], vec![0.9]]).unwrap();
        assert!((separation_radius(&p).unwrap() - 0.05).abs() < 1e-15);
        assert!(separation_radius(&PointSet::new(1, &[vec![0.3]]).unwrap()).is_err());
        assert!(fill_distance(&PointSet::new(1, &[]).unwrap(), None).is_err());
    }

    #[test]
    fn probe_fill_distance_brackets_exact_value() {
        for m in [2usize, 3, 5] {
            let g = uniform_grid(m, 2).unwrap();
            let exact = fill_distance(&g, None).unwrap();
            let mut stripped = g.clone();
            stripped.grid_m = None;
            let probe = uniform_grid_capped(8 * m, 2, usize::MAX).unwrap();
            let est = fill_distance(&stripped, Some(&probe)).unwrap();
            assert!(est <= exact + 1e-15 && est >= exact - 2f64.sqrt() / (8.0 * m as f64));
            assert!(exact <= 2f64.sqrt() / m as f64);
        }
    }

    #[test]
    fn validation() {
        assert!(PointSet::new(1, &[vec![1.5]]).is_err());
        assert!(PointSet::new(1, &[vec![0.5], vec![0.5]]).is_err());
        assert!(PointSet::new(2, &[vec![0.5]]).is_err());
    }

    #[test]
    fn serialization_round_trips() {
        let g = uniform_grid(2, 2).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: PointSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        g.write_csv(&path).unwrap();
        let back = PointSet::read_csv(&path).unwrap();
        assert_eq!(back.len(), 9);
        assert_eq!(back.point(5), g.point(5));
    }

    #[test]
    fn halton_points_are_distinct_and_inside() {
        let h = halton(500, 3).unwrap();
        assert!(h.iter().all(|p| p.iter().all(|x| (0.0..1.0).contains(x))));
        assert!(PointSet::new(3, &h.iter().map(<[f64]>::to_vec).collect::<Vec<_>>()).is_ok());
    }
}
