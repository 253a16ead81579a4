use bitvec::prelude::*;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::BoxDomain;

/// Largest number of cells a grid may hold.
pub const MAX_GRID_CELLS: usize = 1 << 26;

/// One bit per cell of a uniform grid over a box. Cells are numbered with
/// axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SignGrid {
    domain: BoxDomain,
    resolution: Vec<usize>,
    flags: BitVec<u64, Lsb0>,
    /// Free-form `(key, value)` pairs carried into exports.
    pub metadata: Vec<(String, String)>,
}

pub(crate) fn checked_cell_count(resolution: &[usize]) -> Result<usize> {
    if resolution.is_empty() {
        return Err(Error::InvalidArgument("grid needs at least one axis".into()));
    }
    if let Some(&n) = resolution.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!("resolution {n} is below 2")));
    }
    resolution
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .filter(|&total| total <= MAX_GRID_CELLS)
        .ok_or_else(|| Error::Budget(format!("grid {resolution:?} exceeds {MAX_GRID_CELLS} cells")))
}

impl SignGrid {
    /// An all-clear grid.
    pub fn empty(domain: BoxDomain, resolution: Vec<usize>) -> Result<Self> {
        if resolution.len() != domain.dim() {
            return Err(Error::Shape(format!(
                "{} resolutions for a {}-dimensional box",
                resolution.len(),
                domain.dim()
            )));
        }
        let total = checked_cell_count(&resolution)?;
        Ok(Self {
            domain,
            resolution,
            flags: bitvec![u64, Lsb0; 0; total],
            metadata: Vec::new(),
        })
    }

    /// Builds a grid from one boolean per cell.
    pub fn from_flags(domain: BoxDomain, resolution: Vec<usize>, flags: &[bool]) -> Result<Self> {
        let mut grid = Self::empty(domain, resolution)?;
        if flags.len() != grid.len() {
            return Err(Error::Shape(format!("{} flags for {} cells", flags.len(), grid.len())));
        }
        for (i, &f) in flags.iter().enumerate() {
            grid.flags.set(i, f);
        }
        Ok(grid)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn get(&self, cell: usize) -> bool {
        self.flags[cell]
    }

    pub fn set(&mut self, cell: usize, value: bool) {
        self.flags.set(cell, value);
    }

    pub fn count_flagged(&self) -> usize {
        self.flags.count_ones()
    }

    pub fn flagged(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags.iter_ones()
    }

    /// Multi-index of a cell.
    pub fn cell_index(&self, mut cell: usize) -> Vec<usize> {
        self.resolution
            .iter()
            .map(|&n| {
                let i = cell % n;
                cell /= n;
                i
            })
            .collect()
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.resolution)
            .rev()
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        self.domain.width(axis) / self.resolution[axis] as f64
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        self.cell_index(cell)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.domain.lo[a] + (i as f64 + 0.5) * self.cell_width(a))
            .collect()
    }

    /// Lower and upper corner of a cell.
    pub fn cell_bounds(&self, cell: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.cell_index(cell);
        let lo: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| self.domain.lo[a] + i as f64 * self.cell_width(a))
            .collect();
        let hi = lo.iter().enumerate().map(|(a, &l)| l + self.cell_width(a)).collect();
        (lo, hi)
    }

    /// Fraction of the box covered by flagged cells.
    pub fn flagged_fraction(&self) -> f64 {
        self.count_flagged() as f64 / self.len() as f64
    }

    /// Cell-wise `self ⊆ other`; `None` when the grids differ in shape.
    pub fn is_subset_of(&self, other: &SignGrid) -> Option<bool> {
        if self.resolution != other.resolution {
            return None;
        }
        Some(self.flags.iter_ones().all(|i| other.flags[i]))
    }

    /// Cells flagged in exactly one of the two grids.
    pub fn disagreement(&self, other: &SignGrid) -> Option<usize> {
        if self.resolution != other.resolution {
            return None;
        }
        Some((self.flags.clone() ^ other.flags.clone()).count_ones())
    }

    /// Run-length encoded CSV with a `#` comment header.
    pub fn to_rle_csv(&self) -> String {
        let mut out = String::new();
        let boxes: Vec<String> = (0..self.dim())
            .map(|a| format!("{}:{}", self.domain.lo[a], self.domain.hi[a]))
            .collect();
        out.push_str(&format!("# box={}\n", boxes.join(",")));
        let res: Vec<String> = self.resolution.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!("# resolution={}\n", res.join(",")));
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str("value,run\n");
        let mut iter = self.flags.iter().by_vals();
        if let Some(mut current) = iter.next() {
            let mut run = 1usize;
            for bit in iter {
                if bit == current {
                    run += 1;
                } else {
                    out.push_str(&format!("{},{run}\n", u8::from(current)));
                    current = bit;
                    run = 1;
                }
            }
            out.push_str(&format!("{},{run}\n", u8::from(current)));
        }
        out
    }

    pub fn from_rle_csv(text: &str) -> Result<Self> {
        let parse_err = |msg: String| Error::Parse(format!("sign grid: {msg}"));
        let mut domain = None;
        let mut resolution = None;
        let mut metadata = Vec::new();
        let mut runs = Vec::new();
        let mut seen_header = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| parse_err(format!("bad header line `{line}`")))?;
                match k {
                    "box" => {
                        let mut lo = Vec::new();
                        let mut hi = Vec::new();
                        for part in v.split(',') {
                            let (a, b) = part
                                .split_once(':')
                                .ok_or_else(|| parse_err(format!("bad box `{part}`")))?;
                            lo.push(a.parse::<f64>().map_err(|e| parse_err(e.to_string()))?);
                            hi.push(b.parse::<f64>().map_err(|e| parse_err(e.to_string()))?);
                        }
                        domain = Some(BoxDomain::new(lo, hi)?);
                    }
                    "resolution" => {
                        resolution = Some(
                            v.split(',')
                                .map(|n| n.parse::<usize>().map_err(|e| parse_err(e.to_string())))
                                .collect::<Result<Vec<_>>>()?,
                        );
                    }
                    _ => metadata.push((k.to_string(), v.to_string())),
                }
            } else if !seen_header {
                if line != "value,run" {
                    return Err(parse_err(format!("expected `value,run`, got `{line}`")));
                }
                seen_header = true;
            } else {
                let (v, n) = line
                    .split_once(',')
                    .ok_or_else(|| parse_err(format!("bad row `{line}`")))?;
                let bit = match v {
                    "0" => false,
                    "1" => true,
                    other => return Err(parse_err(format!("bad value `{other}`"))),
                };
                let n = n.parse::<usize>().map_err(|e| parse_err(e.to_string()))?;
                runs.push((bit, n));
            }
        }
        let domain = domain.ok_or_else(|| parse_err("missing box".into()))?;
        let resolution = resolution.ok_or_else(|| parse_err("missing resolution".into()))?;
        let mut grid = Self::empty(domain, resolution)?;
        let mut pos = 0usize;
        for (bit, n) in runs {
            if pos + n > grid.len() {
                return Err(parse_err("runs exceed the cell count".into()));
            }
            grid.flags[pos..pos + n].fill(bit);
            pos += n;
        }
        if pos != grid.len() {
            return Err(parse_err(format!("runs cover {pos} of {} cells", grid.len())));
        }
        grid.metadata = metadata;
        Ok(grid)
    }
}

/// Flags every cell whose center satisfies `f(center) ≥ threshold`.
/// Evaluation errors are reported with the failing cell index.
pub fn sign_grid<F>(f: F, domain: &BoxDomain, resolution: &[usize], threshold: f64) -> Result<SignGrid>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut grid = SignGrid::empty(domain.clone(), resolution.to_vec())?;
    let flags: Vec<bool> = (0..grid.len())
        .into_par_iter()
        .map(|cell| {
            let x = grid.cell_center(cell);
            f(&x).map(|v| v >= threshold).map_err(|e| Error::Cell {
                cell,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<bool>>>()?;
    for (i, b) in flags.into_iter().enumerate() {
        grid.flags.set(i, b);
    }
    grid.metadata.push(("threshold".into(), threshold.to_string()));
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(x: &[f64]) -> Result<f64> {
        Ok(1.0 - x[0] * x[0] - x[1] * x[1])
    }

    #[test]
    fn indexing_round_trip() {
        let g = SignGrid::empty(BoxDomain::cube(3, -1.0, 1.0).unwrap(), vec![3, 4, 5]).unwrap();
        for cell in 0..g.len() {
            assert_eq!(g.linear_index(&g.cell_index(cell)), cell);
        }
        assert_eq!(g.cell_index(1), vec![1, 0, 0]);
        assert_eq!(g.cell_center(0), vec![-1.0 + 1.0 / 3.0, -0.75, -0.8]);
    }

    #[test]
    fn disk_area_and_empty_threshold() {
        let domain = BoxDomain::cube(2, -2.0, 2.0).unwrap();
        let g = sign_grid(disk, &domain, &[64, 64], 0.0).unwrap();
        let area = g.flagged_fraction() * 16.0;
        assert!((area - std::f64::consts::PI).abs() < 0.1, "{area}");
        let none = sign_grid(disk, &domain, &[64, 64], 1.5).unwrap();
        assert_eq!(none.count_flagged(), 0);
    }

    #[test]
    fn errors_carry_the_cell() {
        let domain = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let err = sign_grid(
            |x: &[f64]| {
                if x[0] > 0.5 {
                    Err(Error::InvalidArgument("boom".into()))
                } else {
                    Ok(0.0)
                }
            },
            &domain,
            &[4],
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Cell { cell: 2, .. }));
    }

    #[test]
    fn rle_round_trip() {
        let domain = BoxDomain::cube(2, -2.0, 2.0).unwrap();
        let mut g = sign_grid(disk, &domain, &[16, 8], 0.0).unwrap();
        g.metadata.push(("criterion".into(), "test".into()));
        let text = g.to_rle_csv();
        let back = SignGrid::from_rle_csv(&text).unwrap();
        assert_eq!(back, g);
        assert!(SignGrid::from_rle_csv("value,run\n1,3\n").is_err());
    }

    #[test]
    fn rejects_tiny_or_huge_resolutions() {
        let domain = BoxDomain::cube(2, 0.0, 1.0).unwrap();
        assert!(SignGrid::empty(domain.clone(), vec![1, 4]).is_err());
        assert!(matches!(
            SignGrid::empty(domain, vec![1 << 14, 1 << 14]),
            Err(Error::Budget(_))
        ));
    }
}
