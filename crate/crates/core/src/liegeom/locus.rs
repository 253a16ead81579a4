//! Sampling of rank-drop loci `{z : rank A_k(z) ≤ ρ}` on uniform grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BracketMode;
use crate::error::{Error, Result};
use crate::network::BoxDomain;
use crate::topology::SignGrid;

use super::brackets::enumerate_brackets;
use super::family::VectorFieldFamily;
use super::matrix::{bracket_matrix_for, minor_index, minors, rank_with_reference};

/// Largest bracket length accepted by the sampler.
pub const MAX_LOCUS_K: usize = 5;
/// Largest ambient dimension accepted by the sampler.
pub const MAX_LOCUS_DIM: usize = 4;
/// Cap on stored minor values (points × minors).
pub const MAX_LOCUS_VALUES: usize = 1 << 27;
/// Relative factor of the default minor threshold.
pub const DEFAULT_EPSILON_FACTOR: f64 = 1e-6;
/// Default relative tolerance of the numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
const MINOR_FLOOR: f64 = 1e-300;

/// How a cell decides membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
pub enum LocusCriterion {
    /// Numerical rank `≤ ρ` at the cell center.
    Svd { tol: f64 },
    /// Every `(ρ+1)`-minor has `|M| ≤ ε` at the cell center. `None` uses
    /// `ε = 10⁻⁶ · (max sampled |M| + floor)`.
    Minor { epsilon: Option<f64> },
}

impl Default for LocusCriterion {
    fn default() -> Self {
        LocusCriterion::Svd { tol: DEFAULT_RANK_TOL }
    }
}

/// Sampler settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusOptions {
    pub resolution: Vec<usize>,
    pub criterion: LocusCriterion,
    pub mode: BracketMode,
    /// Also flag cells where every minor changes sign (or comes within `ε`
    /// of zero) across the cell's corners, so that loci thinner than a cell
    /// remain visible.
    pub thicken: bool,
}

/// Three-way classification of a sampled cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellLabel {
    In,
    Out,
    /// The decision differs between the tolerance and ten times it.
    Margin,
}

/// Sampled locus for one bracket length.
#[derive(Debug, Clone, PartialEq)]
pub struct LocusLayer {
    pub k: usize,
    pub columns: usize,
    pub minors: usize,
    pub grid: SignGrid,
    pub labels: Vec<CellLabel>,
}

impl LocusLayer {
    pub fn count(&self, label: CellLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Loci for consecutive bracket lengths on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LocusSweep {
    pub rho: usize,
    /// Minor threshold used for the minor criterion and for thickening.
    pub epsilon: f64,
    pub layers: Vec<LocusLayer>,
}

impl LocusSweep {
    /// `Z^{k+1} ⊆ Z^k` for every consecutive pair.
    pub fn nested(&self) -> bool {
        self.layers
            .windows(2)
            .all(|w| w[1].grid.is_subset_of(&w[0].grid) == Some(true))
    }

    pub fn layer(&self, k: usize) -> Option<&LocusLayer> {
        self.layers.iter().find(|l| l.k == k)
    }
}

/// Values computed at one sample point.
struct PointData {
    /// Minors of the largest matrix, in [`minor_index`] order.
    minors: Vec<f64>,
    /// Singular values of each prefix matrix, largest first (centers only).
    singular: Vec<Vec<f64>>,
}

fn vertex_grid(resolution: &[usize]) -> Vec<usize> {
    resolution.iter().map(|&n| n + 1).collect()
}

fn vertex_point(domain: &BoxDomain, resolution: &[usize], mut index: usize) -> Vec<f64> {
    resolution
        .iter()
        .enumerate()
        .map(|(a, &n)| {
            let i = index % (n + 1);
            index /= n + 1;
            domain.lo[a] + domain.width(a) * i as f64 / n as f64
        })
        .collect()
}

/// Linear indices of the `2^d` corners of a cell.
fn cell_corners(grid: &SignGrid, cell: usize) -> Vec<usize> {
    let idx = grid.cell_index(cell);
    let vres = vertex_grid(grid.resolution());
    let d = idx.len();
    (0..1usize << d)
        .map(|mask| {
            (0..d)
                .rev()
                .fold(0, |acc, a| acc * vres[a] + idx[a] + ((mask >> a) & 1))
        })
        .collect()
}

/// Samples `Z^k_ρ` for every `k` in `k_lo..=k_hi` on one grid. The matrix
/// for `k_hi` is evaluated once per point and smaller `k` use its column
/// prefix; rank thresholds are relative to the largest singular value of
/// the `k_hi` matrix and the minor threshold is shared, so the sampled loci
/// are nested by construction.
pub fn locus_sweep(
    family: &VectorFieldFamily,
    k_lo: usize,
    k_hi: usize,
    rho: usize,
    domain: &BoxDomain,
    opts: &LocusOptions,
) -> Result<LocusSweep> {
    let d = family.dim();
    if domain.dim() != d || opts.resolution.len() != d {
        return Err(Error::Shape(format!(
            "family dimension {d}, box dimension {}, {} resolutions",
            domain.dim(),
            opts.resolution.len()
        )));
    }
    if d > MAX_LOCUS_DIM {
        return Err(Error::Budget(format!("locus sampling supports d ≤ {MAX_LOCUS_DIM}")));
    }
    if k_lo == 0 || k_lo > k_hi || k_hi > MAX_LOCUS_K {
        return Err(Error::InvalidArgument(format!(
            "bracket lengths {k_lo}..={k_hi} must satisfy 1 ≤ k_lo ≤ k_hi ≤ {MAX_LOCUS_K}"
        )));
    }
    match opts.criterion {
        LocusCriterion::Svd { tol } if tol.is_nan() || tol <= 0.0 => {
            return Err(Error::InvalidArgument(format!(
                "rank tolerance must be positive, got {tol}"
            )))
        }
        LocusCriterion::Minor { epsilon: Some(e) } if e.is_nan() || e < 0.0 => {
            return Err(Error::InvalidArgument(format!(
                "minor threshold must be nonnegative, got {e}"
            )))
        }
        _ => {}
    }

    let m = family.num_fields();
    let terms = enumerate_brackets(m, k_hi, opts.mode);
    let ks: Vec<usize> = (k_lo..=k_hi).collect();
    let col_counts: Vec<usize> = ks
        .iter()
        .map(|&k| terms.iter().filter(|t| t.length() <= k).count())
        .collect();
    let index = minor_index(d, terms.len(), rho + 1);
    let minor_sets: Vec<Vec<usize>> = col_counts
        .iter()
        .map(|&c| {
            if rho + 1 > d || rho + 1 > c {
                return Vec::new();
            }
            index
                .iter()
                .enumerate()
                .filter(|(_, (_, cols))| cols.iter().all(|&j| j < c))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let template = SignGrid::empty(domain.clone(), opts.resolution.clone())?;
    let n_cells = template.len();
    let vres = vertex_grid(&opts.resolution);
    let n_vertices: usize = if opts.thicken { vres.iter().product() } else { 0 };
    let stored = (n_cells + n_vertices).saturating_mul(index.len().max(1));
    if stored > MAX_LOCUS_VALUES {
        return Err(Error::Budget(format!(
            "{stored} minor values exceed the budget of {MAX_LOCUS_VALUES}"
        )));
    }

    let want_svd = matches!(opts.criterion, LocusCriterion::Svd { .. });
    let evaluate = |z: Vec<f64>, with_svd: bool| -> Result<PointData> {
        let a = bracket_matrix_for(family, &terms, &z)?;
        let minors = if rho < d && rho < a.cols() {
            minors(&a, rho)
        } else {
            Vec::new()
        };
        let singular = if with_svd {
            col_counts.iter().map(|&c| a.prefix(c).singular_values()).collect()
        } else {
            Vec::new()
        };
        Ok(PointData { minors, singular })
    };
    let centers: Vec<PointData> = (0..n_cells)
        .into_par_iter()
        .map(|cell| {
            evaluate(template.cell_center(cell), want_svd).map_err(|e| Error::Cell {
                cell,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let vertices: Vec<PointData> = (0..n_vertices)
        .into_par_iter()
        .map(|v| {
            evaluate(vertex_point(domain, &opts.resolution, v), false).map_err(|e| Error::Cell {
                cell: v,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let epsilon = match opts.criterion {
        LocusCriterion::Minor { epsilon: Some(e) } => e,
        _ => {
            let max = centers
                .iter()
                .chain(&vertices)
                .flat_map(|p| p.minors.iter())
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            DEFAULT_EPSILON_FACTOR * (max + MINOR_FLOOR)
        }
    };

    let corners: Vec<Vec<usize>> = if opts.thicken {
        (0..n_cells).map(|c| cell_corners(&template, c)).collect()
    } else {
        Vec::new()
    };

    let mut layers = Vec::with_capacity(ks.len());
    for (slot, &k) in ks.iter().enumerate() {
        let set = &minor_sets[slot];
        let decide = |cell: usize, scale: f64| -> bool {
            let centre = &centers[cell];
            let eps = epsilon * scale;
            let crosses = |i: usize| -> bool {
                let cs = &corners[cell];
                let all_pos = cs.iter().all(|&v| vertices[v].minors[i] > eps);
                let all_neg = cs.iter().all(|&v| vertices[v].minors[i] < -eps);
                !(all_pos || all_neg)
            };
            match opts.criterion {
                LocusCriterion::Svd { tol } => {
                    let reference = centre.singular.last().and_then(|s| s.first()).copied().unwrap_or(0.0);
                    let rank = rank_with_reference(&centre.singular[slot], tol * scale, reference);
                    rank <= rho || (opts.thicken && set.iter().all(|&i| crosses(i)))
                }
                LocusCriterion::Minor { .. } => set
                    .iter()
                    .all(|&i| centre.minors[i].abs() <= eps || (opts.thicken && crosses(i))),
            }
        };
        let labels: Vec<CellLabel> = (0..n_cells)
            .into_par_iter()
            .map(|cell| match (decide(cell, 1.0), decide(cell, 10.0)) {
                (true, true) => CellLabel::In,
                (false, false) => CellLabel::Out,
                _ => CellLabel::Margin,
            })
            .collect();
        let mut grid = template.clone();
        for cell in 0..n_cells {
            grid.set(cell, decide(cell, 1.0));
        }
        grid.metadata = locus_metadata(k, rho, opts, epsilon);
        layers.push(LocusLayer {
            k,
            columns: col_counts[slot],
            minors: set.len(),
            grid,
            labels,
        });
    }
    Ok(LocusSweep { rho, epsilon, layers })
}

fn locus_metadata(k: usize, rho: usize, opts: &LocusOptions, epsilon: f64) -> Vec<(String, String)> {
    let mut meta = vec![
        ("k".to_string(), k.to_string()),
        ("rho".to_string(), rho.to_string()),
        ("mode".to_string(), opts.mode.to_string()),
        ("thicken".to_string(), opts.thicken.to_string()),
        ("epsilon".to_string(), format!("{epsilon:e}")),
    ];
    match opts.criterion {
        LocusCriterion::Svd { tol } => {
            meta.push(("criterion".into(), "svd".into()));
            meta.push(("tol".into(), format!("{tol:e}")));
        }
        LocusCriterion::Minor { .. } => meta.push(("criterion".into(), "minor".into())),
    }
    meta
}

/// Samples `Z^k_ρ` for a single `k`.
pub fn locus_sample(
    family: &VectorFieldFamily,
    k: usize,
    rho: usize,
    domain: &BoxDomain,
    opts: &LocusOptions,
) -> Result<LocusLayer> {
    let mut sweep = locus_sweep(family, k, k, rho, domain, opts)?;
    Ok(sweep.layers.remove(0))
}
