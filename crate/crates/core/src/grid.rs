//! Functions sampled at cell centres of a uniform grid, restricted to one
//! side of the cusp graph, and their extension across the graph by
//! composition with the reflection.
//!
//! Rows are processed in parallel; every reduction first collects per-row
//! partial sums and then adds them in row order, so results do not depend on
//! the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{CuspProfile, PlanePoint, RegionTag};
use crate::reflection::reflect;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMask {
    InDomain,
    Outside,
    /// Within `h` of the graph.
    GraphBand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSide {
    Upper,
    Lower,
}

impl DomainSide {
    pub fn region(self) -> RegionTag {
        match self {
            DomainSide::Upper => RegionTag::UpperDomain,
            DomainSide::Lower => RegionTag::LowerDomain,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            DomainSide::Upper => DomainSide::Lower,
            DomainSide::Lower => DomainSide::Upper,
        }
    }
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl From<[f64; 4]> for BoundingBox {
    fn from(b: [f64; 4]) -> Self {
        BoundingBox {
            x_min: b[0],
            x_max: b[1],
            y_min: b[2],
            y_max: b[3],
        }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x_min, b.x_max, b.y_min, b.y_max]
    }
}

impl BoundingBox {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let b = BoundingBox {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(Error::Domain(format!(
                "empty or non-finite box {:?}",
                <[f64; 4]>::from(b)
            )));
        }
        Ok(b)
    }

    pub fn contains(&self, p: PlanePoint) -> bool {
        self.x_min <= p.x1 && p.x1 <= self.x_max && self.y_min <= p.x2 && p.x2 <= self.y_max
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        self.x_min <= other.x_min
            && other.x_max <= self.x_max
            && self.y_min <= other.y_min
            && other.y_max <= self.y_max
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

/// Scalar samples on a uniform cell-centred grid.
///
/// Cell `(i, j)` has centre `(x_min + (i + 1/2) h, y_min + (j + 1/2) h)` and
/// is stored at `j * nx + i`. Cells without a value hold NaN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridFile", try_from = "GridFile")]
pub struct GridFunction {
    pub alpha: f64,
    pub bbox: BoundingBox,
    pub h: f64,
    pub side: DomainSide,
    pub nx: usize,
    pub ny: usize,
    values: Vec<f64>,
    mask: Vec<CellMask>,
}

/// On-disk layout: one JSON object, values row-major with `null` for cells
/// that carry no value.
#[derive(Serialize, Deserialize)]
struct GridFile {
    alpha: f64,
    bbox: BoundingBox,
    h: f64,
    side: DomainSide,
    nx: usize,
    ny: usize,
    values: Vec<Option<f64>>,
    mask: Vec<CellMask>,
}

impl From<GridFunction> for GridFile {
    fn from(g: GridFunction) -> Self {
        GridFile {
            alpha: g.alpha,
            bbox: g.bbox,
            h: g.h,
            side: g.side,
            nx: g.nx,
            ny: g.ny,
            values: g
                .values
                .iter()
                .zip(&g.mask)
                .map(|(&v, &m)| (m == CellMask::InDomain && v.is_finite()).then_some(v))
                .collect(),
            mask: g.mask,
        }
    }
}

impl TryFrom<GridFile> for GridFunction {
    type Error = Error;

    fn try_from(f: GridFile) -> Result<Self> {
        let cells = f.nx.checked_mul(f.ny).ok_or(Error::Overflow)?;
        if f.values.len() != cells || f.mask.len() != cells {
            return Err(Error::Domain(format!(
                "grid of {}x{} needs {cells} values and mask entries, got {} and {}",
                f.nx,
                f.ny,
                f.values.len(),
                f.mask.len()
            )));
        }
        if !(f.h > 0.0 && f.h.is_finite()) {
            return Err(Error::Domain(format!(
                "grid spacing must be positive, got {}",
                f.h
            )));
        }
        let mut mask = f.mask;
        let values = f
            .values
            .iter()
            .zip(mask.iter_mut())
            .map(|(v, m)| match v {
                Some(v) => *v,
                None => {
                    if *m == CellMask::InDomain {
                        *m = CellMask::Outside;
                    }
                    f64::NAN
                }
            })
            .collect();
        Ok(GridFunction {
            alpha: f.alpha,
            bbox: f.bbox,
            h: f.h,
            side: f.side,
            nx: f.nx,
            ny: f.ny,
            values,
            mask,
        })
    }
}

fn cells_along(extent: f64, h: f64) -> usize {
    ((extent / h).round() as usize).max(1)
}

impl GridFunction {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[CellMask] {
        &self.mask
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn center(&self, i: usize, j: usize) -> PlanePoint {
        PlanePoint::new(
            self.bbox.x_min + (i as f64 + 0.5) * self.h,
            self.bbox.y_min + (j as f64 + 0.5) * self.h,
        )
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.index(i, j);
        (self.mask[k] == CellMask::InDomain).then_some(self.values[k])
    }

    pub fn cell_mask(&self, i: usize, j: usize) -> CellMask {
        self.mask[self.index(i, j)]
    }

    /// Number of cells marked `InDomain`.
    pub fn domain_cells(&self) -> usize {
        self.mask
            .iter()
            .filter(|&&m| m == CellMask::InDomain)
            .count()
    }

    fn with_cells(&self, values: Vec<f64>, mask: Vec<CellMask>) -> GridFunction {
        GridFunction {
            values,
            mask,
            ..self.clone()
        }
    }

    /// Value at `(x, y)` where `x` is the centre abscissa of column `i`.
    ///
    /// The reflection fixes `x1`, so reflected cell centres stay on their
    /// own column and bilinear interpolation reduces to linear interpolation
    /// between the two nearest cells of the column. Neighbours without a
    /// value are dropped (weights renormalised); if both are missing the
    /// nearest valued cell of the column within three cells is used.
    fn column_interpolate(&self, i: usize, y: f64) -> Option<f64> {
        let fy = (y - self.bbox.y_min) / self.h - 0.5;
        if fy < -0.5 || fy > self.ny as f64 - 0.5 {
            return None;
        }
        let j0 = fy.floor();
        let t = fy - j0;
        let j0 = j0 as isize;
        let fetch = |j: isize| -> Option<f64> {
            if j < 0 || j >= self.ny as isize {
                None
            } else {
                self.value(i, j as usize)
            }
        };
        match (fetch(j0), fetch(j0 + 1)) {
            (Some(a), Some(b)) => Some(if t == 0.0 { a } else { a + t * (b - a) }),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => {
                let nearest = if t < 0.5 { j0 } else { j0 + 1 };
                (1..=3)
                    .flat_map(|d| [nearest - d, nearest + d])
                    .find_map(fetch)
            }
        }
    }
}

/// Samples `f` at the cell centres that `classify` (with tolerance `h`)
/// puts on `side`; cells within `h` of the graph are `GraphBand`.
pub fn sample<F>(
    profile: &CuspProfile,
    f: F,
    bbox: BoundingBox,
    h: f64,
    side: DomainSide,
) -> Result<GridFunction>
where
    F: Fn(PlanePoint) -> f64 + Sync,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    let bbox = BoundingBox::new(bbox.x_min, bbox.x_max, bbox.y_min, bbox.y_max)?;
    let nx = cells_along(bbox.x_max - bbox.x_min, h);
    let ny = cells_along(bbox.y_max - bbox.y_min, h);
    let target = side.region();
    let mut grid = GridFunction {
        alpha: profile.alpha(),
        bbox,
        h,
        side,
        nx,
        ny,
        values: Vec::new(),
        mask: Vec::new(),
    };
    let rows: Vec<Vec<(f64, CellMask)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| {
                    let c = grid.center(i, j);
                    match profile.classify(c, h) {
                        RegionTag::OnGraph => (f64::NAN, CellMask::GraphBand),
                        tag if tag == target => (f(c), CellMask::InDomain),
                        _ => (f64::NAN, CellMask::Outside),
                    }
                })
                .collect()
        })
        .collect();
    let (values, mask) = rows.into_iter().flatten().unzip();
    grid.values = values;
    grid.mask = mask;
    Ok(grid)
}

/// Finite-difference gradient: central where both neighbours along an axis
/// carry values, one-sided where one does, zero along an axis with none.
/// Cells with no valued neighbour on either axis are marked `Outside`.
pub fn weak_gradient(g: &GridFunction) -> (GridFunction, GridFunction) {
    let (nx, ny, h) = (g.nx, g.ny, g.h);
    let rows: Vec<Vec<(f64, f64, CellMask)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| {
                    let Some(u) = g.value(i, j) else {
                        return (f64::NAN, f64::NAN, g.cell_mask(i, j));
                    };
                    let left = if i > 0 { g.value(i - 1, j) } else { None };
                    let right = if i + 1 < nx { g.value(i + 1, j) } else { None };
                    let down = if j > 0 { g.value(i, j - 1) } else { None };
                    let up = if j + 1 < ny { g.value(i, j + 1) } else { None };
                    let diff = |lo: Option<f64>, hi: Option<f64>| match (lo, hi) {
                        (Some(a), Some(b)) => Some((b - a) / (2.0 * h)),
                        (Some(a), None) => Some((u - a) / h),
                        (None, Some(b)) => Some((b - u) / h),
                        (None, None) => None,
                    };
                    match (diff(left, right), diff(down, up)) {
                        (None, None) => (f64::NAN, f64::NAN, CellMask::Outside),
                        (dx, dy) => (dx.unwrap_or(0.0), dy.unwrap_or(0.0), CellMask::InDomain),
                    }
                })
                .collect()
        })
        .collect();
    let mut gx = Vec::with_capacity(nx * ny);
    let mut gy = Vec::with_capacity(nx * ny);
    let mut mask = Vec::with_capacity(nx * ny);
    for (dx, dy, m) in rows.into_iter().flatten() {
        gx.push(dx);
        gy.push(dy);
        mask.push(m);
    }
    (g.with_cells(gx, mask.clone()), g.with_cells(gy, mask))
}

/// Extends a one-sided grid function to the whole box by `u(R(x))`.
///
/// Source-side cells are copied. Opposite-side cells take the interpolated
/// source value at the reflected centre and become `Outside` when that
/// point leaves the box or its zone cannot be certified. Graph-band cells
/// take the nearest source value in their column. The result keeps the
/// source `side` tag.
pub fn extend(profile: &CuspProfile, g: &GridFunction) -> Result<GridFunction> {
    let (nx, ny) = (g.nx, g.ny);
    let rows: Vec<Vec<(f64, CellMask)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| {
                    if let Some(v) = g.value(i, j) {
                        return (v, CellMask::InDomain);
                    }
                    let c = g.center(i, j);
                    let source_y = match g.cell_mask(i, j) {
                        CellMask::GraphBand => Some(c.x2),
                        _ => match reflect(profile, c) {
                            Ok(r) if g.bbox.contains(r) => Some(r.x2),
                            _ => None,
                        },
                    };
                    match source_y.and_then(|y| g.column_interpolate(i, y)) {
                        Some(v) => (v, CellMask::InDomain),
                        None => (f64::NAN, CellMask::Outside),
                    }
                })
                .collect()
        })
        .collect();
    let (values, mask) = rows.into_iter().flatten().unzip();
    Ok(g.with_cells(values, mask))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub lp_norm: f64,
    pub gradient_lp_norm: f64,
    pub sobolev_norm: f64,
    pub exponent: f64,
    pub window: BoundingBox,
}

fn accumulate(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values.map(|v| v.abs().powf(p)).sum()
    }
}

fn finish(sum: f64, p: f64, cell_area: f64) -> f64 {
    if p.is_infinite() {
        sum
    } else {
        (sum * cell_area).powf(1.0 / p)
    }
}

/// `||u||_p + ||Du||_p` over the valued cells whose centres lie in `window`,
/// by the cell-centre rule.
pub fn sobolev_norm(g: &GridFunction, p: f64, window: BoundingBox) -> Result<NormReport> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!(
            "norm exponent must be at least 1, got {p}"
        )));
    }
    if !g.bbox.contains_box(&window) {
        return Err(Error::Domain("window must lie inside the grid box".into()));
    }
    let (gx, gy) = weak_gradient(g);
    let rows: Vec<(f64, f64, usize)> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let mut us = Vec::new();
            let mut ds = Vec::new();
            for i in 0..g.nx {
                if !window.contains(g.center(i, j)) {
                    continue;
                }
                if let Some(u) = g.value(i, j) {
                    us.push(u);
                }
                if let (Some(a), Some(b)) = (gx.value(i, j), gy.value(i, j)) {
                    ds.push(a.hypot(b));
                }
            }
            let n = us.len();
            (
                accumulate(us.into_iter(), p),
                accumulate(ds.into_iter(), p),
                n,
            )
        })
        .collect();
    let mut value_sum = 0.0;
    let mut gradient_sum = 0.0;
    let mut count = 0;
    for (u, d, n) in rows {
        if p.is_infinite() {
            value_sum = f64::max(value_sum, u);
            gradient_sum = f64::max(gradient_sum, d);
        } else {
            value_sum += u;
            gradient_sum += d;
        }
        count += n;
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let area = g.h * g.h;
    let lp_norm = finish(value_sum, p, area);
    let gradient_lp_norm = finish(gradient_sum, p, area);
    Ok(NormReport {
        lp_norm,
        gradient_lp_norm,
        sobolev_norm: lp_norm + gradient_lp_norm,
        exponent: p,
        window,
    })
}

/// `||E u||_{W^{1,q}(bbox)} / ||u||_{W^{1,p}(upper side of bbox)}` for `u = f`
/// sampled above the graph at spacing `h`.
pub fn extension_ratio<F>(
    profile: &CuspProfile,
    f: F,
    p: f64,
    q: f64,
    bbox: BoundingBox,
    h: f64,
) -> Result<f64>
where
    F: Fn(PlanePoint) -> f64 + Sync,
{
    let g = sample(profile, f, bbox, h, DomainSide::Upper)?;
    let e = extend(profile, &g)?;
    let source = sobolev_norm(&g, p, bbox)?;
    let extended = sobolev_norm(&e, q, bbox)?;
    Ok(extended.sobolev_norm / source.sobolev_norm)
}

/// Smooth bump `exp(-1 / (1 - r^2))`, `r = |x - centre| / radius`, zero for `r >= 1`.
pub fn bump(center: PlanePoint, radius: f64) -> impl Fn(PlanePoint) -> f64 + Sync + Copy {
    move |x: PlanePoint| {
        let r2 = ((x.x1 - center.x1).powi(2) + (x.x2 - center.x2).powi(2)) / (radius * radius);
        if r2 >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - r2)).exp()
        }
    }
}
