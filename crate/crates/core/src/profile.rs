//! The cusp profile `psi(x1) = d(x1, C)^alpha` on `(0, 1)`, zero elsewhere,
//! and the split of the plane into the regions above and below its graph.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::geometry::{self, Half, Placement, DEFAULT_DEPTH};
use crate::interval::Interval;
use crate::triadic::MAX_LEVEL;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x1: f64,
    pub x2: f64,
}

impl PlanePoint {
    pub fn new(x1: f64, x2: f64) -> Self {
        PlanePoint { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTag {
    UpperDomain,
    LowerDomain,
    OnGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspProfile {
    alpha: f64,
    depth: u32,
}

impl CuspProfile {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_depth(alpha, DEFAULT_DEPTH)
    }

    pub fn with_depth(alpha: f64, depth: u32) -> Result<Self> {
        check_alpha(alpha)?;
        if depth > MAX_LEVEL {
            return Err(Error::DepthOutOfRange(depth));
        }
        Ok(CuspProfile { alpha, depth })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub(crate) fn place(&self, x1: f64) -> Placement {
        if x1.is_infinite() {
            return Placement::Outside {
                distance: f64::INFINITY,
            };
        }
        geometry::place(x1, self.depth).unwrap_or(Placement::Outside { distance: f64::NAN })
    }

    pub(crate) fn psi_of(&self, placement: &Placement) -> Interval {
        match *placement {
            Placement::Outside { distance } if distance.is_nan() => Interval::point(f64::NAN),
            Placement::Outside { .. } | Placement::InSet => Interval::point(0.0),
            Placement::Removed { distance, .. } => Interval::point(distance.powf(self.alpha)),
            Placement::Undecided { distance_bound, .. } => {
                Interval::new(0.0, distance_bound.powf(self.alpha))
            }
        }
    }

    /// Certified enclosure of `psi(x1)`.
    ///
    /// Exact (degenerate) unless `x1` lies in a surviving interval of
    /// generation `depth`, where the enclosure is `[0, (3^-depth / 2)^alpha]`
    /// or tighter. NaN input yields a NaN interval.
    pub fn psi(&self, x1: f64) -> Interval {
        self.psi_of(&self.place(x1))
    }

    pub(crate) fn derivative_of(&self, placement: &Placement) -> Option<f64> {
        match *placement {
            Placement::Outside { distance } if !distance.is_nan() => Some(0.0),
            Placement::Removed { half, distance, .. } => {
                let slope = self.alpha * distance.powf(self.alpha - 1.0);
                match half {
                    Half::Left => Some(slope),
                    Half::Right => Some(-slope),
                    Half::Midpoint => None,
                }
            }
            _ => None,
        }
    }

    /// `psi'(x1)`, or `None` at midpoints of removed intervals, on the Cantor
    /// set, and where the working depth cannot locate `x1`.
    pub fn psi_derivative(&self, x1: f64) -> Option<f64> {
        self.derivative_of(&self.place(x1))
    }

    /// Region of `p` relative to the graph, with the graph fattened by `tol`.
    pub fn classify(&self, p: PlanePoint, tol: f64) -> RegionTag {
        let psi = self.psi(p.x1);
        if p.x2 > psi.hi + tol {
            RegionTag::UpperDomain
        } else if p.x2 < psi.lo - tol {
            RegionTag::LowerDomain
        } else {
            RegionTag::OnGraph
        }
    }
}
