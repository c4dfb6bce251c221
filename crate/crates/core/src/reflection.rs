//! Reflection across the cusp graph.
//!
//! Over each removed interval `I_n^k` the strip `-2 psi < x2 < 2 psi` is split
//! at the graph into an upper rectangle `(psi, 2 psi)` and a lower rectangle
//! `(-2 psi, psi)`. The reflection maps the upper one onto the lower one by
//! `x2 -> 4 psi - 3 x2`, the lower one back by the inverse
//! `x2 -> (4 psi - x2) / 3`, and is the plain mirror `x2 -> -x2` everywhere
//! else. It fixes the graph pointwise and is its own inverse.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Placement;
use crate::profile::{CuspProfile, PlanePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "zone", rename_all = "snake_case")]
pub enum ReflectionZone {
    UpperRectangle { generation: u32, index: u128 },
    LowerRectangle { generation: u32, index: u128 },
    Elsewhere,
}

impl fmt::Display for ReflectionZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReflectionZone::UpperRectangle { generation, index } => {
                write!(f, "upper:{generation}:{index}")
            }
            ReflectionZone::LowerRectangle { generation, index } => {
                write!(f, "lower:{generation}:{index}")
            }
            ReflectionZone::Elsewhere => f.write_str("elsewhere"),
        }
    }
}

/// Image of a point together with the differential of the map there.
///
/// `differential[i][j]` is `d(R_i)/d(x_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineJet {
    pub image: PlanePoint,
    pub differential: [[f64; 2]; 2],
    pub jacobian_abs: f64,
}

/// Zone plus the exact value of `psi` there, when one is needed.
enum Located {
    Upper(u32, u128, f64),
    Lower(u32, u128, f64),
    Elsewhere,
    Graph,
}

fn locate_zone(profile: &CuspProfile, p: PlanePoint) -> Result<(Located, Placement)> {
    if !p.is_finite() {
        return Err(Error::NonFinite(if p.x1.is_finite() { p.x2 } else { p.x1 }));
    }
    let placement = profile.place(p.x1);
    let psi = profile.psi_of(&placement);
    let located = match placement {
        Placement::Removed { interval, .. } => {
            let s = psi.lo;
            let (n, k) = (interval.generation(), interval.index());
            if p.x2 == s {
                Located::Graph
            } else if s < p.x2 && p.x2 < 2.0 * s {
                Located::Upper(n, k, s)
            } else if -2.0 * s < p.x2 && p.x2 < s {
                Located::Lower(n, k, s)
            } else {
                Located::Elsewhere
            }
        }
        Placement::Outside { .. } | Placement::InSet => {
            if p.x2 == 0.0 {
                Located::Graph
            } else {
                Located::Elsewhere
            }
        }
        Placement::Undecided { depth, .. } => {
            // Any rectangle over x1 lies inside |x2| < 2 psi <= 2 psi.hi.
            if p.x2.abs() >= 2.0 * psi.hi {
                Located::Elsewhere
            } else {
                return Err(Error::UncertainZone {
                    x1: p.x1,
                    x2: p.x2,
                    depth,
                });
            }
        }
    };
    Ok((located, placement))
}

/// Zone of a point off the graph; points on the graph are an `OnGraph` error.
pub fn zone(profile: &CuspProfile, p: PlanePoint) -> Result<ReflectionZone> {
    match locate_zone(profile, p)?.0 {
        Located::Upper(generation, index, _) => {
            Ok(ReflectionZone::UpperRectangle { generation, index })
        }
        Located::Lower(generation, index, _) => {
            Ok(ReflectionZone::LowerRectangle { generation, index })
        }
        Located::Elsewhere => Ok(ReflectionZone::Elsewhere),
        Located::Graph => Err(Error::OnGraph { x1: p.x1, x2: p.x2 }),
    }
}

pub fn reflect(profile: &CuspProfile, p: PlanePoint) -> Result<PlanePoint> {
    let x2 = match locate_zone(profile, p)?.0 {
        Located::Upper(_, _, s) => -3.0 * p.x2 + 4.0 * s,
        Located::Lower(_, _, s) => (4.0 * s - p.x2) / 3.0,
        Located::Elsewhere => -p.x2,
        Located::Graph => p.x2,
    };
    Ok(PlanePoint::new(p.x1, x2))
}

pub fn reflect_jet(profile: &CuspProfile, p: PlanePoint) -> Result<AffineJet> {
    let (located, placement) = locate_zone(profile, p)?;
    let slope = || {
        profile
            .derivative_of(&placement)
            .ok_or(Error::DerivativeUndefined { x1: p.x1, x2: p.x2 })
    };
    let (x2, differential) = match located {
        Located::Upper(_, _, s) => (-3.0 * p.x2 + 4.0 * s, [[1.0, 0.0], [4.0 * slope()?, -3.0]]),
        Located::Lower(_, _, s) => (
            (4.0 * s - p.x2) / 3.0,
            [[1.0, 0.0], [4.0 * slope()? / 3.0, -1.0 / 3.0]],
        ),
        Located::Elsewhere => (-p.x2, [[1.0, 0.0], [0.0, -1.0]]),
        Located::Graph => return Err(Error::DerivativeUndefined { x1: p.x1, x2: p.x2 }),
    };
    let det = differential[0][0] * differential[1][1] - differential[0][1] * differential[1][0];
    Ok(AffineJet {
        image: PlanePoint::new(p.x1, x2),
        differential,
        jacobian_abs: det.abs(),
    })
}

/// `4 + 4 alpha d(x1, C)^(alpha - 1)`, a bound on the operator norm of the
/// differential over the rectangles above and below `x1`.
pub fn operator_norm_bound(profile: &CuspProfile, x1: f64) -> Result<f64> {
    match profile.place(x1) {
        Placement::Removed { distance, .. } => {
            let alpha = profile.alpha();
            Ok(4.0 + 4.0 * alpha * distance.powf(alpha - 1.0))
        }
        _ => Err(Error::Domain(format!(
            "{x1} is not inside a removed interval"
        ))),
    }
}

/// Largest singular value of a 2x2 matrix.
pub fn spectral_norm(m: &[[f64; 2]; 2]) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let frob2 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (frob2 + disc)).sqrt()
}
