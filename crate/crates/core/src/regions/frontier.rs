use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{csv_row, round_json, sig};

use super::hull::{lower_hull, HullFacet};

/// Collinearity and dominance tolerance for frontier reduction.
pub const HULL_TOLERANCE: f64 = 1e-9;

/// A rate tuple: common randomness `r0` plus the link rates `r = (R1, R2, ..)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r0: f64,
    pub r: Vec<f64>,
}

impl RatePoint {
    pub fn new(r0: f64, r: Vec<f64>) -> Result<Self> {
        if r0 < 0.0 || r.iter().any(|x| *x < 0.0) || !r0.is_finite() || r.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument(format!(
                "rates must be finite and nonnegative, got r0={r0} r={r:?}"
            )));
        }
        Ok(Self { r0, r })
    }

    pub fn triple(r0: f64, r1: f64, r2: f64) -> Self {
        Self { r0, r: vec![r1, r2] }
    }

    pub fn r1(&self) -> f64 {
        self.r[0]
    }

    pub fn r2(&self) -> f64 {
        self.r[1]
    }

    /// `(R0, R1, R2, ..)` as a flat vector.
    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.r0).chain(self.r.iter().copied()).collect()
    }

    /// Componentwise `self + delta` on every coordinate.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            r0: self.r0 + delta,
            r: self.r.iter().map(|x| x + delta).collect(),
        }
    }
}

/// A frontier corner with a label describing what generated it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub generator: String,
    pub coords: Vec<f64>,
}

/// The up-closed convex hull of a set of rate corners.
///
/// `corners` holds only the nondominated hull vertices; `generated` records
/// how many corners were offered before reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionFrontier {
    axes: Vec<String>,
    corners: Vec<Corner>,
    facets: Vec<HullFacet>,
    generated: usize,
}

impl RegionFrontier {
    pub fn from_corners(axes: Vec<String>, raw: Vec<Corner>) -> Result<Self> {
        let dim = axes.len();
        if raw.is_empty() {
            return Err(Error::Argument("a frontier needs at least one corner".into()));
        }
        if let Some(c) = raw.iter().find(|c| c.coords.len() != dim) {
            return Err(Error::Dimension(format!(
                "corner `{}` has {} coordinates, axes are {:?}",
                c.generator,
                c.coords.len(),
                axes
            )));
        }
        let generated = raw.len();
        let kept = nondominated(&raw, HULL_TOLERANCE);
        let pts: Vec<Vec<f64>> = kept.iter().map(|&i| raw[i].coords.clone()).collect();
        let hull = lower_hull(&pts, HULL_TOLERANCE)?;
        let corners: Vec<Corner> = hull.vertices.iter().map(|&i| raw[kept[i]].clone()).collect();
        // Re-index facet vertices onto the reduced corner list.
        let facets = hull
            .facets
            .into_iter()
            .map(|mut f| {
                f.vertices = f
                    .vertices
                    .iter()
                    .filter_map(|v| hull.vertices.iter().position(|h| h == v))
                    .collect();
                f
            })
            .collect();
        Ok(Self {
            axes,
            corners,
            facets,
            generated,
        })
    }

    pub fn axes(&self) -> &[String] {
        &self.axes
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn facets(&self) -> &[HullFacet] {
        &self.facets
    }

    /// Number of corners offered before dominance and hull reduction.
    pub fn generated(&self) -> usize {
        self.generated
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn corner(&self, generator: &str) -> Option<&Corner> {
        self.corners.iter().find(|c| c.generator == generator)
    }

    /// One row per corner: `generator` then one column per axis.
    pub fn to_csv(&self) -> String {
        let header = std::iter::once("generator".to_string()).chain(self.axes.iter().cloned());
        let mut out = csv_row(header);
        for c in &self.corners {
            let row = std::iter::once(c.generator.clone()).chain(c.coords.iter().map(|x| sig(*x)));
            out.push_str(&csv_row(row));
        }
        out
    }

    /// Axes, corners and hull facets, reals rounded to 12 significant digits.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "axes": self.axes,
            "generated": self.generated,
            "corners": self.corners,
            "facets": self.facets,
        });
        round_json(&mut v);
        v
    }

    /// Coordinates of a rate point in this frontier's axes.
    pub fn project(&self, p: &RatePoint) -> Result<Vec<f64>> {
        let full = p.to_vec();
        let coords = if self.axes.first().map(String::as_str) == Some("R0") {
            full
        } else {
            p.r.clone()
        };
        if coords.len() != self.dim() {
            return Err(Error::Argument(format!(
                "rate point has {} coordinates on axes {:?}",
                coords.len(),
                self.axes
            )));
        }
        Ok(coords)
    }

    /// True iff `p` dominates some convex combination of corners.
    pub fn contains(&self, coords: &[f64]) -> Result<bool> {
        if coords.len() != self.dim() {
            return Err(Error::Argument(format!(
                "point of dimension {} against a {}-dimensional frontier",
                coords.len(),
                self.dim()
            )));
        }
        Ok(self.facets.iter().all(|f| {
            let s: f64 = f.normal.iter().zip(coords).map(|(a, b)| a * b).sum();
            s >= f.offset - HULL_TOLERANCE
        }))
    }
}

/// Membership of a rate point in the up-closed hull of a frontier.
pub fn point_in_region(p: &RatePoint, f: &RegionFrontier) -> Result<bool> {
    let coords = f.project(p)?;
    f.contains(&coords)
}

fn nondominated(corners: &[Corner], tol: f64) -> Vec<usize> {
    let dominates = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| *x <= y + tol) && a.iter().zip(b).any(|(x, y)| *x < y - tol)
    };
    let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    let mut kept: Vec<usize> = Vec::new();
    for (i, c) in corners.iter().enumerate() {
        let beaten = corners.iter().enumerate().any(|(j, d)| {
            j != i && (dominates(&d.coords, &c.coords) || (j < i && same(&d.coords, &c.coords)))
        });
        if !beaten {
            kept.push(i);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corner(g: &str, c: &[f64]) -> Corner {
        Corner {
            generator: g.into(),
            coords: c.to_vec(),
        }
    }

    #[test]
    fn dominated_corner_is_removed() {
        let f = RegionFrontier::from_corners(
            vec!["R1".into(), "R2".into()],
            vec![corner("a", &[1.0, 1.0]), corner("b", &[2.0, 2.0])],
        )
        .unwrap();
        assert_eq!(f.generated(), 2);
        assert_eq!(f.corners().len(), 1);
        assert_eq!(f.corners()[0].generator, "a");
    }

    #[test]
    fn dimension_mismatch_is_an_argument_error() {
        let f = RegionFrontier::from_corners(vec!["R1".into(), "R2".into()], vec![corner("a", &[1.0, 1.0])])
            .unwrap();
        assert!(matches!(f.contains(&[1.0]), Err(Error::Argument(_))));
        assert!(matches!(
            point_in_region(&RatePoint::triple(0.0, 1.0, 1.0), &f),
            Ok(true)
        ));
    }

    #[test]
    fn negative_rates_rejected() {
        assert!(RatePoint::new(-0.1, vec![0.0]).is_err());
    }
}
