//! Rate bounds for the relaxed secrecy variants, the relay network and the
//! arbitrary-length cascade.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{conditional_mutual_information, entropy, mutual_information};

use super::coupling::{constraint, require_d, u_name, y_name, AuxiliaryCoupling, Layout};
use super::frontier::RatePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variation {
    /// Secrecy of the second message only; inner bound with the extra sum-rate term.
    Thm2Inner,
    /// Secrecy of the second message only; outer bound.
    Thm2Outer,
    /// Secrecy of the first message only.
    Thm3,
    /// Two-hop relay without a secrecy requirement.
    Thm4Relay,
}

impl std::str::FromStr for Variation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm2_inner" => Ok(Self::Thm2Inner),
            "thm2_outer" => Ok(Self::Thm2Outer),
            "thm3" => Ok(Self::Thm3),
            "thm4_relay" => Ok(Self::Thm4Relay),
            _ => Err(Error::Argument(format!("unknown region variant `{s}`"))),
        }
    }
}

/// Right-hand sides of a region's constraints at one coupling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationBounds {
    pub which: Variation,
    /// Individual bounds; `r0` is zero when the region has no separate `R0` bound.
    pub point: RatePoint,
    /// Lower bound on `R1 + R0`, when the region has one.
    pub sum_r0_r1: Option<f64>,
}

impl VariationBounds {
    /// Smallest `R0` compatible with the bounds when `R1` sits at its floor.
    pub fn r0_floor(&self) -> f64 {
        match self.sum_r0_r1 {
            Some(s) => self.point.r0.max(s - self.point.r1()),
            None => self.point.r0,
        }
    }

    /// True iff `p` meets every bound (within `tol`).
    pub fn admits(&self, p: &RatePoint, tol: f64) -> bool {
        let ok_r0 = p.r0 + tol >= self.point.r0;
        let ok_r = p.r.iter().zip(&self.point.r).all(|(a, b)| a + tol >= *b);
        let ok_sum = self.sum_r0_r1.is_none_or(|s| p.r0 + p.r1() + tol >= s);
        ok_r0 && ok_r && ok_sum
    }
}

pub fn variation_rates(aux: &AuxiliaryCoupling, which: Variation, tol: f64) -> Result<VariationBounds> {
    if which == Variation::Thm4Relay {
        return relay_rates(aux, tol);
    }
    require_d(aux, tol)?;
    let p = aux.joint();
    let xyz = ["X", "Y", "Z"];
    let (point, sum) = match which {
        Variation::Thm2Inner | Variation::Thm2Outer => {
            let i_x_uv = mutual_information(p, &["X"], &["U", "V"])?;
            let i_x_v = mutual_information(p, &["X"], &["V"])?;
            let i_xyz_uv = mutual_information(p, &xyz, &["U", "V"])?;
            let r0 = if which == Variation::Thm2Inner {
                mutual_information(p, &xyz, &["V"])?
            } else {
                0.0
            };
            let sum = if which == Variation::Thm2Inner {
                i_xyz_uv + i_x_v
            } else {
                i_xyz_uv
            };
            (RatePoint::triple(r0, i_x_uv, i_x_v), Some(sum))
        }
        Variation::Thm3 => (
            RatePoint::triple(
                mutual_information(p, &xyz, &["U"])?,
                mutual_information(p, &["X"], &["U"])?,
                mutual_information(p, &["X"], &["V"])?,
            ),
            None,
        ),
        Variation::Thm4Relay => unreachable!(),
    };
    Ok(VariationBounds {
        which,
        point,
        sum_r0_r1: sum,
    })
}

fn relay_rates(aux: &AuxiliaryCoupling, tol: f64) -> Result<VariationBounds> {
    if aux.layout() != Layout::Relay {
        return Err(Error::Argument("relay bounds need an (X, Z, U) coupling".into()));
    }
    let p = aux.joint();
    let tv = crate::prob::total_variation(&p.marginal(&["X", "Z"])?, aux.target())?;
    constraint("(X,Z) marginal equals target", tv, tol)?;
    constraint(
        "X - U - Z",
        conditional_mutual_information(p, &["X"], &["U"], &["Z"])?,
        tol,
    )?;
    let bound = aux.card("X") + aux.card("Z") + 2;
    if aux.card("U") > bound {
        return Err(Error::Constraint {
            constraint: format!("|U| <= {bound}"),
            deviation: (aux.card("U") - bound) as f64,
            tolerance: 0.0,
        });
    }
    Ok(VariationBounds {
        which: Variation::Thm4Relay,
        point: RatePoint::triple(
            0.0,
            mutual_information(p, &["X"], &["U"])?,
            mutual_information(p, &["Z"], &["U"])?,
        ),
        sum_r0_r1: None,
    })
}

/// `(R0, R1, .., Rk)` floors of a `k`-link cascade coupling: `Ri = I(X; Ui..Uk)`
/// and `R0 = I(X, Y1..Yk; U1..Uk)`.
pub fn general_cascade_rates(aux: &AuxiliaryCoupling, tol: f64) -> Result<RatePoint> {
    let Layout::Cascade { links: k } = aux.layout() else {
        return Err(Error::Argument("general cascade rates need a cascade coupling".into()));
    };
    let p = aux.joint();
    let ys: Vec<String> = (1..=k).map(y_name).collect();
    let us: Vec<String> = (1..=k).map(u_name).collect();
    let ys: Vec<&str> = ys.iter().map(String::as_str).collect();
    let us: Vec<&str> = us.iter().map(String::as_str).collect();

    let obs_names: Vec<&str> = std::iter::once("X").chain(ys.iter().copied()).collect();
    let tv = crate::prob::total_variation(&p.marginal(&obs_names)?, aux.target())?;
    constraint("observed marginal equals target", tv, tol)?;

    constraint(
        &format!("X - U1..U{k} - Y1"),
        conditional_mutual_information(p, &["X"], &us, &[ys[0]])?,
        tol,
    )?;
    for j in 1..k {
        let mut a = vec!["X"];
        a.extend_from_slice(&ys[..j]);
        a.extend_from_slice(&us[..j]);
        constraint(
            &format!("(X,Y1..Y{j},U1..U{j}) - U{}..U{k} - Y{}", j + 1, j + 1),
            conditional_mutual_information(p, &a, &us[j..], &[ys[j]])?,
            tol,
        )?;
    }
    for i in 0..k.saturating_sub(1) {
        let dev = (entropy(p, &us[i..])? - entropy(p, &[us[i]])?).max(0.0);
        constraint(&format!("H(U{}..U{k} | U{}) = 0", i + 1, i + 1), dev, tol)?;
    }
    let r = (0..k)
        .map(|i| mutual_information(p, &["X"], &us[i..]))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatePoint {
        r0: mutual_information(p, &obs_names, &us)?,
        r,
    })
}
