use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{
    conditional_mutual_information, entropy, mutual_information, total_variation, JointDistribution,
};

use super::frontier::RatePoint;

/// Slack added to the auxiliary cardinality bounds by default.
pub const DEFAULT_CARD_SLACK: usize = 3;

/// Which variables an [`AuxiliaryCoupling`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// `(X, Y, Z, U, V)`.
    ThreeNode,
    /// `(X, Y1..Yk, U1..Uk)` for a cascade of `k + 1` nodes.
    Cascade { links: usize },
    /// `(X, Z, U)`.
    Relay,
}

/// A joint law of the observed variables and the auxiliaries, together with
/// the target it is supposed to extend.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxiliaryCoupling {
    joint: JointDistribution,
    target: JointDistribution,
    layout: Layout,
}

pub fn y_name(i: usize) -> String {
    format!("Y{i}")
}

pub fn u_name(i: usize) -> String {
    format!("U{i}")
}

impl AuxiliaryCoupling {
    /// Three-node coupling; the target is the joint's own `(X, Y, Z)` marginal.
    pub fn three_node(joint: JointDistribution) -> Result<Self> {
        let target = joint.marginal(&["X", "Y", "Z"])?;
        Self::with_target(joint, target, Layout::ThreeNode)
    }

    /// Cascade coupling over `(X, Y1..Yk, U1..Uk)`.
    pub fn cascade(joint: JointDistribution, links: usize) -> Result<Self> {
        if links == 0 {
            return Err(Error::Argument("a cascade needs at least one link".into()));
        }
        let obs = observed_names(Layout::Cascade { links });
        let obs: Vec<&str> = obs.iter().map(String::as_str).collect();
        let target = joint.marginal(&obs)?;
        Self::with_target(joint, target, Layout::Cascade { links })
    }

    /// Relay coupling over `(X, Z, U)`.
    pub fn relay(joint: JointDistribution) -> Result<Self> {
        let target = joint.marginal(&["X", "Z"])?;
        Self::with_target(joint, target, Layout::Relay)
    }

    /// Coupling with an explicitly given target; the marginal match is
    /// checked by [`check_membership_d`], not here.
    pub fn with_target(joint: JointDistribution, target: JointDistribution, layout: Layout) -> Result<Self> {
        let mut names = observed_names(layout);
        let obs_vars = target.vars();
        if obs_vars.iter().map(|v| v.name.clone()).collect::<Vec<_>>() != names {
            return Err(Error::Dimension(format!(
                "target variables {:?} do not match {:?}",
                target.names(),
                names
            )));
        }
        names.extend(aux_names(layout));
        for name in &names {
            joint.position(name)?;
        }
        if joint.vars().len() != names.len() {
            return Err(Error::Dimension(format!(
                "coupling has variables {:?}, expected {:?}",
                joint.names(),
                names
            )));
        }
        for v in obs_vars {
            if joint.card(&v.name)? != v.card {
                return Err(Error::Dimension(format!(
                    "alphabet of `{}` differs between coupling and target",
                    v.name
                )));
            }
        }
        let joint = joint.marginal(&names.iter().map(String::as_str).collect::<Vec<_>>())?;
        Ok(Self { joint, target, layout })
    }

    pub fn joint(&self) -> &JointDistribution {
        &self.joint
    }

    pub fn target(&self) -> &JointDistribution {
        &self.target
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn card(&self, name: &str) -> usize {
        self.joint.card(name).expect("layout variables are present")
    }

    fn observed_product(&self) -> usize {
        self.target.vars().iter().map(|v| v.card).product()
    }

    /// `(|V| bound, |U| bound)` for the three-node layout with the given slack.
    pub fn cardinality_bounds(&self, slack: usize) -> (usize, usize) {
        let obs = self.observed_product();
        let v = obs + slack;
        (v, obs * self.card("V") + slack)
    }

    fn require(&self, layout: Layout) -> Result<()> {
        if self.layout == layout {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "operation needs a {layout:?} coupling, got {:?}",
                self.layout
            )))
        }
    }
}

pub(crate) fn observed_names(layout: Layout) -> Vec<String> {
    match layout {
        Layout::ThreeNode => vec!["X".into(), "Y".into(), "Z".into()],
        Layout::Cascade { links } => std::iter::once("X".to_string()).chain((1..=links).map(y_name)).collect(),
        Layout::Relay => vec!["X".into(), "Z".into()],
    }
}

pub(crate) fn aux_names(layout: Layout) -> Vec<String> {
    match layout {
        Layout::ThreeNode => vec!["U".into(), "V".into()],
        Layout::Cascade { links } => (1..=links).map(u_name).collect(),
        Layout::Relay => vec!["U".into()],
    }
}

/// `(R0, R1, R2) = (I(XYZ;UV), I(X;UV), I(X;V))`.
pub fn rate_triple(aux: &AuxiliaryCoupling) -> Result<RatePoint> {
    aux.require(Layout::ThreeNode)?;
    let p = aux.joint();
    Ok(RatePoint::triple(
        mutual_information(p, &["X", "Y", "Z"], &["U", "V"])?,
        mutual_information(p, &["X"], &["U", "V"])?,
        mutual_information(p, &["X"], &["V"])?,
    ))
}

/// Outcome of checking a three-node coupling against the constraint set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub marginal_ok: bool,
    pub marginal_tv: f64,
    /// `I(X;Y|U,V)`.
    pub chain1_dev: f64,
    /// `I(X,Y,U;Z|V)`.
    pub chain2_dev: f64,
    pub cardinality_ok: bool,
    /// `H(V|U)`.
    pub v_given_u: f64,
    pub functional_v_of_u: bool,
    pub tolerance: f64,
}

impl MembershipReport {
    /// Membership in the unrestricted set (functional dependence not required).
    pub fn in_d(&self) -> bool {
        self.marginal_ok
            && self.chain1_dev <= self.tolerance
            && self.chain2_dev <= self.tolerance
            && self.cardinality_ok
    }

    /// Membership in the restricted set where `V` is a function of `U`.
    pub fn in_d_prime(&self) -> bool {
        self.in_d() && self.functional_v_of_u
    }
}

pub fn check_membership_d(aux: &AuxiliaryCoupling, tol: f64) -> Result<MembershipReport> {
    check_membership_with_slack(aux, tol, DEFAULT_CARD_SLACK)
}

/// Like [`check_membership_d`] with an explicit cardinality slack.
pub fn check_membership_with_slack(aux: &AuxiliaryCoupling, tol: f64, slack: usize) -> Result<MembershipReport> {
    aux.require(Layout::ThreeNode)?;
    let p = aux.joint();
    let marginal_tv = total_variation(&p.marginal(&["X", "Y", "Z"])?, aux.target())?;
    let chain1_dev = conditional_mutual_information(p, &["X"], &["U", "V"], &["Y"])?;
    let chain2_dev = conditional_mutual_information(p, &["X", "Y", "U"], &["V"], &["Z"])?;
    let (v_bound, u_bound) = aux.cardinality_bounds(slack);
    let v_given_u = (entropy(p, &["U", "V"])? - entropy(p, &["U"])?).max(0.0);
    Ok(MembershipReport {
        marginal_ok: marginal_tv <= tol,
        marginal_tv,
        chain1_dev,
        chain2_dev,
        cardinality_ok: aux.card("V") <= v_bound && aux.card("U") <= u_bound,
        v_given_u,
        functional_v_of_u: v_given_u <= tol,
        tolerance: tol,
    })
}

pub(crate) fn constraint(name: &str, deviation: f64, tol: f64) -> Result<()> {
    if deviation <= tol {
        Ok(())
    } else {
        Err(Error::Constraint {
            constraint: name.into(),
            deviation,
            tolerance: tol,
        })
    }
}

/// Checks every requirement of the three-node constraint set, naming the
/// first one that fails.
pub(crate) fn require_d(aux: &AuxiliaryCoupling, tol: f64) -> Result<MembershipReport> {
    let r = check_membership_d(aux, tol)?;
    constraint("(X,Y,Z) marginal equals target", r.marginal_tv, tol)?;
    constraint("X - (U,V) - Y", r.chain1_dev, tol)?;
    constraint("(X,Y,U) - V - Z", r.chain2_dev, tol)?;
    if !r.cardinality_ok {
        let (v, u) = aux.cardinality_bounds(DEFAULT_CARD_SLACK);
        return Err(Error::Constraint {
            constraint: format!("|V| <= {v} and |U| <= {u}"),
            deviation: (aux.card("V") as f64 - v as f64).max(aux.card("U") as f64 - u as f64),
            tolerance: 0.0,
        });
    }
    Ok(r)
}
