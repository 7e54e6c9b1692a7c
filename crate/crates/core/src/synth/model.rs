//! The conditional laws a cascade scheme reads off its coupling.

use crate::error::{Error, Result};
use crate::prob::{FiniteDistribution, JointDistribution};
use crate::regions::{aux_names_of, observed_names_of, AuxiliaryCoupling, Layout};

/// Channels of a `k`-link cascade, with layers ordered `U1..Uk` (three-node:
/// `U, V`) and outputs `Y1..Yk` (three-node: `Y, Z`).
#[derive(Clone, Debug)]
pub(crate) struct CascadeModel {
    pub links: usize,
    pub x_card: usize,
    pub y_cards: Vec<usize>,
    pub aux_cards: Vec<usize>,
    pub q_x: FiniteDistribution,
    /// Law of the base layer `Uk`.
    pub base: FiniteDistribution,
    /// `layer[j]` is `Q(Uj | Uj+1..Uk)` for `j < k - 1`, rows indexed by
    /// the row-major index of `(Uj+1, .., Uk)`.
    pub layer: Vec<Vec<FiniteDistribution>>,
    /// `Q(X | U1..Uk)`.
    pub x_given: Vec<FiniteDistribution>,
    /// `y_given[i]` is `Q(Y(i+1) | U(i+1)..Uk)`.
    pub y_given: Vec<Vec<FiniteDistribution>>,
    pub target: JointDistribution,
}

fn rows(p: &JointDistribution, out: &str, given: &[&str]) -> Result<Vec<FiniteDistribution>> {
    let ch = p.conditional(&[out], given)?;
    Ok((0..ch.input_alphabet()).map(|i| ch.row(i).clone()).collect())
}

impl CascadeModel {
    pub fn from_coupling(aux: &AuxiliaryCoupling) -> Result<Self> {
        let layout = aux.layout();
        if layout == Layout::Relay {
            return Err(Error::Argument("a cascade scheme needs a cascade coupling".into()));
        }
        let obs = observed_names_of(layout);
        let us = aux_names_of(layout);
        let obs: Vec<&str> = obs.iter().map(String::as_str).collect();
        let us: Vec<&str> = us.iter().map(String::as_str).collect();
        let k = us.len();
        let p = aux.joint();
        let base_m = p.marginal(&[us[k - 1]])?;
        let base = FiniteDistribution::from_weights((0..base_m.num_states()).map(|i| base_m.prob_at(i)).collect())?;
        let x_m = p.marginal(&["X"])?;
        let q_x = FiniteDistribution::from_weights((0..x_m.num_states()).map(|i| x_m.prob_at(i)).collect())?;
        let layer = (0..k - 1)
            .map(|j| rows(p, us[j], &us[j + 1..]))
            .collect::<Result<Vec<_>>>()?;
        let x_given = rows(p, "X", &us)?;
        let y_given = (0..k)
            .map(|i| rows(p, obs[i + 1], &us[i..]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            links: k,
            x_card: aux.card("X"),
            y_cards: obs[1..].iter().map(|n| aux.card(n)).collect(),
            aux_cards: us.iter().map(|n| aux.card(n)).collect(),
            q_x,
            base,
            layer,
            x_given,
            y_given,
            target: aux.target().clone(),
        })
    }

    /// Row-major index of `(U_from, .., Uk)` given one symbol per layer.
    pub fn context(&self, symbols: &[usize], from: usize) -> usize {
        (from..self.links).fold(0, |acc, j| acc * self.aux_cards[j] + symbols[j])
    }
}
