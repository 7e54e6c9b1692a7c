use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution built from user input.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Joint distributions with at most this many states are stored densely.
pub const DENSE_LIMIT: u64 = 1 << 24;

/// Default cap on the number of weighted entries an exact enumeration may touch.
pub const DEFAULT_SIZE_GUARD: u128 = 100_000_000;

/// A probability mass function over `{0, .., k-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    mass: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        validate_mass(&mass, SUM_TOLERANCE)?;
        Ok(Self { mass })
    }

    /// Normalizes a vector of nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self {
            mass: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("alphabet size must be positive".into()));
        }
        Ok(Self {
            mass: vec![1.0 / k as f64; k],
        })
    }

    pub fn point_mass(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::Argument(format!(
                "symbol {at} outside alphabet of size {k}"
            )));
        }
        let mut mass = vec![0.0; k];
        mass[at] = 1.0;
        Ok(Self { mass })
    }

    pub fn alphabet_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.mass.get(symbol).copied().unwrap_or(0.0)
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(self.mass.iter().copied())
    }

    /// Inverse-CDF sampling from a uniform draw in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.mass.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }
}

/// A named finite random variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub card: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        Self {
            name: name.into(),
            card,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse(BTreeMap<u64, f64>),
}

/// A multiway pmf over an ordered list of named variables.
///
/// States are linearized row-major with the last variable varying fastest.
/// Dense storage is used up to [`DENSE_LIMIT`] states, a sorted sparse map
/// above that.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    vars: Vec<Variable>,
    strides: Vec<u64>,
    states: u64,
    storage: Storage,
}

impl JointDistribution {
    /// Builds a distribution from a row-major mass vector.
    pub fn new(vars: Vec<Variable>, mass: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(vars, mass, SUM_TOLERANCE)
    }

    pub(crate) fn with_tolerance(vars: Vec<Variable>, mass: Vec<f64>, tol: f64) -> Result<Self> {
        let (strides, states) = layout(&vars)?;
        if mass.len() as u64 != states {
            return Err(Error::Dimension(format!(
                "mass has {} entries but the variables span {} states",
                mass.len(),
                states
            )));
        }
        validate_mass(&mass, tol)?;
        let storage = if states <= DENSE_LIMIT {
            Storage::Dense(mass)
        } else {
            Storage::Sparse(
                mass.into_iter()
                    .enumerate()
                    .filter(|(_, p)| *p != 0.0)
                    .map(|(i, p)| (i as u64, p))
                    .collect(),
            )
        };
        Ok(Self {
            vars,
            strides,
            states,
            storage,
        })
    }

    /// Builds a distribution from `(linear index, mass)` pairs; repeated
    /// indices accumulate.
    pub fn from_entries<I>(vars: Vec<Variable>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        Self::from_entries_with_tolerance(vars, entries, SUM_TOLERANCE)
    }

    pub(crate) fn from_entries_with_tolerance<I>(
        vars: Vec<Variable>,
        entries: I,
        tol: f64,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let (strides, states) = layout(&vars)?;
        let storage = if states <= DENSE_LIMIT {
            let mut mass = vec![0.0; states as usize];
            for (i, p) in entries {
                if i >= states {
                    return Err(Error::Dimension(format!("state index {i} out of range")));
                }
                mass[i as usize] += p;
            }
            validate_mass(&mass, tol)?;
            Storage::Dense(mass)
        } else {
            let mut map = BTreeMap::new();
            for (i, p) in entries {
                if i >= states {
                    return Err(Error::Dimension(format!("state index {i} out of range")));
                }
                if p != 0.0 {
                    *map.entry(i).or_insert(0.0) += p;
                }
            }
            validate_mass_iter(map.values().copied(), tol)?;
            Storage::Sparse(map)
        };
        Ok(Self {
            vars,
            strides,
            states,
            storage,
        })
    }

    /// Builds a dense distribution by evaluating `f` on every state tuple.
    pub fn from_fn<F>(vars: Vec<Variable>, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> f64,
    {
        let (_, states) = layout(&vars)?;
        if states > DENSE_LIMIT {
            return Err(Error::capacity("dense construction", states as u128, DENSE_LIMIT as u128));
        }
        let cards: Vec<usize> = vars.iter().map(|v| v.card).collect();
        let mut tuple = vec![0usize; cards.len()];
        let mut mass = Vec::with_capacity(states as usize);
        for _ in 0..states {
            mass.push(f(&tuple));
            increment(&mut tuple, &cards);
        }
        Self::new(vars, mass)
    }

    pub fn from_distribution(name: impl Into<String>, dist: &FiniteDistribution) -> Self {
        let vars = vec![Variable::new(name, dist.alphabet_size())];
        Self::new(vars, dist.mass().to_vec()).expect("a valid pmf is a valid joint")
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn num_states(&self) -> u64 {
        self.states
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::Argument(format!("unknown variable `{name}`")))
    }

    pub fn card(&self, name: &str) -> Result<usize> {
        Ok(self.vars[self.position(name)?].card)
    }

    pub fn encode(&self, tuple: &[usize]) -> Result<u64> {
        if tuple.len() != self.vars.len() {
            return Err(Error::Dimension(format!(
                "tuple of arity {} for {} variables",
                tuple.len(),
                self.vars.len()
            )));
        }
        let mut idx = 0u64;
        for ((&s, v), &stride) in tuple.iter().zip(&self.vars).zip(&self.strides) {
            if s >= v.card {
                return Err(Error::Argument(format!(
                    "symbol {s} outside alphabet of `{}`",
                    v.name
                )));
            }
            idx += s as u64 * stride;
        }
        Ok(idx)
    }

    pub fn decode(&self, mut idx: u64) -> Vec<usize> {
        let mut out = vec![0; self.vars.len()];
        for (slot, &stride) in out.iter_mut().zip(&self.strides) {
            *slot = (idx / stride) as usize;
            idx %= stride;
        }
        out
    }

    pub fn prob(&self, tuple: &[usize]) -> Result<f64> {
        let idx = self.encode(tuple)?;
        Ok(self.prob_at(idx))
    }

    pub fn prob_at(&self, idx: u64) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.get(idx as usize).copied().unwrap_or(0.0),
            Storage::Sparse(m) => m.get(&idx).copied().unwrap_or(0.0),
        }
    }

    /// Nonzero entries in increasing index order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = (u64, f64)> + '_> {
        match &self.storage {
            Storage::Dense(m) => Box::new(
                m.iter()
                    .enumerate()
                    .filter(|(_, p)| **p != 0.0)
                    .map(|(i, p)| (i as u64, *p)),
            ),
            Storage::Sparse(m) => Box::new(m.iter().map(|(i, p)| (*i, *p))),
        }
    }

    /// Dense mass vector, when stored densely.
    pub fn dense_mass(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Sparse(_) => None,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.iter().map(|(_, p)| p).sum()
    }

    pub(crate) fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let p = self.position(n)?;
            if out.contains(&p) {
                return Err(Error::Argument(format!("variable `{n}` listed twice")));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Marginal on `names`, with variables in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<JointDistribution> {
        if names.is_empty() {
            return Err(Error::Argument("marginal over an empty variable set".into()));
        }
        let pos = self.positions(names)?;
        self.marginal_by_position(&pos)
    }

    pub(crate) fn marginal_by_position(&self, pos: &[usize]) -> Result<JointDistribution> {
        let vars: Vec<Variable> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        let (mstrides, _) = layout(&vars)?;
        let strides = &self.strides;
        let cards: Vec<u64> = self.vars.iter().map(|v| v.card as u64).collect();
        let map_index = |idx: u64| -> u64 {
            pos.iter()
                .zip(&mstrides)
                .map(|(&p, &ms)| ((idx / strides[p]) % cards[p]) * ms)
                .sum()
        };
        JointDistribution::from_entries_with_tolerance(
            vars,
            self.iter().map(|(i, p)| (map_index(i), p)),
            f64::INFINITY,
        )
    }

    /// Conditional channel `P(out | given)`; rows of zero-probability inputs
    /// are uniform.
    pub fn conditional(&self, out: &[&str], given: &[&str]) -> Result<super::Channel> {
        let mut all: Vec<&str> = given.to_vec();
        all.extend_from_slice(out);
        let joint = self.marginal(&all)?;
        let in_card: usize = given.iter().map(|n| self.card(n)).product::<Result<usize>>()?;
        let out_vars: Vec<Variable> = out
            .iter()
            .map(|n| Ok(Variable::new(*n, self.card(n)?)))
            .collect::<Result<_>>()?;
        let out_card: usize = out_vars.iter().map(|v| v.card).product();
        let mut table = vec![0.0; in_card * out_card];
        for (i, p) in joint.iter() {
            table[i as usize] += p;
        }
        let rows = table
            .chunks(out_card)
            .map(|row| {
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    FiniteDistribution {
                        mass: row.iter().map(|x| x / s).collect(),
                    }
                } else {
                    FiniteDistribution {
                        mass: vec![1.0 / out_card as f64; out_card],
                    }
                }
            })
            .collect();
        super::Channel::new(in_card, out_vars, rows)
    }

    /// Same distribution with variables renamed through `map` (unlisted names kept).
    pub fn renamed(&self, map: &[(&str, &str)]) -> Result<JointDistribution> {
        let mut out = self.clone();
        for v in out.vars.iter_mut() {
            if let Some((_, to)) = map.iter().find(|(from, _)| *from == v.name) {
                v.name = (*to).to_string();
            }
        }
        let mut seen = std::collections::HashSet::new();
        for v in &out.vars {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::Argument(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(out)
    }

    /// Appends independent variables distributed as `other`.
    pub fn product(&self, other: &JointDistribution) -> Result<JointDistribution> {
        let mut vars = self.vars.clone();
        vars.extend(other.vars.iter().cloned());
        let s = other.states;
        let entries: Vec<(u64, f64)> = self
            .iter()
            .flat_map(|(i, p)| other.iter().map(move |(j, q)| (i * s + j, p * q)))
            .collect();
        JointDistribution::from_entries_with_tolerance(vars, entries, 1e-9)
    }
}

impl fmt::Display for JointDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .vars
            .iter()
            .map(|v| format!("{}[{}]", v.name, v.card))
            .collect();
        write!(f, "P({})", names.join(","))
    }
}

pub(crate) fn layout(vars: &[Variable]) -> Result<(Vec<u64>, u64)> {
    if vars.is_empty() {
        return Err(Error::Argument("a distribution needs at least one variable".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for v in vars {
        if v.card == 0 {
            return Err(Error::Argument(format!("variable `{}` has an empty alphabet", v.name)));
        }
        if !seen.insert(v.name.as_str()) {
            return Err(Error::Argument(format!("duplicate variable `{}`", v.name)));
        }
    }
    let mut strides = vec![1u64; vars.len()];
    let mut states: u64 = 1;
    for i in (0..vars.len()).rev() {
        strides[i] = states;
        states = states
            .checked_mul(vars[i].card as u64)
            .ok_or_else(|| Error::capacity("state-space size", u128::MAX, u64::MAX as u128))?;
    }
    Ok((strides, states))
}

pub(crate) fn increment(tuple: &mut [usize], cards: &[usize]) {
    for i in (0..tuple.len()).rev() {
        tuple[i] += 1;
        if tuple[i] < cards[i] {
            return;
        }
        tuple[i] = 0;
    }
}

fn validate_mass(mass: &[f64], tol: f64) -> Result<()> {
    validate_mass_iter(mass.iter().copied(), tol)
}

fn validate_mass_iter<I: Iterator<Item = f64>>(mass: I, tol: f64) -> Result<()> {
    let mut total = 0.0;
    for p in mass {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "entry {p} is negative or not finite"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!(
            "mass sums to {total}, not 1 (tolerance {tol:e})"
        )));
    }
    Ok(())
}

pub(crate) fn entropy_bits<I: Iterator<Item = f64>>(mass: I) -> f64 {
    mass.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}
