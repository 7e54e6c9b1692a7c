//! Information measures on [`JointDistribution`]s. All results are in bits.

use crate::error::{Error, Result};

use super::distribution::entropy_bits;
use super::{FiniteDistribution, JointDistribution, Variable};

/// Negative round-off larger than this in an information quantity is a bug.
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

/// Half the L1 distance between two distributions over identical variables.
pub fn total_variation(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    if p.vars() != q.vars() {
        return Err(Error::Dimension(format!(
            "total variation between {p} and {q}"
        )));
    }
    let sum = match (p.dense_mass(), q.dense_mass()) {
        (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>(),
        _ => merged_l1(p.iter(), q.iter()),
    };
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

fn merged_l1<A, B>(a: A, b: B) -> f64
where
    A: Iterator<Item = (u64, f64)>,
    B: Iterator<Item = (u64, f64)>,
{
    let mut a = a.peekable();
    let mut b = b.peekable();
    let mut sum = 0.0;
    loop {
        match (a.peek().copied(), b.peek().copied()) {
            (Some((i, x)), Some((j, y))) => {
                if i == j {
                    sum += (x - y).abs();
                    a.next();
                    b.next();
                } else if i < j {
                    sum += x;
                    a.next();
                } else {
                    sum += y;
                    b.next();
                }
            }
            (Some((_, x)), None) => {
                sum += x;
                a.next();
            }
            (None, Some((_, y))) => {
                sum += y;
                b.next();
            }
            (None, None) => return sum,
        }
    }
}

/// Entropy of the marginal on `subset`, with `0 log 0 = 0`.
pub fn entropy(p: &JointDistribution, subset: &[&str]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::Argument("entropy of an empty variable set".into()));
    }
    let m = p.marginal(subset)?;
    Ok(entropy_bits(m.iter().map(|(_, x)| x)))
}

/// `I(A;B)`, clamped at zero against round-off.
pub fn mutual_information(p: &JointDistribution, a: &[&str], b: &[&str]) -> Result<f64> {
    nonempty(a, "A")?;
    nonempty(b, "B")?;
    disjoint(&[a, b])?;
    let ab: Vec<&str> = a.iter().chain(b).copied().collect();
    let v = entropy(p, a)? + entropy(p, b)? - entropy(p, &ab)?;
    clamp_info(v, "I(A;B)")
}

/// `I(A;C|B)`: the deviation of the chain `A - B - C` from being Markov.
///
/// An empty `b` gives the unconditional `I(A;C)`.
pub fn conditional_mutual_information(
    p: &JointDistribution,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    nonempty(a, "A")?;
    nonempty(c, "C")?;
    disjoint(&[a, b, c])?;
    if b.is_empty() {
        return mutual_information(p, a, c);
    }
    let ab: Vec<&str> = a.iter().chain(b).copied().collect();
    let cb: Vec<&str> = c.iter().chain(b).copied().collect();
    let abc: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
    let v = entropy(p, &ab)? + entropy(p, &cb)? - entropy(p, &abc)? - entropy(p, b)?;
    clamp_info(v, "I(A;C|B)")
}

/// Tests the Markov chain `A - B - C`; returns the verdict and `I(A;C|B)`.
pub fn is_markov(
    p: &JointDistribution,
    a: &[&str],
    b: &[&str],
    c: &[&str],
    tol: f64,
) -> Result<(bool, f64)> {
    let dev = conditional_mutual_information(p, a, b, c)?;
    Ok((dev <= tol, dev))
}

/// Normalized symbol counts of a sequence.
pub fn empirical_distribution(sequence: &[usize], alphabet_size: usize) -> Result<FiniteDistribution> {
    if sequence.is_empty() {
        return Err(Error::Argument("empirical distribution of an empty sequence".into()));
    }
    if alphabet_size == 0 {
        return Err(Error::Argument("alphabet size must be positive".into()));
    }
    let mut counts = vec![0usize; alphabet_size];
    for &s in sequence {
        if s >= alphabet_size {
            return Err(Error::Argument(format!(
                "symbol {s} outside alphabet of size {alphabet_size}"
            )));
        }
        counts[s] += 1;
    }
    FiniteDistribution::from_weights(counts.into_iter().map(|c| c as f64).collect())
}

/// The `n`-fold i.i.d. extension of `p`.
///
/// Variables are laid out block by block: `X_1, Y_1, .., X_2, Y_2, ..`.
/// Fails with a capacity error when the extension has more than
/// `size_guard` states.
pub fn product_extension(p: &JointDistribution, n: usize, size_guard: u128) -> Result<JointDistribution> {
    if n == 0 {
        return Err(Error::Argument("block length must be positive".into()));
    }
    let s = p.num_states() as u128;
    let required = s
        .checked_pow(n as u32)
        .ok_or_else(|| Error::capacity("product extension", u128::MAX, size_guard))?;
    if required > size_guard {
        return Err(Error::capacity(
            format!("{n}-fold product of {p}"),
            required,
            size_guard,
        ));
    }
    if n == 1 {
        return Ok(p.clone());
    }
    let mut vars = Vec::with_capacity(p.vars().len() * n);
    for t in 1..=n {
        for v in p.vars() {
            vars.push(Variable::new(format!("{}_{t}", v.name), v.card));
        }
    }
    let support: Vec<(u64, f64)> = p.iter().collect();
    let s = p.num_states();
    let mut entries: Vec<(u64, f64)> = vec![(0, 1.0)];
    for _ in 0..n {
        entries = entries
            .iter()
            .flat_map(|&(i, w)| support.iter().map(move |&(j, q)| (i * s + j, w * q)))
            .collect();
    }
    JointDistribution::from_entries_with_tolerance(vars, entries, 1e-9)
}

fn nonempty(set: &[&str], label: &str) -> Result<()> {
    if set.is_empty() {
        Err(Error::Argument(format!("variable set {label} is empty")))
    } else {
        Ok(())
    }
}

fn disjoint(sets: &[&[&str]]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if let Some(x) = a.iter().find(|x| b.contains(x)) {
                return Err(Error::Argument(format!(
                    "variable `{x}` appears in two argument sets"
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn clamp_info(v: f64, what: &str) -> Result<f64> {
    if v < -ROUNDOFF_FLOOR {
        Err(Error::NegativeInformation {
            what: what.into(),
            value: v,
        })
    } else {
        Ok(v.max(0.0))
    }
}
