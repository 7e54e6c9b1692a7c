//! Searches over auxiliary couplings: rate minimization and common-information
//! quantities.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::prob::{JointDistribution, Variable};

use super::coupling::{check_membership_d, rate_triple, AuxiliaryCoupling, DEFAULT_CARD_SLACK};
use super::frontier::RatePoint;
use super::search::{mask, Candidate, Mask, OptimizerConfig, Problem};

const X: usize = 0;
const Y: usize = 1;
const Z: usize = 2;

fn mi(a: Mask, b: Mask, c: f64) -> [(Mask, f64); 3] {
    [(a, c), (b, c), (a | b, -c)]
}

fn dense_pmf(target: &JointDistribution, limit: u64) -> Result<Vec<f64>> {
    let n = target.num_states();
    if n > limit {
        return Err(Error::capacity("coupling search over the target alphabet", n as u128, limit as u128));
    }
    Ok((0..n).map(|i| target.prob_at(i)).collect())
}

fn expect_names(target: &JointDistribution, names: &[&str]) -> Result<()> {
    if target.names() != names {
        return Err(Error::Dimension(format!(
            "expected a target over {names:?}, got {:?}",
            target.names()
        )));
    }
    Ok(())
}

/// Assembles the coupling `Q(o) r(w|o)` as a joint over observed then
/// auxiliary variables.
fn assemble(target: &JointDistribution, aux: &[Variable], problem: &Problem, c: &Candidate) -> Result<JointDistribution> {
    let mut vars = target.vars().to_vec();
    vars.extend(aux.iter().cloned());
    let aux_states: u64 = aux.iter().map(|v| v.card as u64).product();
    let nw = problem.latent.len();
    let mut entries = Vec::new();
    for (o, &q) in problem.q.iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        for (w, coords) in problem.latent.iter().enumerate() {
            let a = coords
                .iter()
                .zip(aux)
                .fold(0u64, |acc, (&s, v)| acc * v.card as u64 + s as u64);
            let p = q * c.r[o * nw + w];
            if p > 0.0 {
                entries.push((o as u64 * aux_states + a, p));
            }
        }
    }
    JointDistribution::from_entries_with_tolerance(vars, entries, 1e-9)
}

/// Integer partitions of `n` into at most `k` positive parts, largest first.
fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        if k == 0 {
            return;
        }
        for part in (1..=max.min(n)).rev() {
            cur.push(part);
            go(n - part, k - 1, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, n, &mut Vec::new(), &mut out);
    out
}

/// Maximum number of deterministic maps `V = phi(U)` searched.
const MAX_MAPS: usize = 64;

/// Best coupling in the three-node constraint set for the weighted objective
/// `w0 I(XYZ;UV) + w1 I(X;UV) + w2 I(X;V)`.
///
/// With `restrict_to_functional`, `V` is additionally a deterministic function
/// of `U`. Maps are enumerated up to relabeling of `U` and `V` (a map is then
/// the multiset of its fibre sizes); beyond [`MAX_MAPS`] of them a seeded
/// sample is searched. The result is an upper bound on the true optimum.
pub fn minimize_rates(
    target: &JointDistribution,
    weights: [f64; 3],
    cards: Option<(usize, usize)>,
    restrict_to_functional: bool,
    cfg: &OptimizerConfig,
) -> Result<(AuxiliaryCoupling, RatePoint)> {
    expect_names(target, &["X", "Y", "Z"])?;
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || weights.iter().all(|w| *w == 0.0) {
        return Err(Error::Argument(format!(
            "objective weights must be nonnegative and not all zero, got {weights:?}"
        )));
    }
    cfg.validate()?;
    let obs: usize = target.vars().iter().map(|v| v.card).product();
    let v_bound = obs + DEFAULT_CARD_SLACK;
    let (cu, cv) = cards.unwrap_or((obs * v_bound + DEFAULT_CARD_SLACK, v_bound));
    if cu == 0 || cv == 0 || cv > v_bound || cu > obs * cv + DEFAULT_CARD_SLACK {
        return Err(Error::Argument(format!(
            "auxiliary alphabets |U|={cu}, |V|={cv} outside 1..=bounds"
        )));
    }
    let q = dense_pmf(target, 1 << 12)?;
    let obs_cards: Vec<usize> = target.vars().iter().map(|v| v.card).collect();
    let (u, v) = (3, 4);
    let xyz = mask(&[X, Y, Z]);
    let uv = mask(&[u, v]);
    let mut objective = Vec::new();
    objective.extend(mi(xyz, uv, weights[0]));
    objective.extend(mi(mask(&[X]), uv, weights[1]));
    objective.extend(mi(mask(&[X]), mask(&[v]), weights[2]));
    objective.retain(|(_, c)| *c != 0.0);
    let report = vec![
        mi(xyz, uv, 1.0).to_vec(),
        mi(mask(&[X]), uv, 1.0).to_vec(),
        mi(mask(&[X]), mask(&[v]), 1.0).to_vec(),
    ];
    let factors = vec![
        (uv, 0),
        (mask(&[X]), uv),
        (mask(&[Y]), uv),
        (mask(&[Z]), mask(&[v])),
    ];
    let make = |latent: Vec<Vec<usize>>| Problem {
        q: q.clone(),
        obs_cards: obs_cards.clone(),
        aux_cards: vec![cu, cv],
        latent,
        objective: objective.clone(),
        factors: factors.clone(),
        report: report.clone(),
    };

    let (problem, cand) = if restrict_to_functional {
        let mut maps = partitions(cu, cv);
        if maps.len() > MAX_MAPS {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(u64::MAX);
            maps.shuffle(&mut rng);
            maps.truncate(MAX_MAPS);
        }
        let per_map = OptimizerConfig {
            restarts: cfg.restarts.div_ceil(maps.len()).max(2),
            ..cfg.clone()
        };
        let mut best: Option<(Problem, Candidate)> = None;
        let mut best_dev = f64::INFINITY;
        for (i, parts) in maps.iter().enumerate() {
            let mut latent = Vec::with_capacity(cu);
            for (label, &size) in parts.iter().enumerate() {
                for _ in 0..size {
                    latent.push(vec![latent.len(), label]);
                }
            }
            let problem = make(latent);
            let map_cfg = OptimizerConfig {
                seed: cfg.seed.wrapping_add(i as u64),
                ..per_map.clone()
            };
            match problem.solve(&map_cfg, &[]) {
                Ok(c) => {
                    let better = best.as_ref().is_none_or(|(_, b)| c.objective_bits < b.objective_bits - 1e-12);
                    if better {
                        best = Some((problem, c));
                    }
                }
                Err(Error::SearchFailure { best_deviation, .. }) => best_dev = best_dev.min(best_deviation),
                Err(e) => return Err(e),
            }
        }
        best.ok_or(Error::SearchFailure {
            best_deviation: best_dev,
            tolerance: cfg.tolerance,
        })?
    } else {
        let latent = (0..cu).flat_map(|a| (0..cv).map(move |b| vec![a, b])).collect();
        let problem = make(latent);
        let cand = problem.solve(cfg, &[])?;
        (problem, cand)
    };
    let aux_vars = [Variable::new("U", cu), Variable::new("V", cv)];
    let joint = assemble(target, &aux_vars, &problem, &cand)?;
    let coupling = AuxiliaryCoupling::with_target(joint, target.clone(), super::coupling::Layout::ThreeNode)?;
    let report = check_membership_d(&coupling, cfg.tolerance)?;
    if !report.in_d() || (restrict_to_functional && !report.functional_v_of_u) {
        return Err(Error::SearchFailure {
            best_deviation: report.chain1_dev + report.chain2_dev,
            tolerance: cfg.tolerance,
        });
    }
    let rates = rate_triple(&coupling)?;
    Ok((coupling, rates))
}

/// Smallest `I(X,Y,Z;U,V)` over the three-node constraint set.
pub fn cascade_common_information(
    target: &JointDistribution,
    cards: Option<(usize, usize)>,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    Ok(minimize_rates(target, [1.0, 0.0, 0.0], cards, false, cfg)?.1.r0)
}

fn common_information(target: &JointDistribution, card: usize, cfg: &OptimizerConfig) -> Result<f64> {
    cfg.validate()?;
    if card == 0 {
        return Err(Error::Argument("auxiliary alphabet must be nonempty".into()));
    }
    let q = dense_pmf(target, 1 << 12)?;
    let k = target.vars().len();
    let w = k;
    let all = mask(&(0..k).collect::<Vec<_>>());
    let wm = mask(&[w]);
    let mut factors = vec![(wm, 0)];
    factors.extend((0..k).map(|i| (mask(&[i]), wm)));
    let problem = Problem {
        q,
        obs_cards: target.vars().iter().map(|v| v.card).collect(),
        aux_cards: vec![card],
        latent: (0..card).map(|s| vec![s]).collect(),
        objective: mi(all, wm, 1.0).to_vec(),
        factors,
        report: vec![],
    };
    Ok(problem.solve(cfg, &[])?.objective_bits.max(0.0))
}

/// Wyner's common information `min I(X,Y;U)` over `X - U - Y` with `|U| = card_u`.
pub fn wyner_common_information(target: &JointDistribution, card_u: usize, cfg: &OptimizerConfig) -> Result<f64> {
    if target.vars().len() != 2 {
        return Err(Error::Dimension(format!("Wyner common information needs two variables, got {target}")));
    }
    common_information(target, card_u, cfg)
}

/// `min I(X,Y,Z;W)` over `W` making `X`, `Y`, `Z` conditionally independent.
/// The default alphabet for `W` is `|X||Y||Z|`.
pub fn triple_wyner(target: &JointDistribution, card_w: Option<usize>, cfg: &OptimizerConfig) -> Result<f64> {
    if target.vars().len() != 3 {
        return Err(Error::Dimension(format!("triple common information needs three variables, got {target}")));
    }
    let card = card_w.unwrap_or(target.vars().iter().map(|v| v.card).product());
    common_information(target, card, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        assert_eq!(partitions(4, 2), vec![vec![4], vec![3, 1], vec![2, 2]]);
        assert_eq!(partitions(5, 5).len(), 7);
        assert_eq!(partitions(3, 1), vec![vec![3]]);
    }
}
