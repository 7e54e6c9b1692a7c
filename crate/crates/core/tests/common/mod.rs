//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use cascade_synth::synth::CascadeSystem;
use cascade_synth::{JointDistribution, Variable};
use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Product laws `p1(a) p2(b) ..` of binary-or-larger marginals whose
/// probabilities lie on the grid `{0, 1/g, .., 1}`.
fn grid_simplex(k: usize, g: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    fn rec(i: usize, left: usize, k: usize, g: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if i == k - 1 {
            cur[i] = left;
            out.push(cur.iter().map(|&c| c as f64 / g as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[i] = c;
            rec(i + 1, left - c, k, g, cur, out);
        }
    }
    rec(0, g, k, g, &mut cur, &mut out);
    out
}

fn product(marginals: &[Vec<f64>]) -> Vec<f64> {
    marginals.iter().fold(vec![1.0], |acc, m| acc.iter().flat_map(|x| m.iter().map(move |y| x * y)).collect())
}

/// Marginals reached by moving up to two steps of mass between two entries.
fn neighbours(m: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut out = vec![m.to_vec()];
    for i in 0..m.len() {
        for j in 0..m.len() {
            if i == j {
                continue;
            }
            for k in 1..=2 {
                let d = step * k as f64;
                if m[j] >= d - 1e-15 {
                    let mut n = m.to_vec();
                    n[i] += d;
                    n[j] = (n[j] - d).max(0.0);
                    out.push(n);
                }
            }
        }
    }
    out
}

/// Solves `max Σ λ_a H(a)` s.t. `Σ λ_a a = target`; returns the optimum and
/// the indices of the atoms in use.
fn solve_mixture(atoms: &[Vec<f64>], target: &[f64]) -> (f64, Vec<usize>) {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = atoms
        .iter()
        .map(|a| lp.add_var(h(a), (0.0, f64::INFINITY)))
        .collect();
    for (s, &t) in target.iter().enumerate() {
        let terms: Vec<_> = vars
            .iter()
            .zip(atoms)
            .filter(|(_, a)| a[s] != 0.0)
            .map(|(v, a)| (*v, a[s]))
            .collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, t);
    }
    match lp.solve().expect("mixture LP is feasible") {
        SolveOutcome::Solution(sol) => {
            let used = vars
                .iter()
                .enumerate()
                .filter(|(_, v)| sol.var_value(**v) > 1e-12)
                .map(|(i, _)| i)
                .collect();
            (sol.objective(), used)
        }
        SolveOutcome::Interrupted(_) => panic!("mixture LP interrupted"),
    }
}

/// Minimum of `I(A1..Ad; W)` over `W` making `A1..Ad` conditionally
/// independent, with each `P(Ai | W = w)` on a grid. Minimizing over
/// mixtures of product laws is the linear program
/// `max Σ λ_a H(q_a)` s.t. `Σ λ_a q_a = Q`, solved first on a grid of step
/// `1/g` and then on successively halved grids around the atoms in use.
///
/// Always an upper bound on the true value.
pub fn grid_common_information(q: &JointDistribution, g: usize, refinements: usize) -> f64 {
    let cards: Vec<usize> = q.vars().iter().map(|v| v.card).collect();
    let target: Vec<f64> = (0..q.num_states()).map(|i| q.prob_at(i)).collect();
    let inside = |a: &Vec<f64>| a.iter().zip(&target).all(|(x, t)| *x == 0.0 || *t > 0.0);
    let mut params: Vec<Vec<Vec<f64>>> = vec![vec![]];
    for &c in &cards {
        let grid = grid_simplex(c, g);
        params = params
            .iter()
            .flat_map(|p| {
                grid.iter().map(move |m| {
                    let mut n = p.clone();
                    n.push(m.clone());
                    n
                })
            })
            .collect();
    }
    params.retain(|p| inside(&product(p)));
    let mut step = 1.0 / g as f64;
    let mut best = f64::NEG_INFINITY;
    for round in 0..=refinements {
        let atoms: Vec<Vec<f64>> = params.iter().map(|p| product(p)).collect();
        let (value, used) = solve_mixture(&atoms, &target);
        best = best.max(value);
        if round == refinements {
            break;
        }
        step /= 2.0;
        let mut next: Vec<Vec<Vec<f64>>> = Vec::new();
        for &u in &used {
            let mut local: Vec<Vec<Vec<f64>>> = vec![vec![]];
            for m in &params[u] {
                let ns = neighbours(m, step);
                local = local
                    .iter()
                    .flat_map(|p| {
                        ns.iter().map(move |n| {
                            let mut v = p.clone();
                            v.push(n.clone());
                            v
                        })
                    })
                    .collect();
            }
            next.extend(local);
        }
        next.retain(|p| inside(&product(p)));
        next.sort_by(|a, b| a.partial_cmp(b).unwrap());
        next.dedup();
        params = next;
    }
    h(&target) - best
}

/// Random strictly positive pmf over `X, Y, Z` binary.
pub fn random_xyz(rng: &mut ChaCha8Rng) -> JointDistribution {
    let w: Vec<f64> = (0..8).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    let vars = ["X", "Y", "Z"].iter().map(|n| Variable::new(*n, 2)).collect();
    JointDistribution::new(vars, w.iter().map(|x| x / s).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random coupling over `(X, Y, Z, U, V)` in the three-node constraint set,
/// built as `Q(u,v) Q(x|u,v) Q(y|u,v) Q(z|v)` with binary observations.
pub fn random_d_coupling(rng: &mut ChaCha8Rng, cu: usize, cv: usize) -> JointDistribution {
    let mut row = |k: usize| {
        let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.02).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    let uv = row(cu * cv);
    let x: Vec<Vec<f64>> = (0..cu * cv).map(|_| row(2)).collect();
    let y: Vec<Vec<f64>> = (0..cu * cv).map(|_| row(2)).collect();
    let z: Vec<Vec<f64>> = (0..cv).map(|_| row(2)).collect();
    let vars = vec![
        Variable::new("X", 2),
        Variable::new("Y", 2),
        Variable::new("Z", 2),
        Variable::new("U", cu),
        Variable::new("V", cv),
    ];
    JointDistribution::from_fn(vars, |t| {
        let c = t[3] * cv + t[4];
        uv[c] * x[c][t[0]] * y[c][t[1]] * z[t[4]][t[2]]
    })
    .unwrap()
}

/// `Q(out | given)` by direct summation, keyed by `(given values, out value)`.
pub fn conditional_table(p: &JointDistribution, out: &str, given: &[&str]) -> HashMap<(Vec<usize>, usize), f64> {
    let oi = p.position(out).unwrap();
    let gi: Vec<usize> = given.iter().map(|g| p.position(g).unwrap()).collect();
    let mut joint: HashMap<(Vec<usize>, usize), f64> = HashMap::new();
    let mut norm: HashMap<Vec<usize>, f64> = HashMap::new();
    for (i, w) in p.iter() {
        let t = p.decode(i);
        let g: Vec<usize> = gi.iter().map(|&j| t[j]).collect();
        *joint.entry((g.clone(), t[oi])).or_default() += w;
        *norm.entry(g).or_default() += w;
    }
    joint.into_iter().map(|((g, o), w)| { let n = norm[&g]; ((g, o), w / n) }).collect()
}

pub fn lookup(t: &HashMap<(Vec<usize>, usize), f64>, given: Vec<usize>, out: usize) -> f64 {
    t.get(&(given, out)).copied().unwrap_or(0.0)
}

/// Induced law of a three-node system at block length one, enumerated
/// from the coupling's conditionals and the codebook words, keyed by
/// `(x, y, z, m_a, m_b, k)`.
pub fn brute_force_three_node(system: &CascadeSystem) -> HashMap<Vec<usize>, f64> {
    assert_eq!(system.n(), 1);
    let p = system.coupling().joint();
    let qx = conditional_table(p, "X", &[]);
    let x_uv = conditional_table(p, "X", &["U", "V"]);
    let y_uv = conditional_table(p, "Y", &["U", "V"]);
    let z_v = conditional_table(p, "Z", &["V"]);
    let cb = system.codebook();
    let (keys, na, nb) = cb.sizes();
    let mut out = HashMap::new();
    for k in 0..keys {
        for x in 0..2 {
            let mut w = Vec::new();
            for mb in 0..nb {
                for ma in 0..na {
                    let u = cb.u_word(ma, mb, k)[0];
                    let v = cb.v_word(mb, k)[0];
                    w.push((ma, mb, u, v, lookup(&x_uv, vec![u, v], x)));
                }
            }
            let s: f64 = w.iter().map(|e| e.4).sum();
            for &(ma, mb, u, v, l) in &w {
                let post = if s > 0.0 { l / s } else { 1.0 / w.len() as f64 };
                for y in 0..2 {
                    for z in 0..2 {
                        let pr = lookup(&qx, vec![], x) / keys as f64
                            * post
                            * lookup(&y_uv, vec![u, v], y)
                            * lookup(&z_v, vec![v], z);
                        if pr > 0.0 {
                            *out.entry(vec![x, y, z, ma as usize, mb as usize, k as usize]).or_insert(0.0) += pr;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Posterior of the first node's message by direct normalization of the
/// product likelihoods `Π_t Q(x_t | u_t, v_t)`.
pub fn direct_posterior(system: &CascadeSystem, x: &[usize], k: u64) -> Vec<f64> {
    let p = system.coupling().joint();
    let x_uv = conditional_table(p, "X", &["U", "V"]);
    let cb = system.codebook();
    let (_, na, nb) = cb.sizes();
    let mut w = vec![0.0; (na * nb) as usize];
    for mb in 0..nb {
        for ma in 0..na {
            let (u, v) = (cb.u_word(ma, mb, k), cb.v_word(mb, k));
            w[(mb * na + ma) as usize] = (0..x.len()).map(|t| lookup(&x_uv, vec![u[t], v[t]], x[t])).product();
        }
    }
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Secrecy TV of a general cascade at block length one, enumerated from
/// the coupling's conditionals: `TV(P(x, y.., parts), P(parts) Q(x, y..))`.
pub fn brute_force_cascade_secrecy(system: &CascadeSystem) -> f64 {
    assert_eq!(system.n(), 1);
    let links = system.links();
    let p = system.coupling().joint();
    let us: Vec<String> = (1..=links).map(|i| format!("U{i}")).collect();
    let ys: Vec<String> = (1..=links).map(|i| format!("Y{i}")).collect();
    let us_ref: Vec<&str> = us.iter().map(String::as_str).collect();
    let qx = conditional_table(p, "X", &[]);
    let x_u = conditional_table(p, "X", &us_ref);
    let y_u: Vec<_> = (0..links).map(|i| conditional_table(p, &ys[i], &us_ref[i..])).collect();
    let y_cards: Vec<usize> = ys.iter().map(|y| p.card(y).unwrap()).collect();
    let x_card = p.card("X").unwrap();
    let cb = system.codebook();
    let keys = cb.key_count();
    let msgs = cb.message_count();
    let mut joint: HashMap<(Vec<usize>, Vec<u64>), f64> = HashMap::new();
    for k in 0..keys {
        let words: Vec<Vec<usize>> = (0..msgs)
            .map(|m| (0..links).map(|j| cb.word(j, cb.word_index(j, k, m))[0]).collect())
            .collect();
        for x in 0..x_card {
            let lik: Vec<f64> = words.iter().map(|u| lookup(&x_u, u.clone(), x)).collect();
            let s: f64 = lik.iter().sum();
            for (m, u) in words.iter().enumerate() {
                let post = if s > 0.0 { lik[m] / s } else { 1.0 / msgs as f64 };
                let base = lookup(&qx, vec![], x) / keys as f64 * post;
                if base == 0.0 {
                    continue;
                }
                let mut outs: Vec<(Vec<usize>, f64)> = vec![(vec![x], base)];
                for i in 0..links {
                    let ctx = u[i..].to_vec();
                    outs = outs
                        .iter()
                        .flat_map(|(seq, w)| {
                            (0..y_cards[i]).map({
                                let ctx = ctx.clone();
                                let t = &y_u[i];
                                move |y| {
                                    let mut s = seq.clone();
                                    s.push(y);
                                    (s, w * lookup(t, ctx.clone(), y))
                                }
                            })
                        })
                        .collect();
                }
                let parts = cb.split_message(m as u64);
                for (seq, w) in outs {
                    if w > 0.0 {
                        *joint.entry((seq, parts.clone())).or_default() += w;
                    }
                }
            }
        }
    }
    let mut p_parts: HashMap<Vec<u64>, f64> = HashMap::new();
    for ((_, parts), w) in &joint {
        *p_parts.entry(parts.clone()).or_default() += w;
    }
    let names: Vec<&str> = std::iter::once("X").chain(ys.iter().map(String::as_str)).collect();
    let target = p.marginal(&names).unwrap();
    let mut tv = 0.0;
    for (ti, q) in target.iter() {
        let seq = target.decode(ti);
        for (parts, pm) in &p_parts {
            let a = joint.get(&(seq.clone(), parts.clone())).copied().unwrap_or(0.0);
            tv += (a - q * pm).abs();
        }
    }
    // Mass of the induced law outside the target's support.
    for ((seq, _), w) in &joint {
        if target.prob(seq).unwrap() == 0.0 {
            tv += w;
        }
    }
    tv / 2.0
}
