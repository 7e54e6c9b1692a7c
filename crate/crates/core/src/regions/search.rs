//! Multi-restart search over couplings `Q(o) r(w|o)` with a fixed observed
//! marginal `Q`.
//!
//! The objective is a linear combination of marginal entropies. Markov
//! structure is imposed through a factorized model family: the penalty is
//! `KL(P || prod_f P(A_f | B_f))`, which is zero exactly when `P` factors as
//! the model prescribes and otherwise equals the sum of the conditional
//! mutual informations of the violated chains.
//!
//! Each restart runs exponentiated-gradient (mirror descent) updates of the
//! conditional rows under an increasing penalty weight, a coordinate-wise
//! grid refinement of the rows, and finally EM projections onto the model
//! family that drive the chain deviation to round-off.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knobs for the coupling search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Number of step sizes tried per row in the grid refinement.
    pub grid_resolution: usize,
    /// Mirror-descent iterations per restart, split across penalty stages.
    pub max_iterations: usize,
    pub seed: u64,
    /// Feasibility tolerance on the summed chain deviations, in bits.
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 24,
            grid_resolution: 8,
            max_iterations: 8000,
            seed: 0,
            tolerance: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.grid_resolution == 0 || self.max_iterations == 0 {
            return Err(Error::Argument(
                "optimizer restarts, grid resolution and iterations must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Argument("optimizer tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Bitmask over the coordinates `(observed.., auxiliary..)`.
pub(crate) type Mask = u32;

pub(crate) fn mask(coords: &[usize]) -> Mask {
    coords.iter().fold(0, |m, &c| m | (1 << c))
}

/// A search problem: observed pmf, latent alphabet, objective and model family.
pub(crate) struct Problem {
    pub q: Vec<f64>,
    pub obs_cards: Vec<usize>,
    pub aux_cards: Vec<usize>,
    /// Auxiliary coordinate values of every latent symbol (injective).
    pub latent: Vec<Vec<usize>>,
    /// Objective as `(mask, coefficient)` entropy terms, entropies in nats.
    pub objective: Vec<(Mask, f64)>,
    /// Model factors `P(A | B)` as `(A, B)` masks.
    pub factors: Vec<(Mask, Mask)>,
    /// Quantities reported with each candidate and used to break objective ties.
    pub report: Vec<Vec<(Mask, f64)>>,
}

/// A feasible (or best infeasible) point found by the search.
#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    /// Row-major `r[o * nw + w]`.
    pub r: Vec<f64>,
    pub objective_bits: f64,
    pub deviation_bits: f64,
    pub report_bits: Vec<f64>,
}

struct Compiled<'a> {
    p: &'a Problem,
    nw: usize,
    /// Cell -> marginal index, per mask.
    maps: Vec<(Mask, Vec<u32>, usize)>,
    obj_coef: Vec<f64>,
    pen_coef: Vec<f64>,
    /// Factor masks as (index of A|B mask, index of B mask or none).
    factor_idx: Vec<(usize, Option<usize>)>,
    active_rows: Vec<usize>,
}

const FLOOR: f64 = 1e-300;

/// Penalty weights of the continuation, one stage each.
const PENALTY_STAGES: [f64; 7] = [30.0, 90.0, 270.0, 810.0, 2430.0, 7290.0, 21870.0];

/// Vertices tried per row in the grid refinement, by steepest descent order.
const GRID_DIRECTIONS: usize = 4;

impl<'a> Compiled<'a> {
    fn new(p: &'a Problem) -> Self {
        let n_obs: usize = p.obs_cards.iter().product();
        let nw = p.latent.len();
        let cards: Vec<usize> = p.obs_cards.iter().chain(&p.aux_cards).copied().collect();
        let all: Mask = (1 << cards.len()) - 1;

        let mut coefs: BTreeMap<Mask, (f64, f64)> = BTreeMap::new();
        for &(m, c) in &p.objective {
            coefs.entry(m).or_default().0 += c;
        }
        for &(a, b) in &p.factors {
            coefs.entry(a | b).or_default().1 += 1.0;
            if b != 0 {
                coefs.entry(b).or_default().1 -= 1.0;
            }
        }
        coefs.entry(all).or_default().1 -= 1.0;
        for &(m, _) in p.report.iter().flatten() {
            coefs.entry(m).or_default();
        }
        for &(a, b) in &p.factors {
            coefs.entry(a | b).or_default();
            if b != 0 {
                coefs.entry(b).or_default();
            }
        }

        let mut obs_tuple = vec![0usize; p.obs_cards.len()];
        let mut cell_coords: Vec<Vec<usize>> = Vec::with_capacity(n_obs * nw);
        for _ in 0..n_obs {
            for w in 0..nw {
                let mut c = obs_tuple.clone();
                c.extend_from_slice(&p.latent[w]);
                cell_coords.push(c);
            }
            crate::prob::increment(&mut obs_tuple, &p.obs_cards);
        }

        let mut maps = Vec::new();
        let mut obj_coef = Vec::new();
        let mut pen_coef = Vec::new();
        for (&m, &(co, cp)) in &coefs {
            let members: Vec<usize> = (0..cards.len()).filter(|&i| m & (1 << i) != 0).collect();
            let size: usize = members.iter().map(|&i| cards[i]).product();
            let map: Vec<u32> = cell_coords
                .iter()
                .map(|c| members.iter().fold(0usize, |acc, &i| acc * cards[i] + c[i]) as u32)
                .collect();
            maps.push((m, map, size));
            obj_coef.push(co);
            pen_coef.push(cp);
        }
        let find = |m: Mask| maps.iter().position(|(x, _, _)| *x == m).expect("mask compiled");
        let factor_idx = p
            .factors
            .iter()
            .map(|&(a, b)| (find(a | b), if b == 0 { None } else { Some(find(b)) }))
            .collect();
        let active_rows = (0..n_obs).filter(|&o| p.q[o] > 0.0).collect();
        Self {
            p,
            nw,
            maps,
            obj_coef,
            pen_coef,
            factor_idx,
            active_rows,
        }
    }

    fn joint(&self, r: &[f64]) -> Vec<f64> {
        let nw = self.nw;
        let mut joint = vec![0.0; r.len()];
        for &o in &self.active_rows {
            let q = self.p.q[o];
            for w in 0..nw {
                joint[o * nw + w] = q * r[o * nw + w];
            }
        }
        joint
    }

    fn marginals(&self, joint: &[f64]) -> Vec<Vec<f64>> {
        self.maps
            .iter()
            .map(|(_, map, size)| {
                let mut m = vec![0.0; *size];
                for (cell, &p) in joint.iter().enumerate() {
                    if p > 0.0 {
                        m[map[cell] as usize] += p;
                    }
                }
                m
            })
            .collect()
    }

    /// (objective, penalty) in nats.
    fn values(&self, margs: &[Vec<f64>]) -> (f64, f64) {
        let mut obj = 0.0;
        let mut pen = 0.0;
        for (k, m) in margs.iter().enumerate() {
            if self.obj_coef[k] == 0.0 && self.pen_coef[k] == 0.0 {
                continue;
            }
            let h: f64 = m.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
            obj += self.obj_coef[k] * h;
            pen += self.pen_coef[k] * h;
        }
        (obj, pen.max(0.0))
    }

    fn evaluate(&self, r: &[f64]) -> (f64, f64) {
        self.values(&self.marginals(&self.joint(r)))
    }

    fn candidate(&self, r: Vec<f64>) -> Candidate {
        let margs = self.marginals(&self.joint(&r));
        let (obj, pen) = self.values(&margs);
        let entropy = |m: Mask| {
            let k = self.maps.iter().position(|(x, _, _)| *x == m).expect("mask compiled");
            margs[k].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum::<f64>()
        };
        let report_bits = self
            .p
            .report
            .iter()
            .map(|terms| terms.iter().map(|&(m, c)| c * entropy(m)).sum::<f64>() / LN_2)
            .collect();
        Candidate {
            r,
            objective_bits: obj / LN_2,
            deviation_bits: pen / LN_2,
            report_bits,
        }
    }

    fn gradient(&self, margs: &[Vec<f64>], lambda: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        let nw = self.nw;
        for (k, (_, map, _)) in self.maps.iter().enumerate() {
            let c = self.obj_coef[k] + lambda * self.pen_coef[k];
            if c == 0.0 {
                continue;
            }
            let m = &margs[k];
            for &o in &self.active_rows {
                for w in 0..nw {
                    let cell = o * nw + w;
                    out[cell] -= c * m[map[cell] as usize].max(FLOOR).ln();
                }
            }
        }
    }

    fn mirror_step(&self, r: &[f64], g: &[f64], eta: f64, out: &mut [f64]) {
        let nw = self.nw;
        for &o in &self.active_rows {
            let row = &g[o * nw..(o + 1) * nw];
            let gmin = row.iter().copied().fold(f64::INFINITY, f64::min);
            let mut s = 0.0;
            for w in 0..nw {
                let v = r[o * nw + w] * (-eta * (row[w] - gmin)).exp();
                out[o * nw + w] = v;
                s += v;
            }
            for w in 0..nw {
                out[o * nw + w] = (out[o * nw + w] / s).max(FLOOR);
            }
        }
    }

    fn em_step(&self, r: &[f64], out: &mut [f64]) {
        let margs = self.marginals(&self.joint(r));
        let nw = self.nw;
        for &o in &self.active_rows {
            let mut s = 0.0;
            for w in 0..nw {
                let cell = o * nw + w;
                let mut v = 1.0;
                for &(ab, b) in &self.factor_idx {
                    let num = margs[ab][self.maps[ab].1[cell] as usize];
                    let den = match b {
                        Some(b) => margs[b][self.maps[b].1[cell] as usize],
                        None => 1.0,
                    };
                    v *= if den > 0.0 { num / den } else { 0.0 };
                }
                out[cell] = v;
                s += v;
            }
            if s > 0.0 {
                for w in 0..nw {
                    out[o * nw + w] /= s;
                }
            } else {
                out[o * nw..(o + 1) * nw].copy_from_slice(&r[o * nw..(o + 1) * nw]);
            }
        }
    }

    fn grid_refine(&self, r: &mut [f64], lambda: f64, resolution: usize) {
        let nw = self.nw;
        let score = |r: &[f64]| {
            let (o, p) = self.evaluate(r);
            o + lambda * p
        };
        let mut best = score(r);
        let mut grad = vec![0.0; r.len()];
        self.gradient(&self.marginals(&self.joint(r)), lambda, &mut grad);
        for &o in &self.active_rows {
            let mut order: Vec<usize> = (0..nw).collect();
            order.sort_by(|&a, &b| grad[o * nw + a].total_cmp(&grad[o * nw + b]));
            order.truncate(GRID_DIRECTIONS);
            for level in 1..=resolution {
                let delta = 0.5f64.powi(level as i32);
                let mut improved = None;
                for &w in &order {
                    let mut trial = r.to_vec();
                    for v in 0..nw {
                        let cell = o * nw + v;
                        let target = if v == w { 1.0 } else { 0.0 };
                        trial[cell] = ((1.0 - delta) * r[cell] + delta * target).max(FLOOR);
                    }
                    let s = score(&trial);
                    if s < best - 1e-15 {
                        best = s;
                        improved = Some(trial);
                    }
                }
                if let Some(t) = improved {
                    r.copy_from_slice(&t);
                    break;
                }
            }
        }
    }

    fn run(&self, init: Vec<f64>, cfg: &OptimizerConfig) -> Candidate {
        let per_stage = (cfg.max_iterations / PENALTY_STAGES.len()).max(1);
        let mut r = init;
        let mut trial = vec![0.0; r.len()];
        let mut grad = vec![0.0; r.len()];
        let mut eta = 1.0;
        for &lambda in &PENALTY_STAGES {
            let margs = self.marginals(&self.joint(&r));
            let (o, p) = self.values(&margs);
            let mut current = o + lambda * p;
            let mut margs = margs;
            for _ in 0..per_stage {
                self.gradient(&margs, lambda, &mut grad);
                let mut accepted = false;
                for _ in 0..40 {
                    self.mirror_step(&r, &grad, eta, &mut trial);
                    let tm = self.marginals(&self.joint(&trial));
                    let (o, p) = self.values(&tm);
                    let value = o + lambda * p;
                    if value <= current {
                        let gain = current - value;
                        std::mem::swap(&mut r, &mut trial);
                        margs = tm;
                        current = value;
                        eta *= 1.25;
                        accepted = gain > 1e-15 * (1.0 + current.abs());
                        break;
                    }
                    eta *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            self.grid_refine(&mut r, lambda, cfg.grid_resolution);
            eta = eta.max(1e-3);
        }
        let tol_nats = cfg.tolerance * LN_2 * 0.01;
        for _ in 0..5000 {
            let (_, pen) = self.evaluate(&r);
            if pen <= tol_nats {
                break;
            }
            self.em_step(&r, &mut trial);
            std::mem::swap(&mut r, &mut trial);
        }
        self.candidate(r)
    }
}

impl Problem {
    fn random_init(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n_obs: usize = self.obs_cards.iter().product();
        let nw = self.latent.len();
        let mut r = vec![0.0; n_obs * nw];
        for row in r.chunks_mut(nw) {
            let mut s = 0.0;
            for x in row.iter_mut() {
                let u: f64 = rng.random::<f64>();
                *x = -(1.0 - u).ln();
                s += *x;
            }
            row.iter_mut().for_each(|x| *x /= s);
        }
        r
    }

    /// Runs all restarts (plus any supplied starting points) and returns the
    /// best feasible candidate, or `SearchFailure` with the smallest deviation.
    pub(crate) fn solve(&self, cfg: &OptimizerConfig, starts: &[Vec<f64>]) -> Result<Candidate> {
        cfg.validate()?;
        let compiled = Compiled::new(self);
        let mut inits: Vec<Vec<f64>> = starts.to_vec();
        for i in 0..cfg.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            inits.push(self.random_init(&mut rng));
        }
        let results: Vec<Candidate> = inits
            .into_par_iter()
            .map(|init| compiled.run(init, cfg))
            .collect();
        pick_best(results, cfg.tolerance)
    }
}

pub(crate) fn pick_best(results: Vec<Candidate>, tolerance: f64) -> Result<Candidate> {
    let best_dev = results
        .iter()
        .map(|c| c.deviation_bits)
        .fold(f64::INFINITY, f64::min);
    results
        .into_iter()
        .filter(|c| c.deviation_bits <= tolerance)
        .min_by(|a, b| {
            if (a.objective_bits - b.objective_bits).abs() <= 1e-12 {
                lex(&a.report_bits, &b.report_bits)
            } else {
                a.objective_bits.total_cmp(&b.objective_bits)
            }
        })
        .ok_or(Error::SearchFailure {
            best_deviation: best_dev,
            tolerance,
        })
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}
