//! Seed sweeps of exact total-variation experiments.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::{
    mutual_information, total_variation, FiniteDistribution, JointDistribution, Variable, DENSE_LIMIT,
};
use crate::regions::{
    general_cascade_rates, rate_triple, variation_rates, AuxiliaryCoupling, Layout, RatePoint, Variation,
};

use super::codebook::{index_count, sample_codebook, sample_from_model};
use super::model::CascadeModel;
use super::report::{ExperimentReport, TrialRecord};
use super::rng::{draw, stream, TAG_RELAY_FIRST, TAG_RELAY_SECOND};
use super::system::{
    general_cascade_exact, iid_blocks, iid_sequence, induced_distribution_exact, normalize_log,
    physical_markov_deviations, secrecy_tv, sequence_card, sequence_law, synthesis_tv, CascadeSystem,
    InducedDistribution, SYSTEM_TOLERANCE,
};

/// Block lengths, trial count, base seed and enumeration guard of a sweep.
///
/// Trial `t` uses seed `seed + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub guard: u128,
}

impl Sweep {
    pub fn new(n_list: Vec<usize>, trials: usize, seed: u64, guard: u128) -> Self {
        Self {
            n_list,
            trials,
            seed,
            guard,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Argument("at least one trial is required".into()));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::Argument(format!(
                "block lengths must be a nonempty list of positive integers, got {:?}",
                self.n_list
            )));
        }
        Ok(())
    }

    /// Runs `f(n, seed)` for every pair, in parallel, returning records in
    /// `(n, trial)` order.
    fn run<F>(&self, f: F) -> Result<Vec<TrialRecord>>
    where
        F: Fn(usize, u64) -> Result<TrialRecord> + Sync,
    {
        self.validate()?;
        let jobs: Vec<(usize, u64)> = self
            .n_list
            .iter()
            .flat_map(|&n| (0..self.trials as u64).map(move |t| (n, self.seed.wrapping_add(t))))
            .collect();
        jobs.par_iter().map(|&(n, s)| f(n, s)).collect()
    }
}

fn exact_induced(system: &CascadeSystem, guard: u128) -> Result<InducedDistribution> {
    match system.coupling().layout() {
        Layout::ThreeNode => induced_distribution_exact(system, guard),
        _ => general_cascade_exact(system, guard),
    }
}

/// Largest pointwise gap between the induced `Xn` law and `Q_X^n`.
pub fn x_marginal_deviation(induced: &InducedDistribution, q_x: &JointDistribution) -> Result<f64> {
    let q = FiniteDistribution::new((0..q_x.num_states()).map(|i| q_x.prob_at(i)).collect())?;
    let px = induced.x_marginal()?;
    let iid = iid_sequence(&q, induced.n(), "Xn")?;
    if px.num_states() != iid.num_states() {
        return Err(Error::Dimension("source alphabets differ".into()));
    }
    Ok((0..px.num_states())
        .map(|i| (px.prob_at(i) - iid.prob_at(i)).abs())
        .fold(0.0, f64::max))
}

/// Exact secrecy TV of the likelihood-encoder cascade for each `(n, seed)`.
///
/// Works for three-node and longer cascade couplings. Each record carries
/// the synthesis TV without secrecy and the largest deviation of the `Xn`
/// marginal from `Q_X^n`; three-node records also carry the two physical
/// Markov checks `I(Xn; Yn | Ma, Mb, K)` and `I(Xn, Yn, Ma; Zn | Mb, K)`.
pub fn cascade_experiment(coupling: &AuxiliaryCoupling, rates: &RatePoint, sweep: &Sweep) -> Result<ExperimentReport> {
    let (name, floors, count_names) = match coupling.layout() {
        Layout::ThreeNode => (
            "cascade",
            rate_triple(coupling)?,
            vec!["N_K".to_string(), "N_a".into(), "N_b".into()],
        ),
        Layout::Cascade { links } => (
            "long_cascade",
            general_cascade_rates(coupling, SYSTEM_TOLERANCE)?,
            std::iter::once("N_K".to_string())
                .chain((1..=links).map(|j| format!("N_p{j}")))
                .collect(),
        ),
        Layout::Relay => return Err(Error::Argument("use the relay experiment for relay couplings".into())),
    };
    let q_x = coupling.target().marginal(&["X"])?;
    let three = coupling.layout() == Layout::ThreeNode;
    let records = sweep.run(|n, seed| {
        let cb = sample_codebook(coupling, n, rates, seed, sweep.guard)?;
        let counts = std::iter::once(cb.key_count()).chain(cb.part_counts().iter().copied()).collect();
        let system = CascadeSystem::new(coupling.clone(), cb)?;
        let induced = exact_induced(&system, sweep.guard)?;
        let mut metrics = BTreeMap::new();
        metrics.insert("synthesis_tv".to_string(), synthesis_tv(&induced, coupling.target())?);
        metrics.insert("x_marginal_dev".to_string(), x_marginal_deviation(&induced, &q_x)?);
        if three {
            let (a, b) = physical_markov_deviations(&induced)?;
            metrics.insert("markov_first".to_string(), a);
            metrics.insert("markov_last".to_string(), b);
        }
        Ok(TrialRecord {
            n,
            seed,
            tv: secrecy_tv(&induced, coupling.target())?,
            metrics,
            index_counts: counts,
        })
    })?;
    let mut report = ExperimentReport::new(name, rates.to_vec(), floors.to_vec(), count_names, records);
    report
        .notes
        .push("tv is the exact secrecy total variation; synthesis_tv omits the messages".into());
    Ok(report)
}

/// Model of a two-layer mixture over `(X, U, V)` with no downstream nodes.
fn mixture_model(q_xuv: &JointDistribution) -> Result<CascadeModel> {
    let p = q_xuv.marginal(&["X", "U", "V"])?;
    let dist = |names: &[&str]| -> Result<FiniteDistribution> {
        let m = p.marginal(names)?;
        FiniteDistribution::from_weights((0..m.num_states()).map(|i| m.prob_at(i)).collect())
    };
    let rows = |out: &str, given: &[&str]| -> Result<Vec<FiniteDistribution>> {
        let ch = p.conditional(&[out], given)?;
        Ok((0..ch.input_alphabet()).map(|i| ch.row(i).clone()).collect())
    };
    Ok(CascadeModel {
        links: 2,
        x_card: p.card("X")?,
        y_cards: Vec::new(),
        aux_cards: vec![p.card("U")?, p.card("V")?],
        q_x: dist(&["X"])?,
        base: dist(&["V"])?,
        layer: vec![rows("U", &["V"])?],
        x_given: rows("X", &["U", "V"])?,
        y_given: Vec::new(),
        target: p.marginal(&["X"])?,
    })
}

/// Exact TV between the codeword mixture of `Xn` and `Q_X^n` for a
/// two-layer book with `(R_a, R_b)`; returns the TV and `(N_a, N_b)`.
fn mixture_tv(model: &CascadeModel, n: usize, ra: f64, rb: f64, seed: u64, guard: u128) -> Result<(f64, u64, u64)> {
    let x_states = sequence_card(model.x_card, n)?;
    if x_states as u128 > guard || x_states as u64 > DENSE_LIMIT {
        return Err(Error::capacity(
            format!("source block law at n={n}; reduce n"),
            x_states as u128,
            guard.min(DENSE_LIMIT as u128),
        ));
    }
    let rates = RatePoint::new(0.0, vec![ra + rb, rb])?;
    let cb = sample_from_model(model, n, &rates, seed, guard)?;
    let (_, na, nb) = cb.sizes();
    let total = na * nb;
    let mut pairs: BTreeMap<(&[usize], &[usize]), u64> = BTreeMap::new();
    for m in 0..total {
        let key = (cb.word(0, cb.word_index(0, 0, m)), cb.word(1, cb.word_index(1, 0, m)));
        *pairs.entry(key).or_insert(0) += 1;
    }
    let pairs: Vec<_> = pairs.into_iter().collect();
    let laws: Vec<Vec<(u64, f64)>> = pairs
        .par_iter()
        .map(|((u, v), _)| {
            let rows: Vec<&FiniteDistribution> = u
                .iter()
                .zip(v.iter())
                .map(|(&ut, &vt)| &model.x_given[ut * model.aux_cards[1] + vt])
                .collect();
            sequence_law(&rows)
        })
        .collect();
    let mut mass = vec![0.0f64; x_states];
    for ((_, count), law) in pairs.iter().zip(&laws) {
        let w = *count as f64 / total as f64;
        for &(x, p) in law {
            mass[x as usize] += w * p;
        }
    }
    let iid = iid_sequence(&model.q_x, n, "Xn")?;
    let tv = 0.5
        * mass
            .iter()
            .enumerate()
            .map(|(i, p)| (p - iid.prob_at(i as u64)).abs())
            .sum::<f64>();
    Ok((tv, na, nb))
}

/// Soft covering with one layer: `⌈2^(nR)⌉` words drawn from `Q_U^n`, the
/// uniform mixture pushed through `Q_X|U`, compared with `Q_X^n`.
///
/// `q_ux` must have variables `U` and `X`.
pub fn softcover_experiment(q_ux: &JointDistribution, rate: f64, sweep: &Sweep) -> Result<ExperimentReport> {
    let joint = q_ux
        .marginal(&["X", "U"])?
        .product(&JointDistribution::new(vec![Variable::new("V", 1)], vec![1.0])?)?;
    let model = mixture_model(&joint)?;
    let floor = mutual_information(&joint, &["X"], &["U"])?;
    let records = sweep.run(|n, seed| {
        let (tv, na, nb) = mixture_tv(&model, n, rate, 0.0, seed, sweep.guard)?;
        Ok(TrialRecord {
            n,
            seed,
            tv,
            metrics: BTreeMap::new(),
            index_counts: vec![na * nb],
        })
    })?;
    Ok(ExperimentReport::new("softcover", vec![rate], vec![floor], vec!["N".into()], records))
}

/// Soft covering with a two-layer book: `⌈2^(nR_b)⌉` base words from
/// `Q_V^n`, `⌈2^(nR_a)⌉` words per base word from `Q_U|V`, the mixture
/// pushed through `Q_X|UV`.
///
/// `q_xuv` must have variables `X`, `U` and `V`. The report lists rates as
/// `(R_a + R_b, R_b)` against floors `(I(X;U,V), I(X;V))`. With `|V| = 1`
/// the result coincides with [`softcover_experiment`] at rate `R_a + R_b`
/// whenever `N_a · N_b = ⌈2^(n(R_a + R_b))⌉`.
pub fn superposition_softcover_experiment(
    q_xuv: &JointDistribution,
    (ra, rb): (f64, f64),
    sweep: &Sweep,
) -> Result<ExperimentReport> {
    let model = mixture_model(q_xuv)?;
    let floors = vec![
        mutual_information(q_xuv, &["X"], &["U", "V"])?,
        mutual_information(q_xuv, &["X"], &["V"])?,
    ];
    let records = sweep.run(|n, seed| {
        let (tv, na, nb) = mixture_tv(&model, n, ra, rb, seed, sweep.guard)?;
        Ok(TrialRecord {
            n,
            seed,
            tv,
            metrics: BTreeMap::new(),
            index_counts: vec![na, nb],
        })
    })?;
    Ok(ExperimentReport::new(
        "superposition_softcover",
        vec![ra + rb, rb],
        floors,
        vec!["N_a".into(), "N_b".into()],
        records,
    ))
}

/// Rates of the two point-to-point stages of a relay scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelayRates {
    pub r1: f64,
    pub r2: f64,
    /// Common randomness of stage one; `None` picks `H(U) + 0.25 - R1`.
    pub r01: Option<f64>,
    /// Common randomness of stage two; `None` picks `H(W) + 0.25 - R2`.
    pub r02: Option<f64>,
}

/// Margin added by the default common-randomness rates.
pub const RELAY_COMMON_MARGIN: f64 = 0.25;

/// Merges `Z` values whose posterior rows `Q(U | Z = z)` coincide: returns
/// the class of each `z` and the number of classes.
fn sufficient_classes(p: &JointDistribution) -> Result<(Vec<usize>, usize)> {
    let ch = p.conditional(&["U"], &["Z"])?;
    let mut reps: Vec<usize> = Vec::new();
    let mut class = Vec::with_capacity(ch.input_alphabet());
    for z in 0..ch.input_alphabet() {
        let row = ch.row(z).mass();
        let found = reps.iter().position(|&r| {
            ch.row(r).mass().iter().zip(row).all(|(a, b)| (a - b).abs() <= 1e-12)
        });
        match found {
            Some(c) => class.push(c),
            None => {
                class.push(reps.len());
                reps.push(z);
            }
        }
    }
    let count = reps.len();
    Ok((class, count))
}

struct RelayModel {
    x_card: usize,
    z_card: usize,
    q_x: FiniteDistribution,
    q_u: FiniteDistribution,
    q_w: FiniteDistribution,
    /// `ln Q(x | u)`, `[u][x]`.
    log_x_u: Vec<Vec<f64>>,
    /// `ln Q(u | w)`, `[w][u]`.
    log_u_w: Vec<Vec<f64>>,
    z_given_w: Vec<FiniteDistribution>,
    entropy_u: f64,
    entropy_w: f64,
}

impl RelayModel {
    fn new(coupling: &AuxiliaryCoupling) -> Result<Self> {
        let p = coupling.joint();
        let (class, w_card) = sufficient_classes(p)?;
        let q_uz = p.marginal(&["U", "Z"])?;
        let (u_card, z_card) = (p.card("U")?, p.card("Z")?);
        let mut uw = vec![0.0; u_card * w_card];
        let mut wz = vec![0.0; w_card * z_card];
        for (i, pr) in q_uz.iter() {
            let t = q_uz.decode(i);
            uw[t[0] * w_card + class[t[1]]] += pr;
            wz[class[t[1]] * z_card + t[1]] += pr;
        }
        let q_uw = JointDistribution::with_tolerance(
            vec![Variable::new("U", u_card), Variable::new("W", w_card)],
            uw,
            1e-9,
        )?;
        let q_wz = JointDistribution::with_tolerance(
            vec![Variable::new("W", w_card), Variable::new("Z", z_card)],
            wz,
            1e-9,
        )?;
        let rows = |q: &JointDistribution, out: &str, given: &str| -> Result<Vec<FiniteDistribution>> {
            let ch = q.conditional(&[out], &[given])?;
            Ok((0..ch.input_alphabet()).map(|i| ch.row(i).clone()).collect())
        };
        let single = |q: &JointDistribution, name: &str| -> Result<FiniteDistribution> {
            let m = q.marginal(&[name])?;
            FiniteDistribution::from_weights((0..m.num_states()).map(|i| m.prob_at(i)).collect())
        };
        let logs = |rows: Vec<FiniteDistribution>| -> Vec<Vec<f64>> {
            rows.iter().map(|r| r.mass().iter().map(|p| p.ln()).collect()).collect()
        };
        let q_u = single(p, "U")?;
        let q_w = single(&q_uw, "W")?;
        Ok(Self {
            x_card: p.card("X")?,
            z_card,
            q_x: single(p, "X")?,
            entropy_u: q_u.entropy(),
            entropy_w: q_w.entropy(),
            q_u,
            q_w,
            log_x_u: logs(rows(p, "X", "U")?),
            log_u_w: logs(rows(&q_uw, "U", "W")?),
            z_given_w: rows(&q_wz, "Z", "W")?,
        })
    }
}

fn random_words(seed: u64, tag: u64, count: u64, n: usize, q: &FiniteDistribution) -> Vec<Vec<usize>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, tag, i);
            (0..n).map(|_| draw(&mut rng, q)).collect()
        })
        .collect()
}

fn posterior(block: &[usize], words: &[Vec<usize>], logs: &[Vec<f64>]) -> Vec<f64> {
    let logw: Vec<f64> = words
        .iter()
        .map(|w| w.iter().zip(block).map(|(&c, &s)| logs[c][s]).sum())
        .collect();
    normalize_log(&logw).unwrap_or_else(|| vec![1.0 / words.len() as f64; words.len()])
}

/// Two stitched point-to-point schemes over a relay coupling `(X, Z, U)`.
///
/// Stage one sends `M1` at rate `R1` and synthesizes `(Xn, Un)` with a
/// likelihood encoder over `u^n(M1, K1)`. The relay knows `u^n` and runs a
/// second likelihood encoder over `w^n(M2, K2)`, where `W` merges the `Z`
/// values with equal `Q(U | Z)`; the last node passes `w^n` through
/// `Q_Z|W`. Each record is the exact `TV(P_XnZn, Q_XZ^n)`.
pub fn relay_scheme_experiment(
    coupling: &AuxiliaryCoupling,
    rates: RelayRates,
    sweep: &Sweep,
) -> Result<ExperimentReport> {
    let bounds = variation_rates(coupling, Variation::Thm4Relay, SYSTEM_TOLERANCE)?;
    let model = RelayModel::new(coupling)?;
    let r01 = rates
        .r01
        .unwrap_or((model.entropy_u + RELAY_COMMON_MARGIN - rates.r1).max(0.0));
    let r02 = rates
        .r02
        .unwrap_or((model.entropy_w + RELAY_COMMON_MARGIN - rates.r2).max(0.0));
    let names = ["Xn".to_string(), "Zn".to_string()];
    let records = sweep.run(|n, seed| {
        let counts = [
            index_count(n, r01)?,
            index_count(n, rates.r1)?,
            index_count(n, r02)?,
            index_count(n, rates.r2)?,
        ];
        let [nk1, n1, nk2, n2] = counts;
        let x_states = sequence_card(model.x_card, n)?;
        let z_states = sequence_card(model.z_card, n)?;
        let required = [x_states as u128, z_states as u128, nk1 as u128, n1 as u128]
            .iter()
            .fold(1u128, |a, &b| a.saturating_mul(b))
            .max((nk2 as u128).saturating_mul(n2 as u128));
        if required > sweep.guard {
            return Err(Error::capacity(
                format!("relay evaluation at n={n}; reduce n or the rates"),
                required,
                sweep.guard,
            ));
        }
        let u_words = random_words(seed, TAG_RELAY_FIRST, nk1 * n1, n, &model.q_u);
        let w_words = random_words(seed, TAG_RELAY_SECOND, nk2 * n2, n, &model.q_w);

        // Law of Zn given the relay's u^n, averaged over K2.
        let mut distinct: BTreeMap<&[usize], usize> = BTreeMap::new();
        for w in &u_words {
            let next = distinct.len();
            distinct.entry(w.as_slice()).or_insert(next);
        }
        let mut order: Vec<(&[usize], usize)> = distinct.iter().map(|(k, &v)| (*k, v)).collect();
        order.sort_by_key(|&(_, v)| v);
        let z_laws: Vec<Vec<(u64, f64)>> = order
            .par_iter()
            .map(|&(u, _)| {
                let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
                for k2 in 0..nk2 {
                    let book = &w_words[(k2 * n2) as usize..((k2 + 1) * n2) as usize];
                    let post = posterior(u, book, &model.log_u_w);
                    for (w, &pw) in book.iter().zip(&post) {
                        if pw == 0.0 {
                            continue;
                        }
                        let rows: Vec<&FiniteDistribution> = w.iter().map(|&c| &model.z_given_w[c]).collect();
                        for (z, pz) in sequence_law(&rows) {
                            *acc.entry(z).or_insert(0.0) += pw * pz / nk2 as f64;
                        }
                    }
                }
                acc.into_iter().collect()
            })
            .collect();

        let px = iid_sequence(&model.q_x, n, "Xn")?;
        let tasks: Vec<(u64, u64)> = (0..nk1).flat_map(|k| (0..x_states as u64).map(move |x| (k, x))).collect();
        let chunks: Vec<Vec<(u64, f64)>> = tasks
            .par_iter()
            .map(|&(k1, x)| {
                let px_x = px.prob_at(x);
                if px_x == 0.0 {
                    return Vec::new();
                }
                let xs = super::system::decode_sequence(x, model.x_card, n);
                let book = &u_words[(k1 * n1) as usize..((k1 + 1) * n1) as usize];
                let post = posterior(&xs, book, &model.log_x_u);
                let mut out = Vec::new();
                for (u, &pm) in book.iter().zip(&post) {
                    if pm == 0.0 {
                        continue;
                    }
                    let w = px_x * pm / nk1 as f64;
                    for &(z, pz) in &z_laws[distinct[u.as_slice()]] {
                        out.push((x * z_states as u64 + z, w * pz));
                    }
                }
                out
            })
            .collect();
        let vars = vec![Variable::new("Xn", x_states), Variable::new("Zn", z_states)];
        let induced = JointDistribution::from_entries_with_tolerance(vars, chunks.into_iter().flatten(), 1e-9)?;
        let target = iid_blocks(coupling.target(), n, &names)?;
        Ok(TrialRecord {
            n,
            seed,
            tv: total_variation(&induced, &target)?,
            metrics: BTreeMap::new(),
            index_counts: counts.to_vec(),
        })
    })?;
    let mut report = ExperimentReport::new(
        "relay",
        vec![rates.r1, rates.r2],
        vec![bounds.point.r1(), bounds.point.r2()],
        vec!["N_K1".into(), "N_1".into(), "N_K2".into(), "N_2".into()],
        records,
    );
    report.notes.push(format!(
        "common randomness rates: stage one {}, stage two {}",
        crate::format::sig(r01),
        crate::format::sig(r02)
    ));
    Ok(report)
}
