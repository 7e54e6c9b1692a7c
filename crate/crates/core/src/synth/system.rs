//! The likelihood-encoder cascade and exact evaluation of its induced law.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::{
    conditional_mutual_information, total_variation, FiniteDistribution, JointDistribution, Variable,
};
use crate::regions::{check_membership_d, general_cascade_rates, AuxiliaryCoupling, Layout};

use super::codebook::SuperpositionCodebook;
use super::model::CascadeModel;

/// Tolerance on the coupling's chain deviations when assembling a system.
pub const SYSTEM_TOLERANCE: f64 = 1e-6;

/// A coupling, a codebook sampled for it, and the channels the nodes apply.
#[derive(Clone, Debug)]
pub struct CascadeSystem {
    coupling: AuxiliaryCoupling,
    codebook: SuperpositionCodebook,
    model: CascadeModel,
    /// `ln Q(x | u1..uk)`, indexed `[context][x]`.
    log_x: Vec<Vec<f64>>,
}

impl CascadeSystem {
    pub fn new(coupling: AuxiliaryCoupling, codebook: SuperpositionCodebook) -> Result<Self> {
        match coupling.layout() {
            Layout::ThreeNode => {
                let r = check_membership_d(&coupling, SYSTEM_TOLERANCE)?;
                if !r.in_d() {
                    return Err(Error::Constraint {
                        constraint: "coupling in the three-node constraint set".into(),
                        deviation: r.chain1_dev.max(r.chain2_dev).max(r.marginal_tv),
                        tolerance: SYSTEM_TOLERANCE,
                    });
                }
            }
            Layout::Cascade { .. } => {
                general_cascade_rates(&coupling, SYSTEM_TOLERANCE)?;
            }
            Layout::Relay => {
                return Err(Error::Argument("relay couplings run through the relay experiment".into()));
            }
        }
        let model = CascadeModel::from_coupling(&coupling)?;
        if codebook.layers() != model.links {
            return Err(Error::Dimension(format!(
                "{}-layer codebook for a {}-link cascade",
                codebook.layers(),
                model.links
            )));
        }
        let log_x = model
            .x_given
            .iter()
            .map(|row| row.mass().iter().map(|p| p.ln()).collect())
            .collect();
        Ok(Self {
            coupling,
            codebook,
            model,
            log_x,
        })
    }

    pub fn coupling(&self) -> &AuxiliaryCoupling {
        &self.coupling
    }

    pub fn codebook(&self) -> &SuperpositionCodebook {
        &self.codebook
    }

    pub fn n(&self) -> usize {
        self.codebook.n()
    }

    pub fn links(&self) -> usize {
        self.model.links
    }

    pub fn target(&self) -> &JointDistribution {
        &self.model.target
    }

    /// Layer symbols of message `m` under key `k`, one vector per position.
    fn chain(&self, k: u64, m: u64) -> Vec<Vec<usize>> {
        let cb = &self.codebook;
        let words: Vec<&[usize]> = (0..self.links()).map(|j| cb.word(j, cb.word_index(j, k, m))).collect();
        (0..self.n()).map(|t| words.iter().map(|w| w[t]).collect()).collect()
    }

    /// Per-message log-likelihoods of `x` under key `k`.
    fn log_likelihoods(&self, x: &[usize], chains: &[Vec<Vec<usize>>]) -> Vec<f64> {
        chains
            .iter()
            .map(|chain| {
                chain
                    .iter()
                    .zip(x)
                    .map(|(syms, &xt)| self.log_x[self.model.context(syms, 0)][xt])
                    .sum()
            })
            .collect()
    }
}

/// Normalizes log-weights after subtracting the maximum; `None` if all are `-inf`.
pub(crate) fn normalize_log(logw: &[f64]) -> Option<Vec<f64>> {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    Some(w.into_iter().map(|x| x / s).collect())
}

/// Posterior of the first node's message given its source block and the key.
///
/// The message index is `m1 = m_b · N_a + m_a` (generally the nesting of
/// [`SuperpositionCodebook::split_message`]).
pub fn likelihood_encoder_posterior(x_block: &[usize], k: u64, system: &CascadeSystem) -> Result<FiniteDistribution> {
    if x_block.len() != system.n() {
        return Err(Error::Dimension(format!(
            "source block of length {} for block length {}",
            x_block.len(),
            system.n()
        )));
    }
    if k >= system.codebook.key_count() {
        return Err(Error::Argument(format!("key {k} out of range")));
    }
    if let Some(&bad) = x_block.iter().find(|&&x| x >= system.model.x_card) {
        return Err(Error::Argument(format!("source symbol {bad} out of range")));
    }
    let chains: Vec<_> = (0..system.codebook.message_count()).map(|m| system.chain(k, m)).collect();
    let logw = system.log_likelihoods(x_block, &chains);
    let post = normalize_log(&logw).ok_or_else(|| {
        Error::DegeneratePosterior(format!("block {x_block:?} has zero likelihood under every codeword of key {k}"))
    })?;
    FiniteDistribution::from_weights(post)
}

/// Exact law of the cascade's sequences, messages and key.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedDistribution {
    keyed: JointDistribution,
    n: usize,
    links: usize,
    sequence_names: Vec<String>,
    message_names: Vec<String>,
}

impl InducedDistribution {
    /// Joint over `(sequences.., message parts.., K)`.
    pub fn keyed(&self) -> &JointDistribution {
        &self.keyed
    }

    /// Joint over `(sequences.., message parts..)`.
    pub fn unkeyed(&self) -> Result<JointDistribution> {
        let names: Vec<&str> = self
            .sequence_names
            .iter()
            .chain(&self.message_names)
            .map(String::as_str)
            .collect();
        self.keyed.marginal(&names)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn links(&self) -> usize {
        self.links
    }

    /// `Xn`, then one sequence per cascade output.
    pub fn sequence_names(&self) -> Vec<&str> {
        self.sequence_names.iter().map(String::as_str).collect()
    }

    /// Message parts, first-layer part first (`Ma, Mb` for three nodes).
    pub fn message_names(&self) -> Vec<&str> {
        self.message_names.iter().map(String::as_str).collect()
    }

    /// Law of the source block `Xn`.
    pub fn x_marginal(&self) -> Result<JointDistribution> {
        self.keyed.marginal(&[self.sequence_names[0].as_str()])
    }
}

/// Sequence of `q` symbols laid out as one variable; `x_1` is most significant.
pub fn iid_sequence(q: &FiniteDistribution, n: usize, name: &str) -> Result<JointDistribution> {
    let k = q.alphabet_size();
    let states = (k as u128).pow(n as u32);
    if states > crate::prob::DENSE_LIMIT as u128 {
        return Err(Error::capacity("i.i.d. sequence law", states, crate::prob::DENSE_LIMIT as u128));
    }
    let mut mass = vec![1.0f64];
    for _ in 0..n {
        mass = mass.iter().flat_map(|&p| q.mass().iter().map(move |&w| p * w)).collect();
    }
    JointDistribution::with_tolerance(vec![Variable::new(name, states as usize)], mass, 1e-9)
}

pub(crate) fn sequence_card(card: usize, n: usize) -> Result<usize> {
    (card as u128)
        .checked_pow(n as u32)
        .filter(|&s| s <= u64::MAX as u128)
        .map(|s| s as usize)
        .ok_or_else(|| Error::capacity("sequence alphabet", u128::MAX, u64::MAX as u128))
}

/// Distribution of a sequence through a memoryless channel whose input
/// context varies with position: `(index, prob)` over the nonzero outputs.
pub(crate) fn sequence_law(rows: &[&FiniteDistribution]) -> Vec<(u64, f64)> {
    let mut out = vec![(0u64, 1.0f64)];
    for row in rows {
        let k = row.alphabet_size() as u64;
        out = out
            .iter()
            .flat_map(|&(i, p)| {
                row.mass()
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(move |(s, &w)| (i * k + s as u64, p * w))
            })
            .collect();
    }
    out
}

pub(crate) fn decode_sequence(mut idx: u64, card: usize, n: usize) -> Vec<usize> {
    let mut x = vec![0; n];
    for t in (0..n).rev() {
        x[t] = (idx % card as u64) as usize;
        idx /= card as u64;
    }
    x
}

/// Exact induced law of a three-node system, with variables
/// `(Xn, Yn, Zn, Ma, Mb, K)`.
pub fn induced_distribution_exact(system: &CascadeSystem, size_guard: u128) -> Result<InducedDistribution> {
    if system.coupling.layout() != Layout::ThreeNode {
        return Err(Error::Argument("use the general cascade evaluation for longer cascades".into()));
    }
    enumerate(
        system,
        size_guard,
        vec!["Xn".into(), "Yn".into(), "Zn".into()],
        vec!["Ma".into(), "Mb".into()],
    )
}

/// Exact induced law of a cascade of any length, with variables
/// `(Xn, Y1n.., Mp1.., K)` where `Mpj` is the message part added at layer `j`.
pub fn general_cascade_exact(system: &CascadeSystem, size_guard: u128) -> Result<InducedDistribution> {
    let k = system.links();
    let seqs = std::iter::once("Xn".to_string())
        .chain((1..=k).map(|i| format!("Y{i}n")))
        .collect();
    let msgs = (1..=k).map(|j| format!("Mp{j}")).collect();
    enumerate(system, size_guard, seqs, msgs)
}

/// Layer symbols per position of one message's codeword chain.
type Chain = Vec<Vec<usize>>;
/// `(index, prob)` pairs of a sparse law.
type SparseLaw = Vec<(u64, f64)>;

fn enumerate(
    system: &CascadeSystem,
    size_guard: u128,
    sequence_names: Vec<String>,
    message_names: Vec<String>,
) -> Result<InducedDistribution> {
    let n = system.n();
    let model = &system.model;
    let cb = &system.codebook;
    let k_links = model.links;
    let x_states = sequence_card(model.x_card, n)?;
    let y_states: Vec<usize> = model
        .y_cards
        .iter()
        .map(|&c| sequence_card(c, n))
        .collect::<Result<_>>()?;
    let msgs = cb.message_count();
    let keys = cb.key_count();
    let required = y_states
        .iter()
        .fold(x_states as u128, |a, &s| a.saturating_mul(s as u128))
        .saturating_mul(msgs as u128)
        .saturating_mul(keys as u128);
    if required > size_guard {
        return Err(Error::capacity(
            format!("exact induced distribution at n={n}; reduce n, the rates or the alphabets"),
            required,
            size_guard,
        ));
    }
    let mut vars = vec![Variable::new(sequence_names[0].clone(), x_states)];
    vars.extend(sequence_names[1..].iter().zip(&y_states).map(|(nm, &s)| Variable::new(nm.clone(), s)));
    vars.extend(message_names.iter().zip(cb.part_counts()).map(|(nm, &c)| Variable::new(nm.clone(), c as usize)));
    vars.push(Variable::new("K", keys as usize));

    // Strides of the keyed layout.
    let cards: Vec<u64> = vars.iter().map(|v| v.card as u64).collect();
    let mut strides = vec![1u64; cards.len()];
    for i in (0..cards.len() - 1).rev() {
        strides[i] = strides[i + 1] * cards[i + 1];
    }
    let y_stride: &[u64] = &strides[1..=k_links];
    let m_stride: Vec<u64> = strides[k_links + 1..=2 * k_links].to_vec();

    let px = iid_sequence(&model.q_x, n, "Xn")?;
    let key_weight = 1.0 / keys as f64;

    let tasks: Vec<(u64, u64)> = (0..keys)
        .flat_map(|k| (0..x_states as u64).map(move |x| (k, x)))
        .collect();
    let per_key: Vec<(Vec<Chain>, Vec<SparseLaw>)> = (0..keys)
        .into_par_iter()
        .map(|k| {
            let chains: Vec<_> = (0..msgs).map(|m| system.chain(k, m)).collect();
            // Joint law of all output sequences for each message.
            let outputs = chains
                .iter()
                .map(|chain| {
                    let mut joint = vec![(0u64, 1.0f64)];
                    for (i, &stride) in y_stride.iter().enumerate() {
                        let rows: Vec<&FiniteDistribution> = chain
                            .iter()
                            .map(|syms| &model.y_given[i][model.context(syms, i)])
                            .collect();
                        let law = sequence_law(&rows);
                        joint = joint
                            .iter()
                            .flat_map(|&(a, p)| law.iter().map(move |&(b, q)| (a + b * stride, p * q)))
                            .collect();
                    }
                    joint
                })
                .collect();
            (chains, outputs)
        })
        .collect();
    let chunks: Vec<Vec<(u64, f64)>> = tasks
        .par_iter()
        .map(|&(k, x)| {
            let px_x = px.prob_at(x);
            if px_x == 0.0 {
                return Vec::new();
            }
            let (chains, outputs) = &per_key[k as usize];
            let xs = decode_sequence(x, model.x_card, n);
            let logw = system.log_likelihoods(&xs, chains);
            let post = normalize_log(&logw).unwrap_or_else(|| vec![1.0 / msgs as f64; msgs as usize]);
            let base = x * strides[0] + k;
            let mut out = Vec::new();
            for (m, &pm) in post.iter().enumerate() {
                if pm == 0.0 {
                    continue;
                }
                let parts = cb.split_message(m as u64);
                let m_off: u64 = parts.iter().zip(&m_stride).map(|(p, s)| p * s).sum();
                let w = key_weight * px_x * pm;
                for &(y, py) in &outputs[m] {
                    out.push((base + m_off + y, w * py));
                }
            }
            out
        })
        .collect();
    let keyed = JointDistribution::from_entries_with_tolerance(vars, chunks.into_iter().flatten(), 1e-9)?;
    Ok(InducedDistribution {
        keyed,
        n,
        links: k_links,
        sequence_names,
        message_names,
    })
}

/// Law of `n` i.i.d. copies of `target`, one block variable per target
/// variable (`x_1` most significant within each block).
pub(crate) fn iid_blocks(target: &JointDistribution, n: usize, names: &[String]) -> Result<JointDistribution> {
    let cards: Vec<usize> = target.vars().iter().map(|v| v.card).collect();
    let cards = cards.as_slice();
    if cards.len() != names.len() {
        return Err(Error::Dimension(format!(
            "target over {} variables for {} sequences",
            cards.len(),
            names.len()
        )));
    }
    let seq_vars: Vec<Variable> = names
        .iter()
        .zip(cards)
        .map(|(nm, &c)| Ok(Variable::new(nm.clone(), sequence_card(c, n)?)))
        .collect::<Result<_>>()?;
    let support: Vec<(Vec<usize>, f64)> = target.iter().map(|(i, p)| (target.decode(i), p)).collect();
    let mut seqs: Vec<(Vec<u64>, f64)> = vec![(vec![0; cards.len()], 1.0)];
    for _ in 0..n {
        seqs = seqs
            .iter()
            .flat_map(|(idx, p)| {
                support.iter().map(move |(sym, q)| {
                    let next = idx.iter().zip(sym).zip(cards).map(|((i, &s), &c)| i * c as u64 + s as u64).collect();
                    (next, p * q)
                })
            })
            .collect();
    }
    let seq_cards: Vec<u64> = seq_vars.iter().map(|v| v.card as u64).collect();
    let entries = seqs.into_iter().map(|(idx, p)| {
        (idx.iter().zip(&seq_cards).fold(0u64, |acc, (i, c)| acc * c + i), p)
    });
    JointDistribution::from_entries_with_tolerance(seq_vars, entries, 1e-9)
}

fn target_sequences(target: &JointDistribution, induced: &InducedDistribution) -> Result<JointDistribution> {
    let q = iid_blocks(target, induced.n, &induced.sequence_names)?;
    for v in q.vars() {
        if induced.keyed.card(&v.name)? != v.card {
            return Err(Error::Dimension(format!("alphabet of `{}` differs from the target's", v.name)));
        }
    }
    Ok(q)
}

/// `TV(P_{sequences, messages}, P_{messages} × Q^n)`.
pub fn secrecy_tv(induced: &InducedDistribution, target: &JointDistribution) -> Result<f64> {
    let joint = induced.unkeyed()?;
    let q = target_sequences(target, induced)?;
    let msgs = joint.marginal(&induced.message_names())?;
    let reference = q.product(&msgs)?;
    total_variation(&joint, &reference)
}

/// `TV(P_{sequences}, Q^n)`: synthesis error without the secrecy requirement.
pub fn synthesis_tv(induced: &InducedDistribution, target: &JointDistribution) -> Result<f64> {
    let seqs = induced.keyed.marginal(&induced.sequence_names())?;
    let q = target_sequences(target, induced)?;
    total_variation(&seqs, &q)
}

/// `(I(Xn; Yn | Ma, Mb, K), I(Xn, Yn, Ma; Zn | Mb, K))` of a three-node induced law.
pub fn physical_markov_deviations(induced: &InducedDistribution) -> Result<(f64, f64)> {
    if induced.links != 2 {
        return Err(Error::Argument("physical checks are defined for three nodes".into()));
    }
    let s = induced.sequence_names();
    let m = induced.message_names();
    let p = &induced.keyed;
    Ok((
        conditional_mutual_information(p, &[s[0]], &[m[0], m[1], "K"], &[s[1]])?,
        conditional_mutual_information(p, &[s[0], s[1], m[0]], &[m[1], "K"], &[s[2]])?,
    ))
}

/// One operational draw of the cascade.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeSample {
    pub key: u64,
    /// `Xn` then one block per output, as sequence indices.
    pub sequences: Vec<u64>,
    pub message: u64,
}

/// Monte-Carlo draws from the operational scheme: uniform key, i.i.d. source,
/// likelihood encoder, memoryless output channels. Draw `i` uses its own
/// random stream.
pub fn sample_cascade(system: &CascadeSystem, samples: usize, seed: u64) -> Result<Vec<CascadeSample>> {
    use super::rng::{draw, stream, TAG_SIMULATION};
    use rand::Rng;
    let n = system.n();
    let model = &system.model;
    let keys = system.codebook.key_count();
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, TAG_SIMULATION, i);
            let key = rng.random_range(0..keys);
            let x: Vec<usize> = (0..n).map(|_| draw(&mut rng, &model.q_x)).collect();
            let post = match likelihood_encoder_posterior(&x, key, system) {
                Err(Error::DegeneratePosterior(_)) => FiniteDistribution::uniform(system.codebook.message_count() as usize)?,
                other => other?,
            };
            let message = draw(&mut rng, &post) as u64;
            let chain = system.chain(key, message);
            let mut sequences = vec![x.iter().fold(0u64, |a, &s| a * model.x_card as u64 + s as u64)];
            for i in 0..model.links {
                let c = model.y_cards[i] as u64;
                let y = chain
                    .iter()
                    .fold(0u64, |a, syms| a * c + draw(&mut rng, &model.y_given[i][model.context(syms, i)]) as u64);
                sequences.push(y);
            }
            Ok(CascadeSample {
                key,
                sequences,
                message,
            })
        })
        .collect()
}
