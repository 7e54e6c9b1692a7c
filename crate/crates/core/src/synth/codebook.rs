use serde::Serialize;

use crate::error::{Error, Result};
use crate::regions::{AuxiliaryCoupling, RatePoint};

use super::model::CascadeModel;
use super::rng::{draw, stream};

/// `⌈2^(n·rate)⌉`, with exact powers of two kept exact.
pub fn index_count(n: usize, rate: f64) -> Result<u64> {
    let e = n as f64 * rate;
    if !(e >= 0.0) || e > 62.0 {
        return Err(Error::Argument(format!(
            "index count 2^{e} for n={n}, rate={rate} is out of range"
        )));
    }
    let rounded = e.round();
    if (e - rounded).abs() <= 1e-9 {
        return Ok(1u64 << rounded as u32);
    }
    Ok(e.exp2().ceil() as u64)
}

/// A layered random codebook.
///
/// Layer `k-1` (the base, `V` in a three-node cascade) holds one word per
/// `(key, m'k)`; layer `j` holds one word per parent word and `m'j`, drawn
/// through the memoryless channel `Q(Uj | Uj+1..Uk)` from all lower-layer
/// words. Flat word indices nest as `idx_j = idx_(j+1) * N'_j + m'_j` with
/// `idx_k = key`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperpositionCodebook {
    n: usize,
    rates: RatePoint,
    n_key: u64,
    /// `N'_j`: index count of the message part introduced at layer `j`.
    parts: Vec<u64>,
    /// `words[j][idx_j]`, each of length `n`.
    words: Vec<Vec<Vec<usize>>>,
    seed: u64,
}

impl SuperpositionCodebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rates(&self) -> &RatePoint {
        &self.rates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layers(&self) -> usize {
        self.parts.len()
    }

    /// `N_K`.
    pub fn key_count(&self) -> u64 {
        self.n_key
    }

    /// `N'_1, .., N'_k`; for two layers these are `(N_a, N_b)`.
    pub fn part_counts(&self) -> &[u64] {
        &self.parts
    }

    /// Number of values of the first message `M1` (all parts together).
    pub fn message_count(&self) -> u64 {
        self.parts.iter().product()
    }

    /// `(N_K, N_a, N_b)` of a two-layer book.
    pub fn sizes(&self) -> (u64, u64, u64) {
        (self.n_key, self.parts[0], self.parts[self.parts.len() - 1])
    }

    pub fn word(&self, layer: usize, index: u64) -> &[usize] {
        &self.words[layer][index as usize]
    }

    pub fn layer_words(&self, layer: usize) -> &[Vec<usize>] {
        &self.words[layer]
    }

    /// Base-layer word `v^n(m_b, k)`.
    pub fn v_word(&self, m_b: u64, k: u64) -> &[usize] {
        let base = self.layers() - 1;
        self.word(base, k * self.parts[base] + m_b)
    }

    /// Top-layer word `u^n(m_a, m_b, k)` of a two-layer book.
    pub fn u_word(&self, m_a: u64, m_b: u64, k: u64) -> &[usize] {
        self.word(0, (k * self.parts[1] + m_b) * self.parts[0] + m_a)
    }

    /// Splits a message index `m1 = ((m'k)·N'_(k-1) + ..)·N'_1 + m'_1` into parts `(m'_1, .., m'_k)`.
    pub fn split_message(&self, mut m: u64) -> Vec<u64> {
        self.parts
            .iter()
            .map(|&n| {
                let part = m % n;
                m /= n;
                part
            })
            .collect()
    }

    /// Flat word index at `layer` of message `m1` under key `k`.
    pub fn word_index(&self, layer: usize, k: u64, m: u64) -> u64 {
        let below: u64 = self.parts[..layer].iter().product();
        let total: u64 = self.parts.iter().product();
        k * (total / below) + m / below
    }

    /// Same book with every layer's word indices permuted independently
    /// under each parent. Message and key labels change; the multiset of
    /// codeword chains does not.
    pub fn relabeled(&self, seed: u64) -> Self {
        use rand::seq::SliceRandom;
        let mut out = self.clone();
        let k = self.layers();
        // Permute from the base upwards so children follow their parent.
        let mut old_of_new: Vec<Vec<u64>> = vec![Vec::new(); k];
        for j in (0..k).rev() {
            let parents: u64 = if j + 1 == k {
                self.n_key
            } else {
                old_of_new[j + 1].len() as u64
            };
            let nj = self.parts[j];
            let mut map = Vec::with_capacity((parents * nj) as usize);
            for p in 0..parents {
                let old_parent = if j + 1 == k { p } else { old_of_new[j + 1][p as usize] };
                let mut perm: Vec<u64> = (0..nj).collect();
                let mut rng = stream(seed, super::rng::TAG_PERMUTATION, (j as u64) << 40 | p);
                perm.shuffle(&mut rng);
                map.extend(perm.into_iter().map(|i| old_parent * nj + i));
            }
            out.words[j] = map.iter().map(|&o| self.words[j][o as usize].clone()).collect();
            old_of_new[j] = map;
        }
        out
    }
}

/// Samples a layered codebook for the coupling's cascade at block length `n`.
///
/// `rates.r` must be nonincreasing; layer `j` carries `R_j - R_(j+1)` of the
/// first link's rate. Fails with a capacity error when `N_K · ΠN'_j`
/// exceeds `guard`.
pub fn sample_codebook(
    coupling: &AuxiliaryCoupling,
    n: usize,
    rates: &RatePoint,
    seed: u64,
    guard: u128,
) -> Result<SuperpositionCodebook> {
    let model = CascadeModel::from_coupling(coupling)?;
    sample_from_model(&model, n, rates, seed, guard)
}

pub(crate) fn sample_from_model(
    model: &CascadeModel,
    n: usize,
    rates: &RatePoint,
    seed: u64,
    guard: u128,
) -> Result<SuperpositionCodebook> {
    let k = model.links;
    if n == 0 {
        return Err(Error::Argument("block length must be positive".into()));
    }
    RatePoint::new(rates.r0, rates.r.clone())?;
    if rates.r.len() != k {
        return Err(Error::Dimension(format!(
            "{} link rates for a {k}-link cascade",
            rates.r.len()
        )));
    }
    if rates.r.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Argument(format!(
            "link rates must be nonincreasing along the cascade, got {:?}",
            rates.r
        )));
    }
    let n_key = index_count(n, rates.r0)?;
    let parts = (0..k)
        .map(|j| {
            let next = if j + 1 < k { rates.r[j + 1] } else { 0.0 };
            index_count(n, rates.r[j] - next)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = parts
        .iter()
        .try_fold(n_key as u128, |acc, &p| acc.checked_mul(p as u128))
        .unwrap_or(u128::MAX);
    if total > guard {
        return Err(Error::capacity(
            format!("codebook index space N_K={n_key}, parts={parts:?}"),
            total,
            guard,
        ));
    }
    let mut words: Vec<Vec<Vec<usize>>> = vec![Vec::new(); k];
    let mut count = n_key;
    for j in (0..k).rev() {
        count *= parts[j];
        let tag = (k - j) as u64;
        let layer: Vec<Vec<usize>> = (0..count)
            .map(|idx| {
                let mut rng = stream(seed, tag, idx);
                // Symbols of all lower layers at each position.
                let mut lower: Vec<Vec<usize>> = Vec::new();
                let mut p = idx;
                for l in j + 1..k {
                    p /= parts[l - 1];
                    lower.push(words[l][p as usize].clone());
                }
                (0..n)
                    .map(|t| {
                        if j + 1 == k {
                            draw(&mut rng, &model.base)
                        } else {
                            let mut ctx = 0;
                            for (l, w) in lower.iter().enumerate() {
                                ctx = ctx * model.aux_cards[j + 1 + l] + w[t];
                            }
                            draw(&mut rng, &model.layer[j][ctx])
                        }
                    })
                    .collect()
            })
            .collect();
        words[j] = layer;
    }
    Ok(SuperpositionCodebook {
        n,
        rates: rates.clone(),
        n_key,
        parts,
        words,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_round_up() {
        assert_eq!(index_count(3, 0.0).unwrap(), 1);
        assert_eq!(index_count(4, 0.5).unwrap(), 4);
        assert_eq!(index_count(3, 0.5).unwrap(), 3);
        assert_eq!(index_count(8, 2.0).unwrap(), 65536);
        assert!(index_count(2, -0.1).is_err());
    }
}
