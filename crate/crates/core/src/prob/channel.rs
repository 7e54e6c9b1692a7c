use crate::error::{Error, Result};

use super::{FiniteDistribution, JointDistribution, Variable};

/// A stochastic matrix from an input alphabet to a tuple of output variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    input_alphabet: usize,
    outputs: Vec<Variable>,
    rows: Vec<FiniteDistribution>,
}

impl Channel {
    pub fn new(
        input_alphabet: usize,
        outputs: Vec<Variable>,
        rows: Vec<FiniteDistribution>,
    ) -> Result<Self> {
        if input_alphabet == 0 || outputs.is_empty() {
            return Err(Error::Argument("channel needs inputs and outputs".into()));
        }
        if rows.len() != input_alphabet {
            return Err(Error::Dimension(format!(
                "{} rows for an input alphabet of {}",
                rows.len(),
                input_alphabet
            )));
        }
        let out_card: usize = outputs.iter().map(|v| v.card).product();
        if let Some(bad) = rows.iter().position(|r| r.alphabet_size() != out_card) {
            return Err(Error::Dimension(format!(
                "row {bad} has {} entries, expected {out_card}",
                rows[bad].alphabet_size()
            )));
        }
        Ok(Self {
            input_alphabet,
            outputs,
            rows,
        })
    }

    pub fn input_alphabet(&self) -> usize {
        self.input_alphabet
    }

    pub fn outputs(&self) -> &[Variable] {
        &self.outputs
    }

    pub fn output_alphabet(&self) -> usize {
        self.outputs.iter().map(|v| v.card).product()
    }

    pub fn row(&self, input: usize) -> &FiniteDistribution {
        &self.rows[input]
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input].prob(output)
    }

    /// Joint law of `(input variables, outputs)` when `input` is fed through
    /// the channel. The input's variables are flattened row-major.
    pub fn apply(&self, input: &JointDistribution) -> Result<JointDistribution> {
        if input.num_states() != self.input_alphabet as u64 {
            return Err(Error::Dimension(format!(
                "input spans {} states, channel expects {}",
                input.num_states(),
                self.input_alphabet
            )));
        }
        let mut vars = input.vars().to_vec();
        vars.extend(self.outputs.iter().cloned());
        let oc = self.output_alphabet() as u64;
        let entries: Vec<(u64, f64)> = input
            .iter()
            .flat_map(|(i, p)| {
                self.rows[i as usize]
                    .mass()
                    .iter()
                    .enumerate()
                    .map(move |(o, w)| (i * oc + o as u64, p * w))
            })
            .collect();
        JointDistribution::from_entries_with_tolerance(vars, entries, 1e-9)
    }
}
