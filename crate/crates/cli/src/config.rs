//! TOML run configurations and their resolution into library inputs.

use std::path::Path;

use cascade_synth::regions::{
    cascade_task_coupling, scatter_coupling, scatter_target, task_coupling, task_target, Layout,
};
use cascade_synth::{AuxiliaryCoupling, JointDistribution, Variable};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

/// A distribution given inline or by name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub named: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmf: Option<PmfTable>,
}

/// Row-major pmf over named variables of the given alphabet sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfTable {
    pub names: Vec<String>,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl PmfTable {
    pub fn build(&self) -> Result<JointDistribution, Failure> {
        if self.names.len() != self.shape.len() {
            return Err(Failure::config(format!(
                "pmf table has {} names but a shape of length {}",
                self.names.len(),
                self.shape.len()
            )));
        }
        let states: usize = self.shape.iter().product();
        if states != self.data.len() {
            return Err(Failure::config(format!(
                "pmf table of shape {:?} needs {states} entries, got {}",
                self.shape,
                self.data.len()
            )));
        }
        let vars = self.names.iter().zip(&self.shape).map(|(n, &c)| Variable::new(n.clone(), c)).collect();
        Ok(JointDistribution::new(vars, self.data.clone())?)
    }
}

/// Splits `name(a, b; c)` into the name and its integer arguments.
fn parse_named(s: &str) -> Result<(String, Vec<usize>), Failure> {
    let bad = || Failure::config(format!("cannot parse named distribution `{s}`"));
    let s = s.trim();
    let open = s.find('(').ok_or_else(bad)?;
    let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let args = inner
        .split([',', ';'])
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(|a| a.parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((s[..open].trim().to_string(), args))
}

fn unknown(kind: &str, name: &str, known: &str) -> Failure {
    Failure::config(format!("unknown {kind} `{name}`; known: {known}"))
}

impl DistSpec {
    fn one_of(&self, what: &str) -> Result<(), Failure> {
        match (&self.named, &self.pmf) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(Failure::config(format!("{what} needs exactly one of `named` or `pmf`"))),
        }
    }

    /// Target over `(X, Y, Z)`: `task(m)`, `scatter(m)` or a pmf.
    pub fn target(&self) -> Result<JointDistribution, Failure> {
        self.one_of("target")?;
        if let Some(p) = &self.pmf {
            return p.build();
        }
        let (name, args) = parse_named(self.named.as_deref().unwrap_or_default())?;
        match (name.as_str(), args.as_slice()) {
            ("task", [m]) => Ok(task_target(*m)?),
            ("scatter", [m]) => Ok(scatter_target(*m)?),
            _ => Err(unknown("target", &name, "task(m), scatter(m)")),
        }
    }

    /// Cascade coupling: `task(m, a, b)`, `nested(m; s1, .., sk)` or a pmf
    /// over `X, Y, Z, U, V` (three nodes) or `X, Y1..Yk, U1..Uk`.
    pub fn cascade_coupling(&self) -> Result<AuxiliaryCoupling, Failure> {
        self.one_of("coupling")?;
        if let Some(p) = &self.pmf {
            let joint = p.build()?;
            if joint.position("Y").is_ok() {
                return Ok(AuxiliaryCoupling::three_node(joint)?);
            }
            let links = p.names.iter().filter(|n| n.starts_with('U')).count();
            return Ok(AuxiliaryCoupling::cascade(joint, links)?);
        }
        let (name, args) = parse_named(self.named.as_deref().unwrap_or_default())?;
        match (name.as_str(), args.as_slice()) {
            ("task", [m, a, b]) => Ok(task_coupling(*m, *a, *b)?),
            ("nested", [m, sizes @ ..]) if !sizes.is_empty() => Ok(cascade_task_coupling(*m, sizes)?),
            _ => Err(unknown("coupling", &name, "task(m, a, b), nested(m; s1, .., sk)")),
        }
    }

    /// Relay coupling: `scatter(m, a)` or a pmf over `X, Z, U`.
    pub fn relay_coupling(&self) -> Result<AuxiliaryCoupling, Failure> {
        self.one_of("coupling")?;
        if let Some(p) = &self.pmf {
            return Ok(AuxiliaryCoupling::relay(p.build()?)?);
        }
        let (name, args) = parse_named(self.named.as_deref().unwrap_or_default())?;
        match (name.as_str(), args.as_slice()) {
            ("scatter", [m, a]) => Ok(scatter_coupling(*m, *a)?),
            _ => Err(unknown("relay coupling", &name, "scatter(m, a)")),
        }
    }

    /// Source/codeword law over `U, X`: `copy(k)` (X = U uniform) or a pmf.
    pub fn codeword_law(&self) -> Result<JointDistribution, Failure> {
        self.one_of("pmf")?;
        if let Some(p) = &self.pmf {
            return p.build();
        }
        let (name, args) = parse_named(self.named.as_deref().unwrap_or_default())?;
        match (name.as_str(), args.as_slice()) {
            ("copy", [k]) if *k >= 1 => Ok(JointDistribution::from_fn(
                vec![Variable::new("U", *k), Variable::new("X", *k)],
                |t| if t[0] == t[1] { 1.0 / *k as f64 } else { 0.0 },
            )?),
            _ => Err(unknown("codeword law", &name, "copy(k)")),
        }
    }
}

/// Rates given explicitly, as a margin over the coupling's floors, or both
/// (explicit coordinates win).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
}

impl RateSpec {
    /// `floors` is `(R0, R1, ..)`.
    pub fn resolve(&self, floors: &[f64]) -> Result<Vec<f64>, Failure> {
        let mut out: Vec<Option<f64>> = match self.margin {
            Some(d) => floors.iter().map(|f| Some(f + d)).collect(),
            None => vec![None; floors.len()],
        };
        if let Some(r0) = self.r0 {
            out[0] = Some(r0);
        }
        if let Some(r) = &self.r {
            if r.len() != floors.len() - 1 {
                return Err(Failure::config(format!(
                    "expected {} link rates, got {}",
                    floors.len() - 1,
                    r.len()
                )));
            }
            for (o, &x) in out[1..].iter_mut().zip(r) {
                *o = Some(x);
            }
        }
        out.into_iter()
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Failure::config("rates need `margin` or every coordinate given explicitly"))
    }
}

fn default_trials() -> usize {
    1
}

/// Block lengths, trials, seed and guard shared by the simulation commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n_list: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

fn default_weights() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub target: DistSpec,
    #[serde(default = "default_weights")]
    pub weights: [f64; 3],
    /// `[|U|, |V|]`; defaults to the cardinality bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cards: Option<[usize; 2]>,
    #[serde(default)]
    pub functional: bool,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSpec {
    pub restarts: usize,
    pub grid_resolution: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        let d = cascade_synth::OptimizerConfig::default();
        Self {
            restarts: d.restarts,
            grid_resolution: d.grid_resolution,
            max_iterations: d.max_iterations,
            tolerance: d.tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub coupling: DistSpec,
    pub rates: RateSpec,
    pub sweep: SweepSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftcoverConfig {
    /// Over `U, X` for the single-layer run, `X, U, V` for superposition.
    pub pmf: DistSpec,
    /// `[R]` or `[R_a, R_b]`.
    pub rates: Vec<f64>,
    pub sweep: SweepSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayConfig {
    pub coupling: DistSpec,
    /// Margin over `(I(X;U), I(Z;U))`, or explicit `r = [R1, R2]`.
    pub rates: RateSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r01: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r02: Option<f64>,
    pub sweep: SweepSpec,
}

fn default_significance() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EavesdropConfig {
    pub coupling: DistSpec,
    pub rates: RateSpec,
    pub n: usize,
    pub samples: usize,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<u64>,
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::config(format!("invalid config {}: {e}", path.display())))
}

pub fn echo<T: Serialize>(config: &T) -> Result<String, Failure> {
    toml::to_string(config).map_err(|e| Failure::config(format!("cannot serialize config: {e}")))
}

/// Coupling layout check for commands that only take three-node couplings.
pub fn require_three_node(c: &AuxiliaryCoupling) -> Result<(), Failure> {
    if c.layout() == Layout::ThreeNode {
        Ok(())
    } else {
        Err(Failure::config("this command needs a three-node coupling over X, Y, Z, U, V"))
    }
}
