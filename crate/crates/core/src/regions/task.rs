//! Task-assignment regions and the nested-subset couplings that achieve them.

use crate::error::{Error, Result};
use crate::prob::{JointDistribution, Variable};

use super::coupling::{u_name, y_name, AuxiliaryCoupling};
use super::frontier::{Corner, RegionFrontier};

/// Corner of the three-node task region for parameters `(a, b)`, as `(R0, R1, R2)`.
pub fn task_corner(m: usize, a: usize, b: usize) -> Result<[f64; 3]> {
    if m < 3 || a < 2 || a > m - 1 || b < 1 || b >= a {
        return Err(Error::Argument(format!(
            "task corner needs m >= 3, 2 <= a <= m-1, 1 <= b <= a-1; got m={m} a={a} b={b}"
        )));
    }
    let (m, a, b) = (m as f64, a as f64, b as f64);
    let r0 = (m * (m - 1.0) * (m - 2.0) / ((a - b) * b * (m - a))).log2();
    Ok([r0, (m / (a - b)).log2(), (m / a).log2()])
}

pub fn task_generator(a: usize, b: usize) -> String {
    format!("a={a};b={b}")
}

/// All `(m-1)(m-2)/2` corners of the task region and their up-closed hull.
pub fn task_region(m: usize) -> Result<RegionFrontier> {
    if m < 3 {
        return Err(Error::Argument(format!("task region needs m >= 3, got {m}")));
    }
    let mut corners = Vec::with_capacity((m - 1) * (m - 2) / 2);
    for a in 2..m {
        for b in 1..a {
            corners.push(Corner {
                generator: task_generator(a, b),
                coords: task_corner(m, a, b)?.to_vec(),
            });
        }
    }
    RegionFrontier::from_corners(vec!["R0".into(), "R1".into(), "R2".into()], corners)
}

/// Corner of the scatter-relay region for parameter `a`, as `(R1, R2)`.
pub fn scatter_corner(m: usize, a: usize) -> Result<[f64; 2]> {
    if m < 2 || a < 1 || a >= m {
        return Err(Error::Argument(format!(
            "scatter corner needs m >= 2 and 1 <= a <= m-1; got m={m} a={a}"
        )));
    }
    let (m, a) = (m as f64, a as f64);
    Ok([(m / a).log2(), (m / (m - a)).log2()])
}

pub fn scatter_relay_region(m: usize) -> Result<RegionFrontier> {
    if m < 2 {
        return Err(Error::Argument(format!("scatter relay region needs m >= 2, got {m}")));
    }
    let corners = (1..m)
        .map(|a| {
            Ok(Corner {
                generator: format!("a={a}"),
                coords: scatter_corner(m, a)?.to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RegionFrontier::from_corners(vec!["R1".into(), "R2".into()], corners)
}

/// Per-link rate `log(m/(m-1))` sufficient for empirical coordination of
/// the scatter relay.
pub fn scatter_empirical_rate(m: usize) -> f64 {
    (m as f64 / (m as f64 - 1.0)).log2()
}

/// `R2(a = m-1) - R2_emp`, the extra second-link rate strong coordination
/// pays at the first-link-cheapest corner.
pub fn scatter_gap(m: usize) -> Result<f64> {
    Ok(scatter_corner(m, m - 1)?[1] - scatter_empirical_rate(m))
}

/// All `k`-subsets of `elements`, in lexicographic order of positions.
fn subsets(elements: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = elements.len();
    if k > n {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    loop {
        out.push(idx.iter().map(|&i| elements[i]).collect());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Task-assignment target: `tasks` distinct tasks handed uniformly at random
/// to the `links + 1` nodes, all distinct.
pub fn cascade_task_target(tasks: usize, links: usize) -> Result<JointDistribution> {
    if tasks < links + 1 {
        return Err(Error::Argument(format!(
            "{tasks} tasks cannot be split over {} nodes",
            links + 1
        )));
    }
    let mut vars = vec![Variable::new("X", tasks)];
    vars.extend((1..=links).map(|i| Variable::new(y_name(i), tasks)));
    let count: f64 = (0..=links).map(|i| (tasks - i) as f64).product();
    JointDistribution::from_fn(vars, |t| {
        let distinct = (0..t.len()).all(|i| (i + 1..t.len()).all(|j| t[i] != t[j]));
        if distinct {
            1.0 / count
        } else {
            0.0
        }
    })
}

/// Three-node task target over `(X, Y, Z)`.
pub fn task_target(m: usize) -> Result<JointDistribution> {
    cascade_task_target(m, 2)?.renamed(&[("Y1", "Y"), ("Y2", "Z")])
}

/// Nested-subset coupling for a cascade task assignment.
///
/// `sizes = [a1 < a2 < .. < ak]` are the sizes of nested task sets
/// `A1 ⊂ .. ⊂ Ak ⊂ [tasks]`. `Uj` is the chain `(Aj, .., Ak)`, `X` is uniform
/// on `A1`, `Yj` uniform on `A(j+1) \ Aj` and `Yk` uniform on the complement
/// of `Ak`.
pub fn cascade_task_coupling(tasks: usize, sizes: &[usize]) -> Result<AuxiliaryCoupling> {
    let k = sizes.len();
    let ok = k >= 1
        && sizes[0] >= 1
        && sizes.windows(2).all(|w| w[0] < w[1])
        && sizes[k - 1] < tasks;
    if !ok {
        return Err(Error::Argument(format!(
            "set sizes {sizes:?} must increase strictly from 1 and stay below {tasks}"
        )));
    }
    if tasks > 32 {
        return Err(Error::Argument("at most 32 tasks are supported".into()));
    }
    // Cardinality of Uj = number of chains (Aj, .., Ak).
    let mut u_cards = vec![0usize; k];
    u_cards[k - 1] = binomial(tasks, sizes[k - 1]);
    for j in (0..k - 1).rev() {
        u_cards[j] = u_cards[j + 1] * binomial(sizes[j + 1], sizes[j]);
    }
    let mut vars = vec![Variable::new("X", tasks)];
    vars.extend((1..=k).map(|i| Variable::new(y_name(i), tasks)));
    vars.extend((1..=k).map(|i| Variable::new(u_name(i), u_cards[i - 1])));

    let all: Vec<usize> = (0..tasks).collect();
    let mut weighted: Vec<(Vec<usize>, f64)> = Vec::new();
    // Depth-first over chains, outermost set first.
    struct Frame {
        sets: Vec<Vec<usize>>,
        idx: Vec<usize>,
        weight: f64,
    }
    let mut stack = vec![Frame {
        sets: vec![],
        idx: vec![],
        weight: 1.0,
    }];
    while let Some(f) = stack.pop() {
        let depth = f.sets.len();
        if depth == k {
            // sets[0] = Ak, .., sets[k-1] = A1.
            let a: Vec<&Vec<usize>> = f.sets.iter().rev().collect();
            let mut u = vec![0usize; k];
            let mut acc = 0usize;
            for (d, &i) in f.idx.iter().enumerate() {
                let j = k - 1 - d;
                acc = if d == 0 { i } else { acc * binomial(sizes[j + 1], sizes[j]) + i };
                u[j] = acc;
            }
            let mut groups: Vec<Vec<usize>> = vec![a[0].clone()];
            for j in 1..k {
                groups.push(a[j].iter().copied().filter(|t| !a[j - 1].contains(t)).collect());
            }
            groups.push(all.iter().copied().filter(|t| !a[k - 1].contains(t)).collect());
            let w = f.weight / groups.iter().map(|g| g.len() as f64).product::<f64>();
            let mut pick = vec![0usize; k + 1];
            loop {
                let mut tuple: Vec<usize> = (0..=k).map(|g| groups[g][pick[g]]).collect();
                tuple.extend_from_slice(&u);
                weighted.push((tuple, w));
                let mut g = k + 1;
                let mut done = true;
                while g > 0 {
                    g -= 1;
                    pick[g] += 1;
                    if pick[g] < groups[g].len() {
                        done = false;
                        break;
                    }
                    pick[g] = 0;
                }
                if done {
                    break;
                }
            }
            continue;
        }
        let j = k - 1 - depth;
        let parent: &[usize] = if depth == 0 { &all } else { &f.sets[depth - 1] };
        let choices = subsets(parent, sizes[j]);
        let w = f.weight / choices.len() as f64;
        for (i, s) in choices.into_iter().enumerate().rev() {
            let mut sets = f.sets.clone();
            sets.push(s);
            let mut idx = f.idx.clone();
            idx.push(i);
            stack.push(Frame { sets, idx, weight: w });
        }
    }
    let strides = {
        let mut s = vec![1u64; vars.len()];
        for i in (0..vars.len() - 1).rev() {
            s[i] = s[i + 1] * vars[i + 1].card as u64;
        }
        s
    };
    let entries = weighted
        .into_iter()
        .map(|(t, w)| (t.iter().zip(&strides).map(|(&a, &s)| a as u64 * s).sum::<u64>(), w));
    let joint = JointDistribution::from_entries_with_tolerance(vars, entries, 1e-9)?;
    AuxiliaryCoupling::cascade(joint, k)
}

/// Three-node nested-subset coupling for parameters `(a, b)`: `V` is the
/// `a`-set holding the first two nodes' tasks, `U` additionally fixes the
/// `b`-subset holding the middle node's task.
pub fn task_coupling(m: usize, a: usize, b: usize) -> Result<AuxiliaryCoupling> {
    task_corner(m, a, b)?;
    let long = cascade_task_coupling(m, &[a - b, a])?;
    let joint = long
        .joint()
        .renamed(&[("Y1", "Y"), ("Y2", "Z"), ("U1", "U"), ("U2", "V")])?;
    AuxiliaryCoupling::three_node(joint)
}

/// Scatter-relay coupling: `U` is a uniformly chosen `a`-set, `X` uniform
/// inside it and `Z` uniform outside it.
pub fn scatter_coupling(m: usize, a: usize) -> Result<AuxiliaryCoupling> {
    scatter_corner(m, a)?;
    let all: Vec<usize> = (0..m).collect();
    let sets = subsets(&all, a);
    let vars = vec![
        Variable::new("X", m),
        Variable::new("Z", m),
        Variable::new("U", sets.len()),
    ];
    let ns = sets.len() as u64;
    let w = 1.0 / (sets.len() * a * (m - a)) as f64;
    let mut entries = Vec::new();
    for (u, s) in sets.iter().enumerate() {
        for &x in s {
            for z in all.iter().filter(|z| !s.contains(z)) {
                entries.push(((x as u64 * m as u64 + *z as u64) * ns + u as u64, w));
            }
        }
    }
    AuxiliaryCoupling::relay(JointDistribution::from_entries_with_tolerance(vars, entries, 1e-9)?)
}

/// Scatter target: `(X, Z)` uniform over ordered pairs of distinct symbols.
pub fn scatter_target(m: usize) -> Result<JointDistribution> {
    if m < 2 {
        return Err(Error::Argument(format!("scatter target needs m >= 2, got {m}")));
    }
    let w = 1.0 / (m * (m - 1)) as f64;
    JointDistribution::from_fn(vec![Variable::new("X", m), Variable::new("Z", m)], |t| {
        if t[0] != t[1] {
            w
        } else {
            0.0
        }
    })
}
