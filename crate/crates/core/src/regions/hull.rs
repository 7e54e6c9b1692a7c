//! Lower convex hulls of up-closed point sets in two and three dimensions.
//!
//! The region of interest is `conv(P) + R^d_+`. Its facets are computed as
//! the facets of the finite hull of `P` together with `p + L e_i` for every
//! point and axis whose outward normal has no positive component.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A facet `normal . x >= offset` of an up-closed region, `normal >= 0`,
/// normalized to unit Euclidean length.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HullFacet {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Indices of input points on the facet.
    pub vertices: Vec<usize>,
}

pub(crate) struct LowerHull {
    pub facets: Vec<HullFacet>,
    pub vertices: Vec<usize>,
}

pub(crate) fn lower_hull(points: &[Vec<f64>], tol: f64) -> Result<LowerHull> {
    let dim = points.first().map(|p| p.len()).unwrap_or(0);
    match dim {
        2 => Ok(lower_hull_2d(points, tol)),
        3 => lower_hull_3d(points, tol),
        _ => Err(Error::Argument(format!(
            "hulls are supported for 2 or 3 rate coordinates, got {dim}"
        ))),
    }
}

fn lower_hull_2d(points: &[Vec<f64>], tol: f64) -> LowerHull {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i][0]
            .total_cmp(&points[j][0])
            .then(points[i][1].total_cmp(&points[j][1]))
    });
    // Keep the staircase of points with strictly decreasing second coordinate.
    let mut stair: Vec<usize> = Vec::new();
    for i in order {
        if stair
            .last()
            .is_none_or(|&l| points[i][1] < points[l][1] - tol)
        {
            stair.push(i);
        }
    }
    let cross = |o: usize, a: usize, b: usize| {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };
    let mut chain: Vec<usize> = Vec::new();
    for &i in &stair {
        while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], i) <= tol {
            chain.pop();
        }
        chain.push(i);
    }
    let mut facets = Vec::new();
    let first = chain[0];
    facets.push(HullFacet {
        normal: vec![1.0, 0.0],
        offset: points[first][0],
        vertices: vec![first],
    });
    for w in chain.windows(2) {
        let (a, b) = (&points[w[0]], &points[w[1]]);
        let mut normal = vec![a[1] - b[1], b[0] - a[0]];
        let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        normal.iter_mut().for_each(|x| *x /= len);
        let offset = normal[0] * a[0] + normal[1] * a[1];
        facets.push(HullFacet {
            normal,
            offset,
            vertices: vec![w[0], w[1]],
        });
    }
    let last = *chain.last().expect("nonempty chain");
    facets.push(HullFacet {
        normal: vec![0.0, 1.0],
        offset: points[last][1],
        vertices: vec![last],
    });
    let mut vertices = chain;
    vertices.sort_unstable();
    LowerHull { facets, vertices }
}

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    n: [f64; 3],
    d: f64,
    alive: bool,
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn lower_hull_3d(points: &[Vec<f64>], tol: f64) -> Result<LowerHull> {
    let n_orig = points.len();
    let lo = (0..3)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    let hi = (0..3)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::NEG_INFINITY, f64::max);
    let far = 4.0 * (hi - lo + 1.0);
    let mut pts: Vec<[f64; 3]> = points.iter().map(|p| [p[0], p[1], p[2]]).collect();
    for i in 0..n_orig {
        for k in 0..3 {
            let mut q = pts[i];
            q[k] += far;
            pts.push(q);
        }
    }
    let eps = tol * (1.0 + hi.abs().max(lo.abs()) + far);

    let faces = incremental_hull(&pts, eps)?;

    // Group lower triangles into planar facets.
    let mut facets: Vec<HullFacet> = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        if f.n.iter().any(|&c| c > 1e-9) {
            continue;
        }
        let normal: Vec<f64> = f.n.iter().map(|c| if -c < 1e-12 { 0.0 } else { -c }).collect();
        let offset = -f.d;
        let verts: Vec<usize> = f.v.iter().copied().filter(|&i| i < n_orig).collect();
        match facets.iter_mut().find(|g| {
            (g.offset - offset).abs() <= eps
                && g.normal
                    .iter()
                    .zip(&normal)
                    .all(|(a, b)| (a - b).abs() <= 1e-9)
        }) {
            Some(g) => {
                for v in verts {
                    if !g.vertices.contains(&v) {
                        g.vertices.push(v);
                    }
                }
            }
            None => facets.push(HullFacet {
                normal,
                offset,
                vertices: verts,
            }),
        }
    }
    for f in facets.iter_mut() {
        f.vertices.sort_unstable();
    }
    facets.sort_by(|a, b| {
        a.normal
            .iter()
            .zip(&b.normal)
            .map(|(x, y)| y.total_cmp(x))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.offset.total_cmp(&b.offset))
    });
    let mut vertices: Vec<usize> = facets.iter().flat_map(|f| f.vertices.iter().copied()).collect();
    vertices.sort_unstable();
    vertices.dedup();
    Ok(LowerHull { facets, vertices })
}

fn make_face(pts: &[[f64; 3]], a: usize, b: usize, c: usize) -> Face {
    let n = cross(&sub(&pts[b], &pts[a]), &sub(&pts[c], &pts[a]));
    let len = norm(&n);
    let n = [n[0] / len, n[1] / len, n[2] / len];
    Face {
        v: [a, b, c],
        n,
        d: dot(&n, &pts[a]),
        alive: true,
    }
}

fn incremental_hull(pts: &[[f64; 3]], eps: f64) -> Result<Vec<Face>> {
    let degenerate = || Error::Argument("hull input is degenerate (coplanar points)".into());
    let i0 = (0..pts.len())
        .min_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]))
        .ok_or_else(degenerate)?;
    let i1 = (0..pts.len())
        .max_by(|&a, &b| norm(&sub(&pts[a], &pts[i0])).total_cmp(&norm(&sub(&pts[b], &pts[i0]))))
        .ok_or_else(degenerate)?;
    let dir = sub(&pts[i1], &pts[i0]);
    let line_dist = |p: usize| norm(&cross(&dir, &sub(&pts[p], &pts[i0]))) / norm(&dir);
    let i2 = (0..pts.len())
        .max_by(|&a, &b| line_dist(a).total_cmp(&line_dist(b)))
        .ok_or_else(degenerate)?;
    if line_dist(i2) <= eps {
        return Err(degenerate());
    }
    let pn = cross(&dir, &sub(&pts[i2], &pts[i0]));
    let plane_dist = |p: usize| dot(&pn, &sub(&pts[p], &pts[i0])).abs() / norm(&pn);
    let i3 = (0..pts.len())
        .max_by(|&a, &b| plane_dist(a).total_cmp(&plane_dist(b)))
        .ok_or_else(degenerate)?;
    if plane_dist(i3) <= eps {
        return Err(degenerate());
    }
    let centroid = {
        let s = [i0, i1, i2, i3].iter().fold([0.0; 3], |acc, &i| {
            [acc[0] + pts[i][0], acc[1] + pts[i][1], acc[2] + pts[i][2]]
        });
        [s[0] / 4.0, s[1] / 4.0, s[2] / 4.0]
    };

    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let add_face = |faces: &mut Vec<Face>, edges: &mut HashMap<(usize, usize), usize>, a, b, c| {
        let mut f = make_face(pts, a, b, c);
        if dot(&f.n, &centroid) - f.d > 0.0 {
            f = make_face(pts, a, c, b);
        }
        let id = faces.len();
        let v = f.v;
        faces.push(f);
        for k in 0..3 {
            edges.insert((v[k], v[(k + 1) % 3]), id);
        }
    };
    for (a, b, c) in [(i0, i1, i2), (i0, i1, i3), (i0, i2, i3), (i1, i2, i3)] {
        add_face(&mut faces, &mut edges, a, b, c);
    }

    let mut alive: Vec<usize> = (0..faces.len()).collect();
    for p in 0..pts.len() {
        if [i0, i1, i2, i3].contains(&p) {
            continue;
        }
        let visible: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|&f| dot(&faces[f].n, &pts[p]) - faces[f].d > eps)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let twin = edges.get(&(b, a)).copied();
                if twin.is_none_or(|t| !visible.contains(&t)) {
                    horizon.push((a, b));
                }
            }
        }
        for &f in &visible {
            faces[f].alive = false;
            let v = faces[f].v;
            for k in 0..3 {
                let key = (v[k], v[(k + 1) % 3]);
                if edges.get(&key) == Some(&f) {
                    edges.remove(&key);
                }
            }
        }
        for (a, b) in horizon {
            let f = make_face(pts, a, b, p);
            let id = faces.len();
            faces.push(f);
            for (x, y) in [(a, b), (b, p), (p, a)] {
                edges.insert((x, y), id);
            }
        }
        alive = (0..faces.len()).filter(|&f| faces[f].alive).collect();
    }
    Ok(faces)
}
