//! Exact incremental double description for bounded polytopes.
//!
//! Starts from the vertices of an axis-aligned box and inserts the remaining
//! halfspaces one at a time, always picking the one that cuts off the most
//! current vertices. Edges are detected combinatorially: two vertices are
//! adjacent iff no third vertex is tight on every constraint both share.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{dot, to_f64, Rat};

/// `a . y <= b`.
#[derive(Debug, Clone)]
pub(crate) struct Halfspace {
    pub a: Vec<Rat>,
    pub b: Rat,
}

struct Vertex {
    y: Vec<Rat>,
    approx: Vec<f64>,
    tight: u128,
}

/// Vertices of `{ y : lo <= y <= hi, extra }`. Constraint `2j` is `y_j <= hi_j`
/// and `2j + 1` is `-y_j <= -lo_j`; `extra` follows.
pub(crate) fn box_then_cut(lo: &[Rat], hi: &[Rat], extra: &[Halfspace]) -> Result<Vec<Vec<Rat>>> {
    let dim = lo.len();
    let total = 2 * dim + extra.len();
    if total > 128 {
        return Err(Error::capacity(format!(
            "{total} halfspaces exceed the 128 supported by the enumerator"
        )));
    }
    if dim >= 20 {
        return Err(Error::capacity(format!("box of dimension {dim} is too large")));
    }

    let mut verts: Vec<Vertex> = (0..(1u64 << dim))
        .map(|corner| {
            let mut y = Vec::with_capacity(dim);
            let mut tight = 0u128;
            for j in 0..dim {
                if corner >> j & 1 == 1 {
                    y.push(lo[j].clone());
                    tight |= 1 << (2 * j + 1);
                } else {
                    y.push(hi[j].clone());
                    tight |= 1 << (2 * j);
                }
            }
            let approx = y.iter().map(to_f64).collect();
            Vertex { y, approx, tight }
        })
        .collect();

    let approx_a: Vec<Vec<f64>> = extra.iter().map(|h| h.a.iter().map(to_f64).collect()).collect();
    let approx_b: Vec<f64> = extra.iter().map(|h| to_f64(&h.b)).collect();
    let mut remaining: Vec<usize> = (0..extra.len()).collect();

    while !remaining.is_empty() {
        // Most vertices cut off first; float evaluation only ranks candidates.
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &h)| {
                let cuts = verts
                    .iter()
                    .filter(|v| {
                        let s: f64 = v.approx.iter().zip(&approx_a[h]).map(|(x, a)| x * a).sum();
                        s > approx_b[h] + 1e-9
                    })
                    .count();
                (pos, cuts)
            })
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        let h = remaining.swap_remove(pos);
        verts = insert(verts, &extra[h], 2 * dim + h, dim);
    }
    Ok(verts.into_iter().map(|v| v.y).collect())
}

fn insert(verts: Vec<Vertex>, hs: &Halfspace, bit: usize, dim: usize) -> Vec<Vertex> {
    let vals: Vec<Rat> = verts.iter().map(|v| dot(&hs.a, &v.y) - &hs.b).collect();
    let plus: Vec<usize> = (0..verts.len()).filter(|&i| vals[i].is_positive()).collect();
    if plus.is_empty() {
        let mut verts = verts;
        for (v, val) in verts.iter_mut().zip(&vals) {
            if val.is_zero() {
                v.tight |= 1 << bit;
            }
        }
        return verts;
    }
    let minus: Vec<usize> = (0..verts.len()).filter(|&i| vals[i].is_negative()).collect();

    let mut created = Vec::new();
    for &p in &plus {
        for &m in &minus {
            let z = verts[p].tight & verts[m].tight;
            if (z.count_ones() as usize) + 1 < dim {
                continue;
            }
            let blocked = verts
                .iter()
                .enumerate()
                .any(|(k, x)| k != p && k != m && x.tight & z == z);
            if blocked {
                continue;
            }
            // Point where the edge p-m crosses the hyperplane.
            let t = &vals[p] / (&vals[p] - &vals[m]);
            let y: Vec<Rat> = verts[p]
                .y
                .iter()
                .zip(&verts[m].y)
                .map(|(a, b)| a + &t * (b - a))
                .collect();
            let approx = y.iter().map(to_f64).collect();
            created.push(Vertex {
                y,
                approx,
                tight: z | 1 << bit,
            });
        }
    }

    let mut out: Vec<Vertex> = verts
        .into_iter()
        .zip(vals)
        .filter_map(|(mut v, val)| {
            if val.is_positive() {
                None
            } else {
                if val.is_zero() {
                    v.tight |= 1 << bit;
                }
                Some(v)
            }
        })
        .collect();
    out.extend(created);
    out
}
