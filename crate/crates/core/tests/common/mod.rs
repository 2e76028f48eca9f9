#![allow(dead_code)]

use proptest::prelude::*;
use semispec::graph::{Graph, Partition};
use semispec::operator::SymmetricOperator;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Graph on `n` vertices with an arbitrary pair list; duplicates collapse.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..(n * n / 2 + 1)).prop_map(move |pairs| {
            Graph::from_edges(n, pairs.into_iter().filter(|(a, b)| a != b)).unwrap()
        })
    })
}

/// Graph with every vertex of degree at least one: a spanning path plus extras.
pub fn arb_connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..(2 * n)).prop_map(move |extra| {
            let path = (0..n - 1).map(|i| (i, i + 1));
            Graph::from_edges(n, path.chain(extra.into_iter().filter(|(a, b)| a != b))).unwrap()
        })
    })
}

pub fn arb_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

pub fn arb_labels(n: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0u8..2, n).prop_map(|l| Partition::new(l).unwrap())
}

pub fn op_dense(op: &dyn SymmetricOperator) -> nalgebra::DMatrix<f64> {
    op.dense(512).unwrap()
}

/// Frobenius distance between the projectors onto two sets of orthonormal vectors.
pub fn projector_distance(a: &[&Vec<f64>], b: &[&Vec<f64>]) -> f64 {
    let n = a[0].len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pa: f64 = a.iter().map(|v| v[i] * v[j]).sum();
            let pb: f64 = b.iter().map(|v| v[i] * v[j]).sum();
            s += (pa - pb).powi(2);
        }
    }
    s.sqrt()
}
