//! Linear operators over graph matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Graph, MatrixKind};

/// Largest dimension for which dense materialization is offered.
pub const DENSE_CAP: usize = 512;

/// A real square operator, symmetric except for the random-walk Laplacian.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = M x`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Dense copy of the operator, available up to `cap`.
    fn dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > cap {
            return Err(Error::DimensionOverCap { n, cap });
        }
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        (**self).dense(cap)
    }
}

/// One of the four graph matrices, as a view over the graph.
#[derive(Clone, Debug)]
pub struct GraphMatrix<'g> {
    graph: &'g Graph,
    kind: MatrixKind,
    /// `d^{-1/2}` for the symmetric form, `d^{-1}` for the random-walk form.
    scale: Vec<f64>,
}

/// Operator for `kind` over `g`.
///
/// Normalized kinds reject isolated vertices.
pub fn matrix(g: &Graph, kind: MatrixKind) -> Result<GraphMatrix<'_>> {
    let scale = match kind {
        MatrixKind::SymNormalizedLaplacian | MatrixKind::RwNormalizedLaplacian => {
            let mut s = Vec::with_capacity(g.n());
            for v in 0..g.n() {
                let d = g.degree(v);
                if d == 0 {
                    return Err(Error::IsolatedVertex(v));
                }
                let d = d as f64;
                s.push(if kind == MatrixKind::SymNormalizedLaplacian {
                    1.0 / d.sqrt()
                } else {
                    1.0 / d
                });
            }
            s
        }
        _ => Vec::new(),
    };
    Ok(GraphMatrix {
        graph: g,
        kind,
        scale,
    })
}

impl GraphMatrix<'_> {
    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }
}

impl SymmetricOperator for GraphMatrix<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = self.graph;
        match self.kind {
            MatrixKind::Adjacency => {
                for (v, out) in y.iter_mut().enumerate() {
                    *out = g.neighbors(v).iter().map(|&w| x[w as usize]).sum();
                }
            }
            MatrixKind::UnnormalizedLaplacian => {
                for (v, out) in y.iter_mut().enumerate() {
                    let nb = g.neighbors(v);
                    let s: f64 = nb.iter().map(|&w| x[w as usize]).sum();
                    *out = nb.len() as f64 * x[v] - s;
                }
            }
            MatrixKind::SymNormalizedLaplacian => {
                let s = &self.scale;
                for (v, out) in y.iter_mut().enumerate() {
                    let acc: f64 = g
                        .neighbors(v)
                        .iter()
                        .map(|&w| s[w as usize] * x[w as usize])
                        .sum();
                    *out = x[v] - s[v] * acc;
                }
            }
            MatrixKind::RwNormalizedLaplacian => {
                let s = &self.scale;
                for (v, out) in y.iter_mut().enumerate() {
                    let acc: f64 = g.neighbors(v).iter().map(|&w| x[w as usize]).sum();
                    *out = x[v] - s[v] * acc;
                }
            }
        }
    }

    fn dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > cap {
            return Err(Error::DimensionOverCap { n, cap });
        }
        let g = self.graph;
        let mut m = DMatrix::zeros(n, n);
        for (u, v) in g.edges() {
            let (a, b) = match self.kind {
                MatrixKind::Adjacency => (1.0, 1.0),
                MatrixKind::UnnormalizedLaplacian => (-1.0, -1.0),
                MatrixKind::SymNormalizedLaplacian => {
                    let w = -self.scale[u] * self.scale[v];
                    (w, w)
                }
                MatrixKind::RwNormalizedLaplacian => (-self.scale[u], -self.scale[v]),
            };
            m[(u, v)] = a;
            m[(v, u)] = b;
        }
        for v in 0..n {
            m[(v, v)] = match self.kind {
                MatrixKind::Adjacency => 0.0,
                MatrixKind::UnnormalizedLaplacian => g.degree(v) as f64,
                _ => 1.0,
            };
        }
        Ok(m)
    }
}

/// Dense matrix wrapped as an operator.
#[derive(Clone, Debug)]
pub struct DenseOperator(pub DMatrix<f64>);

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for (i, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.0[(i, j)] * x[j];
            }
            *out = acc;
        }
    }

    fn dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > cap {
            return Err(Error::DimensionOverCap { n, cap });
        }
        Ok(self.0.clone())
    }
}

/// `-M`; used to reach the largest eigenpairs through a smallest-eigenpair solver.
#[derive(Clone, Debug)]
pub struct Negated<O>(pub O);

impl<O: SymmetricOperator> SymmetricOperator for Negated<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y);
        for v in y.iter_mut() {
            *v = -*v;
        }
    }

    fn dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        self.0.dense(cap).map(|m| -m)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
