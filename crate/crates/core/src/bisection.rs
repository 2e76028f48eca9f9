//! Spectral bisection with a zero cut or a balanced sweep cut.

use std::fmt;
use std::str::FromStr;

use crate::eigen::{
    canonicalize_sign, smallest_eigenpairs, smallest_eigenpairs_with_known, EigenOptions,
    DEGENERACY_GAP,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, MatrixKind, Partition};
use crate::operator::{matrix, norm, Negated};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutRule {
    /// `S = {v : u2[v] < 0}`; zero entries stay outside `S`.
    Zero,
    /// `S` = the `n/2` smallest entries of `u2`, ties to the lower index.
    Sweep,
}

impl CutRule {
    pub const ALL: [CutRule; 2] = [CutRule::Zero, CutRule::Sweep];

    pub fn name(self) -> &'static str {
        match self {
            CutRule::Zero => "zero",
            CutRule::Sweep => "sweep",
        }
    }
}

impl fmt::Display for CutRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CutRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(CutRule::Zero),
            "sweep" => Ok(CutRule::Sweep),
            other => Err(Error::Parse(format!("unknown cut rule '{other}'"))),
        }
    }
}

/// Second eigenvector of a graph matrix and its neighboring eigenvalues.
///
/// For the adjacency matrix the eigenpairs are taken from the top of the
/// spectrum: `lambda2` and `lambda3` are the second and third largest
/// eigenvalues of `A`, i.e. the ordering of `-A`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEmbedding {
    pub kind: MatrixKind,
    /// Unit length, sign-canonical.
    pub u2: Vec<f64>,
    pub lambda2: f64,
    /// `NaN` when the graph has fewer than three vertices.
    pub lambda3: f64,
    pub degenerate: bool,
}

pub fn second_eigenvector(
    g: &Graph,
    kind: MatrixKind,
    opts: &EigenOptions,
) -> Result<SpectralEmbedding> {
    let k = g.n().min(3);
    match kind {
        MatrixKind::UnnormalizedLaplacian | MatrixKind::SymNormalizedLaplacian => {
            let op = matrix(g, kind)?;
            // The null vector is known exactly: constant for L, sqrt(degree) for Lsym.
            let known: Vec<f64> = match kind {
                MatrixKind::UnnormalizedLaplacian => vec![1.0; g.n()],
                _ => (0..g.n()).map(|v| (g.degree(v) as f64).sqrt()).collect(),
            };
            let r = smallest_eigenpairs_with_known(&op, k, &known, opts)?;
            Ok(embedding(kind, r.vectors[1].clone(), r.values[1], r.values.get(2).copied()))
        }
        MatrixKind::Adjacency => {
            let op = Negated(matrix(g, kind)?);
            let r = smallest_eigenpairs(&op, k, opts)?;
            Ok(embedding(
                kind,
                r.vectors[1].clone(),
                -r.values[1],
                r.values.get(2).map(|x| -x),
            ))
        }
        MatrixKind::RwNormalizedLaplacian => {
            let sym = second_eigenvector(g, MatrixKind::SymNormalizedLaplacian, opts)?;
            Ok(rw_from_sym(g, &sym))
        }
    }
}

fn embedding(kind: MatrixKind, u2: Vec<f64>, lambda2: f64, lambda3: Option<f64>) -> SpectralEmbedding {
    let lambda3 = lambda3.unwrap_or(f64::NAN);
    SpectralEmbedding {
        kind,
        u2,
        lambda2,
        lambda3,
        degenerate: (lambda3 - lambda2).abs() < DEGENERACY_GAP,
    }
}

/// Random-walk embedding from the symmetric one: `D^{-1/2} u2`, renormalized.
/// Both matrices share their spectrum.
pub fn rw_from_sym(g: &Graph, sym: &SpectralEmbedding) -> SpectralEmbedding {
    let mut u: Vec<f64> = sym
        .u2
        .iter()
        .enumerate()
        .map(|(v, x)| x / (g.degree(v) as f64).sqrt())
        .collect();
    let un = norm(&u);
    u.iter_mut().for_each(|x| *x /= un);
    canonicalize_sign(&mut u);
    SpectralEmbedding {
        kind: MatrixKind::RwNormalizedLaplacian,
        u2: u,
        ..sym.clone()
    }
}

/// Partition from `u2` under `cut`; `S` gets label 1.
pub fn apply_cut(u2: &[f64], cut: CutRule) -> Partition {
    let labels = match cut {
        CutRule::Zero => u2.iter().map(|&x| u8::from(x < 0.0)).collect(),
        CutRule::Sweep => {
            let mut order: Vec<usize> = (0..u2.len()).collect();
            order.sort_by(|&a, &b| u2[a].total_cmp(&u2[b]).then(a.cmp(&b)));
            let mut labels = vec![0u8; u2.len()];
            for &v in &order[..u2.len() / 2] {
                labels[v] = 1;
            }
            labels
        }
    };
    Partition::new(labels).expect("labels are 0 or 1")
}

#[derive(Clone, Debug, PartialEq)]
pub struct BisectionOutput {
    pub partition: Partition,
    pub u2: Vec<f64>,
    pub lambda2: f64,
    pub lambda3: f64,
    pub matrix_kind: MatrixKind,
    pub cut_rule: CutRule,
    pub degeneracy_flag: bool,
}

impl BisectionOutput {
    pub fn from_embedding(e: &SpectralEmbedding, cut: CutRule) -> Self {
        BisectionOutput {
            partition: apply_cut(&e.u2, cut),
            u2: e.u2.clone(),
            lambda2: e.lambda2,
            lambda3: e.lambda3,
            matrix_kind: e.kind,
            cut_rule: cut,
            degeneracy_flag: e.degenerate,
        }
    }
}

pub fn spectral_bisection(
    g: &Graph,
    kind: MatrixKind,
    cut: CutRule,
    opts: &EigenOptions,
) -> Result<BisectionOutput> {
    let e = second_eigenvector(g, kind, opts)?;
    Ok(BisectionOutput::from_embedding(&e, cut))
}

/// Whether the stored partition is exactly the cut rule applied to the stored `u2`.
pub fn recheck(out: &BisectionOutput) -> bool {
    apply_cut(&out.u2, out.cut_rule) == out.partition
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::agreement;

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap()
    }

    #[test]
    fn zero_rule_is_strict() {
        let p = apply_cut(&[-0.5, 0.0, 0.3, 0.2], CutRule::Zero);
        assert_eq!(p.labels(), &[1, 0, 0, 0]);
    }

    #[test]
    fn sweep_takes_lower_half() {
        let p = apply_cut(&[-0.9, -0.1, 0.2, 0.8], CutRule::Sweep);
        assert_eq!(p.labels(), &[1, 1, 0, 0]);
        let ties = apply_cut(&[0.0, 0.0, 0.0, 0.0], CutRule::Sweep);
        assert_eq!(ties.labels(), &[1, 1, 0, 0]);
    }

    #[test]
    fn components_split_exactly() {
        let g = two_triangles();
        let out = spectral_bisection(
            &g,
            MatrixKind::UnnormalizedLaplacian,
            CutRule::Zero,
            &EigenOptions::default(),
        )
        .unwrap();
        assert!(out.lambda2.abs() < 1e-9);
        // The kernel is two-dimensional; u2 is its unit vector orthogonal to 1.
        let s = 1.0 / 6f64.sqrt();
        for (v, x) in out.u2.iter().enumerate() {
            let want = if v < 3 { s } else { -s };
            assert!((x - want).abs() < 1e-9, "{:?}", out.u2);
        }
        let planted = Partition::halves(6);
        assert_eq!(agreement(&out.partition, &planted).unwrap(), 1.0);
        assert!(recheck(&out));
    }

    #[test]
    fn recheck_detects_tampering() {
        let g = Graph::from_edges(
            6,
            [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)],
        )
        .unwrap();
        let out = spectral_bisection(
            &g,
            MatrixKind::UnnormalizedLaplacian,
            CutRule::Zero,
            &EigenOptions::default(),
        )
        .unwrap();
        assert!(recheck(&out));
        let mut flipped = out.clone();
        let mut labels = flipped.partition.labels().to_vec();
        labels[0] ^= 1;
        flipped.partition = Partition::new(labels).unwrap();
        assert!(!recheck(&flipped));
    }

    #[test]
    fn recheck_rejects_negated_vector() {
        // u = (-0.5, 0.5, -0.5, 0.5): zero cut gives S = {0, 2}; negating u
        // without touching the partition would need S = {1, 3}.
        let u = vec![-0.5, 0.5, -0.5, 0.5];
        let out = BisectionOutput {
            partition: apply_cut(&u, CutRule::Zero),
            u2: u.iter().map(|x| -x).collect(),
            lambda2: 0.0,
            lambda3: 1.0,
            matrix_kind: MatrixKind::UnnormalizedLaplacian,
            cut_rule: CutRule::Zero,
            degeneracy_flag: false,
        };
        assert!(!recheck(&out));
        let zeros = BisectionOutput {
            partition: apply_cut(&[0.0; 4], CutRule::Zero),
            u2: vec![-0.0; 4],
            ..out
        };
        assert!(recheck(&zeros));
    }

    #[test]
    fn rw_shares_spectrum_with_sym() {
        let g = Graph::from_edges(
            6,
            [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3), (0, 5)],
        )
        .unwrap();
        let opts = EigenOptions::default();
        let sym = second_eigenvector(&g, MatrixKind::SymNormalizedLaplacian, &opts).unwrap();
        let rw = second_eigenvector(&g, MatrixKind::RwNormalizedLaplacian, &opts).unwrap();
        assert_eq!(sym.lambda2, rw.lambda2);
        // rw u2 is a right eigenvector of I - D^{-1} A.
        let op = matrix(&g, MatrixKind::RwNormalizedLaplacian).unwrap();
        use crate::operator::SymmetricOperator;
        let y = op.apply_vec(&rw.u2);
        for (a, b) in y.iter().zip(&rw.u2) {
            assert!((a - rw.lambda2 * b).abs() < 1e-9);
        }
    }

    #[test]
    fn adjacency_uses_top_of_spectrum() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let e = second_eigenvector(&g, MatrixKind::Adjacency, &EigenOptions::default()).unwrap();
        assert!((e.lambda2 + 1.0).abs() < 1e-9);
        assert!(e.degenerate);
    }

    #[test]
    fn sweep_is_balanced_and_flip_covariant() {
        let u = [0.3, -0.2, 0.1, -0.4, 0.0, 0.25];
        assert!(apply_cut(&u, CutRule::Sweep).is_balanced());
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let a = apply_cut(&u, CutRule::Zero);
        let b = apply_cut(&neg, CutRule::Zero);
        // Only the zero entry (vertex 4) stays on the same side.
        for v in 0..6 {
            if v == 4 {
                assert_eq!(a.side(v), b.side(v));
            } else {
                assert_ne!(a.side(v), b.side(v));
            }
        }
    }
}
