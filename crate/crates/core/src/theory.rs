//! Closed-form quantities around the models: expected Laplacians, the
//! planted eigenpair, nested-block spectra, recovery thresholds, condition
//! margins, a Davis–Kahan bound, the per-vertex consistency certificate and
//! empirical concentration diagnostics.
//!
//! Universal constants that the asymptotic statements leave open default to 1
//! and can be overridden through [`Constants`]. `ln` is the natural log.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::eigen::{align_clusters, dense_eigen_matrix, EigenResult};
use crate::error::{Error, Result};
use crate::graph::{degree_split, Graph, MatrixKind, Partition};
use crate::metrics::{eigvec_distance, planted_vector};
use crate::models::BlockProbabilitySpec;
use crate::operator::{matrix, norm, SymmetricOperator, DENSE_CAP};

/// Largest `n` for which an expected Laplacian is built.
pub const EXPECTED_CAP: usize = 4096;

/// `E[L]` for a block model, or the deterministic-clusters expectation
/// `L(internal graphs) + q L(K_{n/2,n/2})`.
#[derive(Clone, Debug)]
pub enum ExpectedLaplacian {
    Block {
        spec: BlockProbabilitySpec,
        degrees: Vec<f64>,
    },
    Dcm {
        internal: Graph,
        planted: Partition,
        q: f64,
    },
}

/// Expected unnormalized Laplacian of a block model, self-pairs excluded.
pub fn expected_laplacian(spec: &BlockProbabilitySpec) -> Result<ExpectedLaplacian> {
    let n = spec.n();
    if n > EXPECTED_CAP {
        return Err(Error::DimensionOverCap { n, cap: EXPECTED_CAP });
    }
    let degrees = (0..n).map(|v| spec.expected_degree(v)).collect();
    Ok(ExpectedLaplacian::Block {
        spec: spec.clone(),
        degrees,
    })
}

/// `L(G1 ⊔ G2) + q L(K_{n/2,n/2})`, with `G1` on the first half of the vertices.
pub fn dcm_expected_laplacian(first: &Graph, second: &Graph, q: f64) -> Result<ExpectedLaplacian> {
    if first.n() != second.n() {
        return Err(Error::LengthMismatch {
            expected: first.n(),
            actual: second.n(),
        });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("q = {q} outside [0, 1]")));
    }
    let h = first.n();
    let shifted = second.edges().map(|(u, v)| (u + h, v + h));
    let internal = Graph::from_edges(2 * h, first.edges().chain(shifted))?;
    Ok(ExpectedLaplacian::Dcm {
        internal,
        planted: Partition::halves(2 * h),
        q,
    })
}

impl ExpectedLaplacian {
    /// Eigenvalue of the planted vector when crossing probabilities are uniform.
    pub fn crossing_probability(&self) -> Option<f64> {
        match self {
            ExpectedLaplacian::Block { spec, .. } => spec.uniform_crossing(),
            ExpectedLaplacian::Dcm { q, .. } => Some(*q),
        }
    }

    pub fn planted(&self) -> Partition {
        match self {
            ExpectedLaplacian::Block { spec, .. } => spec.planted(),
            ExpectedLaplacian::Dcm { planted, .. } => planted.clone(),
        }
    }
}

impl SymmetricOperator for ExpectedLaplacian {
    fn dim(&self) -> usize {
        match self {
            ExpectedLaplacian::Block { spec, .. } => spec.n(),
            ExpectedLaplacian::Dcm { internal, .. } => internal.n(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            ExpectedLaplacian::Block { spec, degrees } => {
                // (L* x)_v = d*_v x_v - Σ_b p(b_v, b) S_b + p(b_v, b_v) x_v, then plants.
                let blocks = spec.blocks();
                let sums: Vec<f64> = blocks.iter().map(|r| x[r.clone()].iter().sum()).collect();
                for (bv, r) in blocks.iter().enumerate() {
                    let mixed: f64 = sums
                        .iter()
                        .enumerate()
                        .map(|(b, s)| spec.block_prob(bv, b) * s)
                        .sum();
                    let diag = spec.block_prob(bv, bv);
                    for v in r.clone() {
                        y[v] = degrees[v] * x[v] - mixed + diag * x[v];
                    }
                }
                for (a, c) in spec.plants() {
                    let extra = 1.0 - spec.block_prob(spec.block_of(a), spec.block_of(c));
                    y[a] -= extra * x[c];
                    y[c] -= extra * x[a];
                }
            }
            ExpectedLaplacian::Dcm {
                internal,
                planted,
                q,
            } => {
                let l = matrix(internal, MatrixKind::UnnormalizedLaplacian)
                    .expect("unnormalized Laplacian always exists");
                l.apply(x, y);
                let mut side_sum = [0.0; 2];
                let mut side_count = [0usize; 2];
                for (v, &xv) in x.iter().enumerate() {
                    let s = planted.side(v) as usize;
                    side_sum[s] += xv;
                    side_count[s] += 1;
                }
                for (v, out) in y.iter_mut().enumerate() {
                    let s = planted.side(v) as usize;
                    let o = 1 - s;
                    *out += q * (side_count[o] as f64 * x[v] - side_sum[o]);
                }
            }
        }
    }
}

/// Closed-form spectrum of the self-loop-weighted `I - 𝓛*` of the nested-block instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NestedSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    pub gap_lower_bound: f64,
}

pub fn nested_block_expected_spectrum(p: f64, q: f64, k: f64) -> Result<NestedSpectrum> {
    if !(q >= 0.0 && q < p && k > 1.0 && k * p <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= q < p, K > 1, K p <= 1; got p = {p}, q = {q}, K = {k}"
        )));
    }
    let s = p * (k + 1.0) + 2.0 * q;
    let y_plus = (2.0 * (p + q) / s).sqrt();
    let head = p * p * (k + 3.0) + 4.0 * p * q;
    Ok(NestedSpectrum {
        lambda1: 1.0,
        lambda2: (k - 1.0) * p / (2.0 * (p * (k + 1.0) / 2.0 + q)),
        lambda3: -1.0 + p * (1.0 / (p + q) + (k + 1.0) / s),
        y_plus,
        y_minus: -1.0 / y_plus,
        gap_lower_bound: 1.0 - head / (head + 2.0 * q * q),
    })
}

/// Explicit `I - 𝓛*` for the nested-block instance, where `𝓛*` is normalized
/// by the expected degrees with self-loops weighted like their block.
pub fn nested_block_matrix(n: usize, p: f64, q: f64, k: f64) -> Result<DMatrix<f64>> {
    if n % 4 != 0 || n == 0 {
        return Err(Error::InvalidSpec(format!("n = {n} must be divisible by 4")));
    }
    if n > DENSE_CAP {
        return Err(Error::DimensionOverCap { n, cap: DENSE_CAP });
    }
    let h = n as f64 / 2.0;
    let d_l = h * (p * (k + 1.0) / 2.0 + q);
    let d_r = h * (p + q);
    let block = |v: usize| v / (n / 4);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let (bi, bj) = (block(i).min(2), block(j).min(2));
        let a = match (bi, bj) {
            (0, 0) | (1, 1) => k * p,
            (0, 1) | (1, 0) | (2, 2) => p,
            _ => q,
        };
        let di = if bi < 2 { d_l } else { d_r };
        let dj = if bj < 2 { d_l } else { d_r };
        a / (di * dj).sqrt()
    }))
}

/// Overridable universal constants; all 1 by default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// Gap condition constant.
    pub c: f64,
    /// Internal-degree condition constant of the deterministic-clusters result.
    pub c1: f64,
    /// Spectral-gap condition constant of the deterministic-clusters result.
    pub c2: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c: 1.0,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

/// Thresholds and margins evaluated at one parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoryReport {
    pub n: usize,
    pub p: f64,
    pub pbar: f64,
    pub q: f64,
    pub k: Option<f64>,
    pub constants: Constants,
    pub alpha: f64,
    /// Largest `pbar` the gap condition tolerates; 0 when no `pbar` does.
    pub pbar_max: f64,
    /// `3 p² / q`; `+∞` at `q = 0`.
    pub pbar_thr: f64,
    pub p_thr: f64,
    pub p_info: f64,
    pub thm1_gap_margin: f64,
    pub thm2_din_required: f64,
    pub thm2_gap_required: f64,
    /// Margins at the SSBM expectation: `d_in = (n/2 - 1) p`, gap `n (p - q) / 2`.
    pub thm2_din_margin: f64,
    pub thm2_gap_margin: f64,
    /// `√2 · 2(√(n q ln n) + ln n) / (n (p - q) / 2)`: the predicted scale of
    /// `‖u2 - u2*‖₂` with unit constants.
    pub dk_bound: f64,
    pub nested_spectrum: Option<NestedSpectrum>,
}

/// `p_thr(q) = √(pbar ln n / n) + q`.
pub fn p_thr(n: usize, pbar: f64, q: f64) -> f64 {
    let nf = n as f64;
    (pbar * nf.ln() / nf).sqrt() + q
}

/// `p_info(q) = (√2 √(ln n / n) + √q)²`.
pub fn p_info(n: usize, q: f64) -> f64 {
    let nf = n as f64;
    (2f64.sqrt() * (nf.ln() / nf).sqrt() + q.sqrt()).powi(2)
}

/// `(n (p - q) - ln n)² / (n ln n)`, or 0 when `n (p - q) <= ln n`.
pub fn pbar_max(n: usize, p: f64, q: f64) -> f64 {
    let nf = n as f64;
    let head = nf * (p - q) - nf.ln();
    if head <= 0.0 {
        0.0
    } else {
        head * head / (nf * nf.ln())
    }
}

/// `3 p² / q`.
pub fn pbar_thr(p: f64, q: f64) -> f64 {
    if q == 0.0 {
        f64::INFINITY
    } else {
        3.0 * p * p / q
    }
}

/// Whether `(p, q, K)` is a nested-block instance where normalized bisection is
/// expected to fail: `0 < q < p`, `K >= 3p/q` and `Kp <= 1`. The `K` bound
/// gets a relative slack of `1e-12` so values built as `3p/q` qualify.
pub fn nested_hypothesis(p: f64, q: f64, k: f64) -> bool {
    0.0 < q && q < p && k * q >= 3.0 * p * (1.0 - 1e-12) && k * p <= 1.0
}

/// Required values for the deterministic-clusters conditions:
/// `d_in >= nq + √n` and `λ3 - λ2 >= √n + nq + √(nq ln n) + ln n`.
pub fn thm2_requirements(n: usize, q: f64, constants: &Constants) -> (f64, f64) {
    let nf = n as f64;
    let din = constants.c1 * (nf * q + nf.sqrt());
    let gap = constants.c2 * (nf.sqrt() + nf * q + (nf * q * nf.ln()).sqrt() + nf.ln());
    (din, gap)
}

/// `(d_in - required, gap - required)`.
pub fn thm2_margins(n: usize, q: f64, d_in: f64, gap: f64, constants: &Constants) -> (f64, f64) {
    let (rd, rg) = thm2_requirements(n, q, constants);
    (d_in - rd, gap - rg)
}

pub fn thresholds(
    n: usize,
    p: f64,
    pbar: f64,
    q: f64,
    k: Option<f64>,
    constants: Constants,
) -> Result<TheoryReport> {
    if n < 2 {
        return Err(Error::TooFewVertices(n));
    }
    if !(0.0 <= q && q < p && p <= pbar && pbar <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= q < p <= pbar <= 1; got p = {p}, pbar = {pbar}, q = {q}"
        )));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let (din_req, gap_req) = thm2_requirements(n, q, &constants);
    let din = (nf / 2.0 - 1.0) * p;
    let gap = nf * (p - q) / 2.0;
    let nested_spectrum = match k {
        Some(k) => Some(nested_block_expected_spectrum(p, q, k)?),
        None => None,
    };
    Ok(TheoryReport {
        n,
        p,
        pbar,
        q,
        k,
        constants,
        alpha: pbar / (p - q),
        pbar_max: pbar_max(n, p, q),
        pbar_thr: pbar_thr(p, q),
        p_thr: p_thr(n, pbar, q),
        p_info: p_info(n, q),
        thm1_gap_margin: nf * (p - q) - constants.c * ((nf * pbar * ln).sqrt() + ln),
        thm2_din_required: din_req,
        thm2_gap_required: gap_req,
        thm2_din_margin: din - din_req,
        thm2_gap_margin: gap - gap_req,
        dk_bound: 2f64.sqrt() * 2.0 * ((nf * q * ln).sqrt() + ln) / gap,
        nested_spectrum,
    })
}

impl TheoryReport {
    fn fields(&self) -> Vec<(&'static str, Option<f64>)> {
        let ns = self.nested_spectrum;
        vec![
            ("n", Some(self.n as f64)),
            ("p", Some(self.p)),
            ("pbar", Some(self.pbar)),
            ("q", Some(self.q)),
            ("K", self.k),
            ("constant_c", Some(self.constants.c)),
            ("constant_c1", Some(self.constants.c1)),
            ("constant_c2", Some(self.constants.c2)),
            ("alpha", Some(self.alpha)),
            ("pbar_max", Some(self.pbar_max)),
            ("pbar_thr", Some(self.pbar_thr)),
            ("p_thr", Some(self.p_thr)),
            ("p_info", Some(self.p_info)),
            ("thm1_gap_margin", Some(self.thm1_gap_margin)),
            ("thm2_din_required", Some(self.thm2_din_required)),
            ("thm2_gap_required", Some(self.thm2_gap_required)),
            ("thm2_din_margin", Some(self.thm2_din_margin)),
            ("thm2_gap_margin", Some(self.thm2_gap_margin)),
            ("dk_bound", Some(self.dk_bound)),
            ("nested_lambda1", ns.map(|s| s.lambda1)),
            ("nested_lambda2", ns.map(|s| s.lambda2)),
            ("nested_lambda3", ns.map(|s| s.lambda3)),
            ("nested_y_plus", ns.map(|s| s.y_plus)),
            ("nested_y_minus", ns.map(|s| s.y_minus)),
            ("nested_gap_lower_bound", ns.map(|s| s.gap_lower_bound)),
        ]
    }

    /// One `key  value` line per field, keys padded to a common width.
    pub fn to_text(&self) -> String {
        let fields = self.fields();
        let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (key, value) in fields {
            let shown = match value {
                Some(v) if key == "n" => format!("{}", v as usize),
                Some(v) => format!("{v}"),
                None => "-".to_string(),
            };
            writeln!(out, "{key:<width$}  {shown}").unwrap();
        }
        out
    }

    /// A flat JSON object with the same keys as [`to_text`](Self::to_text);
    /// missing and non-finite values become `null`.
    pub fn to_json(&self) -> String {
        let body: Vec<String> = self
            .fields()
            .into_iter()
            .map(|(key, value)| match value {
                Some(v) if key == "n" => format!("  \"{key}\": {}", v as usize),
                Some(v) if v.is_finite() => format!("  \"{key}\": {v:e}"),
                _ => format!("  \"{key}\": null"),
            })
            .collect();
        format!("{{\n{}\n}}\n", body.join(",\n"))
    }
}

/// Davis–Kahan style bound on the sign-minimized `‖u2(L) - u2(L̂)‖₂` for two
/// Laplacians. `+∞` when both eigenvalue gaps fall below `1e-12`.
pub fn davis_kahan_bound(l: &dyn SymmetricOperator, lhat: &dyn SymmetricOperator) -> Result<f64> {
    Ok(davis_kahan(l, lhat)?.bound)
}

/// Bound plus the quantities it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct DavisKahan {
    pub bound: f64,
    /// Sign-minimized `‖u2 - û2‖₂` for the dense second eigenvectors.
    pub distance: f64,
    pub u2: Vec<f64>,
    pub u2_hat: Vec<f64>,
}

pub fn davis_kahan(l: &dyn SymmetricOperator, lhat: &dyn SymmetricOperator) -> Result<DavisKahan> {
    let n = l.dim();
    if lhat.dim() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: lhat.dim(),
        });
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need n >= 3, got {n}")));
    }
    let spectrum = |op: &dyn SymmetricOperator| -> Result<EigenResult> {
        let mut r = dense_eigen_matrix(op.dense(DENSE_CAP)?);
        align_clusters(&mut r, &vec![1.0; n]);
        Ok(r)
    };
    let (a, b) = (spectrum(l)?, spectrum(lhat)?);
    let diff = |x: &[f64]| -> f64 {
        let (y1, y2) = (l.apply_vec(x), lhat.apply_vec(x));
        let d: Vec<f64> = y2.iter().zip(&y1).map(|(s, t)| s - t).collect();
        norm(&d)
    };
    let gap1 = (b.values[2] - a.values[1]).abs();
    let gap2 = (a.values[2] - b.values[1]).abs();
    let bound = if gap1 < 1e-12 && gap2 < 1e-12 {
        f64::INFINITY
    } else {
        let t1 = if gap1 < 1e-12 { f64::INFINITY } else { diff(&a.vectors[1]) / gap1 };
        let t2 = if gap2 < 1e-12 { f64::INFINITY } else { diff(&b.vectors[1]) / gap2 };
        2f64.sqrt() * t1.min(t2)
    };
    let (distance, _) = eigvec_distance(&a.vectors[1], &b.vectors[1])?;
    Ok(DavisKahan {
        bound,
        distance,
        u2: a.vectors[1].clone(),
        u2_hat: b.vectors[1].clone(),
    })
}

/// Per-vertex conditions under which zero-cut bisection with `L` classifies
/// the vertex correctly.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyCertificate {
    /// `min_w d[w] - λ2`.
    pub degree_margin: f64,
    /// Condition (i): `min_w d[w] - λ2 > 0`; shared by all vertices.
    pub degree_condition: bool,
    /// Condition (ii): `d_in[v] > d_out[v]`.
    pub majority: Vec<bool>,
    /// Condition (iii): `|⟨a_v, u2* - u2⟩| <= (d_in[v] - d_out[v]) / √n`.
    pub row_perturbation: Vec<bool>,
    pub overall: bool,
}

impl ConsistencyCertificate {
    pub fn vertex_ok(&self, v: usize) -> bool {
        self.degree_condition && self.majority[v] && self.row_perturbation[v]
    }
}

/// Evaluates the certificate for `(λ2, u2)` taken from `eig`, which must hold
/// the two smallest eigenpairs of the unnormalized Laplacian of `g`.
pub fn consistency_certificate(
    g: &Graph,
    planted: &Partition,
    eig: &EigenResult,
) -> Result<ConsistencyCertificate> {
    if eig.len() < 2 {
        return Err(Error::InvalidArgument("need the second eigenpair".into()));
    }
    certificate_from(g, planted, eig.values[1], &eig.vectors[1])
}

pub fn certificate_from(
    g: &Graph,
    planted: &Partition,
    lambda2: f64,
    u2: &[f64],
) -> Result<ConsistencyCertificate> {
    let n = g.n();
    if u2.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: u2.len(),
        });
    }
    let (d_in, d_out) = degree_split(g, planted)?;
    let star = planted_vector(planted);
    let sign = if u2.iter().zip(&star).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    let delta: Vec<f64> = star.iter().zip(u2).map(|(s, u)| s - sign * u).collect();
    let degree_margin = g.min_degree() as f64 - lambda2;
    let degree_condition = degree_margin > 0.0;
    let sqrt_n = (n as f64).sqrt();
    let majority: Vec<bool> = (0..n).map(|v| d_in[v] > d_out[v]).collect();
    let row_perturbation: Vec<bool> = (0..n)
        .map(|v| {
            let lhs: f64 = g.neighbors(v).iter().map(|&w| delta[w as usize]).sum();
            lhs.abs() <= (d_in[v] as f64 - d_out[v] as f64) / sqrt_n
        })
        .collect();
    let overall = degree_condition
        && majority.iter().all(|&b| b)
        && row_perturbation.iter().all(|&b| b);
    Ok(ConsistencyCertificate {
        degree_margin,
        degree_condition,
        majority,
        row_perturbation,
        overall,
    })
}

/// Observed deviations from expectation next to the unit-constant bound shape
/// `√(n · rate · ln n) + ln n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationReport {
    pub dout_deviation: f64,
    pub dout_bound: f64,
    pub din_deviation: f64,
    pub din_bound: f64,
    /// `‖L - L*‖` in operator norm; computed only up to the dense cap.
    pub laplacian_deviation: Option<f64>,
    pub laplacian_bound: f64,
}

pub fn concentration_diagnostics(g: &Graph, spec: &BlockProbabilitySpec) -> Result<ConcentrationReport> {
    let n = g.n();
    if spec.n() != n {
        return Err(Error::LengthMismatch {
            expected: spec.n(),
            actual: n,
        });
    }
    let planted = spec.planted();
    let (d_in, d_out) = degree_split(g, &planted)?;
    let blocks = spec.blocks();
    let mut dout_dev = 0.0f64;
    let mut din_dev = 0.0f64;
    let mut plant_extra = vec![0.0; n];
    for (a, c) in spec.plants() {
        let extra = 1.0 - spec.block_prob(spec.block_of(a), spec.block_of(c));
        plant_extra[a] += extra;
        plant_extra[c] += extra;
    }
    for v in 0..n {
        let bv = spec.block_of(v);
        let (mut e_in, mut e_out) = (plant_extra[v], 0.0);
        for (b, r) in blocks.iter().enumerate() {
            let mut size = r.len() as f64;
            if b == bv {
                size -= 1.0;
            }
            let mass = spec.block_prob(bv, b) * size;
            if spec.block_side(b) == spec.block_side(bv) {
                e_in += mass;
            } else {
                e_out += mass;
            }
        }
        dout_dev = dout_dev.max((d_out[v] as f64 - e_out).abs());
        din_dev = din_dev.max((d_in[v] as f64 - e_in).abs());
    }
    let nf = n as f64;
    let shape = |rate: f64| (nf * rate * nf.ln()).sqrt() + nf.ln();
    let b = spec.block_count();
    let mut q_max = 0.0f64;
    let mut p_below_one = 0.0f64;
    for i in 0..b {
        for j in 0..b {
            let pr = spec.block_prob(i, j);
            if spec.block_side(i) != spec.block_side(j) {
                q_max = q_max.max(pr);
            }
            if pr < 1.0 {
                p_below_one = p_below_one.max(pr);
            }
        }
    }
    let laplacian_deviation = if n <= DENSE_CAP {
        let l = matrix(g, MatrixKind::UnnormalizedLaplacian)?.dense(DENSE_CAP)?;
        let lstar = expected_laplacian(spec)?.dense(DENSE_CAP)?;
        let e = dense_eigen_matrix(l - lstar);
        Some(e.values.iter().fold(0.0f64, |m, x| m.max(x.abs())))
    } else {
        None
    };
    Ok(ConcentrationReport {
        dout_deviation: dout_dev,
        dout_bound: shape(q_max),
        din_deviation: din_dev,
        din_bound: shape(spec.max_internal_prob()),
        laplacian_deviation,
        laplacian_bound: shape(p_below_one),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dense_oracle;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn planted_vector_is_eigenvector_of_ssbm_expectation() {
        let spec = BlockProbabilitySpec::ssbm(4, 0.8, 0.2).unwrap();
        let l = expected_laplacian(&spec).unwrap();
        let star = planted_vector(&spec.planted());
        let y = l.apply_vec(&star);
        for (a, b) in y.iter().zip(&star) {
            assert!(close(*a, 0.8 * b, 1e-12));
        }
    }

    #[test]
    fn zero_and_uniform_expectations() {
        let zero = BlockProbabilitySpec::ssbm(6, 0.0, 0.0).unwrap();
        let m = expected_laplacian(&zero).unwrap().dense(DENSE_CAP).unwrap();
        assert!(m.iter().all(|&x| x == 0.0));

        let p = 0.3;
        let uniform = BlockProbabilitySpec::ssbm(8, p, p).unwrap();
        let r = dense_oracle(&expected_laplacian(&uniform).unwrap()).unwrap();
        assert!(close(r.values[1], 8.0 * p, 1e-12));
        assert!(close(r.values[2], 8.0 * p, 1e-12));
    }

    #[test]
    fn block_apply_matches_dense_probabilities() {
        let spec = BlockProbabilitySpec::nssbm_benchmark(12, 0.3, 0.7, 0.1)
            .unwrap()
            .with_plants(&[(0, 4), (7, 9)], crate::models::PlantBudget::Enforce)
            .unwrap();
        let l = expected_laplacian(&spec).unwrap().dense(DENSE_CAP).unwrap();
        let p = spec.dense_probabilities(DENSE_CAP).unwrap();
        for i in 0..12 {
            let row: f64 = p.row(i).iter().sum();
            for j in 0..12 {
                let want = if i == j { row } else { -p[(i, j)] };
                assert!(close(l[(i, j)], want, 1e-12));
            }
        }
    }

    #[test]
    fn dcm_expectation_examples() {
        let k3 = Graph::from_edges(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let l = dcm_expected_laplacian(&k3, &k3, 0.2).unwrap();
        let r = dense_oracle(&l).unwrap();
        assert!(close(r.values[1], 1.2, 1e-12));
        let star = planted_vector(&Partition::halves(6));
        assert!(eigvec_distance(&r.vectors[1], &star).unwrap().0 < 1e-9);

        let l0 = dcm_expected_laplacian(&k3, &k3, 0.0).unwrap();
        assert!(dense_oracle(&l0).unwrap().values[1].abs() < 1e-12);

        let empty = Graph::from_edges(3, []).unwrap();
        let lb = dcm_expected_laplacian(&empty, &empty, 1.0).unwrap();
        // L(K_{3,3}) has spectrum {0, 3, 3, 3, 3, 6}; the planted vector owns 6 = nq.
        let r = dense_oracle(&lb).unwrap();
        assert!(close(r.values[1], 3.0, 1e-12));
        assert!(close(r.values[5], 6.0, 1e-12));
        assert!(eigvec_distance(&r.vectors[5], &star).unwrap().0 < 1e-9);
    }

    #[test]
    fn threshold_values() {
        let n = 2000usize;
        let ln = (n as f64).ln();
        let (p, q) = (24.0 * ln / n as f64, 8.0 * ln / n as f64);
        let r = thresholds(n, p, 1.0, q, None, Constants::default()).unwrap();
        assert!(close(r.pbar_thr, 0.82090, 1e-4));
        assert!(close(r.pbar_max, 0.85510, 1e-4));
        assert!(r.pbar_thr < r.pbar_max);
        assert!(close(p_info(n, 0.0), 2.0 * ln / n as f64, 1e-15));
        assert!(close(p_thr(n, 0.5, 0.1), 0.14359, 1e-5));
        assert!(close(p_info(n, 0.1), 0.16274, 1e-5));
        assert_eq!(pbar_thr(0.1, 0.0), f64::INFINITY);
        assert!(thresholds(n, 0.1, 0.05, 0.01, None, Constants::default()).is_err());
    }

    #[test]
    fn nested_spectrum_example() {
        let s = nested_block_expected_spectrum(0.1, 0.05, 6.0).unwrap();
        assert!(close(s.lambda2, 0.625, 1e-12));
        assert!(close(s.lambda3, 0.5416667, 1e-7));
        assert!(close(s.y_plus, 0.612372, 1e-6));
        assert!(close(s.gap_lower_bound, 0.0434783, 1e-7));
        assert!(s.lambda2 - s.lambda3 >= s.gap_lower_bound);

        let m = nested_block_matrix(8, 0.1, 0.05, 6.0).unwrap();
        let e = dense_eigen_matrix(m);
        let top: Vec<f64> = e.values.iter().rev().take(3).copied().collect();
        assert!(close(top[0], 1.0, 1e-12));
        assert!(close(top[1], 0.625, 1e-12));
        assert!(close(top[2], s.lambda3, 1e-12));
        assert!(nested_block_expected_spectrum(0.2, 0.1, 6.0).is_err());
    }

    #[test]
    fn certificate_on_two_triangles() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap();
        let planted = Partition::halves(6);
        let star = planted_vector(&planted);
        let c = certificate_from(&g, &planted, 0.0, &star).unwrap();
        assert!(c.overall);

        let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let c = certificate_from(&k4, &Partition::halves(4), 4.0, &[0.5, 0.5, -0.5, -0.5]).unwrap();
        assert!(!c.majority[0]);
        assert!(!c.overall);
    }

    #[test]
    fn deterministic_spec_has_no_deviation() {
        let spec = BlockProbabilitySpec::ssbm(8, 1.0, 0.0).unwrap();
        let g = crate::models::sample_block_model(&spec, crate::rng::Seed::new(1, 2));
        let r = concentration_diagnostics(&g, &spec).unwrap();
        assert_eq!(r.dout_deviation, 0.0);
        assert_eq!(r.din_deviation, 0.0);
        assert!(r.laplacian_deviation.unwrap() < 1e-12);
    }
}
