mod common;

use common::*;
use proptest::prelude::*;
use semispec::bisection::{spectral_bisection, CutRule};
use semispec::eigen::{smallest_eigenpairs_with_known, EigenOptions};
use semispec::graph::{Graph, MatrixKind, Partition};
use semispec::metrics::{agreement, eigvec_distance, embedding_variance, misclassification, planted_vector, Score};
use semispec::models::{sample_block_model, BlockProbabilitySpec, DcmSpec};
use semispec::operator::{matrix, SymmetricOperator};
use semispec::theory::{
    certificate_from, concentration_diagnostics, consistency_certificate, davis_kahan, dcm_expected_laplacian,
    expected_laplacian, nested_block_expected_spectrum, thresholds, Constants,
};
use semispec::Seed;

fn balanced(n_half: usize, perm_seed: u64) -> Partition {
    let n = 2 * n_half;
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n_half)).collect();
    // Deterministic shuffle so the planted sides are not contiguous.
    let mut s = perm_seed | 1;
    for i in (1..n).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        labels.swap(i, (s >> 33) as usize % (i + 1));
    }
    Partition::new(labels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn agreement_is_symmetric_and_flip_invariant(a in arb_labels(30), b in arb_labels(30)) {
        let ab = agreement(&a, &b).unwrap();
        prop_assert_eq!(ab, agreement(&b, &a).unwrap());
        prop_assert_eq!(ab, agreement(&a.flipped(), &b).unwrap());
        prop_assert_eq!(ab, agreement(&a, &b.flipped()).unwrap());
        prop_assert!((0.5..=1.0).contains(&ab));
        prop_assert_eq!(ab + misclassification(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn variance_is_squared_distance_over_n(v in arb_vector(24), half in 1usize..12, seed in any::<u64>()) {
        let n = 2 * half;
        prop_assume!(norm(&v[..n]) > 1e-3);
        let u = unit(v[..n].to_vec());
        let planted = balanced(half, seed);
        let var = embedding_variance(&u, &planted).unwrap();
        let (l2, linf) = eigvec_distance(&u, &planted_vector(&planted)).unwrap();
        prop_assert!((var - l2 * l2 / n as f64).abs() <= 1e-12);
        prop_assert!(linf <= l2 + 1e-15);
    }

    #[test]
    fn planted_vector_is_exact_for_uniform_crossing(
        sizes in prop::collection::vec(1usize..12, 2..5),
        probs in prop::collection::vec(0.0f64..1.0, 16),
        q in 0.0f64..1.0,
    ) {
        // Blocks alternate sides until both sides hold the same number of vertices.
        let mut sizes = sizes;
        let mut sides: Vec<u8> = (0..sizes.len()).map(|i| (i % 2) as u8).collect();
        let count = |s: u8, sizes: &[usize], sides: &[u8]| -> usize {
            sizes.iter().zip(sides).filter(|(_, &x)| x == s).map(|(z, _)| z).sum()
        };
        let (a, b) = (count(0, &sizes, &sides), count(1, &sizes, &sides));
        if a != b {
            sizes.push(a.abs_diff(b));
            sides.push(u8::from(a > b));
        }
        let k = sizes.len();
        let table: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if sides[i] == sides[j] { probs[(i.min(j) * 4 + i.max(j)) % 16] } else { q }).collect())
            .collect();
        let spec = BlockProbabilitySpec::new(sizes, sides, table).unwrap();
        let n = spec.n();
        let l = expected_laplacian(&spec).unwrap();
        let star = planted_vector(&spec.planted());
        let y = l.apply_vec(&star);
        let err: Vec<f64> = y.iter().zip(&star).map(|(a, b)| a - n as f64 * q * b).collect();
        prop_assert!(norm(&err) <= 1e-9);
    }

    #[test]
    fn internal_edges_are_orthogonal_to_the_planted_vector(g in arb_graph(20), half in 1usize..10, seed in any::<u64>()) {
        let n = 2 * half;
        prop_assume!(g.n() >= n);
        let g = Graph::from_edges(n, g.edges().filter(|&(u, v)| u < n && v < n)).unwrap();
        let planted = balanced(half, seed);
        let star = planted_vector(&planted);
        let internal: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| planted.same_side(u, v))
            .collect();
        for &(u, v) in &internal {
            prop_assert_eq!(star[u] - star[v], 0.0);
        }
        let more = g.with_extra_edges(internal.iter().copied().take(5)).unwrap();
        let before = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap().apply_vec(&star);
        let after = matrix(&more, MatrixKind::UnnormalizedLaplacian).unwrap().apply_vec(&star);
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn thresholds_are_pure(n in 16usize..5000, p in 0.01f64..0.5, dp in 0.0f64..0.5, fq in 0.0f64..0.99) {
        let (pbar, q) = ((p + dp).min(1.0), p * fq);
        let a = thresholds(n, p, pbar, q, None, Constants::default()).unwrap();
        let b = thresholds(n, p, pbar, q, None, Constants::default()).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert_eq!(a.to_text(), b.to_text());
        prop_assert!(a.pbar_max >= 0.0);
        prop_assert_eq!(a.alpha.to_bits(), (pbar / (p - q)).to_bits());
    }
}

fn complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
}

#[test]
fn dcm_expectation_has_planted_eigenvector() {
    for s in 0..20u64 {
        let h = 10;
        let spec = BlockProbabilitySpec::ssbm(2 * h, 0.5, 0.0).unwrap();
        let g = sample_block_model(&spec, Seed::new(77, s));
        let first = Graph::from_edges(h, g.edges().filter(|&(u, v)| u < h && v < h)).unwrap();
        let second = Graph::from_edges(h, g.edges().filter(|&(u, _)| u >= h).map(|(u, v)| (u - h, v - h))).unwrap();
        let q = 0.05 * s as f64;
        let lhat = dcm_expected_laplacian(&first, &second, q).unwrap();
        let star = planted_vector(&Partition::halves(2 * h));
        let y = lhat.apply_vec(&star);
        let err: f64 = y.iter().zip(&star).map(|(a, b)| (a - 2.0 * h as f64 * q * b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-9);
    }
}

#[test]
fn regular_crossing_makes_planted_vector_exact() {
    let (h, r) = (10, 2);
    let first = complete(h);
    let second = complete(h);
    let crossing = (0..h).flat_map(|i| (0..r).map(move |j| (i, h + (i + j) % h)));
    let internal = first.edges().chain(second.edges().map(|(u, v)| (u + h, v + h)));
    let g = Graph::from_edges(2 * h, internal.chain(crossing)).unwrap();
    let planted = Partition::halves(2 * h);
    let star = planted_vector(&planted);
    let y = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap().apply_vec(&star);
    for (a, b) in y.iter().zip(&star) {
        assert!((a - 2.0 * r as f64 * b).abs() <= 1e-9);
    }
    let out = spectral_bisection(&g, MatrixKind::UnnormalizedLaplacian, CutRule::Zero, &EigenOptions::default()).unwrap();
    assert!(!out.degeneracy_flag);
    assert!((out.lambda2 - 2.0 * r as f64).abs() < 1e-9);
    assert_eq!(agreement(&out.partition, &planted).unwrap(), 1.0);
}

#[test]
fn nested_spectrum_example() {
    let s = nested_block_expected_spectrum(0.1, 0.05, 6.0).unwrap();
    assert!((s.lambda2 - 0.625).abs() < 1e-12);
    assert!((s.lambda3 - 0.5416667).abs() < 1e-7);
    assert!((s.y_plus - 0.612372).abs() < 1e-6);
    assert!((s.gap_lower_bound - 0.0434783).abs() < 1e-7);
    assert!(s.lambda2 - s.lambda3 >= s.gap_lower_bound);
    assert!(nested_block_expected_spectrum(0.1, 0.2, 6.0).is_err());
}

#[test]
fn threshold_report_at_the_benchmark_point() {
    let n = 2000usize;
    let ln = (n as f64).ln();
    let (p, q) = (24.0 * ln / n as f64, 8.0 * ln / n as f64);
    let r = thresholds(n, p, 0.9, q, None, Constants::default()).unwrap();
    assert!((r.pbar_thr - 0.82090).abs() < 1e-4);
    assert!((r.pbar_max - 0.85510).abs() < 1e-4);
    let zero_q = thresholds(n, p, 0.9, 0.0, None, Constants::default()).unwrap();
    assert!(zero_q.pbar_thr.is_infinite());
    assert!(zero_q.to_json().contains("\"pbar_thr\": null") || zero_q.to_json().contains("\"pbar_thr\":null"));
}

#[test]
fn certificate_on_two_triangles_and_ties() {
    let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
    let planted = Partition::halves(6);
    let star = planted_vector(&planted);
    let c = certificate_from(&g, &planted, 0.0, &star).unwrap();
    assert!(c.overall);
    // Vertex 0 gets one crossing edge per internal edge it has.
    let tie = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5), (3, 5), (0, 3)]).unwrap();
    let c = certificate_from(&tie, &planted, 0.0, &star).unwrap();
    assert!(!c.majority[0]);
    assert!(!c.vertex_ok(0));
    assert!(!c.overall);
}

#[test]
fn certificate_holds_on_easy_ssbm() {
    let spec = BlockProbabilitySpec::ssbm(256, 0.5, 0.02).unwrap();
    let planted = spec.planted();
    for s in 0..10 {
        let g = sample_block_model(&spec, Seed::new(256, s));
        let op = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap();
        let eig = smallest_eigenpairs_with_known(&op, 2, &vec![1.0; 256], &EigenOptions::default()).unwrap();
        let cert = consistency_certificate(&g, &planted, &eig).unwrap();
        assert!(cert.overall, "seed {s}");
        let out = spectral_bisection(&g, MatrixKind::UnnormalizedLaplacian, CutRule::Zero, &EigenOptions::default()).unwrap();
        assert_eq!(agreement(&out.partition, &planted).unwrap(), 1.0);
    }
}

#[test]
fn concentration_within_generous_bounds() {
    let n = 256;
    let ln = (n as f64).ln();
    let spec = BlockProbabilitySpec::ssbm(n, 0.3, 0.1).unwrap();
    for s in 0..20 {
        let g = sample_block_model(&spec, Seed::new(9, s));
        let r = concentration_diagnostics(&g, &spec).unwrap();
        assert!(r.dout_deviation <= 10.0 * ((n as f64 * 0.1 * ln).sqrt() + ln));
        let op = r.laplacian_deviation.unwrap();
        assert!(op <= 10.0 * ((n as f64 * 0.3 * ln).sqrt() + ln));
    }
    let fixed = BlockProbabilitySpec::ssbm(8, 1.0, 0.0).unwrap();
    let g = sample_block_model(&fixed, Seed::new(1, 1));
    let r = concentration_diagnostics(&g, &fixed).unwrap();
    assert_eq!((r.dout_deviation, r.din_deviation, r.laplacian_deviation), (0.0, 0.0, Some(0.0)));
    assert!(concentration_diagnostics(&g, &BlockProbabilitySpec::ssbm(10, 1.0, 0.0).unwrap()).is_err());
}

#[test]
fn davis_kahan_examples() {
    let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap();
    let l = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap();
    let same = davis_kahan(&l, &l).unwrap();
    assert!(same.bound >= 0.0 && same.distance == 0.0);
    let lstar = expected_laplacian(&BlockProbabilitySpec::ssbm(6, 1.0, 1.0 / 9.0).unwrap()).unwrap();
    let dk = davis_kahan(&l, &lstar).unwrap();
    assert!(dk.distance <= dk.bound, "{} > {}", dk.distance, dk.bound);
    let k4 = complete(4);
    let small = matrix(&k4, MatrixKind::UnnormalizedLaplacian).unwrap();
    assert!(davis_kahan(&l, &small).is_err());
}

#[test]
fn score_bundles_every_metric() {
    let planted = Partition::new(vec![0, 0, 1, 1]).unwrap();
    let predicted = Partition::new(vec![0, 1, 1, 1]).unwrap();
    let u = vec![0.5, -0.5, 0.5, -0.5];
    let s = Score::new(&predicted, &u, &planted).unwrap();
    assert_eq!(s.agreement, 0.75);
    assert_eq!(s.misclassification, 0.25);
    assert!((s.embedding_variance - 0.5).abs() < 1e-15);
    assert!((s.l2_dist - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn dcm_spec_requires_declared_degree() {
    let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    assert!(DcmSpec::new(path.clone(), path.clone(), 0.1, 1).is_ok());
    assert!(DcmSpec::new(path.clone(), path, 0.1, 2).is_err());
}
