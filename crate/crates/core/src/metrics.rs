//! Scores against the planted partition.

use crate::error::{Error, Result};
use crate::graph::Partition;

/// Tolerance on `‖u‖₂ - 1` for inputs that must be unit vectors.
pub const UNIT_TOL: f64 = 1e-8;

/// Fraction of vertices classified correctly, under the better of the two
/// label identifications. Lies in `[1/2, 1]`.
pub fn agreement(predicted: &Partition, planted: &Partition) -> Result<f64> {
    if predicted.len() != planted.len() {
        return Err(Error::LengthMismatch {
            expected: planted.len(),
            actual: predicted.len(),
        });
    }
    let n = planted.len();
    if n == 0 {
        return Ok(1.0);
    }
    let matches = predicted
        .labels()
        .iter()
        .zip(planted.labels())
        .filter(|(a, b)| a == b)
        .count();
    let best = matches.max(n - matches);
    Ok(best as f64 / n as f64)
}

/// `1 - agreement`.
pub fn misclassification(predicted: &Partition, planted: &Partition) -> Result<f64> {
    Ok(1.0 - agreement(predicted, planted)?)
}

/// The planted eigenvector: `+1/√n` on label 0, `-1/√n` on label 1.
pub fn planted_vector(planted: &Partition) -> Vec<f64> {
    let s = 1.0 / (planted.len() as f64).sqrt();
    planted
        .labels()
        .iter()
        .map(|&l| if l == 0 { s } else { -s })
        .collect()
}

fn check_unit(u: &[f64]) -> Result<()> {
    let nrm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (nrm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit(nrm));
    }
    Ok(())
}

/// `min_s (1/n) ‖u2 - s u2*‖²`.
pub fn embedding_variance(u2: &[f64], planted: &Partition) -> Result<f64> {
    if u2.len() != planted.len() {
        return Err(Error::LengthMismatch {
            expected: planted.len(),
            actual: u2.len(),
        });
    }
    check_unit(u2)?;
    planted.ensure_balanced()?;
    let star = planted_vector(planted);
    let (l2, _) = eigvec_distance(u2, &star)?;
    Ok(l2 * l2 / u2.len() as f64)
}

/// Sign-minimized `(‖u - s v‖₂, ‖u - s v‖∞)`, with `s` chosen by the ℓ2 norm
/// and used for both.
pub fn eigvec_distance(u: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let dist = |s: f64| {
        u.iter().zip(v).fold((0.0f64, 0.0f64), |(sq, mx), (a, b)| {
            let d = (a - s * b).abs();
            (sq + d * d, mx.max(d))
        })
    };
    let (plus, minus) = (dist(1.0), dist(-1.0));
    let (sq, inf) = if minus.0 < plus.0 { minus } else { plus };
    Ok((sq.sqrt(), inf))
}

/// Everything scored for one bisection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub agreement: f64,
    pub misclassification: f64,
    pub embedding_variance: f64,
    pub l2_dist: f64,
    pub linf_dist: f64,
}

impl Score {
    pub fn new(predicted: &Partition, u2: &[f64], planted: &Partition) -> Result<Self> {
        let agreement = agreement(predicted, planted)?;
        let embedding_variance = embedding_variance(u2, planted)?;
        let (l2_dist, linf_dist) = eigvec_distance(u2, &planted_vector(planted))?;
        Ok(Score {
            agreement,
            misclassification: 1.0 - agreement,
            embedding_variance,
            l2_dist,
            linf_dist,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(l: &[u8]) -> Partition {
        Partition::new(l.to_vec()).unwrap()
    }

    #[test]
    fn agreement_examples() {
        let p = part(&[0, 0, 1, 1]);
        assert_eq!(agreement(&p, &p).unwrap(), 1.0);
        assert_eq!(agreement(&p.flipped(), &p).unwrap(), 1.0);
        assert_eq!(agreement(&part(&[0, 1, 1, 1]), &p).unwrap(), 0.75);
        assert!(agreement(&part(&[0, 1]), &p).is_err());
    }

    #[test]
    fn variance_examples() {
        let p = part(&[0, 0, 1, 1]);
        let star = planted_vector(&p);
        assert_eq!(embedding_variance(&star, &p).unwrap(), 0.0);
        let neg: Vec<f64> = star.iter().map(|x| -x).collect();
        assert_eq!(embedding_variance(&neg, &p).unwrap(), 0.0);
        let u = [0.5, -0.5, 0.5, -0.5];
        assert!((embedding_variance(&u, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            embedding_variance(&[1.0, 1.0, 0.0, 0.0], &p),
            Err(Error::NotUnit(_))
        ));
        assert!(matches!(
            embedding_variance(&u, &part(&[0, 1, 1, 1])),
            Err(Error::Unbalanced { .. })
        ));
    }

    #[test]
    fn distance_examples() {
        let u = [0.6, 0.8];
        assert_eq!(eigvec_distance(&u, &u).unwrap(), (0.0, 0.0));
        assert_eq!(eigvec_distance(&u, &[-0.6, -0.8]).unwrap(), (0.0, 0.0));
        let (l2, _) = eigvec_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((l2 - 2f64.sqrt()).abs() < 1e-15);
    }
}
