use serde::{Deserialize, Serialize};

use super::RagError;

/// A finite, non-empty embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, RagError> {
        if values.is_empty() {
            return Err(RagError::EmptyVector);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RagError::NonFinite);
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = RagError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.values
    }
}

/// `1 - cos(a, b)`, clamped to `[0, 2]`.
///
/// The norms are combined as `sqrt(|a|^2 * |b|^2)` so that `a == b` gives
/// exactly zero and argument order never changes the result.
pub fn cosine_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, RagError> {
    if a.dim() != b.dim() {
        return Err(RagError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(RagError::ZeroVector);
    }
    let cos = dot / (na * nb).sqrt();
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn identity_orthogonal_antipodal() {
        let a = v(&[0.3, -1.2, 4.0]);
        assert_eq!(cosine_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(cosine_distance(&v(&[1.0, 0.0]), &v(&[0.0, 3.0])).unwrap(), 1.0);
        assert_eq!(cosine_distance(&v(&[1.0, -2.0]), &v(&[-1.0, 2.0])).unwrap(), 2.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            cosine_distance(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(RagError::DimensionMismatch { .. })
        ));
        assert!(matches!(cosine_distance(&v(&[0.0, 0.0]), &v(&[1.0, 2.0])), Err(RagError::ZeroVector)));
        assert!(matches!(EmbeddingVector::new(vec![]), Err(RagError::EmptyVector)));
        assert!(matches!(EmbeddingVector::new(vec![f64::NAN]), Err(RagError::NonFinite)));
    }

    fn nonzero_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 1..32).prop_filter("nonzero", |xs| xs.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded((a, b) in (1usize..32).prop_flat_map(|n| (
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
        ))) {
            prop_assume!(a.iter().any(|x| *x != 0.0) && b.iter().any(|x| *x != 0.0));
            let (a, b) = (v(&a), v(&b));
            let ab = cosine_distance(&a, &b).unwrap();
            let ba = cosine_distance(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert!((0.0..=2.0).contains(&ab));
        }

        #[test]
        fn scale_invariant(a in nonzero_vec(), c in 1e-3f64..1e3) {
            let scaled: Vec<f64> = a.iter().map(|x| x * c).collect();
            let d = cosine_distance(&v(&a), &v(&scaled)).unwrap();
            prop_assert!(d.abs() <= 1e-9, "distance {}", d);
        }
    }
}
