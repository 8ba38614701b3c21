use crate::error::Result;

pub type EmbeddingVector = Vec<f64>;

pub const TOY_DIMENSION: usize = 256;

/// Sentence embedding backend with a fixed output dimension.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector>;
    fn dimension(&self) -> usize;
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Lowercased alphanumeric runs.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Hashed bag of words, L2-normalized. Empty or token-free text maps to the
/// zero vector.
#[derive(Debug, Clone, Copy)]
pub struct ToyEmbedder {
    dimension: usize,
}

impl Default for ToyEmbedder {
    fn default() -> Self {
        Self {
            dimension: TOY_DIMENSION,
        }
    }
}

impl ToyEmbedder {
    pub fn with_dimension(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self { dimension }
    }
}

impl Embedder for ToyEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let mut v = vec![0.0; self.dimension];
        for t in tokens(text) {
            v[(fnv1a(t.as_bytes()) % self.dimension as u64) as usize] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Cosine similarity, `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn toy_is_deterministic_and_unit_norm() {
        let e = ToyEmbedder::default();
        let a = e.embed("I own 2.").unwrap();
        assert_eq!(a, e.embed("I own 2.").unwrap());
        assert_eq!(a.len(), 256);
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
        assert!((cosine(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_text_has_zero_norm() {
        let v = ToyEmbedder::default().embed(" ?! ").unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
        assert_eq!(cosine(&v, &v), None);
    }
}
