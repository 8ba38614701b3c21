use std::collections::HashMap;

use hems_agent::{question_for, ParameterId};
use hems_eval::{cosine_precision, precision_corpus, precision_table, EvalError, UserProvider};
use hems_gateway::{tokens, Embedder, EmbeddingVector, GatewayError, ToyEmbedder};
use hems_simuser::{perfect_answer, randomize_truth, DifficultyMode};
use proptest::prelude::*;

/// Unhashed bag-of-words cosine, the toy embedding without collisions.
fn bag_cosine(a: &str, b: &str) -> f64 {
    let bag = |t: &str| {
        let mut m: HashMap<String, f64> = HashMap::new();
        for w in tokens(t) {
            *m.entry(w).or_default() += 1.0;
        }
        m
    };
    let (x, y) = (bag(a), bag(b));
    let dot: f64 = x.iter().map(|(k, v)| v * y.get(k).unwrap_or(&0.0)).sum();
    let norm = |m: &HashMap<String, f64>| m.values().map(|v| v * v).sum::<f64>().sqrt();
    dot / (norm(&x) * norm(&y))
}

#[test]
fn identical_answer_scores_one() {
    let truth = randomize_truth(5);
    for p in ParameterId::ALL {
        let perfect = perfect_answer(&truth, p);
        let s =
            cosine_precision(question_for(p), &perfect, &perfect, &ToyEmbedder::default()).unwrap();
        assert!((s - 1.0).abs() <= 1e-9, "{p}: {s}");
    }
}

#[test]
fn disjoint_answers_share_only_the_question() {
    let q = "How many electric vehicles do you own ?";
    let (a, b) = ("Three cars sit outside.", "I own 2.");
    let wide = ToyEmbedder::with_dimension(1 << 24);
    let got = cosine_precision(q, a, b, &wide).unwrap();
    let oracle = bag_cosine(&format!("{q} {a}"), &format!("{q} {b}"));
    assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    let toy = cosine_precision(q, a, b, &ToyEmbedder::default()).unwrap();
    assert!(toy > 0.0 && toy < 1.0, "{toy}");
}

#[test]
fn easy_medium_hard_ordering_per_parameter() {
    let samples = precision_corpus(
        &UserProvider::Scripted,
        &DifficultyMode::ALL,
        20,
        0,
        &ToyEmbedder::default(),
    )
    .unwrap();
    assert_eq!(samples.len(), 20 * 3 * 8);
    let table = precision_table(&samples);
    assert_eq!(table.len(), 8);
    for row in &table {
        let (e, m, h) = (row.easy.unwrap(), row.medium.unwrap(), row.hard.unwrap());
        assert!(e >= m - 1e-12, "{:?}: {e} < {m}", row.parameter);
        assert!(m >= h, "{:?}: {m} < {h}", row.parameter);
        if matches!(row.parameter, ParameterId::DateStart | ParameterId::DateEnd) {
            assert!(
                (e - m).abs() < 0.05,
                "{:?}: easy and medium should be close",
                row.parameter
            );
        }
    }
}

struct Scaled(f64);

impl Embedder for Scaled {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, GatewayError> {
        Ok(ToyEmbedder::default()
            .embed(text)?
            .into_iter()
            .map(|x| x * self.0)
            .collect())
    }

    fn dimension(&self) -> usize {
        ToyEmbedder::default().dimension()
    }
}

proptest! {
    #[test]
    fn symmetric_and_scale_invariant(
        q in "[a-z]{1,8}( [a-z]{1,8}){0,4}",
        a in "[a-z]{1,8}( [a-z0-9]{1,8}){0,4}",
        b in "[a-z]{1,8}( [a-z0-9]{1,8}){0,4}",
        k in 0.001f64..1000.0,
    ) {
        let toy = ToyEmbedder::default();
        let ab = cosine_precision(&q, &a, &b, &toy).unwrap();
        let ba = cosine_precision(&q, &b, &a, &toy).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        let scaled = cosine_precision(&q, &a, &b, &Scaled(k)).unwrap();
        prop_assert!((ab - scaled).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }
}

#[test]
fn blank_answer_is_an_error() {
    assert!(matches!(
        cosine_precision(
            "Where do you live ?",
            "",
            "I live in York.",
            &ToyEmbedder::default()
        ),
        Err(EvalError::EmptyText)
    ));
}
