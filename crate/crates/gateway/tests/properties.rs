use hems_gateway::{
    cosine, truncate_at_stops, Embedder, GenerationRequest, ScriptedGenerator, TextGenerator,
    ToyEmbedder,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn generated_text_never_contains_a_stop(text in ".*", stop in "[A-Za-z:]{1,12}") {
        let g = ScriptedGenerator::new(vec![text.clone()]);
        let req = GenerationRequest::new("p", vec![stop.clone()], 16).unwrap();
        let out = g.generate(&req).unwrap();
        prop_assert!(!out.contains(&stop));
        prop_assert!(text.starts_with(&out));
        prop_assert_eq!(out.as_str(), truncate_at_stops(&text, &[stop]));
    }

    #[test]
    fn toy_embedding_is_unit_or_zero(text in ".{0,80}") {
        let v = ToyEmbedder::default().embed(&text).unwrap();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9);
        prop_assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn cosine_ignores_positive_scaling(a in prop::collection::vec(-5.0f64..5.0, 8), k in 0.1f64..10.0) {
        let b: Vec<f64> = a.iter().map(|x| x * k).collect();
        if let Some(c) = cosine(&a, &b) {
            prop_assert!((c - 1.0).abs() < 1e-9);
        }
    }
}
