use hems_agent::{
    parse_response, parse_transcript, render_error, ActionInput, ParsedStep, Toolkit,
};

const EXAMPLE: &str = include_str!("fixtures/retrieval_example.txt");

#[test]
fn worked_example_parses_to_ask_then_store() {
    let steps = parse_transcript(EXAMPLE, &Toolkit::standard());
    let calls: Vec<_> = steps
        .iter()
        .filter_map(|s| s.tool_call())
        .map(|c| (c.action.as_str(), c.action_input.clone()))
        .collect();
    assert_eq!(
        calls,
        vec![
            (
                "ask_user",
                ActionInput::Text("Which city in the United Kingdom do you live in?".into())
            ),
            ("store", ActionInput::Text("Oxford".into())),
        ]
    );
    assert_eq!(steps.len(), 3);
    assert!(
        matches!(&steps[2], ParsedStep::FinalAnswer { text } if text == "The user lives in Oxford.")
    );
    assert!(steps
        .iter()
        .all(|s| !matches!(s, ParsedStep::ParseError { .. })));
    assert!(EXAMPLE.contains("Observation: The value was correctly assigned. The task is done\n"));
}

/// Blobs that must be answered with the error observation, one per file.
fn malformed() -> Vec<(String, String)> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/malformed");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn malformed_blobs_yield_the_error_observation() {
    let toolkit = Toolkit::standard();
    let fixtures = malformed();
    assert_eq!(fixtures.len(), 12);
    for (i, text) in &fixtures {
        match parse_response(text, &toolkit) {
            ParsedStep::ParseError { error, observation } => {
                assert!(
                    observation.starts_with("You made a mistake in your JSON blob."),
                    "fixture {i}: {observation}"
                );
                assert_eq!(observation, render_error(&error), "fixture {i}");
            }
            other => panic!("fixture {i} parsed as {other:?}"),
        }
    }
}
