use hems_agent::{parse_response, parse_transcript, ParsedStep, Toolkit, ASK_USER, STORE};
use proptest::prelude::*;

fn fragments() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("```".to_string()),
        Just("```json\n".to_string()),
        Just("{".to_string()),
        Just("}".to_string()),
        Just("\"action\": ".to_string()),
        Just("\"action_input\": ".to_string()),
        Just("\"ask_user\"".to_string()),
        Just("'store'".to_string()),
        Just("Final Answer:".to_string()),
        Just("Observation:".to_string()),
        Just("Thought:".to_string()),
        Just("\n".to_string()),
        Just("\\".to_string()),
        Just(",".to_string()),
        "[ -~]{0,12}",
        "\\PC{0,6}",
    ];
    prop::collection::vec(piece, 0..24).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn parser_never_faults(text in fragments()) {
        let toolkit = Toolkit::standard();
        match parse_response(&text, &toolkit) {
            ParsedStep::ToolCall { call, .. } => {
                prop_assert!(call.action == ASK_USER || call.action == STORE);
            }
            ParsedStep::ParseError { observation, .. } => {
                prop_assert!(observation.starts_with("You made a mistake in your JSON blob."));
            }
            ParsedStep::FinalAnswer { .. } => {}
        }
        let _ = parse_transcript(&text, &toolkit);
    }

    #[test]
    fn rendered_calls_round_trip(question in "[a-zA-Z0-9 ?'\"\\\\,.]{1,40}", ask in any::<bool>()) {
        let action = if ask { ASK_USER } else { STORE };
        let blob = serde_json::json!({"action": action, "action_input": question});
        let text = format!("Thought: go.\nAction:\n```\n{}\n```\n", serde_json::to_string_pretty(&blob).unwrap());
        let step = parse_response(&text, &Toolkit::standard());
        let call = step.tool_call().expect("well-formed blob");
        prop_assert_eq!(call.action.as_str(), action);
        prop_assert_eq!(call.action_input.render(), question);
    }
}
