use pipeloop::run_with;
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pipeloop").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, out, _) = run(args);
    (code, serde_json::from_str(&out).expect("report is JSON"))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn hc_first_step_on_parallel_edges() {
    let (code, report) = run_json(&["solve", &data("parallel.json"), "--method", "hc"]);
    assert_eq!(code, 0);
    assert_eq!(report["termination"], "residual_tol");
    let trace = report["trace"].as_array().unwrap();
    assert_eq!(floats(&trace[0]["x"]), vec![1.01, 1.01]);
    // the error halves with flipped sign: 1 + eps -> 1 - eps/2
    for x in floats(&trace[1]["x"]) {
        assert!((x - 0.995).abs() <= 1e-12, "{x}");
    }
    for q in floats(&report["final_flows"]) {
        assert!((q - 1.0).abs() <= 1e-9);
    }
    assert!(report["conservation_defect"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn certify_face_basis_example() {
    let (code, report) = run_json(&[
        "certify",
        &data("k4.json"),
        "--method",
        "nr",
        "--face-basis",
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["satisfied"], true);
    assert_eq!(report["lipschitz"].as_f64().unwrap(), 32.0);
    assert!(report["h"].as_f64().unwrap() < 0.12);
    assert!((report["radius"].as_f64().unwrap() - 0.0047835).abs() < 1e-6);
}

#[test]
fn certify_hc_reports_constants() {
    let (code, report) = run_json(&["certify", &data("k4.json"), "--method", "hc"]);
    assert_eq!(code, 0);
    assert_eq!(report["k_const"].as_f64().unwrap(), 14.0);
    assert_eq!(report["delta1"].as_f64().unwrap(), 24.0);
    assert_eq!(report["short_cycle_fallback"], false);
}

#[test]
fn unbalanced_document_is_an_input_error() {
    let (code, out, err) = run(&["validate", &data("unbalanced.json")]);
    assert_eq!(code, 2);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["error"]["code"], "unbalanced_consumption");
    assert!(err.contains("do not balance"));
}

#[test]
fn validate_reports_structure() {
    let (code, report) = run_json(&["validate", &data("k4.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["cycle_rank"], 3);
    assert_eq!(report["biconnected"], true);
    assert_eq!(report["parallel_edges"], 0);
}

#[test]
fn basis_of_example_is_face_basis() {
    let (code, report) = run_json(&["basis", &data("k4.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["source"], "document");
    assert_eq!(report["total_length"], 9);
    assert_eq!(report["face_basis"], true);
    let matrix: Vec<Vec<i64>> = serde_json::from_value(report["matrix"].clone()).unwrap();
    assert_eq!(
        matrix,
        vec![
            vec![-1, 0, 0],
            vec![-1, 0, 1],
            vec![1, -1, 0],
            vec![0, -1, 1],
            vec![0, 1, 0],
            vec![0, 0, -1]
        ]
    );
}

#[test]
fn fundamental_basis_when_document_has_none() {
    let (code, report) = run_json(&["basis", &data("triangle.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["source"], "fundamental");
    assert_eq!(report["cycles"], 1);
    // tree flow from vertex 1; the declared edge 3 -> 1 is stored as 1 -> 3
    assert_eq!(floats(&report["reference_flow"]), vec![0.5, 0.0, 1.5]);
    let (code, solved) = run_json(&["solve", &data("triangle.json"), "--x0", "0.3"]);
    assert_eq!(code, 0);
    assert!(solved["final_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn rate_separates_the_methods() {
    let (code, report) = run_json(&["rate", &data("k4.json")]);
    assert_eq!(code, 0);
    let methods = report["methods"].as_array().unwrap();
    assert_eq!(methods[0]["method"], "nr");
    assert_eq!(methods[0]["classification"], "quadratic");
    assert_eq!(methods[1]["method"], "hc");
    assert_eq!(methods[1]["classification"], "linear");
}

#[test]
fn rate_on_parallel_edges_is_one_half() {
    let (code, report) = run_json(&["rate", &data("parallel.json")]);
    assert_eq!(code, 0);
    let hc = &report["methods"][1];
    assert!((hc["rate"].as_f64().unwrap() - 0.5).abs() <= 0.05);
}

#[test]
fn node_demo_oscillates() {
    let (code, report) = run_json(&["node-demo"]);
    assert_eq!(code, 0);
    assert_eq!(report["termination"], "oscillating");
    let trace = report["trace"].as_array().unwrap();
    assert!(trace.len() > 10);
    for (t, step) in trace.iter().enumerate() {
        let expected = if t % 2 == 0 { 5.0 } else { -5.0 };
        assert_eq!(floats(&step["x"]), vec![expected, 0.0]);
    }
}

#[test]
fn node_demo_from_zero_is_singular() {
    let (code, report) = run_json(&["node-demo", "--x0", "0,0"]);
    assert_eq!(code, 1);
    assert_eq!(report["error"]["code"], "singular_pressure_drop");
}

#[test]
fn singular_start_is_a_solver_error() {
    let (code, report) = run_json(&["solve", &data("parallel.json"), "--x0", "[0, 0]"]);
    assert_eq!(code, 1);
    assert_eq!(report["termination"], "singular_jacobian");
}

#[test]
fn option_and_input_errors_exit_2() {
    assert_eq!(
        run(&["solve", &data("k4.json"), "--method", "sideways"]).0,
        2
    );
    assert_eq!(run(&["solve", &data("k4.json"), "--x0", "1,2"]).0, 2);
    assert_eq!(
        run(&["solve", &data("k4.json"), "--tol-residual", "0"]).0,
        2
    );
    assert_eq!(run(&["validate", &data("missing.json")]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "solve",
        &data("k4.json"),
        "--method",
        "hc",
        "--hc-mode",
        "sweep",
    ];
    assert_eq!(run(&args).1, run(&args).1);
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("pipeloop-cli-{}.json", std::process::id()));
    let path_str = path.to_str().unwrap();
    let (code, out, _) = run(&["validate", &data("k4.json"), "--output", path_str]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["command"], "validate");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn pretty_output_is_text() {
    let (code, out, _) = run(&["certify", &data("k4.json"), "--face-basis", "--pretty"]);
    assert_eq!(code, 0);
    assert!(out.contains("satisfied true"));
    assert!(serde_json::from_str::<Value>(&out).is_err());
}
