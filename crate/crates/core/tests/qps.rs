use proptest::prelude::*;
use rlqp::policy::HeuristicPolicy;
use rlqp::problems::{generate, GeneratorSpec, ProblemClass};
use rlqp::qps::{parse_qps, write_qps, QpsError};
use rlqp::solver::{solve, QpProblem, SolverSettings};
use rlqp::Status;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}.QPS", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn load(name: &str) -> QpProblem<f64> {
    parse_qps(&fixture(name)).unwrap().to_qp().unwrap()
}

#[test]
fn maros_fixture_dimensions() {
    for (name, n, m) in [("HS21", 2, 3), ("QPTEST", 2, 4), ("HS35", 3, 4), ("TAME", 2, 3), ("ZECEVIC2", 2, 4)] {
        let qp = load(name);
        assert_eq!((qp.n(), qp.m()), (n, m), "{name}");
    }
}

#[test]
fn small_fixtures_reach_known_optima() {
    // Optimal objectives (including the objective constant) from the problem collection.
    for (name, optimum) in [("QPTEST", 4.371875), ("HS35", 0.1111111111), ("TAME", 0.0), ("ZECEVIC2", -4.125)] {
        let doc = parse_qps(&fixture(name)).unwrap();
        let qp: QpProblem<f64> = doc.to_qp().unwrap();
        let r = solve(&qp, &SolverSettings::default(), &HeuristicPolicy, None).unwrap();
        assert_eq!(r.status, Status::Solved, "{name}");
        let obj = r.objective + doc.objective_constant();
        assert!((obj - optimum).abs() < 1e-2 * (1.0 + optimum.abs()), "{name}: {obj}");
    }
}

#[test]
fn generated_problems_round_trip_exactly() {
    for (class, dim, seed) in [(ProblemClass::RandomQp, 10, 0), (ProblemClass::RandomQp, 10, 5), (ProblemClass::EqConstrainedQp, 12, 1)] {
        let qp = generate(&GeneratorSpec::new(class, dim, seed)).unwrap().problem;
        let back: QpProblem<f64> = parse_qps(&write_qps(&qp)).unwrap().to_qp().unwrap();
        assert_eq!(back.p, qp.p);
        assert_eq!(back.a, qp.a);
        assert_eq!(back.q, qp.q);
        // RANGES carries one bound as `rhs ± R`; when `u − l` needs a finer grid than R
        // has, the far bound is off by at most one ulp of R. The near bound is exact.
        for i in 0..qp.m() {
            let (l, u, bl, bu) = (qp.l[i], qp.u[i], back.l[i], back.u[i]);
            assert!(bl == l || bu == u, "row {i}");
            let tol = (u - l).abs() * f64::EPSILON;
            assert!((bl - l).abs() <= tol && (bu - u).abs() <= tol, "row {i}: [{bl}, {bu}] vs [{l}, {u}]");
        }
    }
}

#[test]
fn representable_ranges_round_trip_bitwise() {
    let mut qp = generate(&GeneratorSpec::new(ProblemClass::RandomQp, 10, 0)).unwrap().problem;
    for i in 0..qp.m() {
        qp.l[i] = (qp.l[i] * 64.0).round() / 64.0 - 1.0;
        qp.u[i] = (qp.u[i] * 64.0).round() / 64.0 + 1.0;
    }
    qp.l[0] = f64::NEG_INFINITY;
    qp.u[1] = f64::INFINITY;
    let back: QpProblem<f64> = parse_qps(&write_qps(&qp)).unwrap().to_qp().unwrap();
    assert_eq!(back, QpProblem { name: back.name.clone(), ..qp });
}

#[test]
fn equality_rows_survive_round_trip() {
    let qp = generate(&GeneratorSpec::new(ProblemClass::EqConstrainedQp, 20, 9)).unwrap().problem;
    let back: QpProblem<f64> = parse_qps(&write_qps(&qp)).unwrap().to_qp().unwrap();
    assert!((0..back.m()).all(|i| back.is_equality_row(i)));
}

#[test]
fn malformed_documents_report_lines() {
    let text = "NAME T\nROWS\n N OBJ\n L R1\nCOLUMNS\n X1 OBJ 1.0 R9 2.0\nRHS\n RHS R1 1.0\nENDATA\n";
    match parse_qps(text) {
        Err(QpsError::Parse { line, .. }) => assert_eq!(line, 6),
        other => panic!("{other:?}"),
    }
    assert!(parse_qps("ROWS\n N OBJ\nENDATA\n").is_err());
    assert!(parse_qps("NAME T\nROWS\n N OBJ\nCOLUMNS\n X1 OBJ 1.0\n").is_err());
}

fn mutate(text: &str, edits: &[(usize, u8)]) -> String {
    let mut bytes = text.as_bytes().to_vec();
    for &(pos, b) in edits {
        if bytes.is_empty() {
            break;
        }
        let i = pos % bytes.len();
        bytes[i] = b;
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn arbitrary_text_never_panics(text in ".{0,400}") {
        if let Ok(doc) = parse_qps(&text) {
            let _ = doc.to_qp::<f64>();
        }
    }

    #[test]
    fn mutated_fixtures_never_panic(
        which in 0usize..5,
        edits in prop::collection::vec((0usize..4000, prop::sample::select(b" \n-.0123456789eEXRNLGQ+".to_vec())), 1..8),
    ) {
        let name = ["HS21", "QPTEST", "HS35", "TAME", "ZECEVIC2"][which];
        let text = mutate(&fixture(name), &edits);
        if let Ok(doc) = parse_qps(&text) {
            let _ = doc.to_qp::<f64>();
        }
    }

    #[test]
    fn line_shuffles_never_panic(which in 0usize..5, swaps in prop::collection::vec((0usize..60, 0usize..60), 1..5)) {
        let name = ["HS21", "QPTEST", "HS35", "TAME", "ZECEVIC2"][which];
        let mut lines: Vec<String> = fixture(name).lines().map(String::from).collect();
        for (a, b) in swaps {
            let n = lines.len();
            lines.swap(a % n, b % n);
        }
        if let Ok(doc) = parse_qps(&lines.join("\n")) {
            let _ = doc.to_qp::<f64>();
        }
    }
}
