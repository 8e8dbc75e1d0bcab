//! Black-box tests of the `bji` binary: exit codes, flag validation, and
//! the shape of each subcommand's output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const DOCS_CATALOG: &str = include_str!("data/docs_catalog.json");
const DOCS_WORKLOAD: &str = include_str!("data/docs_workload.sql");
const CITY_ID: &str = "Customers.city|Sales.cust_id=Customers.cust_id";
const MONTH_ID: &str = "Times.month|Sales.time_id=Times.time_id";

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn docs() -> Fixture {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        f.write("catalog.json", DOCS_CATALOG);
        f.write("workload.sql", DOCS_WORKLOAD);
        f
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, content).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Runs `bji <subcommand> --workload workload.sql --schema catalog.json
    /// <extra...>` against this fixture.
    fn run(&self, subcommand: &str, extra: &[&str]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_bji"));
        cmd.arg(subcommand)
            .arg("--workload")
            .arg(self.path("workload.sql"))
            .arg("--schema")
            .arg(self.path("catalog.json"));
        cmd.args(extra);
        cmd.output().unwrap()
    }
}

fn bare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bji"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn advise_reports_the_city_index_and_exits_zero() {
    let f = Fixture::docs();
    let out = f.run("advise", &["--minsup", "0.5", "--objective", "profit"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    let selected: Vec<&str> = v["configuration"]["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert!(selected.contains(&CITY_ID), "selected: {selected:?}");
    assert_eq!(v["configuration"]["baseline_cost"].as_f64().unwrap(), 118296.0);
    assert!(v["generated_at_unix"].as_u64().is_some());
    assert_eq!(v["inputs"]["synthetic_stand_in"], Value::Bool(false));
}

#[test]
fn text_format_renders_the_headline_numbers() {
    let f = Fixture::docs();
    let out = f.run(
        "advise",
        &["--minsup", "0.5", "--objective", "profit", "--format", "text"],
    );
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("configuration:"), "{text}");
    assert!(text.contains("baseline 118296.000"), "{text}");
}

#[test]
fn ratio_without_budget_is_a_usage_error() {
    let f = Fixture::docs();
    let out = f.run("advise", &["--minsup", "0.5", "--objective", "ratio"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--budget"), "{}", stderr(&out));
}

#[test]
fn hybrid_needs_both_budget_and_alpha() {
    let f = Fixture::docs();
    let no_alpha = f.run(
        "advise",
        &["--minsup", "0.5", "--objective", "hybrid", "--budget", "1000000"],
    );
    assert_eq!(code(&no_alpha), 2);
    assert!(stderr(&no_alpha).contains("--alpha"));
    let no_budget = f.run(
        "advise",
        &["--minsup", "0.5", "--objective", "hybrid", "--alpha", "0.5"],
    );
    assert_eq!(code(&no_budget), 2);
    assert!(stderr(&no_budget).contains("--budget"));
}

#[test]
fn alpha_outside_hybrid_or_outside_range_is_rejected() {
    let f = Fixture::docs();
    let wrong_objective = f.run(
        "advise",
        &["--minsup", "0.5", "--objective", "profit", "--alpha", "0.5"],
    );
    assert_eq!(code(&wrong_objective), 2);
    let out_of_range = f.run(
        "advise",
        &[
            "--minsup", "0.5", "--objective", "hybrid", "--budget", "1000000",
            "--alpha", "1.5",
        ],
    );
    assert_eq!(code(&out_of_range), 2);
}

#[test]
fn minsup_must_sit_inside_the_unit_interval() {
    let f = Fixture::docs();
    for bad in ["0", "-0.1", "1.5"] {
        let out = f.run("advise", &["--minsup", bad, "--objective", "profit"]);
        assert_eq!(code(&out), 2, "minsup {bad}");
        assert!(stderr(&out).contains("minsup"));
    }
}

#[test]
fn maintenance_weight_must_be_non_negative() {
    let f = Fixture::docs();
    let out = f.run(
        "advise",
        &[
            "--minsup", "0.5", "--objective", "profit",
            "--maintenance-weight", "-1",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_input_files_exit_two() {
    let f = Fixture::docs();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bji"));
    cmd.arg("advise")
        .arg("--workload")
        .arg(f.path("absent.sql"))
        .arg("--schema")
        .arg(f.path("catalog.json"))
        .args(["--minsup", "0.5", "--objective", "profit"]);
    let out = cmd.output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn workload_outside_the_grammar_exits_three_unless_lenient() {
    let f = Fixture::docs();
    f.write(
        "workload.sql",
        "SELECT * FROM Sales S WHERE S.amount = 1 OR S.amount = 2;\n",
    );
    let strict = f.run("advise", &["--minsup", "0.5", "--objective", "profit"]);
    assert_eq!(code(&strict), 3, "{}", stderr(&strict));

    let lenient = f.run(
        "advise",
        &["--minsup", "0.5", "--objective", "profit", "--lenient"],
    );
    assert_eq!(code(&lenient), 0, "{}", stderr(&lenient));
    assert!(stderr(&lenient).contains("warning"), "{}", stderr(&lenient));
    let v = json(&lenient);
    assert_eq!(v["matrix"]["rows"], 0);
}

#[test]
fn malformed_catalog_text_exits_three() {
    let f = Fixture::docs();
    f.write("catalog.json", "{ not json");
    let broken = f.run("advise", &["--minsup", "0.5", "--objective", "profit"]);
    assert_eq!(code(&broken), 3);

    f.write(
        "catalog.json",
        &DOCS_CATALOG.replace("\"page_size_bytes\"", "\"page_size\""),
    );
    let unknown_field = f.run("advise", &["--minsup", "0.5", "--objective", "profit"]);
    assert_eq!(code(&unknown_field), 3);
}

#[test]
fn catalog_invariant_violations_exit_four() {
    let f = Fixture::docs();
    f.write(
        "catalog.json",
        &DOCS_CATALOG.replace("Customers.cust_id", "Ghosts.cust_id"),
    );
    let out = f.run("advise", &["--minsup", "0.5", "--objective", "profit"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn ddl_file_lists_each_selected_index_once() {
    let f = Fixture::docs();
    let ddl_path = f.path("indexes.sql");
    let out = f.run(
        "advise",
        &[
            "--minsup", "0.5", "--objective", "profit",
            "--ddl", ddl_path.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let selected = v["configuration"]["selected"].as_array().unwrap().len();
    let ddl = std::fs::read_to_string(&ddl_path).unwrap();
    assert_eq!(ddl.matches("CREATE BITMAP INDEX").count(), selected);
    assert!(ddl.contains(
        "CREATE BITMAP INDEX bji_customers_city ON Sales(Customers.city) \
         FROM Sales, Customers WHERE Sales.cust_id = Customers.cust_id;"
    ));
}

#[test]
fn mine_lists_the_closed_itemsets() {
    let f = Fixture::docs();
    let out = f.run("mine", &["--minsup", "0.5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["matrix"]["rows"], 3);
    assert_eq!(v["matrix"]["cols"], 7);
    assert_eq!(v["itemsets"].as_array().unwrap().len(), 2);

    let text = f.run("mine", &["--minsup", "0.5", "--format", "text"]);
    assert_eq!(code(&text), 0);
    assert!(String::from_utf8_lossy(&text.stdout).contains("Customers.city"));
}

#[test]
fn candidates_lists_clauses_and_sizes() {
    let f = Fixture::docs();
    let out = f.run("candidates", &["--minsup", "0.5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let cands = v["candidates"].as_array().unwrap();
    assert_eq!(cands.len(), 2);
    let city = cands.iter().find(|c| c["id"] == CITY_ID).unwrap();
    assert_eq!(city["on"][0], "Customers.city");
    assert_eq!(city["from"][0], "Sales");
    assert_eq!(city["where"][0], "Sales.cust_id = Customers.cust_id");
    assert_eq!(city["size_bytes"].as_u64().unwrap(), 6_250_000);
}

#[test]
fn cost_prices_a_chosen_index_and_rejects_unknown_ids() {
    let f = Fixture::docs();
    let out = f.run("cost", &["--minsup", "0.5", "--index", CITY_ID]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["indexes"].as_array().unwrap().len(), 1);
    assert_eq!(v["per_query"].as_array().unwrap().len(), 3);
    let baseline = v["baseline_cost"].as_f64().unwrap();
    let total = v["workload_cost"].as_f64().unwrap();
    assert_eq!(baseline, 118296.0);
    assert!(total < baseline);
    assert_eq!(v["maintenance"].as_array().unwrap().len(), 1);

    let unknown = f.run("cost", &["--minsup", "0.5", "--index", "nope"]);
    assert_eq!(code(&unknown), 2);
    assert!(stderr(&unknown).contains("nope"));
}

#[test]
fn sweep_csv_emits_a_header_and_one_row_per_value() {
    let f = Fixture::docs();
    let out = f.run(
        "sweep",
        &[
            "--variable", "minsup", "--values", "0.4,0.7,1.0",
            "--objective", "profit",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = String::from_utf8_lossy(&out.stdout).into_owned();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines[0],
        "value,candidates,selected,total_bytes,workload_cost,cost_ratio"
    );
    assert!(lines[1].starts_with("0.4,"));
}

#[test]
fn sweep_rows_match_standalone_runs() {
    let f = Fixture::docs();
    let sweep = f.run(
        "sweep",
        &[
            "--variable", "budget", "--values", "0,6250000", "--minsup", "0.5",
            "--objective", "ratio", "--format", "json",
        ],
    );
    assert_eq!(code(&sweep), 0, "{}", stderr(&sweep));
    let rows = json(&sweep);
    let row = &rows.as_array().unwrap()[1];
    assert!(row["selected"].as_u64().unwrap() >= 1);

    let standalone = f.run(
        "advise",
        &[
            "--minsup", "0.5", "--objective", "ratio", "--budget", "6250000",
        ],
    );
    let report = json(&standalone);
    assert_eq!(
        row["workload_cost"].as_f64().unwrap(),
        report["configuration"]["final_cost"].as_f64().unwrap()
    );
    assert_eq!(
        row["total_bytes"].as_u64().unwrap(),
        report["configuration"]["total_bytes"].as_u64().unwrap()
    );
}

#[test]
fn sweep_flag_validation_catches_misuse() {
    let f = Fixture::docs();
    let alpha_without_hybrid = f.run(
        "sweep",
        &[
            "--variable", "alpha", "--values", "0,1", "--minsup", "0.5",
            "--objective", "profit",
        ],
    );
    assert_eq!(code(&alpha_without_hybrid), 2);

    let missing_minsup = f.run(
        "sweep",
        &["--variable", "budget", "--values", "0", "--objective", "profit"],
    );
    assert_eq!(code(&missing_minsup), 2);
    assert!(stderr(&missing_minsup).contains("--minsup"));

    let bad_value = f.run(
        "sweep",
        &[
            "--variable", "minsup", "--values", "0.5,1.5", "--objective", "profit",
        ],
    );
    assert_eq!(code(&bad_value), 2);

    let fractional_budget = f.run(
        "sweep",
        &[
            "--variable", "budget", "--values", "10.5", "--minsup", "0.5",
            "--objective", "ratio",
        ],
    );
    assert_eq!(code(&fractional_budget), 2);
}

#[test]
fn keys_from_metadata_reaches_the_same_selection() {
    let f = Fixture::docs();
    let out = f.run(
        "advise",
        &[
            "--minsup", "0.5", "--objective", "profit", "--keys-from-metadata",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    let selected: Vec<&str> = v["configuration"]["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert!(selected.contains(&CITY_ID));
    assert!(selected.contains(&MONTH_ID));
}

#[test]
fn synth_writes_deterministic_labeled_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = bare(&[
            "synth",
            "--seed",
            "5",
            "--scale",
            "1",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let read = |d: &Path, n: &str| std::fs::read(d.join(n)).unwrap();
    assert_eq!(
        read(a.path(), "catalog.json"),
        read(b.path(), "catalog.json")
    );
    assert_eq!(
        read(a.path(), "workload.sql"),
        read(b.path(), "workload.sql")
    );

    // The generated workload advertises itself as synthetic in reports.
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bji"));
    cmd.arg("advise")
        .arg("--workload")
        .arg(a.path().join("workload.sql"))
        .arg("--schema")
        .arg(a.path().join("catalog.json"))
        .args(["--minsup", "0.1", "--objective", "profit"]);
    let report = cmd.output().unwrap();
    assert_eq!(code(&report), 0);
    assert_eq!(json(&report)["inputs"]["synthetic_stand_in"], Value::Bool(true));

    let zero_scale = bare(&[
        "synth",
        "--seed",
        "5",
        "--scale",
        "0",
        "--out-dir",
        a.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&zero_scale), 2);
}

#[test]
fn bare_invocation_prints_usage_and_exits_two() {
    let out = bare(&[]);
    assert_eq!(code(&out), 2);
    let help = bare(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("advise"));
}
