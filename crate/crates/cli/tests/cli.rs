use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn manifest() -> PathBuf {
    root().join("data/sample/manifest.catql")
}

fn query(name: &str) -> PathBuf {
    root().join("data/sample/queries").join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn catql(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catql"))
        .args(args)
        .env_remove("CATQL_SEED")
        .env_remove("CATQL_MANIFEST")
        .output()
        .unwrap()
}

fn with_manifest(args: &[&str]) -> Output {
    let m = manifest();
    let mut all = vec!["-m", m.to_str().unwrap()];
    all.extend_from_slice(args);
    catql(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("catql-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn load_prints_a_summary() {
    let o = catql(&["load", manifest().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("25 objects, 22 morphisms"));
    assert!(out.contains("Knows\trelationship\t5\n"));
    assert!(out.contains("Person\tentity\t6\n"));
}

#[test]
fn missing_manifest_is_an_io_error() {
    let o = catql(&["load", "/nonexistent/manifest.catql"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dangling_foreign_key_is_a_data_violation() {
    let dir = temp_dir("dangling");
    std::fs::write(dir.join("c.csv"), "ID,Name\n1,Ann\n").unwrap();
    std::fs::write(dir.join("o.csv"), "OID,Cust\n10,1\n11,7\n").unwrap();
    std::fs::write(
        dir.join("m.catql"),
        "csv c.csv key=ID:int object=Customer columns=Name\n\
         csv o.csv key=OID:int object=Order columns=Cust:int\n\
         morphism Order.Customer: Order -> Customer via Cust\n",
    )
    .unwrap();
    let o = catql(&["load", dir.join("m.catql").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not total"), "{}", stderr(&o));
}

#[test]
fn non_commuting_paths_are_a_thinness_violation() {
    let dir = temp_dir("thin");
    // Order -> Region directly and via Customer disagree for order 11
    std::fs::write(dir.join("c.csv"), "ID,Region\n1,north\n2,south\n").unwrap();
    std::fs::write(dir.join("o.csv"), "OID,Cust,Region\n10,1,north\n11,2,north\n").unwrap();
    std::fs::write(
        dir.join("m.catql"),
        "object Region kind=attribute\n\
         csv c.csv key=ID:int object=Customer columns=Region\n\
         csv o.csv key=OID:int object=Order columns=Cust:int,Region\n\
         morphism Order.Customer: Order -> Customer via Cust\n",
    )
    .unwrap();
    let o = catql(&["load", dir.join("m.catql").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("not thin"), "{}", stderr(&o));
}

#[test]
fn calculus_goldens_match_with_the_oracle() {
    for name in [
        "male_students_all_female_courses",
        "ancestors_of_john",
        "reachable_from_john",
        "courses_female_and_male",
        "addresses_dividing_courses",
        "recursive_friends_of_john",
    ] {
        let q = query(&format!("{name}.cql"));
        let o = with_manifest(&["run", q.to_str().unwrap(), "--oracle"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        assert_eq!(stdout(&o), golden(&format!("{name}.tsv")), "{name}");
        let unoptimized = with_manifest(&["run", q.to_str().unwrap(), "--no-opt"]);
        assert_eq!(stdout(&unoptimized), stdout(&o), "{name}");
    }
}

#[test]
fn algebra_queries_agree_with_their_calculus_form() {
    for name in ["courses_female_and_male", "addresses_dividing_courses", "recursive_friends_of_john"] {
        let alg = with_manifest(&["run", query(&format!("{name}.alg")).to_str().unwrap()]);
        assert_eq!(alg.status.code(), Some(0), "{name}: {}", stderr(&alg));
        let body = |s: String| s.lines().skip(1).map(String::from).collect::<Vec<_>>();
        assert_eq!(body(stdout(&alg)), body(golden(&format!("{name}.tsv"))), "{name}");
    }
}

#[test]
fn empty_results_print_only_the_header() {
    let o = with_manifest(&["run", r#"{ x | x in Student, x.Gender = "Other" }"#]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x\n");
}

#[test]
fn unsafe_queries_name_the_variable() {
    let o = with_manifest(&["run", "{ x | not x in Student }"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("unsafe query: x"), "{}", stderr(&o));
}

#[test]
fn missing_query_file_is_an_io_error() {
    let o = with_manifest(&["run", "no_such_query.cql"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_needs_calculus_input() {
    let o = with_manifest(&["run", query("courses_female_and_male.alg").to_str().unwrap(), "--oracle"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn manifest_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_catql"))
        .args(["dump", "Gender"])
        .env("CATQL_MANIFEST", manifest())
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "Gender\nFemale\nMale\n");
    let o = catql(&["dump", "Gender"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dump_unpacks_relationships() {
    let o = with_manifest(&["dump", "Knows"]);
    assert_eq!(stdout(&o), "source\ttarget\n1\t2\n2\t3\n3\t1\n4\t5\n5\t2\n");
    assert_eq!(with_manifest(&["dump", "Nope"]).status.code(), Some(1));
}

#[test]
fn explain_prints_the_golden_plan() {
    let q = query("male_students_all_female_courses.cql");
    let o = with_manifest(&["explain", q.to_str().unwrap()]);
    assert_eq!(stdout(&o), golden("male_students_all_female_courses.plan"));
}

#[test]
fn explain_diff_lists_the_rewrites() {
    let q = query("male_students_all_female_courses.cql");
    let out = stdout(&with_manifest(&["explain", q.to_str().unwrap(), "--diff"]));
    let plan = golden("male_students_all_female_courses.plan");
    assert!(out.starts_with("-- plan (cost "));
    assert!(out.contains(&plan));
    assert!(out.contains("-- optimized (cost "));
    let trace: Vec<&str> = out.split("-- trace\n").nth(1).unwrap().lines().collect();
    assert!(!trace.is_empty());
    assert!(trace.iter().all(|l| l.starts_with("applied rule ") && l.contains(" at /")), "{trace:?}");
}

#[test]
fn explain_echoes_algebra_input() {
    let o = with_manifest(&["explain", "--algebra", "map(base(Student), path(Gender))"]);
    assert_eq!(stdout(&o), "map path(Gender)\n  base(Student)\n");
}

#[test]
fn output_is_deterministic() {
    let q = query("male_students_all_female_courses.cql");
    let a = with_manifest(&["explain", q.to_str().unwrap(), "--diff"]);
    let b = with_manifest(&["explain", q.to_str().unwrap(), "--diff"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_runs_every_property() {
    let o = catql(&["check", "--trials", "5", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("PASS rule 9 "));
    assert!(out.ends_with("17 of 17 properties passed (seed 3)\n"), "{out}");
}

#[test]
fn seed_from_the_environment_wins() {
    let o = Command::new(env!("CARGO_BIN_EXE_catql"))
        .args(["check", "--trials", "2", "--seed", "3"])
        .env("CATQL_SEED", "42")
        .output()
        .unwrap();
    assert!(stdout(&o).ends_with("(seed 42)\n"));
}

#[test]
fn zero_trials_pass_with_a_warning() {
    let o = catql(&["check", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(catql(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(catql(&["--help"]).status.code(), Some(0));
}
