use std::path::PathBuf;

use bribery::cli::{parse_instance, run, serialize_instance, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE};

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("bribery-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path: PathBuf = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn cli(args: &[&str]) -> bribery::cli::Outcome {
    run(std::iter::once("bribery").chain(args.iter().copied()))
}

const THREE: &str = "election 3 3\nrule bucklin\ndesignated 0\nnames: a b c\nvote: 0 1 2 | 3\nvote: 1 0 2 | 3\nvote: 2 0 1 | 3\n";

#[test]
fn minimal_file_parses() {
    let f = parse_instance("election 1 1\nrule spav\ndesignated 0\nvote: 0 | 0\n").unwrap();
    assert_eq!(f.election.m(), 1);
}

#[test]
fn comments_and_blank_lines_are_dropped() {
    let text = "# header\nelection 2 1   # two candidates\n\nrule fallback\ndesignated 1\nvote: 1 0 | 1\nbudget: 3\n";
    let f = parse_instance(text).unwrap();
    assert_eq!(
        serialize_instance(&f),
        "election 2 1\nrule fallback\ndesignated 1\nvote: 1 0 | 1\nbudget: 3\n"
    );
}

#[test]
fn parse_errors_name_line_and_rule() {
    let cases = [
        ("election 2 1\nrule spav\ndesignated 0\nvote: 0 0 | 1\n", 4, "permutation"),
        ("election 2 1\nrule spav\ndesignated 0\nvote: 0 1 | 3\n", 4, "approval count"),
        ("election 2 1\nrule spav\ndesignated 0\nvote: 0 1 | 1\nshiftcost: 1 1 2\n", 5, "no change"),
        ("election 2 1\nrule spav\ndesignated 0\nvote: 0 1 | 1\nshiftcost: 0 3 2\n", 5, "monotone"),
        ("election 2 1\nrule spav\ndesignated 0\nvote: 0 1 | 1\nsupportcost: 1 1 0\n", 5, "no change"),
        ("election 2 1\nrule borda\ndesignated 0\nvote: 0 1 | 1\n", 2, "unknown rule"),
        ("election 2 1\nrule spav\ndesignated 5\nvote: 0 1 | 1\n", 3, "out of range"),
        ("election 2 2\nrule spav\ndesignated 0\nvote: 0 1 | 1\n", 4, "expected 2 votes"),
    ];
    for (text, line, needle) in cases {
        let err = parse_instance(text).unwrap_err();
        assert_eq!(err.line, line, "{text}: {err}");
        assert!(err.to_string().contains(needle), "{text}: {err}");
    }
}

#[test]
fn winners_reports_round_and_rule_dependent_set() {
    let f = scratch("three.txt", THREE);
    let classic = cli(&["winners", &f]);
    assert_eq!(classic.code, EXIT_OK);
    assert!(classic.stdout.contains("winners: 0\nround: 2\n"), "{}", classic.stdout);
    let simplified = cli(&["winners", "--rule", "bucklin-simplified", &f]);
    assert!(simplified.stdout.contains("winners: 0 1\nround: 2\n"), "{}", simplified.stdout);
}

#[test]
fn solver_reports_verify() {
    let f = scratch("verify.txt", THREE);
    let report = cli(&["shift-solve", "--rule", "bucklin", &f]);
    assert_eq!(report.code, EXIT_OK);
    let r = scratch("verify.rep", &report.stdout);
    assert_eq!(cli(&["verify", &f, &r]).code, EXIT_OK);
    let tampered = scratch("tampered.rep", &report.stdout.replace("winners: 0", "winners: 1"));
    let out = cli(&["verify", &f, &tampered]);
    assert_eq!(out.code, EXIT_INFEASIBLE);
    assert!(out.stdout.starts_with("rejected"));
}

#[test]
fn mixed_sign_costs_are_a_usage_error() {
    let f = scratch(
        "mixed.txt",
        "election 2 2\nrule spav\ndesignated 0\nvote: 1 0 | 1\nvote: 1 0 | 1\nsupportcost: 1 0 1\nsupportcost: 1 0 1\n",
    );
    let out = cli(&["support-solve", &f]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("mixes increases and decreases"), "{}", out.stderr);
    assert_eq!(cli(&["support-solve", "--solver", "brute-force", &f]).code, EXIT_OK);
}

#[test]
fn infeasible_and_over_budget_exit_one() {
    let f = scratch(
        "stuck.txt",
        "election 2 1\nrule spav\ndesignated 0\nvote: 1 0 | 1\nsupportcost: inf 0 inf\n",
    );
    let out = cli(&["support-solve", "--solver", "brute-force", &f]);
    assert_eq!(out.code, EXIT_INFEASIBLE);
    assert!(out.stdout.contains("cost: inf"));
    let g = scratch(
        "budget.txt",
        "election 2 1\nrule spav\ndesignated 0\nvote: 1 0 | 1\nsupportcost: 1 0 1\nbudget: 0\n",
    );
    let out = cli(&["support-solve", "--solver", "brute-force", &g]);
    assert_eq!(out.code, EXIT_INFEASIBLE);
    assert!(out.stdout.contains("budget: 0 exceeded"), "{}", out.stdout);
}

#[test]
fn bad_arguments_and_missing_files_exit_two() {
    assert_eq!(cli(&["winners"]).code, EXIT_USAGE);
    assert_eq!(cli(&["no-such-command"]).code, EXIT_USAGE);
    assert_eq!(cli(&["winners", "/nonexistent/file"]).code, EXIT_USAGE);
    let f = scratch("plain.txt", THREE);
    assert_eq!(cli(&["support-solve", "--solver", "nope", &f]).code, EXIT_USAGE);
}

#[test]
fn randomized_reports_carry_seed_and_trial() {
    let gen = cli(&["gen", "random", "--m", "4", "--n", "5", "--seed", "2", "--rule", "spav", "--costs", "random", "--sign", "positive"]);
    let f = scratch("pos.txt", &gen.stdout);
    let out = cli(&["support-solve", "--solver", "fpt-positive", "--beta-prime", "2", "--seed", "5", "--trials", "30", &f]);
    if out.code == EXIT_OK && !out.stdout.contains("action: push 0 0 0 0 0") {
        assert!(out.stdout.contains("trial: seed 5 trial "), "{}", out.stdout);
    }
    assert_eq!(out, cli(&["support-solve", "--solver", "fpt-positive", "--beta-prime", "2", "--seed", "5", "--trials", "30", &f]));
}

#[test]
fn graph_and_reduction_generators_round_trip() {
    let g = cli(&["gen", "graph", "--vertices", "4", "--classes", "2", "--seed", "1", "--density", "1"]);
    assert_eq!(g.code, EXIT_OK);
    let gp = scratch("g.txt", &g.stdout);
    let mc = cli(&["gen", "mcclique", &gp]);
    assert_eq!(mc.code, EXIT_OK);
    let parsed = parse_instance(&mc.stdout).unwrap();
    assert_eq!(serialize_instance(&parsed), mc.stdout);
    let mf = scratch("mc.txt", &mc.stdout);
    assert_eq!(cli(&["axis", &mf]).code, EXIT_OK);
    let d = cli(&["gen", "domset", &gp, "--k", "2", "--variant", "positive"]);
    assert_eq!(d.code, EXIT_OK);
    assert_eq!(cli(&["gen", "domset", &gp, "--k", "3"]).code, EXIT_USAGE);
}
