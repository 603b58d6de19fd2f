//! Black-box tests of the `freqmon` binary: exit codes, CSV formats, and
//! composition of `generate` with `monitor`.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use freqmon::markov::MarkovChain;
use freqmon::monitor::{run_monitor, MonitorKind};

const BIN: &str = env!("CARGO_BIN_EXE_freqmon");
const CHAIN_JSON: &str = include_str!("../../../data/chain-xyz.json");
const EXAMPLE_WORD: &str = "c b b a b a c a a b c a c a a a";

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn freqmon");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    child.wait_with_output().expect("wait for freqmon")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn chain_file(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("chain.json");
    std::fs::write(&path, CHAIN_JSON).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"], None).status.code(), Some(0));
    assert_eq!(run(&["--version"], None).status.code(), Some(0));
    assert_eq!(run(&["monitor", "--help"], None).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[], None).status.code(), Some(1));
    assert_eq!(run(&["generate", "--bogus"], None).status.code(), Some(1));
    // missing required --steps/--seed
    assert_eq!(run(&["generate", "--chain", "x.json"], None).status.code(), Some(1));
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_file(&dir);

    // missing file
    let out = run(&["stationary", "--chain", "/nonexistent.json"], None);
    assert_eq!(out.status.code(), Some(2));

    // broken row sum
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, CHAIN_JSON.replace(r#"{"from": "y", "to": "x", "prob": "1/3"},"#, ""))
        .unwrap();
    let out = run(&["stationary", "--chain", broken.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row"));

    // median needs an explicit order
    let out = run(&["monitor", "--algorithm", "median"], Some("a b a"));
    assert_eq!(out.status.code(), Some(2));

    // formula referencing a symbol outside --order
    let out = run(
        &["monitor", "--algorithm", "formula", "--formula", "f(z) > 0", "--order", "a,b"],
        Some("a b a"),
    );
    assert_eq!(out.status.code(), Some(2));

    // empty input stream
    let out = run(&["monitor", "--algorithm", "mode"], Some(""));
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["lab", "mode-rate", "--pa", "0.4", "--n", "4", "--trials", "10", "--seed", "1"], None);
    assert_eq!(out.status.code(), Some(2));

    // unseeded sampling is refused rather than defaulting to wall-clock
    let out = run(
        &["lab", "prefix", "--chain", &chain, "--sigma", "y", "--steps", "10"],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_file(&dir);
    let args = ["generate", "--chain", chain.as_str(), "--steps", "16", "--seed", "1"];

    let a = run(&args, None);
    let b = run(&args, None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "seeded generate must be byte-identical");
    assert_eq!(stdout(&a).split_whitespace().count(), 16);

    let c = run(
        &["generate", "--chain", &chain, "--steps", "16", "--seed", "1", "--states"],
        None,
    );
    let text = stdout(&c);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,state,symbol"));
    assert_eq!(lines.count(), 16);
}

#[test]
fn monitor_mode_emits_csv_trace() {
    let out = run(&["monitor", "--algorithm", "mode"], Some(EXAMPLE_WORD));
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "pos,input,output");
    assert_eq!(lines.len(), 17);
    assert_eq!(lines[1], "1,c,c");
    assert_eq!(lines[16], "16,a,a");
}

#[test]
fn monitor_naive_mode_matches_reference_row() {
    let out = run(&["monitor", "--algorithm", "naive-mode"], Some(EXAMPLE_WORD));
    assert_eq!(out.status.code(), Some(0));
    let got: Vec<String> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect();
    let expected = [
        "c", "_bot_", "b", "b", "b", "b", "b", "_bot_", "a", "_bot_", "_bot_", "a", "a",
        "a", "a", "a",
    ];
    assert_eq!(got, expected);
}

#[test]
fn monitor_median_and_formula() {
    let out = run(
        &["monitor", "--algorithm", "median", "--order", "a,b,c"],
        Some("b a c c c c"),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().last().unwrap().ends_with(",b"));

    let out = run(
        &["monitor", "--algorithm", "formula", "--formula", "f(a) > f(b)"],
        Some("a b a a"),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let verdicts: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    // level 1 infix "a" -> true; the verdict holds mid-infix and flips to
    // false once the level-2 infix "b a" completes with a tie
    assert_eq!(verdicts, ["true", "true", "false", "false"]);
}

#[test]
fn monitor_reads_input_files() {
    let dir = tempfile::tempdir().unwrap();
    let word = dir.path().join("word.txt");
    std::fs::write(&word, EXAMPLE_WORD).unwrap();
    let out = run(
        &["monitor", "--algorithm", "mode", "--input", word.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().last().unwrap().ends_with(",a"));
}

/// Piping `generate` into `monitor` must agree with running the monitor
/// in-process on the same sampled word, across fuzzed (seed, steps, kind).
#[test]
fn generate_then_monitor_composes() {
    let dir = tempfile::tempdir().unwrap();
    let chain_path = chain_file(&dir);
    let chain = MarkovChain::parse(CHAIN_JSON).unwrap();

    let mut rng = freqmon::rng::SplitMix64::new(99);
    for _ in 0..50 {
        let seed = rng.next_u64() % 10_000;
        let steps = 2 + (rng.next_u64() % 60) as usize;
        let algorithm = match rng.next_u64() % 3 {
            0 => "mode",
            1 => "median",
            _ => "naive-mode",
        };

        let gen = run(
            &["generate", "--chain", &chain_path, "--steps", &steps.to_string(), "--seed", &seed.to_string()],
            None,
        );
        assert_eq!(gen.status.code(), Some(0));
        let stream = stdout(&gen);

        let mon = run(
            &["monitor", "--algorithm", algorithm, "--order", "x,y,z"],
            Some(&stream),
        );
        assert_eq!(mon.status.code(), Some(0));
        let cli_outputs: Vec<String> = stdout(&mon)
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().to_string())
            .collect();

        let trace = chain.sample(steps, seed);
        let kind = match algorithm {
            "mode" => MonitorKind::Mode,
            "median" => MonitorKind::Median,
            _ => MonitorKind::NaiveMode,
        };
        let lib_outputs = run_monitor(&kind, &trace.word).unwrap();
        assert_eq!(cli_outputs, lib_outputs, "seed {seed} steps {steps} {algorithm}");
    }
}

#[test]
fn stationary_prints_exact_rows() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_file(&dir);
    let out = run(&["stationary", "--chain", &chain], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("kind,name,value\n"));
    assert!(text.contains("letter,y,3.7500000000000000e-1"));
    assert!(text.contains("letter,z,2.5000000000000000e-1"));
    assert!(text.contains("return,y,2.6666666666666665e0"));
}

#[test]
fn lab_commands_emit_series_csv() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_file(&dir);

    // fixed-word prefix series bypasses sampling and needs no seed
    let word = dir.path().join("word.txt");
    std::fs::write(&word, "x y z x y z x y x y z x y z x y").unwrap();
    let out = run(
        &["lab", "prefix", "--chain", &chain, "--sigma", "y", "--steps", "16",
          "--word", word.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# experiment=prefix"));
    let row8 = text.lines().find(|l| l.starts_with("8,")).unwrap();
    let v: f64 = row8.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 0.375).abs() < 1e-15);

    // the mode-rate preamble pins the closed-form bound
    let out = run(
        &["lab", "mode-rate", "--pa", "0.75", "--n", "10", "--trials", "1000", "--seed", "3"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("# param bound=0.7626953125"));

    // seeded lab runs are byte-identical, to a file or to stdout
    let args = ["lab", "lln", "--dist", "0:0.5,1:0.5", "--levels", "50", "--seed", "11"];
    let a = run(&args, None);
    let b = run(&args, None);
    assert_eq!(a.stdout, b.stdout);

    let out_path = dir.path().join("series.csv");
    let mut args_file: Vec<&str> = args.to_vec();
    let out_str = out_path.to_str().unwrap().to_string();
    args_file.extend(["--out", &out_str]);
    assert_eq!(run(&args_file, None).status.code(), Some(0));
    assert_eq!(std::fs::read(&out_path).unwrap(), a.stdout);

    let out = run(
        &["lab", "first-visit", "--chain", &chain, "--state", "z", "--levels", "20", "--seed", "5"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("# param state=z"));

    let out = run(
        &["lab", "infix", "--chain", &chain, "--sigma", "y", "--levels", "30", "--seed", "5"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().filter(|l| !l.starts_with('#')).count(), 31);
}
