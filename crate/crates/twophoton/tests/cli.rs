use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_twophoton");

/// Small but complete settings so every command runs quickly.
const CONFIG: &str = "\
# test settings
comb.n_side_modes = 6
comb.linewidth = 0.02 fsr
grid.n_points = 2048
correlation.average_resolution = 4 tr
scan.points = 27
scan.delay_max = 1.2 tr
interferometer.mm_per_second = 1.5e11
fringe.points = 37
engineer.n_points = 8192
engineer.wideband_shape = rectangular
mc.events = 150000      # spans three chunks
mc.pair_rate = 5e2
detector.dark_rate = 2e3
detector.resolution = 0.002 tr
";

const COMMANDS: [(&str, &[&str]); 5] = [
    ("correlation", &["correlation.csv"]),
    ("homscan", &["homscan.csv"]),
    ("fringe", &["fringe.csv"]),
    ("engineer", &["engineer_before.csv", "engineer_after.csv", "engineer_solution.txt"]),
    ("mc", &["mc_histogram.csv", "mc_summary.txt"]),
];

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("TWOPHOTON_THREADS");
    if let Some(t) = threads {
        cmd.env("TWOPHOTON_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn run_ok(command: &str, config: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args, None);
    assert!(o.status.success(), "{command}: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn every_output_reruns_byte_identically_from_its_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, CONFIG).unwrap();
    for (command, files) in COMMANDS {
        let first = dir.path().join(format!("{command}-1"));
        run_ok(command, &config, &first, &[]);
        for name in files.iter() {
            let again = dir.path().join(format!("{command}-{name}"));
            run_ok(command, &first.join(name), &again, &[]);
            for other in files.iter() {
                let a = fs::read(first.join(other)).unwrap();
                let b = fs::read(again.join(other)).unwrap();
                assert!(a == b, "{command}: {other} differs after rerun from {name}");
            }
        }
    }
}

#[test]
fn headers_echo_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, CONFIG).unwrap();
    run_ok("correlation", &config, dir.path(), &["--seed", "99"]);
    let text = fs::read_to_string(dir.path().join("correlation.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# twophoton correlation"));
    assert!(text.contains("#@ comb.n_side_modes = 6\n"));
    assert!(text.contains("#@ correlation.average_resolution = 4e-9\n"));
    assert!(text.contains("#@ run.seed = 99\n"));
    assert!(text.contains("\ntau_s,gamma2,gamma2_averaged,gamma1_abs\n"));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, CONFIG).unwrap();
    for (command, files) in [COMMANDS[1], COMMANDS[4]] {
        let mut outputs = Vec::new();
        for threads in ["1", "3", "8"] {
            let out = dir.path().join(format!("{command}-{threads}"));
            let o = run(
                &[command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()],
                Some(threads),
            );
            assert!(o.status.success());
            outputs.push(files.iter().map(|f| fs::read(out.join(f)).unwrap()).collect::<Vec<_>>());
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{command}");
    }
    let a = dir.path().join("flag");
    let o = run(
        &["mc", "--config", config.to_str().unwrap(), "--out", a.to_str().unwrap(), "--threads", "5"],
        None,
    );
    assert!(o.status.success());
    assert_eq!(
        fs::read(a.join("mc_histogram.csv")).unwrap(),
        fs::read(dir.path().join("mc-1/mc_histogram.csv")).unwrap()
    );
}

#[test]
fn seed_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, CONFIG).unwrap();
    run_ok("mc", &config, &dir.path().join("a"), &["--seed", "1"]);
    run_ok("mc", &config, &dir.path().join("b"), &["--seed", "2"]);
    let a = fs::read_to_string(dir.path().join("a/mc_histogram.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b/mc_histogram.csv")).unwrap();
    let body = |s: &str| s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_ne!(body(&a), body(&b));
}

fn exit_code(config: &str, command: &str) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, config).unwrap();
    let o = run(
        &[command, "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        None,
    );
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn configuration_errors_exit_with_two() {
    let (code, msg) = exit_code("comb.n_side_modes = 3\ncomb.colour = red\n", "correlation");
    assert_eq!(code, 2);
    assert!(msg.contains("line 2") && msg.contains("comb.colour"), "{msg}");

    let (code, msg) = exit_code("comb.linewidth = 0.5 fsr\n", "correlation");
    assert_eq!(code, 2);
    assert!(msg.contains("halfwidth"), "{msg}");

    let (code, msg) = exit_code("scan.points = 4\nscan.points = 5\n", "homscan");
    assert_eq!(code, 2);
    assert!(msg.contains("duplicate"), "{msg}");

    let (code, _) = exit_code("detector.efficiency = 1.5\n", "mc");
    assert_eq!(code, 2);
}

#[test]
fn numerical_preconditions_exit_with_three() {
    // 64 points over four round trips cannot resolve 21 modes.
    let (code, msg) = exit_code("grid.n_points = 64\n", "correlation");
    assert_eq!(code, 3, "{msg}");
    // The detector window must cover the arm delay.
    let (code, msg) = exit_code("interferometer.resolution = 1e-10\nfringe.delay = 1 tr\n", "fringe");
    assert_eq!(code, 3, "{msg}");
    // A narrow-band wideband amplitude matches the comb peak badly.
    let (code, msg) = exit_code("engineer.wideband_halfwidth = 0.6 fsr\n", "engineer");
    assert_eq!(code, 3, "{msg}");
}

#[test]
fn missing_config_is_an_io_error() {
    let o = run(&["correlation", "--config", "/nonexistent/twophoton.cfg"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_mode_comb_gives_a_single_peak() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, "comb.n_side_modes = 0\ncorrelation.coherence = false\n").unwrap();
    run_ok("correlation", &config, dir.path(), &[]);
    let text = fs::read_to_string(dir.path().join("correlation.csv")).unwrap();
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // The grid straddles zero, so the top may be a two-sample plateau.
    let slopes: Vec<f64> = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| d.abs() > 1e-15)
        .collect();
    let maxima = slopes.windows(2).filter(|w| w[0] > 0.0 && w[1] < 0.0).count();
    let minima = slopes.windows(2).filter(|w| w[0] < 0.0 && w[1] > 0.0).count();
    assert_eq!((maxima, minima), (1, 0));
}
