use std::f64::consts::PI;

use twophoton::config::RunConfig;
use twophoton::run;

type Table = (Vec<(String, String)>, Vec<String>, Vec<Vec<f64>>);

fn table(text: &str) -> Table {
    let mut meta = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(l) = lines.next_if(|l| l.starts_with('#')) {
        if let Some((k, v)) = l.strip_prefix("# ").and_then(|r| r.split_once(" = ")) {
            meta.push((k.to_string(), v.to_string()));
        }
    }
    let names: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let mut cols = vec![Vec::new(); names.len()];
    for l in lines {
        for (c, v) in cols.iter_mut().zip(l.split(',')) {
            c.push(v.parse().unwrap());
        }
    }
    (meta, names, cols)
}

fn column<'a>(names: &[String], cols: &'a [Vec<f64>], name: &str) -> &'a [f64] {
    &cols[names.iter().position(|n| n == name).unwrap()]
}

fn meta_value(meta: &[(String, String)], key: &str) -> f64 {
    meta.iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

#[test]
fn single_mode_pair_gives_one_dip() {
    let cfg = RunConfig::parse(
        "comb.n_side_modes = 0\ncomb.linewidth = 0.05 fsr\n\
         scan.delay_min = 0 tr\nscan.delay_max = 1 tr\nscan.points = 81\n",
    )
    .unwrap();
    let files = run::homscan(&cfg).unwrap();
    let (_, names, cols) = table(&files[0].contents);
    let c = column(&names, &cols, "coincidence");
    let delay = column(&names, &cols, "delay_s");
    let lowest = (0..c.len()).min_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
    assert_eq!(delay[lowest], 0.0);
    let interior = (1..c.len() - 1).filter(|&i| c[i] < c[i - 1] && c[i] < c[i + 1]).count();
    assert_eq!(interior, 0);
    // Dithered rate over its bottom is 2 - V, with V the Lorentzian pair overlap at lag 2Δ.
    let gamma = 0.05 * 6.283185307179586e9;
    for (&d, &r) in delay.iter().zip(c) {
        let x = 2.0 * gamma * d;
        let v = (1.0 + x) * (-x).exp();
        // The envelope cusps fall between nodes; the trapezoid error is of order (γ dt)².
        assert!((r / c[0] - (2.0 - v)).abs() < 1e-4, "{d}: {}", r / c[0]);
    }
}

#[test]
fn singles_are_anti_phased_at_one_round_trip() {
    let cfg = RunConfig::parse("fringe.delay = 1 tr\nfringe.points = 91\n").unwrap();
    let files = run::fringe(&cfg).unwrap();
    let (meta, names, cols) = table(&files[0].contents);
    let d = meta_value(&meta, "singles_1_phase") - meta_value(&meta, "singles_2_phase");
    let off = (d.rem_euclid(2.0 * PI) - PI).abs();
    assert!(off < 1e-6, "{d}");
    let s1 = column(&names, &cols, "singles_1");
    let s2 = column(&names, &cols, "singles_2");
    let total: Vec<f64> = s1.iter().zip(s2).map(|(a, b)| a + b).collect();
    let spread = total.iter().cloned().fold(f64::MIN, f64::max) - total.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-9 * total[0], "{spread}");
    assert!(meta_value(&meta, "singles_1_visibility") > 0.5);
}

#[test]
fn quarter_round_trip_fringe_sits_at_the_franson_limit() {
    // Between revivals V is ±1/(2N+1), so the fringe visibility is 1/(2 - V).
    for n in [9i32, 10] {
        let cfg = RunConfig::parse(&format!(
            "comb.n_side_modes = {n}\nfringe.delay = 0.25 tr\nfringe.points = 91\n"
        ))
        .unwrap();
        let files = run::fringe(&cfg).unwrap();
        let (meta, _, _) = table(&files[0].contents);
        let v = meta_value(&meta, "visibility_v");
        let expected_v = (-1f64).powi(n) / (2 * n + 1) as f64;
        assert!((v - expected_v).abs() < 1e-3, "N={n}: V={v}");
        let fringe = meta_value(&meta, "coincidence_visibility");
        assert!((fringe - 1.0 / (2.0 - v)).abs() < 1e-9, "N={n}: {fringe}");
        if n % 2 == 1 {
            assert!(fringe <= 0.5);
        }
    }
}

#[test]
fn monte_carlo_is_independent_of_pool_size() {
    let cfg = RunConfig::parse("mc.events = 140000\ndetector.dark_rate = 5e3\n").unwrap();
    let reference = run::mc(&cfg).unwrap();
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let again = pool.install(|| run::mc(&cfg)).unwrap();
        assert_eq!(again, reference, "{threads} threads");
    }
}
