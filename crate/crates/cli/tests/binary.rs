use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use globalprop_cli::config::RunConfig;

fn globalprop(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_globalprop"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("GLOBALPROP_THREADS", n),
        None => cmd.env_remove("GLOBALPROP_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Rows of a CSV after its header, split into fields.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn propagate_example_one_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let run = |out: &Path, threads| {
        let o = globalprop(
            &["propagate", "--example", "1", "--emit-dir", out.to_str().unwrap()],
            Some(threads),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        o
    };
    let first = run(&a, "1");
    run(&b, "3");
    assert!(stdout(&first).contains("stop: tolerance"));

    let convergence = rows(&a.join("fig7_convergence.csv"));
    let last_f: f64 = convergence.last().unwrap()[1].parse().unwrap();
    assert!(last_f <= 1e-14, "final F = {last_f}");
    assert!(convergence.len() <= 25);

    let amplitudes = rows(&a.join("final_amplitudes.csv"));
    assert_eq!(amplitudes.len(), 60);
    let survival: f64 = amplitudes[0][5].parse().unwrap();
    assert!((survival - 0.2129).abs() <= 1e-3, "survival {survival}");
    assert_eq!(amplitudes[36][1..3], ["7".to_string(), "2".to_string()]);

    let mut csvs = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_name().unwrap();
            assert_eq!(
                fs::read(&path).unwrap(),
                fs::read(b.join(name)).unwrap(),
                "{name:?} differs between runs"
            );
            assert!(
                header(&path).contains("[a.u.]") || header(&path).contains("[1]"),
                "{name:?} header lacks units"
            );
            csvs += 1;
        }
    }
    assert_eq!(csvs, 9);
    assert!(a.join("fig10_defects_v37.csv").exists() && a.join("fig11_channel_v37.csv").exists());

    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    let config_text = fs::read_to_string(a.join("config.txt")).unwrap();
    assert!(manifest.contains(&format!(
        "config_sha256 = {}",
        globalprop_cli::output::sha256_hex(&config_text)
    )));
    assert!(manifest.contains("threads = 1"));
    assert!(manifest.contains("seconds.solve = "));
    assert_eq!(RunConfig::parse(&config_text).unwrap().to_text(), config_text);
}

#[test]
fn integrate_reports_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("i.csv");
    let o = globalprop(
        &[
            "integrate",
            "--test-function",
            "--n-samples",
            "1024",
            "--oracle",
            "simpson",
            "--emit",
            csv.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let cf: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("CF_1024 = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(cf <= 1e-12, "CF_1024 = {cf}");
    let diff: f64 = out
        .lines()
        .find_map(|l| l.split(" = ").nth(1).filter(|_| l.starts_with("max |I_FFT")))
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff <= 1e-11, "oracle gap {diff}");
    assert_eq!(header(&csv), "t[a.u.],re_I[a.u.],im_I[a.u.]");
    assert_eq!(rows(&csv).len(), 1024);
    assert!(dir.path().join("i.csv.manifest.txt").exists());
}

#[test]
fn eigen_and_reference_emit() {
    let dir = tempfile::tempdir().unwrap();
    let energies = dir.path().join("e.csv");
    let o = globalprop(
        &[
            "eigen",
            "--example",
            "1",
            "--surface",
            "1",
            "--n-keep",
            "5",
            "--emit",
            energies.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let e: Vec<f64> = rows(&energies).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(e.len(), 5);
    assert!((e[1] - e[0] - 1.451).abs() <= 2e-3);

    let amps = dir.path().join("r.csv");
    let o = globalprop(
        &[
            "reference",
            "--example",
            "1",
            "--method",
            "split",
            "--steps",
            "65536",
            "--emit",
            amps.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let survival: f64 = rows(&amps)[0][5].parse().unwrap();
    assert!((survival - 0.2129).abs() <= 1e-3);
}

#[test]
fn compare_emits_sweep_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = globalprop(
        &[
            "compare",
            "--example",
            "1",
            "--split-steps",
            "8192,32768",
            "--sil-steps",
            "4096",
            "--grid-sizes",
            "8192",
            "--thresholds",
            "1e-6",
            "--emit-dir",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = rows(&dir.path().join("fig13_cross_convergence.csv"));
    let methods: Vec<&str> = sweep.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(methods, ["global", "split", "split", "sil"]);
    let f: Vec<f64> = sweep.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(f[0] <= 1e-12 && f[2] < f[1]);
    let table = rows(&dir.path().join("table2_timings.csv"));
    assert_eq!(table.len(), 1);
    assert_eq!(table[0].len(), 9);
}

#[test]
fn exit_codes() {
    let o = globalprop(&["bogus"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));

    let o = globalprop(&["integrate", "--test-function"], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("GLOBALPROP_THREADS"));

    let dir = tempfile::tempdir().unwrap();
    let text = RunConfig::example(1).unwrap().to_text();
    let cfg = dir.path().join("missing.cfg");
    fs::write(&cfg, text.replacen("mass = 10\n", "", 1)).unwrap();
    let o = globalprop(&["propagate", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing key 'mass'"), "{}", stderr(&o));

    let cfg = dir.path().join("strong.cfg");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        text.replace("amplitude = 0.05", "amplitude = 0.5")
            .replace("amplitude = 0.08", "amplitude = 0.8"),
    )
    .unwrap();
    let o = globalprop(
        &[
            "propagate",
            "--config",
            cfg.to_str().unwrap(),
            "--emit-dir",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("waveop: divergence"));

    let o = globalprop(&["propagate"], None);
    assert_eq!(o.status.code(), Some(2));
}
