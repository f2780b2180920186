use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edfading"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header line, CSV column line, then numeric rows.
fn table(o: &Output) -> (String, Vec<Vec<f64>>) {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# edfading "));
    let columns = lines.next().unwrap().to_owned();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (columns, rows)
}

const KMS: [&str; 8] = ["--channel", "kms", "--kappa", "2", "--mu", "3", "--m", "2"];
const FISHER: [&str; 6] = ["--channel", "fisher", "--m", "2", "--ms", "3"];

fn with<'a>(cmd: &'a str, base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(base);
    v.extend_from_slice(extra);
    v
}

#[test]
fn croc_has_one_row_per_false_alarm_point() {
    let (cols, rows) = table(&run(&with("croc", &KMS, &["--snr-db", "10"])));
    assert_eq!(cols, "pf,pmd");
    assert_eq!(rows.len(), 50);
    assert!((rows[0][0] - 1e-3).abs() < 1e-12);
    assert!((rows[49][0] - 0.999).abs() < 1e-9);
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0] && w[1][1] <= w[0][1]);
    }
    let (_, rows) = table(&run(&with(
        "croc",
        &FISHER,
        &["--snr-db", "0", "--pf-points", "7", "--u", "3"],
    )));
    assert_eq!(rows.len(), 7);
}

#[test]
fn sweeps_are_ordered_and_monotone() {
    let (cols, rows) = table(&run(&with("auc", &FISHER, &["--snr-db", "0:20:1"])));
    assert_eq!(cols, "snr_db,comp_auc");
    assert_eq!(rows.len(), 21);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], i as f64);
    }
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));

    let (cols, rows) = table(&run(&with(
        "effrate",
        &KMS,
        &["--snr-db", "-10:20:2", "--a", "3"],
    )));
    assert_eq!(cols, "snr_db,eff_rate_bits");
    assert_eq!(rows.len(), 16);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
}

#[test]
fn physical_delay_parameters_match_the_exponent() {
    // Θ T B / ln 2 = 1 with T B = ln 2.
    let ln2 = std::f64::consts::LN_2.to_string();
    let physical = table(&run(&with(
        "effrate",
        &KMS,
        &[
            "--snr-db",
            "5",
            "--theta",
            "1",
            "--block-time",
            &ln2,
            "--bandwidth",
            "1",
        ],
    )));
    let direct = table(&run(&with("effrate", &KMS, &["--snr-db", "5", "--a", "1"])));
    assert!((physical.1[0][1] - direct.1[0][1]).abs() < 1e-8);
    let mixed = run(&with(
        "effrate",
        &KMS,
        &["--snr-db", "5", "--a", "1", "--theta", "1"],
    ));
    assert_eq!(mixed.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = with("croc", &FISHER, &["--snr-db", "3", "--pf-points", "20"]);
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
    let args = with(
        "verify",
        &FISHER,
        &["--snr-db", "3", "--mc-samples", "20000", "--pf", "0.1"],
    );
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn density_table_integrates_to_its_distribution() {
    for base in [&KMS[..], &FISHER[..]] {
        let (cols, rows) = table(&run(&with("pdf", base, &["--snr-db", "5"])));
        assert_eq!(cols, "gamma,pdf,cdf");
        assert_eq!(rows.len(), 1001);
        let mut area = 0.0;
        for w in rows.windows(2) {
            area += 0.5 * (w[1][0] - w[0][0]) * (w[1][1] + w[0][1]);
            assert!(w[1][2] >= w[0][2]);
        }
        let last = rows.last().unwrap()[2];
        assert!(last >= 0.999);
        assert!((area - last).abs() < 1e-3, "{area} vs {last}");
    }
    // pdf unbounded at the origin: γ = 0 is left out.
    let (_, rows) = table(&run(&[
        "pdf",
        "--channel",
        "fisher",
        "--m",
        "0.8",
        "--ms",
        "3",
        "--snr-db",
        "0",
    ]));
    assert_eq!(rows.len(), 1000);
    assert!(rows[0][0] > 0.0);
}

#[test]
fn settings_from_json_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"channel": "kms", "kappa": 2, "mu": 3, "m": 2, "snr-db": "0:10:5", "u": 4}"#,
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = table(&run(&["auc", "--json", path]));
    let from_flags = table(&run(&with(
        "auc",
        &KMS,
        &["--snr-db", "0:10:5", "--u", "4"],
    )));
    assert_eq!(from_file.1, from_flags.1);
    let overridden = table(&run(&["auc", "--json", path, "--snr-db", "0:20:5"]));
    assert_eq!(overridden.1.len(), 5);

    let out = dir.path().join("auc.csv");
    let o = run(&["auc", "--json", path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 5);

    std::fs::write(&cfg, r#"{"chanel": "kms"}"#).unwrap();
    assert_eq!(run(&["auc", "--json", path]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["croc", "--channel", "rayleigh", "--snr-db", "0"],
        with("croc", &KMS, &[]),
        with(
            "croc",
            &[
                "--channel",
                "kms",
                "--kappa",
                "2",
                "--mu",
                "3",
                "--m",
                "2.5",
            ],
            &["--snr-db", "0"],
        ),
        with("croc", &KMS, &["--snr-db", "0:10:1"]),
        with("auc", &KMS, &["--snr-db", "10:0:1"]),
        with("auc", &FISHER, &["--snr-db", "0", "--u", "0"]),
        with("croc", &KMS, &["--snr-db", "0", "--pf-min", "0"]),
        with(
            "auc",
            &KMS,
            &["--snr-db", "0", "--json", "/nonexistent/run.json"],
        ),
        with(
            "auc",
            &KMS,
            &["--snr-db", "0", "--out", "/nonexistent/dir/x.csv"],
        ),
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn verify_passes_and_perturbation_fails() {
    let o = run(&[
        "verify",
        "--channel",
        "kms",
        "--kappa",
        "0",
        "--mu",
        "2",
        "--m",
        "1",
        "--snr-db",
        "3",
        "--mc-samples",
        "100000",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 5);
    assert!(text.lines().last().unwrap().contains("0 failed"));

    let o = run(&with(
        "verify",
        &FISHER,
        &[
            "--snr-db",
            "0",
            "--mc-samples",
            "100000",
            "--perturb",
            "1.01",
        ],
    ));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.ends_with("FAIL")));
}
