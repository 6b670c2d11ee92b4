use std::path::Path;
use std::process::{Command, Output};

fn mrfisi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrfisi")).args(args).output().expect("run mrfisi")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: &[&str] = &["--size", "12", "--trials", "2", "--outer", "2", "--t-max", "40", "--no-timing"];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(args: Vec<String>) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    mrfisi(&refs)
}

#[test]
fn sweep_prints_header_and_one_row_per_iteration() {
    let o = run(with(&["sweep"], &[SMALL, &["--snr", "4,8"]].concat()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "snr_db,mode,beta_true,beta_assumed,p0,iter,bits,errors,ber,seconds");
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("4,concatenated,-3,-3,0.5,1,288,"));
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",0.000")));
}

#[test]
fn out_file_is_appended_with_a_single_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let out_s = out.to_str().unwrap();
    for mode in ["isi-only", "gg-alone"] {
        let o = run(with(&["sweep", "--mode", mode, "--snr", "6", "--out", out_s], SMALL));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches("snr_db").count(), 1);
    assert_eq!(text.lines().count(), 1 + 2 + 1);
    assert!(text.contains(",isi-only,") && text.contains(",gg-alone,"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nmode = isi-only\nsnr = 2:4:2\nbeta = -1.5\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let o = run(with(&["sweep", "--config", cfg_s, "--beta-assumed", "-2"], SMALL));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 2);
    assert!(rows[0].starts_with("2,isi-only,-1.5,-2,0.5,1,"), "{}", rows[0]);
    assert!(rows[3].starts_with("4,isi-only,-1.5,-2,0.5,2,"), "{}", rows[3]);
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let a = run(with(&["sweep", "--snr", "5", "--workers", "1"], SMALL));
    let b = run(with(&["sweep", "--snr", "5", "--workers", "3"], SMALL));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bsc_subcommand_reports_its_mode() {
    let o = run(with(&["bsc", "--snr", "10", "--bsc-p", "0.02"], SMALL));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("10,mrf-bsc-awgn,"));
}

#[test]
fn generate_then_detect_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("src.pbm");
    let est = dir.path().join("est.pbm");
    let o = mrfisi(&["generate", "--size", "16", "--seed", "4", "--out", img.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("128 ones"));
    let bytes = std::fs::read(&img).unwrap();
    assert!(bytes.starts_with(b"P4"));

    let o = mrfisi(&[
        "detect",
        "--input",
        img.to_str().unwrap(),
        "--snr",
        "40",
        "--outer",
        "2",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("snr_db,iter,errors,ber"));
    assert_eq!(text.lines().count(), 3);
    let errors: usize = text.lines().last().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!(errors <= 5, "{text}");
    let est_bytes = std::fs::read(&est).unwrap();
    assert_eq!(est_bytes.len(), bytes.len());
    assert_eq!(est_bytes[..9], bytes[..9]);
}

#[test]
fn plain_generation_writes_p1() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("src.pbm");
    let o = mrfisi(&["generate", "--size", "8", "--plain", "--out", img.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&img).unwrap().starts_with("P1"));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["sweep", "--mode", "bogus"][..],
        &["sweep", "--snr", "1:0:1"],
        &["sweep", "--trials", "0"],
        &["sweep", "--unknown-flag"],
        &["frobnicate"],
        &["generate", "--size", "0", "--out", "x.pbm"],
    ] {
        let o = mrfisi(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pbm");
    std::fs::write(&bad, "P1\n2 2\n0 1 2 0\n").unwrap();
    let missing = dir.path().join("missing.cfg");
    let bad_cfg = dir.path().join("bad.cfg");
    std::fs::write(&bad_cfg, "snr = 1\nthis line has no equals sign\n").unwrap();
    for args in [
        vec!["detect", "--input", bad.to_str().unwrap()],
        vec!["detect", "--input", dir.path().join("nope.pbm").to_str().unwrap()],
        vec!["sweep", "--config", missing.to_str().unwrap()],
        vec!["sweep", "--config", bad_cfg.to_str().unwrap()],
    ] {
        let o = mrfisi(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn help_exits_cleanly() {
    let o = mrfisi(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sweep"));
    assert!(Path::new(env!("CARGO_BIN_EXE_mrfisi")).exists());
}
