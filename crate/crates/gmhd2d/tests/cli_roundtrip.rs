//! End-to-end persistence contracts: checkpoint bitwise roundtrip, restart
//! continuation, sweep determinism, and CLI exit codes.

use gmhd2d::checkpoint;
use gmhd2d::config;
use gmhd2d::runner::execute_run;
use gmhd2d::sweep::{cells, execute_sweep};
use std::path::PathBuf;
use std::process::Command;

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gmhd2d-it-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn base_config(dir: &std::path::Path, extra: &str) -> String {
    format!(
        "[grid]\nn = 64\n\n[physics]\nnu = 0.0\nalpha = 0.0\nkappa = 1.0\nbeta = 1.25\n\n\
         [ic]\nkind = orszag_tang\nb_scale = 1.0\n\n\
         [stepper]\nscheme = if_rk4\ncfl = 0.5\ndt_max = 0.02\nt_end = 1.0\n\n\
         [diagnostics]\ncadence = 0.1\n\n\
         [output]\ndir = {}\ncheckpoint_interval = 0.5\n{extra}",
        dir.display()
    )
}

#[test]
fn restart_continuation_reproduces_series_bytes() {
    let dir_a = workdir("full");
    let cfg_a = config::parse_str(&base_config(&dir_a, "")).unwrap();
    let out_a = execute_run(&cfg_a).unwrap();
    assert!(!out_a.blew_up);
    let series_a = std::fs::read_to_string(&out_a.series_path).unwrap();

    // Restart from the t = 0.5 checkpoint.
    let chk = dir_a.join("chk_00000001.bin");
    assert!(chk.exists(), "expected mid-run checkpoint at {chk:?}");
    let dir_b = workdir("restart");
    let extra = format!("\n[ic]\nkind = from_file\npath = {}\n", chk.display());
    let cfg_b = config::parse_str(&base_config(&dir_b, &extra)).unwrap();
    let out_b = execute_run(&cfg_b).unwrap();
    let series_b = std::fs::read_to_string(&out_b.series_path).unwrap();

    // The restarted CSV must equal the tail of the uninterrupted one,
    // byte for byte, starting at the restart row.
    let lines_a: Vec<&str> = series_a.lines().collect();
    let lines_b: Vec<&str> = series_b.lines().collect();
    assert_eq!(lines_a[0], lines_b[0], "headers differ");
    let row_at_restart = lines_a
        .iter()
        .position(|l| l.starts_with("0.5,"))
        .expect("uninterrupted series has a row at t = 0.5");
    let tail_a = &lines_a[row_at_restart..];
    assert_eq!(tail_a.len(), lines_b.len() - 1, "row counts differ");
    for (i, (a, b)) in tail_a.iter().zip(&lines_b[1..]).enumerate() {
        assert_eq!(a, b, "row {i} after restart differs");
    }
}

#[test]
fn final_checkpoint_roundtrips_bitwise() {
    let dir = workdir("chk-bitwise");
    let mut cfg = config::parse_str(&base_config(&dir, "")).unwrap();
    cfg.stepper.t_end = 0.3;
    cfg.output.checkpoint_interval = 0.1;
    let _ = execute_run(&cfg).unwrap();
    let chk = dir.join("chk_final.bin");
    let (state, header) = checkpoint::read_checkpoint(&chk).unwrap();
    // Re-writing the state must reproduce the file exactly.
    let copy = dir.join("chk_rewrite.bin");
    checkpoint::write_checkpoint(&copy, &state, &header.params, &header.accumulators).unwrap();
    let a = std::fs::read(&chk).unwrap();
    let b = std::fs::read(&copy).unwrap();
    assert_eq!(a, b, "checkpoint re-serialization changed bytes");
}

#[test]
fn sweep_is_deterministic_across_reruns() {
    let dir1 = workdir("sweep1");
    let dir2 = workdir("sweep2");
    let sweep_section = "\n[sweep]\nbeta = 0.8,1.2\nn = 32\nworkers = 2\n";
    let mk = |dir: &std::path::Path| {
        let mut text = base_config(dir, sweep_section);
        text = text.replace("t_end = 1.0", "t_end = 0.3");
        text = text.replace("checkpoint_interval = 0.5", "checkpoint_interval = 0");
        config::parse_str(&text).unwrap()
    };
    let cfg1 = mk(&dir1);
    let cfg2 = mk(&dir2);
    assert_eq!(cells(&cfg1).len(), 2);
    let out1 = execute_sweep(&cfg1, 2).unwrap();
    let out2 = execute_sweep(&cfg2, 2).unwrap();
    let s1 = std::fs::read(&out1.summary_path).unwrap();
    let s2 = std::fs::read(&out2.summary_path).unwrap();
    assert_eq!(s1, s2, "summary CSVs differ between identical sweeps");
    // Cell series are byte-identical too.
    for cell in cells(&cfg1) {
        let a = std::fs::read(dir1.join(&cell.dir_name).join("series.csv")).unwrap();
        let b = std::fs::read(dir2.join(&cell.dir_name).join("series.csv")).unwrap();
        assert_eq!(a, b, "cell {} series differ", cell.dir_name);
    }
    // Summary carries one line per cell plus the header.
    let text = String::from_utf8(s1).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().contains("ok"));
}

#[test]
fn one_by_one_sweep_equals_direct_run() {
    let dir_sweep = workdir("sweep-1x1");
    let dir_run = workdir("run-1x1");
    let mk = |dir: &std::path::Path, sweep: bool| {
        let extra = if sweep {
            "\n[sweep]\nbeta = 1.25\nn = 64\n"
        } else {
            ""
        };
        let mut text = base_config(dir, extra);
        text = text.replace("t_end = 1.0", "t_end = 0.3");
        text = text.replace("checkpoint_interval = 0.5", "checkpoint_interval = 0");
        config::parse_str(&text).unwrap()
    };
    let out_sweep = execute_sweep(&mk(&dir_sweep, true), 1).unwrap();
    assert_eq!(out_sweep.results.len(), 1);
    let _ = execute_run(&mk(&dir_run, false)).unwrap();
    let a = std::fs::read(dir_sweep.join("cell_a0_b1.25_n64").join("series.csv")).unwrap();
    let b = std::fs::read(dir_run.join("series.csv")).unwrap();
    assert_eq!(a, b, "1x1 sweep cell differs from a direct run");
}

#[test]
fn zero_t_end_emits_single_row_and_exit_zero() {
    let dir = workdir("zero-t");
    let mut text = base_config(&dir, "");
    text = text.replace("t_end = 1.0", "t_end = 0.0");
    text = text.replace("checkpoint_interval = 0.5", "checkpoint_interval = 0");
    let cfg_path = dir.join("cfg.ini");
    std::fs::write(&cfg_path, &text).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_gmhd2d"))
        .args(["run", "--config", cfg_path.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let series = std::fs::read_to_string(dir.join("series.csv")).unwrap();
    assert_eq!(series.lines().count(), 2, "header plus exactly one row");
}

#[test]
fn corrupted_checkpoint_restart_exits_one_naming_field() {
    let dir = workdir("corrupt");
    let mut cfg = config::parse_str(&base_config(&dir, "")).unwrap();
    cfg.stepper.t_end = 0.2;
    cfg.output.checkpoint_interval = 0.1;
    let _ = execute_run(&cfg).unwrap();
    let chk = dir.join("chk_final.bin");
    let mut bytes = std::fs::read(&chk).unwrap();
    bytes[15] = 0xff; // clobber box_length
    bytes[16] = 0xff;
    bytes[22] = 0xff;
    std::fs::write(&chk, &bytes).unwrap();

    let mut text = base_config(
        &dir,
        &format!("\n[ic]\nkind = from_file\npath = {}\n", chk.display()),
    );
    text = text.replace("checkpoint_interval = 0.5", "checkpoint_interval = 0");
    let cfg_path = dir.join("cfg.ini");
    std::fs::write(&cfg_path, &text).unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_gmhd2d"))
        .args(["run", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("box_length"),
        "stderr must name the field: {stderr}"
    );
}

#[test]
fn baseline_run_n128_reports_bounded() {
    // End-to-end regression baseline: β = 1.25 Orszag–Tang at n = 128,
    // t_end = 2 completes with a bounded verdict in the report.
    let dir = workdir("baseline-n128");
    let text = format!(
        "[grid]\nn = 128\n[physics]\nbeta = 1.25\n[ic]\nkind = orszag_tang\n\
         [stepper]\ncfl = 0.5\ndt_max = 0.01\nt_end = 2.0\n\
         [diagnostics]\ncadence = 0.05\n[output]\ndir = {}\n",
        dir.display()
    );
    let cfg = config::parse_str(&text).unwrap();
    let outcome = execute_run(&cfg).unwrap();
    assert!(!outcome.blew_up);
    let report = std::fs::read_to_string(&outcome.report_path).unwrap();
    assert!(report.contains("verdict bounded"), "report:\n{report}");
}

#[test]
fn kernel_without_beta_is_usage_error() {
    let output = Command::new(env!("CARGO_BIN_EXE_gmhd2d"))
        .arg("kernel")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = workdir("badkey");
    let cfg_path = dir.join("cfg.ini");
    std::fs::write(&cfg_path, "[grid]\nn = 64\nwhatever = 3\n").unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_gmhd2d"))
        .args(["run", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("whatever"),
        "stderr must name the key: {stderr}"
    );
}

#[test]
fn inspect_prints_header() {
    let dir = workdir("inspect");
    let mut cfg = config::parse_str(&base_config(&dir, "")).unwrap();
    cfg.stepper.t_end = 0.1;
    cfg.output.checkpoint_interval = 0.1;
    let _ = execute_run(&cfg).unwrap();
    let chk = dir.join("chk_final.bin");
    let output = Command::new(env!("CARGO_BIN_EXE_gmhd2d"))
        .args(["inspect", chk.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("beta             1.25"), "{stdout}");
    assert!(stdout.contains("n                64"), "{stdout}");
}

#[test]
fn kernel_tables_regenerate_identically() {
    let dir1 = workdir("kern1");
    let dir2 = workdir("kern2");
    for dir in [&dir1, &dir2] {
        let status = Command::new(env!("CARGO_BIN_EXE_gmhd2d"))
            .args([
                "kernel",
                "--beta",
                "1.5",
                "--l-max",
                "0",
                "--eta",
                "0",
                "--samples",
                "60",
                "--r-max",
                "170",
                "--out",
                dir.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(dir1.join("kernel_beta_1.5.csv")).unwrap();
    let b = std::fs::read(dir2.join("kernel_beta_1.5.csv")).unwrap();
    assert_eq!(a, b, "kernel tables differ between identical invocations");
}
