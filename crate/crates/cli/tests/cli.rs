use std::process::Command;

fn u2s() -> Command {
    Command::new(env!("CARGO_BIN_EXE_u2s"))
}

#[test]
fn gen_data_creates_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.u2s");
    let status = u2s()
        .args(["gen-data", "--out"])
        .arg(&out)
        .args(["--clips", "10", "--seed", "7"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.exists());
    assert_eq!(std::fs::metadata(&out).unwrap().len() as usize, u2s_data::file_size(10));
}

#[test]
fn missing_data_file_exits_one_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let output = u2s()
        .args(["train", "--data", "missing.u2s", "--out"])
        .arg(dir.path().join("m.ckpt"))
        .args(["--epochs", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("missing.u2s"), "stderr: {stderr}");
}

#[test]
fn unknown_subcommand_exits_two() {
    let output = u2s().arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn missing_required_flag_exits_two() {
    let output = u2s().args(["gen-data", "--clips", "5"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn synth_extract_roundtrip_via_files() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let wav = dir.path().join("vowel.wav");
    let back = dir.path().join("back.csv");

    let mut csv = String::new();
    for i in 0..30 {
        csv.push_str(&format!("{i},700,1200\n"));
    }
    std::fs::write(&traj, csv).unwrap();

    let status = u2s()
        .args(["synth", "--traj"])
        .arg(&traj)
        .arg("--out")
        .arg(&wav)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(wav.exists());

    let status = u2s()
        .args(["extract", "--wav"])
        .arg(&wav)
        .arg("--out")
        .arg(&back)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&back).unwrap();
    let traj = u2s_dsp::FormantTrajectory::from_csv(&text).unwrap();
    assert_eq!(traj.len(), 30);
    // medians near the synthesized vowel
    let median = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s[s.len() / 2]
    };
    assert!((median(&traj.f1) - 700.0).abs() < 40.0);
    assert!((median(&traj.f2) - 1200.0).abs() < 40.0);
}
