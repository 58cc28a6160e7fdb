use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pnse-ldg"))
}

#[test]
fn csv_output_is_byte_stable() {
    let run = || {
        let out = bin()
            .args(["--p", "2.5", "--case", "1", "--levels", "0..1"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let a = run();
    assert_eq!(a, run());
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,level,h,e_q,eoc_q,e_F,eoc_F,newton_iters,seconds");
    assert_eq!(lines.len(), 3);
    let eoc: f64 = lines[2].split(',').nth(4).unwrap().parse().unwrap();
    assert!(eoc > 0.8 && eoc < 1.2, "{eoc}");
}

#[test]
fn json_report_echoes_config() {
    let dir = std::env::temp_dir().join(format!("pnse-ldg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.json");
    let status = bin()
        .args(["--p", "2.25,3", "--case", "2", "--mode", "stokes", "--levels", "0,1", "--format", "json", "--timing"])
        .arg("--out")
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1]["p"], 3.0);
    assert_eq!(reports[0]["config"]["mode"], "stokes");
    assert_eq!(reports[0]["config"]["case2_exponent_base"], "beta");
    assert!(reports[0]["rows"][1]["seconds"].is_number());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn nonconvergence_exits_nonzero() {
    let out = bin()
        .args(["--p", "3", "--levels", "1", "--max-iterations", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}

#[test]
fn invalid_input_is_rejected() {
    for args in [
        &["--p", "2.0"][..],
        &["--p", "2.5", "--levels", "3..1"],
        &["--p", "2.5", "--case", "3"],
        &["--p", "2.5", "--levels", "2,1"],
    ] {
        let out = bin().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}
