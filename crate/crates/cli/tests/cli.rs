use std::io::Write;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_msi-optomech"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "args {:?}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn csv_has_metadata_header_and_rows() {
    let text = run_ok(&["couplings", "--set", "sweep.count=7"]);
    let lines: Vec<&str> = text.lines().collect();
    let meta: Vec<&str> = lines.iter().copied().take_while(|l| l.starts_with('#')).collect();
    assert!(meta.iter().any(|l| l.contains("sweep.kind = couplings")));
    assert!(meta.iter().any(|l| l.contains("op.power")));
    let header = lines[meta.len()];
    assert_eq!(
        header,
        "position_m,g_omega_over_2pi,g_gamma_over_2pi,g_norm"
    );
    assert_eq!(lines.len(), meta.len() + 1 + 7);
    // 17 significant digits survive a parse round trip.
    for row in &lines[meta.len() + 1..] {
        for field in row.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{:.16e}", v), field);
        }
    }
}

#[test]
fn output_is_byte_stable() {
    let args = ["sweep-detuning", "--set", "sweep.count=31"];
    let a = run_ok(&args);
    let b = run_ok(&args);
    assert_eq!(a, b);
}

#[test]
fn json_output_parses_with_expected_shape() {
    let text = run_ok(&["sweep-srm", "--set", "sweep.count=11", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["sweep.kind"], "srm");
    assert_eq!(v["grid"]["name"], "srm_displacement_m");
    assert_eq!(v["grid"]["values"].as_array().unwrap().len(), 11);
    let columns = v["columns"].as_array().unwrap();
    assert!(columns.iter().any(|c| c["name"] == "p_trans_norm"));
    for c in columns {
        assert_eq!(c["values"].as_array().unwrap().len(), 11);
    }
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let stdout = run_ok(&[
        "couplings",
        "--set",
        "sweep.count=5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("g_omega_over_2pi"));
}

#[test]
fn config_file_and_overrides_layer() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# sample configuration").unwrap();
    writeln!(f, "op.power = 0.05").unwrap();
    writeln!(f, "sweep.count = 9").unwrap();
    drop(f);
    let text = run_ok(&[
        "sweep-membrane",
        "--config",
        path.to_str().unwrap(),
        "--set",
        "sweep.count=5",
    ]);
    assert!(text.contains("# op.power = 0.05"));
    // Inline override beats the file.
    assert!(text.contains("# sweep.count = 5"));
}

#[test]
fn bad_key_exits_with_config_code() {
    let out = bin()
        .args(["couplings", "--set", "no.such.key=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no.such.key"));
}

#[test]
fn missing_config_file_exits_with_config_code() {
    let out = bin()
        .args(["couplings", "--config", "/nonexistent/path.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameter_exits_with_config_code() {
    let out = bin()
        .args(["couplings", "--set", "mech.mass=-1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
