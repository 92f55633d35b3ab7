use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn cic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cic")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn region(channel: &str, out: &Path, extra: &[&str]) -> Output {
    let ch = data(channel);
    let mut args = vec!["--command", "region", "--channel", ch.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    cic(&args)
}

#[test]
fn region_writes_csv_and_svg() {
    let out = scratch("region");
    let o = region("two_state.toml", &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let inner = std::fs::read_to_string(out.join("inner.csv")).unwrap();
    let outer = std::fs::read_to_string(out.join("outer.csv")).unwrap();
    assert!(inner.starts_with("a,b,c_star,bound\n"));
    assert!(inner.contains("# vertices\nR1,R2,bound\n"));
    assert!(inner.lines().skip(1).take(3).all(|l| l.ends_with(",inner")));
    assert!(outer.lines().last().unwrap().ends_with(",outer"));
    // Nine significant digits.
    assert!(inner.lines().nth(1).unwrap().starts_with("1.00000000,0,"));
    let svg = std::fs::read_to_string(out.join("region.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn region_is_byte_identical_across_runs() {
    let (a, b) = (scratch("repeat_a"), scratch("repeat_b"));
    assert!(region("two_state.toml", &a, &["--seed", "7"]).status.success());
    assert!(region("two_state.toml", &b, &["--seed", "7"]).status.success());
    for f in ["inner.csv", "outer.csv", "region.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zero_power_region_is_the_origin() {
    let out = scratch("zero");
    assert!(region("zero_power.toml", &out, &[]).status.success());
    for f in ["inner.csv", "outer.csv"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        let verts: Vec<&str> = text.split("R1,R2,bound\n").nth(1).unwrap().lines().collect();
        assert_eq!(verts.len(), 1, "{f}: {verts:?}");
        assert!(verts[0].starts_with("0,0,"));
    }
}

#[test]
fn gap_prints_six_decimals() {
    let ch = data("two_state.toml");
    let out = scratch("gap");
    let o = cic(&["--command", "gap", "--channel", ch.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let d1 = s.lines().find(|l| l.starts_with("delta1=")).unwrap();
    assert_eq!(d1.split('.').nth(1).unwrap().len(), 6, "{d1}");
    assert!(s.contains("certified=true"), "{s}");
    assert_eq!(std::fs::read_to_string(out.join("gap.txt")).unwrap(), s);
}

#[test]
fn deterministic_channel_has_zero_gap() {
    let ch = data("modulo_det.toml");
    let o = cic(&["--command", "gap", "--channel", ch.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("delta1=0.000000\ndelta2=0.000000"), "{s}");
}

#[test]
fn parse_error_reports_line_and_column() {
    let ch = data("bad_syntax.toml");
    let o = cic(&["--command", "region", "--channel", ch.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 6, column 10"), "{}", stderr(&o));
}

#[test]
fn too_few_directions_rejected() {
    let ch = data("two_state.toml");
    let o = cic(&["--command", "region", "--channel", ch.to_str().unwrap(), "--directions", "2"]);
    assert!(!o.status.success());
}

#[test]
fn dual_cert_prints_certificate() {
    let ch = data("two_state.toml");
    let o = cic(&["--command", "dual-cert", "--channel", ch.to_str().unwrap(), "--direction", "1,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("lambda ") && s.contains("c_in = ") && s.contains("c_out = "), "{s}");
    let o = cic(&["--command", "dual-cert", "--channel", ch.to_str().unwrap(), "--direction", "-1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("direction (-1, 2)"), "{}", stderr(&o));
}

#[test]
fn rebalance_demo_shows_steps() {
    let o = cic(&["--command", "rebalance-demo", "--vector", "0.5,-0.25,1,0.25,0.5,-0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("R1.2 += R1.1 (-0.25), R1.1 = 0"), "{s}");
    assert!(s.contains("output 0.500000000,0,0.750000000,0.250000000,0,0"), "{s}");
}

#[test]
fn rebalance_demo_rejects_infeasible_vector() {
    let ch = data("two_state.toml");
    let o = cic(&["--command", "rebalance-demo", "--channel", ch.to_str().unwrap(), "--vector", "50,0,0,0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("violated"), "{}", stderr(&o));
}

#[test]
fn verify_passes_on_default_seed() {
    let o = cic(&["--command", "verify"]);
    let s = stdout(&o);
    assert!(o.status.success(), "{s}{}", stderr(&o));
    assert_eq!(s.lines().filter(|l| l.starts_with("PASS")).count(), 9, "{s}");
}
