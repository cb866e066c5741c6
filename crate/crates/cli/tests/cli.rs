use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"
[room]
dimensions = [6.0, 5.0, 2.5]
reflections = [0.9, 0.9, 0.9, 0.9, 0.7, 0.7]

[regions]
source_radius = 0.4
source_inner_radius = 0.3
receiver_radius = 0.4
offset = [1.0, 1.0, 0.5]

[signal]
frequencies = [500.0, 900.0]
"#;

fn rtf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtf")).args(args).output().unwrap()
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let p = dir.join("experiment.toml");
    std::fs::write(&p, format!("{CONFIG}{extra}")).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn measure_extract_reconstruct() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let out = tmp.path().join("out");
    let common = ["--config", s(&cfg), "--out", s(&out), "--threads", "2"];

    let r = rtf(&[&["measure"], &common[..]].concat());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let r = rtf(&[&["extract"], &common[..]].concat());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let r = rtf(&[
        &["reconstruct", "--frequency", "900", "--receiver", "0.1,-0.2,0.05", "--source", "1.05,1.05,0.5707", "--oracle"],
        &common[..],
    ]
    .concat());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(r.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "frequency,re,im,re_oracle,im_oracle,abs_deviation");
    let v: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(v[0], 900.0);
    let oracle = v[3].hypot(v[4]);
    assert!(v[5] < 0.05 * oracle, "{v:?}");

    let r = rtf(&[&["reconstruct", "--frequency", "900", "--map", "receiver", "--resolution", "11"], &common[..]].concat());
    assert!(r.status.success());
    let map = std::fs::read_to_string(out.join("field_map.csv")).unwrap();
    assert!(map.starts_with("x,y,z,re,im\n"));
    assert!(map.lines().count() > 50);
}

#[test]
fn sweep_writes_one_column_per_case() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let out = tmp.path().join("out");
    let r = rtf(&["sweep", "--config", s(&cfg), "--out", s(&out), "--probe-preset", "paper-fig5"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "frequency,E_R0.1,E_R0.2,E_R0.3,E_R0.4");
    for line in lines {
        let e: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(e[1..].iter().all(|&x| x < 0.05), "{line}");
    }
    assert!(out.join("coefficients.rtf").exists());
}

#[test]
fn measurements_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(rtf(&["measure", "--config", s(&cfg), "--out", s(&a), "--threads", "1"]).status.success());
    assert!(rtf(&["measure", "--config", s(&cfg), "--out", s(&b), "--threads", "3"]).status.success());
    let read = |d: &Path| std::fs::read(d.join("measurements.rtf")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn seed_override_invalidates_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert!(rtf(&["measure", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let r = rtf(&["extract", "--config", s(&cfg), "--out", s(&out), "--seed", "99"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("digests"));
}

#[test]
fn cond_and_geometry_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert!(rtf(&["cond", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let cond = std::fs::read_to_string(out.join("cond.csv")).unwrap();
    assert_eq!(cond.lines().next().unwrap(), "frequency,kappa_shell,kappa_sphere");
    assert_eq!(cond.lines().count(), 3);

    assert!(rtf(&["geometry-export", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let geo = std::fs::read_to_string(out.join("geometry.csv")).unwrap();
    assert_eq!(geo.lines().next().unwrap(), "kind,index,x,y,z");
    // 169 loudspeakers, 25 unit centers, 25·36 omnis.
    assert_eq!(geo.lines().count(), 1 + 169 + 25 + 900);
    assert!(geo.lines().nth(1).unwrap().starts_with("speaker,0,"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let bad = write_config(tmp.path(), "[arrays]\nspeakers = 50\n");
    let r = rtf(&["measure", "--config", s(&bad), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("L >= (N_s+1)^2"));

    // j_1 vanishes at kr = 4.4934094579090642 for a 0.1 m unit.
    let f = 4.493_409_457_909_064_2 * 343.0 / (2.0 * std::f64::consts::PI * 0.1);
    let zero = write_config(tmp.path(), "[arrays]\nmic_radius = 0.1\n");
    let text = std::fs::read_to_string(&zero).unwrap().replace("[500.0, 900.0]", &format!("[{f:?}]"));
    std::fs::write(&zero, text).unwrap();
    let r = rtf(&["measure", "--config", s(&zero), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));

    let cfg = write_config(tmp.path(), "");
    assert!(rtf(&["measure", "--config", s(&cfg), "--out", s(&out)]).status.success());
    assert!(rtf(&["extract", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let r = rtf(&["reconstruct", "--out", s(&out), "--frequency", "900", "--receiver", "0.5,0,0"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("R_r"));
    let r = rtf(&["reconstruct", "--out", s(&out), "--frequency", "950"]);
    assert_eq!(r.status.code(), Some(2));

    let r = rtf(&["measure"]);
    assert_eq!(r.status.code(), Some(2));
}
