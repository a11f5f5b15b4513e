use std::fs;
use std::path::Path;
use std::process::Command;

fn run(pipeline: &str, config: &str, dir: &Path, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("job.toml");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bryant4"))
        .arg(pipeline)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

#[test]
fn enneper_generate_writes_mesh_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run("generate", "g = \"z\"\nn = 33\n", dir.path(), &[]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(value(&text, "status"), Some("pass"));
    assert_eq!(value(&text, "flag.bryant_type"), Some("true"));
    let obj = fs::read_to_string(dir.path().join("out/surface.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 33 * 33);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 32 * 32);
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert_eq!(report, text);
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = "g = \"0.5*z + 0.2*z^2\"\na = 0.7\nb = -0.3\nc_re = 0.2\nc_im = 0.1\nn = 25\nhalf = 0.3\nmesh = \"both\"\n";
    let (ca, ta) = run("generate", cfg, a.path(), &[]);
    let (cb, tb) = run("generate", cfg, b.path(), &[]);
    assert_eq!((ca, cb), (0, 0), "{ta}");
    assert_eq!(ta, tb);
    for f in ["surface.obj", "surface.ply", "report.txt"] {
        assert_eq!(
            fs::read(a.path().join("out").join(f)).unwrap(),
            fs::read(b.path().join("out").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn c1_violation_exits_with_validation_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "g = \"2*z\"\neps = 1\nhalf = 0.6\nn = 49\ndisk_radius = 0.6\n";
    let (code, text) = run("generate", cfg, dir.path(), &[]);
    assert_eq!(code, 1);
    assert_eq!(value(&text, "status"), Some("error"));
    assert_eq!(value(&text, "error.kind"), Some("C1Violation"));
    assert_eq!(value(&text, "error.exit_code"), Some("1"));
}

#[test]
fn unknown_keys_and_pipeline_mismatch_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run("verify", "g = \"z\"\ncolour = 1\n", dir.path(), &[]);
    assert_eq!((code, value(&text, "error.kind")), (1, Some("ConfigError")));
    let (code, _) = run("verify", "g = \"z\"\npipeline = \"classify\"\n", dir.path(), &[]);
    assert_eq!(code, 1);
}

#[test]
fn residual_failure_exits_with_numeric_status() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run("verify", "g = \"z\"\n", dir.path(), &["--tol-scale", "1e-3"]);
    assert_eq!(code, 2, "{text}");
    assert_eq!(value(&text, "status"), Some("fail"));
    assert_eq!(value(&text, "error.kind"), Some("ResidualOutOfTolerance"));
}

#[test]
fn classify_normal_form_and_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run("classify", "g = \"z\"\na = 1.0\nb = 1.0\nn = 17\n", dir.path(), &[]);
    assert_eq!(code, 0);
    assert_eq!(value(&text, "ftc.verdict"), Some("AdmissibleFTC"));
    for (extra, reason) in [
        ("c_re = 0.1\n", "degree_c"),
        ("b = 0.9\n", "degree_s"),
        ("w = \"z\"\n", "omega_form"),
    ] {
        let base = "g = \"z\"\na = 1.0\nn = 17\n".to_string();
        let cfg = if extra.starts_with('b') { base + extra } else { base + "b = 1.0\n" + extra };
        let (_, text) = run("classify", &cfg, dir.path(), &[]);
        assert_eq!(value(&text, "ftc.verdict"), Some("Reject"), "{cfg}");
        assert_eq!(value(&text, "ftc.reason"), Some(reason), "{cfg}");
    }
    let (_, text) = run("classify", "g = \"z\"\neps = 1\nn = 17\ncompleteness_intent = true\n", dir.path(), &[]);
    assert_eq!(value(&text, "screen.verdict"), Some("Constructible"));
    assert!(value(&text, "warning.0").is_some());
}

#[test]
fn poincare_ball_mesh_lies_in_the_ball() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "g = \"z\"\na = 1.0\nb = 1.0\nn = 65\nprojection = \"poincare_ball\"\nr = 1.0\n";
    let (code, text) = run("generate", cfg, dir.path(), &[]);
    assert_eq!(code, 0, "{text}");
    let obj = fs::read_to_string(dir.path().join("out/surface.obj")).unwrap();
    for l in obj.lines().filter(|l| l.starts_with("v ")) {
        let v: Vec<f64> = l[2..].split(' ').map(|x| x.parse().unwrap()).collect();
        assert!(v.iter().map(|x| x * x).sum::<f64>() < 1.0);
    }
    let (code, text) = run("generate", "g = \"z\"\nn = 17\nprojection = \"poincare_ball\"\nr = 1.0\n", dir.path(), &[]);
    assert_eq!((code, value(&text, "error.kind")), (1, Some("ProjectionInvalid")));
}

#[test]
fn limits_and_deform_pipelines() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run("limits", "g = \"z\"\ncase = \"cmc_h3\"\nr = 2.0\nn = 33\n", dir.path(), &[]);
    assert_eq!(code, 0, "{text}");
    let (code, text) = run("limits", "g = \"z\"\neps = 1\ncase = \"maximal_l3\"\nn = 33\n", dir.path(), &[]);
    assert_eq!(code, 0, "{text}");
    let (code, text) = run("deform", "g = \"z\"\nhalf = 0.3\nn = 33\n", dir.path(), &[]);
    assert_eq!(code, 0, "{text}");
    let csv = fs::read_to_string(dir.path().join("out/deformation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn grid_override() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run("verify", "g = \"z\"\nhalf = 0.25\n", dir.path(), &["--grid-n", "33"]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(value(&text, "grid.nx"), Some("33"));
}
