use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use desing_cli::parse_scene;

fn scene(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/scenes").join(name)
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn desing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_desing")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = desing(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(name: &str) -> String {
    scene(name).to_str().unwrap().to_string()
}

#[test]
fn trace_matches_golden_files() {
    let pp = path("pp.scene");
    assert_eq!(stdout(&["trace", &pp]), golden("pp.md"));
    assert_eq!(stdout(&["trace", &pp, "--format", "tsv"]), golden("pp.tsv"));
    let x3 = path("x3y2.scene");
    assert_eq!(
        stdout(&["trace", &x3, "--driver", "clean", "--at", "(2,0,1,0,inf)"]),
        golden("x3y2_clean.md")
    );
    assert_eq!(stdout(&["resolve", &x3]), golden("x3y2_resolve.txt"));
}

#[test]
fn tsv_has_fixed_columns() {
    let out = stdout(&["trace", &path("pp.scene"), "--format", "tsv"]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "year\tchart\tcodim i\tmarked ideal\tcompanion ideal\tmaximal contact\tboundary"
    );
    assert!(lines.all(|l| l.split('\t').count() == 7));
}

#[test]
fn output_is_reproducible() {
    for args in [
        vec!["resolve", "x3y2.scene", "--driver", "min3"],
        vec!["trace", "pp.scene"],
        vec!["inv", "whitney.scene", "--check", "3", "--seed", "7"],
    ] {
        let mut args: Vec<String> = args.into_iter().map(String::from).collect();
        args[1] = path(&args[1]);
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = stdout(&a);
        assert_eq!(first, stdout(&a));
        if a[0] != "inv" {
            let mut jobs = a.clone();
            jobs.extend(["--jobs", "4"]);
            assert_eq!(first, stdout(&jobs), "{a:?} with --jobs 4");
        }
    }
}

#[test]
fn cleaning_and_classification() {
    let out = stdout(&["resolve", &path("x5y2.scene"), "--driver", "clean"]);
    assert!(out.ends_with("classification: pp\n"), "{out}");
    let out = stdout(&["clean", &path("x5y2.scene")]);
    assert!(out.starts_with("2 blow-ups\n"), "{out}");
    let out = stdout(&["classify", &path("dpp.scene")]);
    assert_eq!(out.lines().next(), Some("dpp"));
    assert!(out.ends_with("inv(0) = (2,0,3/2,0,2,0,inf)\n"));
}

#[test]
fn blowup_prints_every_chart() {
    let out = stdout(&["blowup", &path("exc.scene"), "--center", "z,y,u"]);
    assert!(out.starts_with("center (z=y=u=0)\n"));
    assert!(out.contains("u-chart (u,x,u*y,u*z)\nstrict z^2 + u^2*y^3 + 2*u*x^2*y^2 + x^4*y\n"), "{out}");
    assert!(out.contains("\ny-chart "));
    assert!(out.contains("\nz-chart "));
}

#[test]
fn points_are_translated_to_the_origin() {
    let out = stdout(&["inv", &path("whitney.scene")]);
    let at: Vec<&str> = out.split("\nat ").skip(1).collect();
    assert_eq!(at.len(), 3);
    assert!(at[0].starts_with("(1,0,0)\ninv(0) = (2,0,1,0,inf)\n"));
    assert!(at[2].starts_with("(0,1,0)\ninv(0) = (1,0,inf)\n"));
}

#[test]
fn reads_the_scene_from_stdin() {
    let src = std::fs::read(scene("pp.scene")).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_desing"))
        .args(["inv", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&src).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(out.stdout, stdout(&["inv", &path("pp.scene")]).into_bytes());
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("desing-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let bad_syntax = write("syntax.scene", "desing-scene 1\nvars x y z\nyear 0\ngen z^2 + x*y^^2\n");
    let bad_header = write("header.scene", "scene 1\n");
    let divisor_at_year = write(
        "future.scene",
        "desing-scene 1\nvars x y z\nyear 0\ngen z^2 + x*y^2\ndivisor 0 3 x\n",
    );
    let missing = dir.join("missing.scene").to_str().unwrap().to_string();
    let pp = path("pp.scene");

    let code = |args: &[&str]| desing(args).status.code();
    assert_eq!(code(&["inv", &pp]), Some(0));
    assert_eq!(code(&["inv", &bad_syntax]), Some(2));
    assert_eq!(code(&["inv", &bad_header]), Some(2));
    assert_eq!(code(&["inv", &divisor_at_year]), Some(3));
    assert_eq!(code(&["inv", &missing]), Some(3));
    assert_eq!(code(&["resolve", &pp, "--budget", "1"]), Some(4));
    assert_eq!(code(&["resolve", &pp, "--driver", "paper", "--until", "(2,0"]), Some(2));

    let err = desing(&["inv", &bad_syntax]);
    assert!(String::from_utf8_lossy(&err.stderr).starts_with("desing: "));
    assert!(err.stdout.is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scene_files_round_trip() {
    for name in ["pp.scene", "dpp.scene", "x5y2.scene", "x3y2.scene", "exc.scene", "whitney.scene"] {
        let s = parse_scene(&std::fs::read_to_string(scene(name)).unwrap()).unwrap();
        let again = parse_scene(&s.to_string()).unwrap();
        assert_eq!(again, s, "{name}");
        assert_eq!(again.to_string(), s.to_string());
    }
}

#[test]
fn fuzz_seeds_round_trip() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let seeds = |target: &str| -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(corpus.join(target))
            .unwrap()
            .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
            .collect();
        v.sort();
        v
    };
    let vars: Vec<String> = ["w", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
    for text in seeds("parse_poly") {
        let p = desing_core::parse_poly(&text, &vars).unwrap();
        assert_eq!(desing_core::parse_poly(&p.display(&vars).to_string(), &vars).unwrap(), p, "{text}");
    }
    for text in seeds("parse_inv") {
        match text.parse::<desing_core::InvariantValue>() {
            Ok(v) => assert_eq!(v.to_string().parse::<desing_core::InvariantValue>().unwrap(), v),
            Err(_) => assert_eq!(text, "()"),
        }
    }
    for text in seeds("parse_scene") {
        let s = parse_scene(&text).unwrap();
        assert_eq!(parse_scene(&s.to_string()).unwrap(), s);
    }
}
