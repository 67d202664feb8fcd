use std::env;
use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Builds the static library into a private target directory; the outer
/// cargo still holds the lock on the shared one.
fn build_static_lib() -> PathBuf {
    let target = Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi-build");
    let cargo = env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let status = Command::new(cargo)
        .args(["build", "--quiet", "-p", "dfdrift-ffi", "--lib", "--target-dir"])
        .arg(&target)
        .current_dir(crate_dir())
        .status()
        .expect("cargo runs");
    assert!(status.success());
    target.join("debug").join("libdfdrift_ffi.a")
}

#[test]
fn c_program_links_and_detects() {
    let lib = build_static_lib();
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("dfdrift_c_client");
    let cc = env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-o"])
        .arg(&exe)
        .arg(crate_dir().join("tests/c/client.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .expect("C compiler runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "exit {:?}\n{stdout}\n{}", run.status, String::from_utf8_lossy(&run.stderr));
    assert!(stdout.contains("events 1200 traces 300"), "{stdout}");
    assert!(stdout.contains("points 1"), "{stdout}");
    let line = stdout.lines().find(|l| l.starts_with("point ")).unwrap();
    let trace: usize = line
        .split_whitespace()
        .find_map(|w| w.strip_prefix("trace="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((145..=155).contains(&trace), "{line}");
    assert!(stdout.contains("at least 2501"), "{stdout}");
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/dfdrift.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct DfdLog DfdLog;"));
    assert!(header.contains("typedef struct DfdReport DfdReport;"));
}
