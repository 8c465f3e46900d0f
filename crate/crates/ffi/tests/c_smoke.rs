//! Compiles `smoke.c` against the generated header and links it with the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn static_lib() -> Option<PathBuf> {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libconfhyp_ffi.a");
    lib.exists().then_some(lib)
}

fn compiler() -> Option<&'static str> {
    ["cc", "clang", "gcc"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/confhyp.h")).unwrap();
    for name in [
        "confhyp_last_error",
        "confhyp_scenario_parse",
        "confhyp_scenario_free",
        "confhyp_verify",
        "confhyp_probe",
        "confhyp_report_free",
        "confhyp_string_free",
        "CONFHYP_STATUS_COMPUTATION",
        "typedef struct ConfhypScenario ConfhypScenario",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = crate_dir();
    let include = dir.join("include");
    let out_dir = std::env::temp_dir().join(format!("confhyp-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&out_dir).unwrap();
    let check = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(dir.join("tests/smoke.c"))
        .status()
        .unwrap();
    assert!(check.success(), "header does not compile as C99");

    let Some(lib) = static_lib() else {
        eprintln!("static library not built; header checked only");
        return;
    };
    let exe = out_dir.join("smoke");
    let status = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(dir.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "linking against {} failed", lib.display());
    let run = Command::new(Path::new(&exe)).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
    let _ = std::fs::remove_dir_all(&out_dir);
}
