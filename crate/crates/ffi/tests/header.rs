use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/calib.h");
    std::fs::read_to_string(path).expect("header is generated by the build script")
}

#[test]
fn header_declares_every_export() {
    let h = header();
    for name in [
        "calib_joint_new", "calib_joint_free", "calib_joint_levels", "calib_ece", "calib_ece_q",
        "calib_binned_ece", "calib_smce", "calib_emd", "calib_cdl", "calib_low_degree_ce",
        "calib_kernel_ce_laplace", "calib_dce_upper", "calib_measure", "calib_instance_new",
        "calib_instance_free", "calib_instance_project", "calib_dce", "calib_task_new",
        "calib_task_free", "calib_cfdl", "calib_last_error_message", "calib_version",
    ] {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    for item in ["typedef struct CalibJoint CalibJoint;", "CALIB_STATUS_ORACLE_CAP_EXCEEDED = 4"] {
        assert!(h.contains(item), "{item}");
    }
}

fn static_library() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    let uplifted = deps.parent()?.join("libcalib.a");
    if uplifted.exists() {
        return Some(uplifted);
    }
    std::fs::read_dir(&deps)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("libcalib-") && name.ends_with(".a")
        })
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include "calib.h"

int main(void) {
    double p[] = {0.4, 0.6}, y[] = {0.0, 1.0}, ece = 0.0, smce = 0.0;
    CalibJoint *j = NULL;
    if (calib_joint_new(p, y, NULL, 2, &j) != CALIB_STATUS_OK) return 1;
    if (calib_ece(j, &ece) != CALIB_STATUS_OK) return 2;
    if (calib_smce(j, &smce) != CALIB_STATUS_OK) return 3;
    calib_joint_free(j);
    printf("%.6f %.6f\n", ece, smce);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let lib = static_library().expect("libcalib.a built alongside the tests");
    let dir = std::env::temp_dir().join(format!("calib-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.400000 0.040000");
    std::fs::remove_dir_all(&dir).ok();
}
