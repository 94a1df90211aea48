//! Compiles and runs a small C program against the generated header and
//! the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "interlab.h"

int main(int argc, char **argv) {
    InterlabDataset *ds = NULL;
    if (interlab_dataset_read_csv(argv[1], 0, &ds) != INTERLAB_STATUS_OK) return 1;
    InterlabAnova a;
    if (interlab_anova(ds, &a) != INTERLAB_STATUS_OK) return 2;
    InterlabInterval iv[3];
    if (interlab_approx_intervals(ds, 0.05, iv) != INTERLAB_STATUS_OK) return 3;
    InterlabBootstrap *b = NULL;
    if (interlab_bootstrap_run(ds, INTERLAB_SCHEME_BOOT_IJ_REPEATED, 100, 1, 0, &b)
        != INTERLAB_STATUS_OK) return 4;
    InterlabTriple est, se;
    if (interlab_bootstrap_estimates(b, INTERLAB_FLAVOR_ADJUSTED, &est, &se)
        != INTERLAB_STATUS_OK) return 5;
    InterlabDataset *bad = NULL;
    double one[2] = {1.0, 2.0};
    if (interlab_dataset_new(one, 1, 2, &bad) != INTERLAB_STATUS_DATA_ERROR) return 6;
    if (interlab_last_error() == NULL) return 7;
    printf("%.4f %.4f %.4f %.2f\n", a.estimates.repeatability * 1e7,
           a.standard_errors.reproducibility * 1e7, iv[1].upper * 1e7,
           est.reproducibility > 0 ? 1.0 : 0.0);
    interlab_bootstrap_free(b);
    interlab_dataset_free(ds);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<this test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libinterlab_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());

    let work = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("c_header");
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    let bin = work.join("main");
    std::fs::write(&src, PROGRAM).unwrap();

    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("a C compiler named `cc` is required");
    assert!(status.success());

    let out = Command::new(&bin)
        .arg(manifest.join("../core/data/manganese.csv"))
        .output()
        .unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), "10.7736 17.9138 128.2646 1.00");
}
