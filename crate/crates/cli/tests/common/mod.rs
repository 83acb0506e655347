#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn corpus(kind: &str) -> PathBuf {
    repo_root().join("corpus").join(kind)
}

/// Canonical box of `w` x `h` x `d` millimeters at the origin.
pub fn box_program(w: f64, h: f64, d: f64) -> String {
    format!(
        "opSketch(F0, entities = [\n    line(S0, start = (0.00, 0.00), end = ({w:.2}, 0.00)),\n    \
         line(S1, start = ({w:.2}, 0.00), end = ({w:.2}, {h:.2})),\n    \
         line(S2, start = ({w:.2}, {h:.2}), end = (0.00, {h:.2})),\n    \
         line(S3, start = (0.00, {h:.2}), end = (0.00, 0.00)),\n]);\n\
         opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = {d:.2});\n"
    )
}

pub fn cylinder_program(r: f64, h: f64) -> String {
    format!(
        "opSketch(F0, entities = [\n    circle(S0, center = (0.00, 0.00), radius = {r:.2}),\n]);\n\
         opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = {h:.2});\n"
    )
}

/// Distinct toy shape `i`; `bump` perturbs its dimensions.
pub fn toy_program(i: usize, bump: f64) -> String {
    let k = i as f64;
    if i % 2 == 0 {
        box_program(10.0 + 3.0 * k + bump, 8.0 + (i % 7) as f64 * 2.0, 2.0 + (i % 5) as f64 * 3.0 + bump)
    } else {
        cylinder_program(3.0 + 0.5 * k + bump, 4.0 + (i % 4) as f64 * 5.0)
    }
}

pub fn write_set(dir: &Path, n: usize, bump: f64) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        std::fs::write(dir.join(format!("shape_{i:02}.fs")), toy_program(i, bump)).unwrap();
    }
}
