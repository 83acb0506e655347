use std::f64::consts::PI;
use std::path::Path;

use fscad_core::geom::{bbox_prompt, bounding_box, check_mesh, interpret_meshes, mesh_volume, BBox};
use fscad_core::{parse, Dialect, InterpretConfig};
use proptest::prelude::*;

fn mesh_of(src: &str) -> fscad_core::Mesh {
    interpret_meshes(&parse(src, Dialect::Canonical).unwrap(), &InterpretConfig::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn box_src(w: f64, h: f64, d: f64) -> String {
    format!(
        "opSketch(F0, entities = [\n    line(S0, start = (0.00, 0.00), end = ({w:.2}, 0.00)),\n    \
         line(S1, start = ({w:.2}, 0.00), end = ({w:.2}, {h:.2})),\n    \
         line(S2, start = ({w:.2}, {h:.2}), end = (0.00, {h:.2})),\n    \
         line(S3, start = (0.00, {h:.2}), end = (0.00, 0.00)),\n]);\n\
         opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = {d:.2});\n"
    )
}

fn cylinder_src(r: f64, h: f64) -> String {
    format!(
        "opSketch(F0, entities = [\n    circle(S0, center = (0.00, 0.00), radius = {r:.2}),\n]);\n\
         opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = {h:.2});\n"
    )
}

fn ngon_prism(n: f64, r: f64, h: f64) -> f64 {
    0.5 * n * r * r * (2.0 * PI / n).sin() * h
}

#[test]
fn unit_cube_has_unit_volume() {
    let v = mesh_volume(&mesh_of(&box_src(1.0, 1.0, 1.0))).unwrap();
    assert!((v - 1.0).abs() <= 1e-9, "{v}");
}

#[test]
fn circle_prism_matches_inscribed_polygon() {
    let v = mesh_volume(&mesh_of(&cylinder_src(5.0, 10.0))).unwrap();
    assert!(rel(v, ngon_prism(64.0, 5.0, 10.0)) <= 1e-9, "{v}");
}

#[test]
fn washer_is_annulus_of_polygons() {
    let src = "opSketch(F0, entities = [\n    circle(S0, center = (0.00, 0.00), radius = 12.00),\n    \
               circle(S1, center = (0.00, 0.00), radius = 6.50),\n]);\n\
               opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 2.50);\n";
    let v = mesh_volume(&mesh_of(src)).unwrap();
    let expect = ngon_prism(64.0, 12.0, 2.5) - ngon_prism(64.0, 6.5, 2.5);
    assert!(rel(v, expect) <= 1e-9, "{v} vs {expect}");
}

#[test]
fn every_interpretable_corpus_mesh_is_watertight() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/canonical");
    let mut built = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let text = std::fs::read_to_string(e.unwrap().path()).unwrap();
        let p = parse(&text, Dialect::Canonical).unwrap();
        if let Ok(mesh) = interpret_meshes(&p, &InterpretConfig::default()) {
            check_mesh(&mesh).unwrap();
            assert!(mesh_volume(&mesh).unwrap() > 0.0);
            built += 1;
        }
    }
    assert!(built >= 15);
}

#[test]
fn bbox_prompt_formats_to_two_decimals() {
    let b = BBox { min: [-1.004, 0.0, 2.5], max: [3.0, 10.0, 2.75] };
    assert_eq!(bbox_prompt(&b), "Bounds from (-1.0, 0.0, 2.5) to (3.0, 10.0, 2.75), center = (1.0, 5.0, 2.63), scale = 5.0");
    let plate = mesh_of(&box_src(4.0, 2.0, 1.0));
    let b = bounding_box([&plate]).unwrap();
    assert_eq!(bbox_prompt(&b), "Bounds from (0.0, 0.0, 0.0) to (4.0, 2.0, 1.0), center = (2.0, 1.0, 0.5), scale = 2.0");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn box_volume_is_product_of_sides(w in 1u32..5000, h in 1u32..5000, d in 1u32..5000) {
        let (w, h, d) = (w as f64 / 100.0, h as f64 / 100.0, d as f64 / 100.0);
        let mesh = mesh_of(&box_src(w, h, d));
        check_mesh(&mesh).unwrap();
        prop_assert!(rel(mesh_volume(&mesh).unwrap(), w * h * d) <= 1e-9);
    }

    #[test]
    fn cylinder_volume_follows_polygon_formula(r in 1u32..5000, h in 1u32..5000) {
        let (r, h) = (r as f64 / 100.0, h as f64 / 100.0);
        let mesh = mesh_of(&cylinder_src(r, h));
        check_mesh(&mesh).unwrap();
        prop_assert!(rel(mesh_volume(&mesh).unwrap(), ngon_prism(64.0, r, h)) <= 1e-9);
    }
}
