use fscad_core::geom::{bounding_box, interpret_meshes};
use fscad_core::metrics::{
    chamfer, classify_edge_points, evaluate_sets, jsd_from_distributions, sample_surface, unit_normalize, EdgeParams,
    EvalProtocol, PointCloud, ShapeEntry,
};
use fscad_core::{parse, Dialect, InterpretConfig, Mesh};

const H: f64 = 0.0015;

/// Two half-planes meeting along the y axis, sampled on a grid that puts
/// points (with both normals) on the crease itself.
fn crease_cloud() -> (PointCloud, Vec<f64>) {
    let (mut points, mut normals, mut dist) = (Vec::new(), Vec::new(), Vec::new());
    for j in 0..20 {
        let y = j as f64 * H;
        for k in 0..30 {
            let a = k as f64 * H;
            points.push([-a, y, 0.0]);
            normals.push([0.0, 0.0, 1.0]);
            dist.push(a);
            points.push([0.0, y, a]);
            normals.push([1.0, 0.0, 0.0]);
            dist.push(a);
        }
    }
    (PointCloud::new(points, normals).unwrap(), dist)
}

#[test]
fn edge_defaults() {
    let p = EdgeParams::default();
    assert_eq!((p.radius, p.normal_dot_threshold), (0.004, 0.2));
}

#[test]
fn crease_selects_points_within_radius() {
    let (cloud, dist) = crease_cloud();
    let p = EdgeParams::default();
    let expect: Vec<usize> = (0..cloud.len()).filter(|&i| dist[i] <= p.radius).collect();
    assert_eq!(classify_edge_points(&cloud, &p), expect);
    assert_eq!(expect.len(), 20 * 2 * 3);
}

#[test]
fn closed_form_values() {
    let one = |p: [f64; 3]| PointCloud::new(vec![p], vec![[0.0, 0.0, 1.0]]).unwrap();
    assert_eq!(chamfer(&one([0.0; 3]), &one([1.0, 0.0, 0.0])), 2.0);
    let j = jsd_from_distributions(&[0.5, 0.5, 0.0, 0.0], &[0.0, 0.0, 0.25, 0.75]);
    assert!((j - 100.0 * std::f64::consts::LN_2).abs() <= 1e-9, "{j}");
}

fn toy(i: usize) -> Mesh {
    let (w, h, d) = (10.0 + 7.0 * i as f64, 10.0 + 3.0 * (i % 3) as f64, 4.0 + 2.0 * i as f64);
    let src = format!(
        "opSketch(F0, entities = [\n    line(S0, start = (0.00, 0.00), end = ({w:.2}, 0.00)),\n    \
         line(S1, start = ({w:.2}, 0.00), end = ({w:.2}, {h:.2})),\n    \
         line(S2, start = ({w:.2}, {h:.2}), end = (0.00, {h:.2})),\n    \
         line(S3, start = (0.00, {h:.2}), end = (0.00, 0.00)),\n]);\n\
         opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = {d:.2});\n"
    );
    interpret_meshes(&parse(&src, Dialect::Canonical).unwrap(), &InterpretConfig::default()).unwrap()
}

fn small_protocol() -> EvalProtocol {
    EvalProtocol { points_accuracy: 3000, points_distribution: 500, ..Default::default() }
}

#[test]
fn identity_suite() {
    let set: Vec<ShapeEntry> = (0..5).map(|i| ShapeEntry { label: format!("s{i}"), mesh: Some(toy(i)) }).collect();
    let r = evaluate_sets(&set, &set, &small_protocol()).unwrap();
    assert_eq!(r.cd_median, Some(0.0));
    assert_eq!(r.nc_median, Some(1.0));
    assert_eq!(r.cov_pct, Some(100.0));
    assert_eq!(r.mmd, Some(0.0));
    assert_eq!(r.jsd, Some(0.0));
    assert_eq!(r.ir_pct, 0.0);
    assert_eq!(r.repeats.len(), 10);
    assert!(r.repeats.iter().all(|x| x.n_ref == 5 && x.n_gen == 5));
}

#[test]
fn report_scales_chamfer_by_one_thousand() {
    let p = small_protocol();
    let reference = vec![ShapeEntry { label: "a".into(), mesh: Some(toy(1)) }];
    let generated = vec![ShapeEntry { label: "a".into(), mesh: Some(toy(2)) }];
    let r = evaluate_sets(&reference, &generated, &p).unwrap();
    let frame = bounding_box([reference[0].mesh.as_ref().unwrap()]).unwrap();
    let cloud = |m: &Mesh| unit_normalize(&sample_surface(m, p.points_accuracy, p.accuracy_seed(0)).unwrap(), &frame).unwrap();
    let expect = chamfer(&cloud(generated[0].mesh.as_ref().unwrap()), &cloud(reference[0].mesh.as_ref().unwrap()));
    assert_eq!(r.pairs[0].cd, Some(expect * 1e3));
    assert!(expect > 0.0);
}

#[test]
fn invalid_entries_count_toward_ir() {
    let reference: Vec<ShapeEntry> = (0..10).map(|i| ShapeEntry { label: format!("s{i}"), mesh: Some(toy(i)) }).collect();
    let mut generated = reference.clone();
    generated[3].mesh = None;
    generated[7].mesh = None;
    let r = evaluate_sets(&reference, &generated, &small_protocol()).unwrap();
    assert_eq!((r.ir_pct, r.n_invalid, r.n_generated), (20.0, 2, 10));
    assert_eq!(r.pairs.iter().filter(|p| p.cd.is_some()).count(), 8);
}

#[test]
fn reports_are_reproducible() {
    let reference: Vec<ShapeEntry> = (0..6).map(|i| ShapeEntry { label: format!("s{i}"), mesh: Some(toy(i)) }).collect();
    let generated: Vec<ShapeEntry> =
        (0..6).map(|i| ShapeEntry { label: format!("s{i}"), mesh: Some(toy((i + 1) % 6)) }).collect();
    let p = EvalProtocol { subset_size: 4, ..small_protocol() };
    let a = evaluate_sets(&reference, &generated, &p).unwrap().to_json();
    let b = evaluate_sets(&reference, &generated, &p).unwrap().to_json();
    assert_eq!(a, b);
    let c = evaluate_sets(&reference, &generated, &EvalProtocol { rng_seed: 9, ..p }).unwrap().to_json();
    assert_ne!(a, c);
}
