//! Property tests over generated programs and point clouds.

use fscad_core::metrics::{
    chamfer, coverage, jsd, mmd, nearest_brute, normal_consistency, KdTree, PointCloud,
};
use fscad_core::normalize::run_pass;
use fscad_core::{emit, normalize, parse, Dialect, PassConfig, PassName};
use proptest::prelude::*;

/// Fixed two-decimal literal from hundredths.
fn lit(h: i32) -> String {
    let sign = if h < 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", h.abs() / 100, h.abs() % 100)
}

#[derive(Debug, Clone)]
enum Shape {
    Rect { x: i32, y: i32, w: i32, h: i32 },
    Circle { x: i32, y: i32, r: i32 },
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (-5000..5000, -5000..5000, 1..3000, 1..3000).prop_map(|(x, y, w, h)| Shape::Rect { x, y, w, h }),
        (-5000..5000, -5000..5000, 1..3000).prop_map(|(x, y, r)| Shape::Circle { x, y, r }),
    ]
}

#[derive(Debug, Clone)]
struct Part {
    plane: Option<&'static str>,
    shape: Shape,
    depth: i32,
    midplane: bool,
}

fn part() -> impl Strategy<Value = Part> {
    (prop::option::of(prop::sample::select(vec!["XZ", "YZ"])), shape(), 1..5000, any::<bool>())
        .prop_map(|(plane, shape, depth, midplane)| Part { plane, shape, depth, midplane })
}

/// Canonical text for a list of parts, one sketch and one extrude each.
fn canonical_text(parts: &[Part]) -> String {
    let mut out = String::new();
    let mut s = 0;
    for (i, p) in parts.iter().enumerate() {
        let (fs, fe) = (2 * i, 2 * i + 1);
        let plane = p.plane.map(|pl| format!(", plane = \"{pl}\"")).unwrap_or_default();
        out.push_str(&format!("opSketch(F{fs}{plane}, entities = [\n"));
        match p.shape {
            Shape::Rect { x, y, w, h } => {
                let c = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)];
                for k in 0..4 {
                    let (a, b) = (c[k], c[(k + 1) % 4]);
                    out.push_str(&format!(
                        "    line(S{s}, start = ({}, {}), end = ({}, {})),\n",
                        lit(a.0),
                        lit(a.1),
                        lit(b.0),
                        lit(b.1)
                    ));
                    s += 1;
                }
            }
            Shape::Circle { x, y, r } => {
                out.push_str(&format!("    circle(S{s}, center = ({}, {}), radius = {}),\n", lit(x), lit(y), lit(r)));
                s += 1;
            }
        }
        out.push_str("]);\n");
        let mid = if p.midplane { ", midplane = true" } else { "" };
        out.push_str(&format!(
            "opExtrude(F{fe}, profile = [makeQuery(F{fs}, SKETCH_REGION, FACE, [])], depth = {}{mid});\n",
            lit(p.depth)
        ));
    }
    out
}

#[derive(Debug, Clone)]
enum Unit {
    Mm,
    Cm,
    Inch,
}

/// Raw rendering of a length given in hundredths of a millimeter.
fn raw_len(h: i32, unit: &Unit, split: bool) -> String {
    let v = h as f64 / 100.0;
    let body = match unit {
        Unit::Mm => format!("{v}"),
        Unit::Cm => format!("{} cm", v / 10.0),
        Unit::Inch => format!("{v} / 25.4 * inch"),
    };
    if split {
        format!("({body}) / 2 + ({body}) / 2")
    } else {
        body
    }
}

/// Raw text with opaque ids, units, expressions and an unused sketch.
fn raw_text(parts: &[Part], unit: &Unit, split: bool, dead: bool) -> String {
    let mut out = String::new();
    if dead {
        out.push_str("opSketch(unused, entities = [circle(lonely, center = (1, 2), radius = 3)]);\n");
    }
    for (i, p) in parts.iter().enumerate() {
        let plane = p.plane.map(|pl| format!(", plane = \"{pl}\"")).unwrap_or_default();
        let l = |h: i32| raw_len(h, unit, split);
        let entities = match p.shape {
            Shape::Rect { x, y, w, h } => {
                let c = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)];
                (0..4)
                    .map(|k| {
                        let (a, b) = (c[k], c[(k + 1) % 4]);
                        format!("line(edge_{i}_{k}, start = ({}, {}), end = ({}, {}))", l(a.0), l(a.1), l(b.0), l(b.1))
                    })
                    .collect::<Vec<_>>()
                    .join(", ")
            }
            Shape::Circle { x, y, r } => format!("circle(round_{i}, center = ({}, {}), radius = {})", l(x), l(y), l(r)),
        };
        out.push_str(&format!("opSketch(sketch_{i}{plane}, entities = [{entities}])\n"));
        out.push_str(&format!(
            "opExtrude(body_{i}, profile = [makeQuery(sketch_{i}, SKETCH_REGION, FACE, [])], depth = {}, midplane = {}, draft = 0 deg);\n",
            l(p.depth),
            p.midplane
        ));
    }
    out
}

fn unit() -> impl Strategy<Value = Unit> {
    prop_oneof![Just(Unit::Mm), Just(Unit::Cm), Just(Unit::Inch)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_text_round_trips(parts in prop::collection::vec(part(), 1..5)) {
        let text = canonical_text(&parts);
        let p = parse(&text, Dialect::Canonical).unwrap();
        prop_assert_eq!(emit(&p), text);
    }

    #[test]
    fn raw_programs_normalize_to_the_generated_canonical_text(
        parts in prop::collection::vec(part(), 1..4),
        u in unit(),
        split in any::<bool>(),
        dead in any::<bool>(),
    ) {
        let raw = parse(&raw_text(&parts, &u, split, dead), Dialect::Raw).unwrap();
        let (n, _) = normalize(&raw, &PassConfig::default()).unwrap();
        prop_assert_eq!(emit(&n), canonical_text(&parts));
    }

    #[test]
    fn normalization_is_a_fixed_point(
        parts in prop::collection::vec(part(), 1..4),
        u in unit(),
        split in any::<bool>(),
        dead in any::<bool>(),
    ) {
        let cfg = PassConfig::default();
        let raw = parse(&raw_text(&parts, &u, split, dead), Dialect::Raw).unwrap();
        let (once, _) = normalize(&raw, &cfg).unwrap();
        let (twice, _) = normalize(&once, &cfg).unwrap();
        prop_assert_eq!(emit(&twice), emit(&once));
        let mut current = raw;
        for pass in PassName::DEFAULT_ORDER {
            let (a, _) = run_pass(pass, &current, &cfg).unwrap();
            let (b, _) = run_pass(pass, &a, &cfg).unwrap();
            prop_assert_eq!(emit(&b), emit(&a), "{}", pass);
            current = a;
        }
    }
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]
}

fn unit_vec() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, 0.1..1.0f64].prop_map(|v| {
        let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / l, v[1] / l, v[2] / l]
    })
}

fn cloud(max: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec((point(), unit_vec()), 1..max).prop_map(|v| {
        let (points, normals) = v.into_iter().unzip();
        PointCloud::new(points, normals).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kd_tree_agrees_with_linear_scan(pts in prop::collection::vec(point(), 1..300), qs in prop::collection::vec(point(), 1..30)) {
        let tree = KdTree::new(&pts);
        for q in qs {
            prop_assert_eq!(tree.nearest(q), nearest_brute(&pts, q));
        }
    }

    #[test]
    fn kd_tree_handles_duplicates_by_lowest_index(p in point(), n in 2usize..50) {
        let pts = vec![p; n];
        prop_assert_eq!(KdTree::new(&pts).nearest(p), Some((0, 0.0)));
    }

    #[test]
    fn chamfer_is_symmetric_and_zero_on_self(x in cloud(120), y in cloud(120)) {
        prop_assert_eq!(chamfer(&x, &y), chamfer(&y, &x));
        prop_assert_eq!(chamfer(&x, &x), 0.0);
        prop_assert!(chamfer(&x, &y) >= 0.0);
    }

    #[test]
    fn normal_consistency_is_bounded(x in cloud(120), y in cloud(120)) {
        let nc = normal_consistency(&x, &y);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&nc));
        prop_assert!((normal_consistency(&x, &x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_metrics_are_bounded(a in prop::collection::vec(cloud(40), 1..5), b in prop::collection::vec(cloud(40), 1..5)) {
        let j = jsd(&a, &b, 8).unwrap();
        prop_assert!(j >= -1e-12 && j <= 100.0 * std::f64::consts::LN_2 + 1e-9);
        prop_assert!((j - jsd(&b, &a, 8).unwrap()).abs() < 1e-9);
        prop_assert!(jsd(&a, &a, 8).unwrap().abs() < 1e-12);
        let cov = coverage(&a, &b).unwrap();
        prop_assert!((0.0..=100.0).contains(&cov));
        prop_assert_eq!(coverage(&a, &a).unwrap(), 100.0);
        prop_assert!(mmd(&a, &b).unwrap() >= 0.0);
        prop_assert_eq!(mmd(&a, &a).unwrap(), 0.0);
    }
}
