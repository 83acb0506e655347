use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cloud::{sample_surface, stream_rng, unit_normalize, PointCloud};
use super::distribution::{chamfer_matrix, coverage_from_matrix, invalidity_ratio, jsd, mmd_from_matrix};
use super::pairwise::{chamfer, edge_chamfer, normal_consistency, EdgeParams};
use super::MetricsError;
use crate::geom::{bounding_box, Mesh};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalProtocol {
    pub points_accuracy: usize,
    pub points_distribution: usize,
    pub subset_size: usize,
    pub repeats: usize,
    pub rng_seed: u64,
    pub voxel_resolution: usize,
    pub edge: EdgeParams,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        EvalProtocol {
            points_accuracy: 100_000,
            points_distribution: 2_000,
            subset_size: 3_000,
            repeats: 10,
            rng_seed: 0,
            voxel_resolution: 32,
            edge: EdgeParams::default(),
        }
    }
}

impl EvalProtocol {
    pub fn check(&self) -> Result<(), MetricsError> {
        let sizes = [self.points_accuracy, self.points_distribution, self.subset_size, self.repeats, self.voxel_resolution];
        if sizes.contains(&0) {
            return Err(MetricsError::Invalid("protocol sizes must be positive".into()));
        }
        let e = &self.edge;
        if !(e.radius > 0.0) || !(e.normal_dot_threshold > 0.0 && e.normal_dot_threshold < 1.0) {
            return Err(MetricsError::Invalid("edge radius must be positive and threshold in (0, 1)".into()));
        }
        Ok(())
    }

    /// Sampling seed of both clouds of the pair whose reference has index `ref_index`.
    pub fn accuracy_seed(&self, ref_index: usize) -> u64 {
        seed_of(self.rng_seed, STREAM_ACCURACY, ref_index)
    }

    /// Sampling seed of the distribution clouds paired with reference `ref_index`.
    pub fn distribution_seed(&self, ref_index: usize) -> u64 {
        seed_of(self.rng_seed, STREAM_DISTRIBUTION, ref_index)
    }
}

/// A labelled shape; `mesh` is `None` for generated entries that failed to construct.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEntry {
    pub label: String,
    pub mesh: Option<Mesh>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub label: String,
    pub valid: bool,
    pub cd: Option<f64>,
    pub ecd: Option<f64>,
    pub nc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRow {
    pub n_ref: usize,
    pub n_gen: usize,
    pub cov: f64,
    pub mmd: f64,
    pub jsd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub protocol: EvalProtocol,
    pub notes: Vec<String>,
    /// Medians over valid pairs. CD and ECD ×10³.
    pub cd_median: Option<f64>,
    pub ecd_median: Option<f64>,
    pub nc_median: Option<f64>,
    pub cov_pct: Option<f64>,
    /// ×10³.
    pub mmd: Option<f64>,
    /// ×10².
    pub jsd: Option<f64>,
    pub ir_pct: f64,
    pub n_generated: usize,
    pub n_invalid: usize,
    pub n_ecd_undefined: usize,
    pub pairs: Vec<PairRow>,
    pub repeats: Vec<RepeatRow>,
}

pub const TABLE_COLUMNS: [&str; 7] = ["CD", "ECD", "NC", "MMD", "COV", "JSD", "IR"];

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

impl MetricsReport {
    /// Headline values in column order CD, ECD, NC, MMD, COV, JSD, IR.
    pub fn headline(&self) -> [Option<f64>; 7] {
        [self.cd_median, self.ecd_median, self.nc_median, self.mmd, self.cov_pct, self.jsd, Some(self.ir_pct)]
    }

    pub fn table(&self) -> String {
        let mut s = TABLE_COLUMNS.join("\t");
        s.push('\n');
        s.push_str(&self.headline().map(fmt_opt).join("\t"));
        s.push('\n');
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-pair rows with a fixed header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,valid,cd_x1e3,ecd_x1e3,nc\n");
        let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for r in &self.pairs {
            let _ = writeln!(s, "{},{},{},{},{}", r.label, r.valid, cell(r.cd), cell(r.ecd), cell(r.nc));
        }
        s
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

// Stream tags keep every random draw independent of evaluation order. Both
// sides of a pair sample with the stream of the reference index, so a
// generated mesh identical to its reference yields the identical cloud.
const STREAM_ACCURACY: u64 = 1 << 40;
const STREAM_DISTRIBUTION: u64 = 3 << 40;
const STREAM_REF_SUBSET: u64 = 5 << 40;
const STREAM_GEN_SUBSET: u64 = 6 << 40;

fn seed_of(seed: u64, stream: u64, index: usize) -> u64 {
    use rand::RngCore;
    stream_rng(seed, stream | index as u64).next_u64()
}

/// Cloud normalized by its own bounding box.
fn self_normalized(mesh: &Mesh, n: usize, seed: u64) -> Result<PointCloud, MetricsError> {
    let c = sample_surface(mesh, n, seed)?;
    let b = bounding_box([mesh]).ok_or(MetricsError::EmptyCloud)?;
    unit_normalize(&c, &b)
}

/// Full evaluation of generated shapes against references paired by label.
pub fn evaluate_sets(
    reference: &[ShapeEntry],
    generated: &[ShapeEntry],
    protocol: &EvalProtocol,
) -> Result<MetricsReport, MetricsError> {
    protocol.check()?;
    if reference.is_empty() || generated.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let mut ref_index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, r) in reference.iter().enumerate() {
        if r.mesh.is_none() {
            return Err(MetricsError::Invalid(format!("reference `{}` has no mesh", r.label)));
        }
        if ref_index.insert(&r.label, i).is_some() {
            return Err(MetricsError::Invalid(format!("duplicate reference label `{}`", r.label)));
        }
    }
    let mut seen = BTreeSet::new();
    for g in generated {
        if !seen.insert(g.label.as_str()) {
            return Err(MetricsError::Invalid(format!("duplicate generated label `{}`", g.label)));
        }
    }
    let unpaired: Vec<&str> = ref_index.keys().copied().filter(|l| !seen.contains(l)).collect();
    if !unpaired.is_empty() {
        return Err(MetricsError::Unpaired(unpaired.join(", ")));
    }

    let seed = protocol.rng_seed;
    let pairs: Vec<PairRow> = generated
        .par_iter()
        .map(|g| -> Result<PairRow, MetricsError> {
            let paired = ref_index.get(g.label.as_str()).copied();
            let (Some(ri), Some(gmesh)) = (paired, g.mesh.as_ref()) else {
                return Ok(PairRow { label: g.label.clone(), valid: false, cd: None, ecd: None, nc: None });
            };
            let rmesh = reference[ri].mesh.as_ref().expect("checked");
            let frame = bounding_box([rmesh]).ok_or(MetricsError::EmptyCloud)?;
            let s = protocol.accuracy_seed(ri);
            let rc = sample_surface(rmesh, protocol.points_accuracy, s)?;
            let gc = sample_surface(gmesh, protocol.points_accuracy, s)?;
            let (rc, gc) = (unit_normalize(&rc, &frame)?, unit_normalize(&gc, &frame)?);
            Ok(PairRow {
                label: g.label.clone(),
                valid: true,
                cd: Some(chamfer(&gc, &rc) * 1e3),
                ecd: edge_chamfer(&gc, &rc, &protocol.edge).map(|v| v * 1e3),
                nc: Some(normal_consistency(&gc, &rc)),
            })
        })
        .collect::<Result<_, _>>()?;

    let n_invalid = pairs.iter().filter(|p| !p.valid).count();
    let valid: Vec<&PairRow> = pairs.iter().filter(|p| p.valid).collect();
    let cds: Vec<f64> = valid.iter().filter_map(|p| p.cd).collect();
    let ecds: Vec<f64> = valid.iter().filter_map(|p| p.ecd).collect();
    let ncs: Vec<f64> = valid.iter().filter_map(|p| p.nc).collect();

    // Distribution metrics on independently normalized shapes.
    let ref_clouds: Vec<PointCloud> = reference
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            self_normalized(r.mesh.as_ref().unwrap(), protocol.points_distribution, protocol.distribution_seed(i))
        })
        .collect::<Result<_, _>>()?;
    let gen_valid: Vec<usize> = (0..generated.len()).filter(|&i| pairs[i].valid).collect();
    let gen_clouds: Vec<PointCloud> = gen_valid
        .par_iter()
        .map(|&i| {
            self_normalized(
                generated[i].mesh.as_ref().unwrap(),
                protocol.points_distribution,
                protocol.distribution_seed(ref_index[generated[i].label.as_str()]),
            )
        })
        .collect::<Result<_, _>>()?;

    let mut repeats = Vec::new();
    if !gen_clouds.is_empty() {
        let pick = |n: usize, stream: u64, r: usize| -> Vec<usize> {
            let k = protocol.subset_size.min(n);
            let mut rng = stream_rng(seed, stream | r as u64);
            let mut idx = sample(&mut rng, n, k).into_vec();
            idx.sort_unstable();
            idx
        };
        let subsets: Vec<(Vec<usize>, Vec<usize>)> = (0..protocol.repeats)
            .map(|r| (pick(ref_clouds.len(), STREAM_REF_SUBSET, r), pick(gen_clouds.len(), STREAM_GEN_SUBSET, r)))
            .collect();
        let used_ref: Vec<usize> = subsets.iter().flat_map(|s| s.0.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
        let used_gen: Vec<usize> = subsets.iter().flat_map(|s| s.1.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
        let ref_pos: BTreeMap<usize, usize> = used_ref.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let gen_pos: BTreeMap<usize, usize> = used_gen.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let rows: Vec<PointCloud> = used_gen.iter().map(|&i| gen_clouds[i].clone()).collect();
        let cols: Vec<PointCloud> = used_ref.iter().map(|&i| ref_clouds[i].clone()).collect();
        let matrix = chamfer_matrix(&rows, &cols);
        for (rs, gs) in &subsets {
            let sub: Vec<Vec<f64>> =
                gs.iter().map(|g| rs.iter().map(|r| matrix[gen_pos[g]][ref_pos[r]]).collect()).collect();
            let rset: Vec<PointCloud> = rs.iter().map(|&i| ref_clouds[i].clone()).collect();
            let gset: Vec<PointCloud> = gs.iter().map(|&i| gen_clouds[i].clone()).collect();
            repeats.push(RepeatRow {
                n_ref: rs.len(),
                n_gen: gs.len(),
                cov: coverage_from_matrix(&sub, rs.len()),
                mmd: mmd_from_matrix(&sub, rs.len()),
                jsd: jsd(&rset, &gset, protocol.voxel_resolution)?,
            });
        }
    }
    let avg = |f: fn(&RepeatRow) -> f64| -> Option<f64> {
        (!repeats.is_empty()).then(|| repeats.iter().map(f).sum::<f64>() / repeats.len() as f64)
    };

    Ok(MetricsReport {
        protocol: protocol.clone(),
        notes: vec![
            "CD, ECD and NC use both shapes of a pair scaled by the reference bounding box (largest extent 1)".into(),
            "CD, ECD and MMD are x1e3; JSD is x1e2 with natural log over a voxel grid of the stated resolution".into(),
            "pairs without edge points on either side are excluded from the ECD median".into(),
        ],
        cd_median: median(&cds),
        ecd_median: median(&ecds),
        nc_median: median(&ncs),
        cov_pct: avg(|r| r.cov),
        mmd: avg(|r| r.mmd),
        jsd: avg(|r| r.jsd),
        ir_pct: invalidity_ratio(n_invalid, generated.len())?,
        n_generated: generated.len(),
        n_invalid,
        n_ecd_undefined: valid.len() - ecds.len(),
        pairs,
        repeats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
