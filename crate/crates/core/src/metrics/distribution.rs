use rayon::prelude::*;

use super::cloud::PointCloud;
use super::kdtree::KdTree;
use super::MetricsError;

/// Pairwise chamfer distances, `rows[i]` against `cols[j]`.
pub fn chamfer_matrix(rows: &[PointCloud], cols: &[PointCloud]) -> Vec<Vec<f64>> {
    let row_trees: Vec<KdTree> = rows.par_iter().map(|c| KdTree::new(&c.points)).collect();
    let col_trees: Vec<KdTree> = cols.par_iter().map(|c| KdTree::new(&c.points)).collect();
    let directed = |from: &PointCloud, to: &KdTree| {
        let mut s = 0.0;
        for &p in &from.points {
            s += to.nearest(p).expect("non-empty cloud").1;
        }
        s / from.len() as f64
    };
    (0..rows.len())
        .into_par_iter()
        .map(|i| (0..cols.len()).map(|j| directed(&rows[i], &col_trees[j]) + directed(&cols[j], &row_trees[i])).collect())
        .collect()
}

fn argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v < row[best] {
            best = j;
        }
    }
    best
}

/// Percentage of reference shapes that are the nearest reference of some
/// generated shape. `gen_to_ref[g][s]` is the chamfer distance.
pub fn coverage_from_matrix(gen_to_ref: &[Vec<f64>], n_ref: usize) -> f64 {
    let mut hit = vec![false; n_ref];
    for row in gen_to_ref {
        hit[argmin(row)] = true;
    }
    (hit.iter().filter(|&&h| h).count() * 100) as f64 / n_ref as f64
}

/// Mean over references of the distance to the closest generated shape, ×10³.
pub fn mmd_from_matrix(gen_to_ref: &[Vec<f64>], n_ref: usize) -> f64 {
    let mut sum = 0.0;
    for s in 0..n_ref {
        sum += gen_to_ref.iter().map(|row| row[s]).fold(f64::INFINITY, f64::min);
    }
    sum / n_ref as f64 * 1e3
}

pub fn coverage(reference: &[PointCloud], generated: &[PointCloud]) -> Result<f64, MetricsError> {
    if reference.is_empty() || generated.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    Ok(coverage_from_matrix(&chamfer_matrix(generated, reference), reference.len()))
}

pub fn mmd(reference: &[PointCloud], generated: &[PointCloud]) -> Result<f64, MetricsError> {
    if reference.is_empty() || generated.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    Ok(mmd_from_matrix(&chamfer_matrix(generated, reference), reference.len()))
}

/// Normalized voxel occupancy over the cube [-0.5, 0.5]³; outside points clamp to border voxels.
pub fn voxel_distribution(clouds: &[PointCloud], resolution: usize) -> Result<Vec<f64>, MetricsError> {
    if resolution < 1 {
        return Err(MetricsError::Invalid("voxel resolution must be at least 1".into()));
    }
    let mut counts = vec![0u64; resolution * resolution * resolution];
    let mut total = 0u64;
    let cell = |x: f64| (((x + 0.5) * resolution as f64).floor().max(0.0) as usize).min(resolution - 1);
    for c in clouds {
        for p in &c.points {
            counts[(cell(p[0]) * resolution + cell(p[1])) * resolution + cell(p[2])] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(MetricsError::EmptySet);
    }
    Ok(counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

/// Jensen-Shannon divergence with natural log, ×10².
pub fn jsd_from_distributions(p: &[f64], q: &[f64]) -> f64 {
    let (mut kp, mut kq) = (0.0, 0.0);
    for (&a, &b) in p.iter().zip(q) {
        let m = (a + b) / 2.0;
        if a > 0.0 {
            kp += a * (a / m).ln();
        }
        if b > 0.0 {
            kq += b * (b / m).ln();
        }
    }
    (0.5 * kp + 0.5 * kq) * 1e2
}

pub fn jsd(reference: &[PointCloud], generated: &[PointCloud], resolution: usize) -> Result<f64, MetricsError> {
    let p = voxel_distribution(reference, resolution)?;
    let q = voxel_distribution(generated, resolution)?;
    Ok(jsd_from_distributions(&p, &q))
}

/// Percentage of generated entries that failed to construct.
pub fn invalidity_ratio(n_invalid: usize, n_generated: usize) -> Result<f64, MetricsError> {
    if n_generated == 0 || n_invalid > n_generated {
        return Err(MetricsError::Invalid(format!("invalid count {n_invalid} of {n_generated} generated")));
    }
    Ok((n_invalid * 100) as f64 / n_generated as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64) -> PointCloud {
        PointCloud { points: vec![[x, 0.0, 0.0]], normals: vec![[0.0, 0.0, 1.0]] }
    }

    #[test]
    fn coverage_cases() {
        let (a, b) = (at(0.0), at(0.3));
        assert_eq!(coverage(&[a.clone(), b.clone()], &[a.clone(), b.clone()]).unwrap(), 100.0);
        assert_eq!(coverage(&[a.clone(), b.clone()], &[a.clone(), a.clone()]).unwrap(), 50.0);
        assert_eq!(coverage(&[a.clone(), b.clone(), at(0.1)], &[b]).unwrap(), 100.0 / 3.0);
    }

    #[test]
    fn mmd_cases() {
        let (a, b) = (at(0.0), at(0.3));
        assert_eq!(mmd(&[a.clone()], &[a.clone(), b.clone()]).unwrap(), 0.0);
        let d = 0.3f64 * 0.3;
        let cd = d + d;
        assert_eq!(mmd(&[a.clone(), b.clone()], &[a.clone()]).unwrap(), cd / 2.0 * 1e3);
    }

    #[test]
    fn jsd_cases() {
        let (a, b) = (at(-0.4), at(0.4));
        assert_eq!(jsd(&[a.clone()], &[a.clone()], 32).unwrap(), 0.0);
        assert!((jsd(&[a.clone()], &[b.clone()], 32).unwrap() - 100.0 * 2f64.ln()).abs() < 1e-9);
        let mixed = [a.clone(), b.clone(), b.clone()];
        assert_eq!(jsd(&mixed, &[a.clone()], 8).unwrap(), jsd(&[a], &mixed, 8).unwrap());
        assert!(jsd(&mixed, &mixed, 0).is_err());
    }

    #[test]
    fn invalidity_ratio_cases() {
        assert_eq!(invalidity_ratio(0, 10).unwrap(), 0.0);
        assert_eq!(invalidity_ratio(2, 10).unwrap(), 20.0);
        assert_eq!(invalidity_ratio(10, 10).unwrap(), 100.0);
        assert!(invalidity_ratio(1, 0).is_err());
        assert!(invalidity_ratio(11, 10).is_err());
    }
}
