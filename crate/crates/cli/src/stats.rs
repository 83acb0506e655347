use std::collections::BTreeMap;

use anyhow::{bail, Result};
use fscad_core::{OpKind, PrimitiveFamily, Program};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub programs: usize,
    pub operations: usize,
    pub op_counts: BTreeMap<String, usize>,
    pub op_fractions: BTreeMap<String, f64>,
    pub primitive_counts: BTreeMap<String, usize>,
}

pub fn op_counts(p: &Program) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for k in p.kinds() {
        *m.entry(k.label().to_string()).or_insert(0) += 1;
    }
    m
}

fn fractions(counts: &BTreeMap<String, usize>) -> BTreeMap<String, f64> {
    let total: usize = counts.values().sum();
    counts.iter().map(|(k, &c)| (k.clone(), if total == 0 { 0.0 } else { c as f64 / total as f64 })).collect()
}

pub fn family_label(f: PrimitiveFamily) -> String {
    format!("{f:?}")
}

pub fn stats(programs: &[Program]) -> StatsReport {
    let mut ops: BTreeMap<String, usize> = OpKind::ALL.iter().map(|k| (k.label().to_string(), 0)).collect();
    let mut prims: BTreeMap<String, usize> = PrimitiveFamily::ALL.iter().map(|&f| (family_label(f), 0)).collect();
    for p in programs {
        for (k, c) in op_counts(p) {
            *ops.entry(k).or_default() += c;
        }
        for f in &p.features {
            for e in f.sketch_entities() {
                *prims.entry(family_label(e.geom.family())).or_default() += 1;
            }
        }
    }
    StatsReport {
        programs: programs.len(),
        operations: ops.values().sum(),
        op_fractions: fractions(&ops),
        op_counts: ops,
        primitive_counts: prims,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub method: String,
    pub ids: Vec<String>,
    pub l1_distance: f64,
    pub fractions: BTreeMap<String, f64>,
}

fn l1(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter().map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs()).sum()
}

/// Greedily picks `count` programs whose pooled operation fractions are
/// closest (L1) to `target`. Ties go to the earlier entry.
pub fn match_distribution(
    entries: &[(String, BTreeMap<String, usize>)],
    target: &BTreeMap<String, f64>,
    count: usize,
) -> Result<MatchReport> {
    let total: f64 = target.values().sum();
    if !(total > 0.0) || target.values().any(|v| *v < 0.0) {
        bail!("target fractions must be non-negative with a positive sum");
    }
    if count > entries.len() {
        bail!("requested {count} programs but only {} are available", entries.len());
    }
    let target: BTreeMap<String, f64> = target.iter().map(|(k, v)| (k.clone(), v / total)).collect();
    let mut chosen = vec![false; entries.len()];
    let mut pooled: BTreeMap<String, usize> = BTreeMap::new();
    let mut ids = Vec::new();
    for _ in 0..count {
        let mut best: Option<(f64, usize)> = None;
        for (i, (_, c)) in entries.iter().enumerate() {
            if chosen[i] {
                continue;
            }
            let mut trial = pooled.clone();
            for (k, n) in c {
                *trial.entry(k.clone()).or_default() += n;
            }
            let d = l1(&fractions(&trial), &target);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        let (_, i) = best.expect("count <= entries");
        chosen[i] = true;
        for (k, n) in &entries[i].1 {
            *pooled.entry(k.clone()).or_default() += n;
        }
        ids.push(entries[i].0.clone());
    }
    let fr = fractions(&pooled);
    Ok(MatchReport {
        method: "greedy L1 matching of pooled operation fractions (approximation)".into(),
        ids,
        l1_distance: if count == 0 { l1(&BTreeMap::new(), &target) } else { l1(&fr, &target) },
        fractions: fr,
    })
}
