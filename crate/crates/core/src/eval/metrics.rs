//! External and internal clustering quality measures.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterMetrics<F> {
    pub fm: F,
    pub acc: F,
    pub purity: F,
    /// Absent when the clustering has fewer than two clusters.
    pub silhouette: Option<F>,
}

fn check_lengths(labels: &[i64], truth: &[i64]) -> Result<()> {
    if labels.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels against {} truth values",
            labels.len(),
            truth.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Empty("label vector"));
    }
    Ok(())
}

/// Contingency counts keyed by (cluster, class).
fn contingency(labels: &[i64], truth: &[i64]) -> BTreeMap<(i64, i64), u64> {
    let mut table = BTreeMap::new();
    for (&l, &t) in labels.iter().zip(truth) {
        *table.entry((l, t)).or_insert(0u64) += 1;
    }
    table
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

fn marginal(values: &[i64]) -> BTreeMap<i64, u64> {
    let mut m = BTreeMap::new();
    for &v in values {
        *m.entry(v).or_insert(0u64) += 1;
    }
    m
}

/// Fowlkes-Mallows index `TP / sqrt((TP + FP)(TP + FN))`.
pub fn fowlkes_mallows<F: Real>(labels: &[i64], truth: &[i64]) -> Result<F> {
    check_lengths(labels, truth)?;
    let tp: u64 = contingency(labels, truth).values().map(|&n| pairs(n)).sum();
    let pred: u64 = marginal(labels).values().map(|&n| pairs(n)).sum();
    let true_pairs: u64 = marginal(truth).values().map(|&n| pairs(n)).sum();
    if tp == 0 {
        // Two all-singleton partitions agree on every pair.
        return Ok(if pred == 0 && true_pairs == 0 {
            F::one()
        } else {
            F::zero()
        });
    }
    let tp = F::from_count(tp);
    Ok(tp / (F::from_count(pred) * F::from_count(true_pairs)).sqrt())
}

/// Share of points whose cluster's majority class matches their own.
pub fn purity<F: Real>(labels: &[i64], truth: &[i64]) -> Result<F> {
    check_lengths(labels, truth)?;
    let mut best: BTreeMap<i64, u64> = BTreeMap::new();
    for ((l, _), n) in contingency(labels, truth) {
        let e = best.entry(l).or_insert(0);
        *e = (*e).max(n);
    }
    let hit: u64 = best.values().sum();
    Ok(F::from_count(hit) / F::from_count(labels.len() as u64))
}

/// Accuracy under the best one-to-one mapping of clusters to classes.
pub fn accuracy<F: Real>(labels: &[i64], truth: &[i64]) -> Result<F> {
    check_lengths(labels, truth)?;
    let clusters: Vec<i64> = marginal(labels).into_keys().collect();
    let classes: Vec<i64> = marginal(truth).into_keys().collect();
    let table = contingency(labels, truth);
    let n = clusters.len().max(classes.len());
    let mut weight = vec![vec![0i64; n]; n];
    for (i, c) in clusters.iter().enumerate() {
        for (j, k) in classes.iter().enumerate() {
            weight[i][j] = table.get(&(*c, *k)).copied().unwrap_or(0) as i64;
        }
    }
    let cost: Vec<Vec<i64>> = weight.iter().map(|row| row.iter().map(|w| -w).collect()).collect();
    let assignment = hungarian(&cost);
    let hit: i64 = assignment.iter().enumerate().map(|(i, &j)| weight[i][j]).sum();
    Ok(F::from_count(hit as u64) / F::from_count(labels.len() as u64))
}

/// Minimum-cost perfect assignment on a square matrix. Returns the column
/// assigned to each row.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // Potentials over rows (u) and columns (v), 1-based with a sentinel column 0.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}

fn euclidean<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<F>().sqrt()
}

/// Mean silhouette over all points. Singleton clusters score zero.
/// `None` with fewer than two clusters or when every point is its own cluster.
pub fn silhouette<F: Real>(points: &[Vec<F>], labels: &[i64]) -> Result<Option<F>> {
    if points.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} points against {} labels",
            points.len(),
            labels.len()
        )));
    }
    let sizes = marginal(labels);
    if sizes.len() < 2 || sizes.len() == labels.len() {
        return Ok(None);
    }
    let mut total = F::zero();
    for (i, p) in points.iter().enumerate() {
        let own = labels[i];
        if sizes[&own] == 1 {
            continue;
        }
        let mut sums: BTreeMap<i64, F> = BTreeMap::new();
        for (j, q) in points.iter().enumerate() {
            if i != j {
                let e = sums.entry(labels[j]).or_insert(F::zero());
                *e = *e + euclidean(p, q);
            }
        }
        let a = sums[&own] / F::from_count(sizes[&own] - 1);
        let b = sums
            .iter()
            .filter(|(l, _)| **l != own)
            .map(|(l, s)| *s / F::from_count(sizes[l]))
            .fold(F::infinity(), F::min);
        let m = a.max(b);
        if m > F::zero() {
            total = total + (b - a) / m;
        }
    }
    Ok(Some(total / F::from_count(points.len() as u64)))
}

/// FM, ACC and purity against `truth`, silhouette of `labels` over `points`.
pub fn cluster_metrics<F: Real>(labels: &[i64], truth: &[i64], points: &[Vec<F>]) -> Result<ClusterMetrics<F>> {
    Ok(ClusterMetrics {
        fm: fowlkes_mallows(labels, truth)?,
        acc: accuracy(labels, truth)?,
        purity: purity(labels, truth)?,
        silhouette: silhouette(points, labels)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// Pair counts by enumerating every unordered pair.
    fn pair_oracle(labels: &[i64], truth: &[i64]) -> (u64, u64, u64) {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                match (labels[i] == labels[j], truth[i] == truth[j]) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    _ => {}
                }
            }
        }
        (tp, fp, fn_)
    }

    /// Best accuracy over every injective relabeling.
    fn acc_oracle(labels: &[i64], truth: &[i64]) -> f64 {
        let clusters: Vec<i64> = marginal(labels).into_keys().collect();
        let classes: Vec<i64> = marginal(truth).into_keys().collect();
        // Each cluster maps to a class index or to nothing (`classes.len()`).
        let base = classes.len() + 1;
        let mut best = 0;
        for code in 0..base.pow(clusters.len() as u32) {
            let map: Vec<usize> = (0..clusters.len()).map(|k| code / base.pow(k as u32) % base).collect();
            let assigned: Vec<usize> = map.iter().copied().filter(|&m| m < classes.len()).collect();
            if assigned.iter().collect::<BTreeSet<_>>().len() != assigned.len() {
                continue;
            }
            let hit = labels
                .iter()
                .zip(truth)
                .filter(|(l, t)| {
                    let m = map[clusters.iter().position(|c| c == *l).unwrap()];
                    m < classes.len() && classes[m] == **t
                })
                .count();
            best = best.max(hit);
        }
        best as f64 / labels.len() as f64
    }

    #[test]
    fn perfect_clustering() {
        let t = [0, 0, 1, 1, 2];
        let l = [7, 7, 3, 3, 9];
        assert_eq!(fowlkes_mallows::<f64>(&l, &t).unwrap(), 1.0);
        assert_eq!(accuracy::<f64>(&l, &t).unwrap(), 1.0);
        assert_eq!(purity::<f64>(&l, &t).unwrap(), 1.0);
    }

    #[test]
    fn aabb_against_abab() {
        let truth = [0, 0, 1, 1];
        let labels = [0, 1, 0, 1];
        let (tp, fp, fn_) = pair_oracle(&labels, &truth);
        assert_eq!((tp, fp, fn_), (0, 2, 2));
        assert_eq!(fowlkes_mallows::<f64>(&labels, &truth).unwrap(), 0.0);
        assert_eq!(accuracy::<f64>(&labels, &truth).unwrap(), acc_oracle(&labels, &truth));
        assert_eq!(accuracy::<f64>(&labels, &truth).unwrap(), 0.5);
        assert_eq!(purity::<f64>(&labels, &truth).unwrap(), 0.5);
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![0.0], vec![1.0]];
        assert_eq!(silhouette(&pts, &labels).unwrap(), Some(1.0));
    }

    #[test]
    fn one_cluster_has_no_silhouette() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert_eq!(silhouette(&pts, &[0, 0, 0]).unwrap(), None);
        let m = cluster_metrics(&[0, 0, 0], &[0, 0, 1], &pts).unwrap();
        assert!(m.silhouette.is_none());
    }

    #[test]
    fn silhouette_by_hand() {
        // a(0) = 1, b(0) = 4.5, s = 3.5/4.5
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![4.0], vec![5.0]];
        let s = silhouette(&pts, &[0, 0, 1, 1]).unwrap().unwrap();
        let s0 = 3.5 / 4.5;
        let s1 = (3.5 - 1.0) / 3.5;
        assert_relative_eq!(s, (s0 + s1 + s1 + s0) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(fowlkes_mallows::<f64>(&[0], &[0, 1]).is_err());
        assert!(purity::<f64>(&[], &[]).is_err());
    }

    #[test]
    fn hungarian_small() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = hungarian(&cost);
        let total: i64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5);
    }

    proptest! {
        #[test]
        fn against_oracles(pairs in prop::collection::vec((0i64..3, 0i64..3), 1..9)) {
            let labels: Vec<i64> = pairs.iter().map(|p| p.0).collect();
            let truth: Vec<i64> = pairs.iter().map(|p| p.1).collect();
            let (tp, fp, fn_) = pair_oracle(&labels, &truth);
            let fm: f64 = fowlkes_mallows(&labels, &truth).unwrap();
            if tp > 0 {
                prop_assert!((fm - tp as f64 / (((tp + fp) * (tp + fn_)) as f64).sqrt()).abs() < 1e-12);
            }
            prop_assert!((0.0..=1.0).contains(&fm));
            let acc: f64 = accuracy(&labels, &truth).unwrap();
            prop_assert!((acc - acc_oracle(&labels, &truth)).abs() < 1e-12);
            let pur: f64 = purity(&labels, &truth).unwrap();
            prop_assert!((0.0..=1.0).contains(&pur));
        }

        #[test]
        fn permutation_invariant(pairs in prop::collection::vec((0i64..3, 0i64..3), 2..9), rot in 0usize..8) {
            let labels: Vec<i64> = pairs.iter().map(|p| p.0).collect();
            let truth: Vec<i64> = pairs.iter().map(|p| p.1).collect();
            let k = rot % labels.len();
            let mut l2 = labels.clone();
            let mut t2 = truth.clone();
            l2.rotate_left(k);
            t2.rotate_left(k);
            prop_assert_eq!(fowlkes_mallows::<f64>(&labels, &truth).unwrap(), fowlkes_mallows::<f64>(&l2, &t2).unwrap());
            prop_assert_eq!(accuracy::<f64>(&labels, &truth).unwrap(), accuracy::<f64>(&l2, &t2).unwrap());
            prop_assert_eq!(purity::<f64>(&labels, &truth).unwrap(), purity::<f64>(&l2, &t2).unwrap());
        }

        #[test]
        fn refinement_is_pure(truth in prop::collection::vec(0i64..3, 1..10)) {
            let labels: Vec<i64> = truth.iter().enumerate().map(|(i, t)| t * 100 + (i as i64 % 2)).collect();
            prop_assert_eq!(purity::<f64>(&labels, &truth).unwrap(), 1.0);
        }

        #[test]
        fn silhouette_in_range(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, 0i64..3), 3..12)) {
            let points: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0, p.1]).collect();
            let labels: Vec<i64> = pts.iter().map(|p| p.2).collect();
            if let Some(s) = silhouette(&points, &labels).unwrap() {
                prop_assert!((-1.0..=1.0).contains(&s));
            }
        }
    }
}
