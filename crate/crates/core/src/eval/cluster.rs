//! Noise filtering over sentence feature vectors.
//!
//! `Cm1` clusters the raw vectors and projects to two dimensions only for
//! reporting; `Cm2` projects first and clusters the projection.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::metrics::{cluster_metrics, ClusterMetrics};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Label given to points a density method leaves unassigned.
pub const NOISE: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Cm1,
    Cm2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// Two-means; the smaller cluster is noise.
    KMeans { max_iter: usize },
    /// `min_samples` counts the point itself.
    Dbscan { eps: f64, min_samples: usize },
    /// Noise when the mean distance to the `k` nearest neighbours exceeds the
    /// `quantile` of that score over all points.
    NearestNeighbors { k: usize, quantile: f64 },
    /// Noise when the local outlier factor exceeds `threshold`.
    Lof { k: usize, threshold: f64 },
}

impl Algorithm {
    pub fn kmeans() -> Self {
        Algorithm::KMeans { max_iter: 300 }
    }

    pub fn dbscan(eps: f64, min_samples: usize) -> Self {
        Algorithm::Dbscan { eps, min_samples }
    }

    pub fn nearest_neighbors(k: usize, quantile: f64) -> Self {
        Algorithm::NearestNeighbors { k, quantile }
    }

    pub fn lof(k: usize, threshold: f64) -> Self {
        Algorithm::Lof { k, threshold }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::KMeans { .. } => "kmeans",
            Algorithm::Dbscan { .. } => "dbscan",
            Algorithm::NearestNeighbors { .. } => "nearest_neighbors",
            Algorithm::Lof { .. } => "lof",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport<F> {
    pub labels: Vec<i64>,
    pub noise_mask: Vec<bool>,
    /// Present when ground truth was supplied.
    pub metrics: Option<ClusterMetrics<F>>,
    pub noise_rate: F,
    /// Two-dimensional principal-component projection of the input.
    pub projection: Vec<[F; 2]>,
}

impl<F: Real> ClusterReport<F> {
    pub fn noise_count(&self) -> usize {
        self.noise_mask.iter().filter(|&&m| m).count()
    }
}

fn dist<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<F>().sqrt()
}

fn check_points<F: Real>(points: &[Vec<F>], min: usize) -> Result<usize> {
    if points.len() < min {
        return Err(Error::InvalidArgument(format!(
            "{} points, at least {min} required",
            points.len()
        )));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidArgument("points of differing dimension".into()));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coordinate".into()));
    }
    Ok(d)
}

/// Projection onto the top `dims` principal components. Components are
/// ordered by variance and signed so their largest loading is positive;
/// missing components are zero.
pub fn pca<F: Real>(points: &[Vec<F>], dims: usize) -> Result<Vec<Vec<F>>> {
    let d = check_points(points, 1)?;
    let n = points.len();
    let x = DMatrix::<f64>::from_fn(n, d, |i, j| points[i][j].to_f64().expect("finite"));
    let mean = x.row_mean();
    let centered = DMatrix::<f64>::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut out = vec![vec![F::zero(); dims]; n];
    for (c, &k) in order.iter().take(dims).enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        let lead = v
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v = -v;
        }
        let scores = &centered * v;
        for i in 0..n {
            out[i][c] = F::lit(scores[i]);
        }
    }
    Ok(out)
}

fn kmeans2<F: Real>(points: &[Vec<F>], max_iter: usize) -> Vec<i64> {
    let d = points[0].len();
    let n = F::from_count(points.len() as u64);
    let mean: Vec<F> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<F>() / n).collect();
    let farthest = |from: &[F]| {
        let mut best = 0;
        for (i, p) in points.iter().enumerate() {
            if dist(p, from) > dist(&points[best], from) {
                best = i;
            }
        }
        best
    };
    let a = farthest(&mean);
    let b = farthest(&points[a]);
    let mut centers = [points[a].clone(), points[b].clone()];
    let mut labels = vec![0i64; points.len()];
    for _ in 0..max_iter {
        let next: Vec<i64> = points
            .iter()
            .map(|p| i64::from(dist(p, &centers[1]) < dist(p, &centers[0])))
            .collect();
        let changed = next != labels;
        labels = next;
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<F>> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c as i64)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            let m = F::from_count(members.len() as u64);
            *center = (0..d).map(|j| members.iter().map(|p| p[j]).sum::<F>() / m).collect();
        }
        if !changed {
            break;
        }
    }
    labels
}

fn dbscan<F: Real>(points: &[Vec<F>], eps: F, min_samples: usize) -> Vec<i64> {
    let n = points.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist(&points[i], &points[j]) <= eps).collect())
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_samples).collect();
    let mut labels = vec![NOISE; n];
    let mut next = 0;
    for i in 0..n {
        if labels[i] != NOISE || !core[i] {
            continue;
        }
        labels[i] = next;
        let mut stack = vec![i];
        while let Some(p) = stack.pop() {
            if !core[p] {
                continue;
            }
            for &q in &neighbours[p] {
                if labels[q] == NOISE {
                    labels[q] = next;
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    labels
}

/// Indices and distances of the `k` nearest other points, ties by index.
fn knn<F: Real>(points: &[Vec<F>], i: usize, k: usize) -> Vec<(usize, F)> {
    let mut all: Vec<(usize, F)> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, p)| (j, dist(&points[i], p)))
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite").then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Linear-interpolated quantile of `values`.
pub fn quantile<F: Real>(values: &[F], q: f64) -> F {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * F::lit(pos - lo as f64)
}

/// Mean distance to the `k` nearest neighbours of each point.
pub fn knn_scores<F: Real>(points: &[Vec<F>], k: usize) -> Vec<F> {
    (0..points.len())
        .map(|i| {
            let nb = knn(points, i, k);
            nb.iter().map(|x| x.1).sum::<F>() / F::from_count(nb.len() as u64)
        })
        .collect()
}

/// Local outlier factor of each point over `k` neighbours.
pub fn lof_scores<F: Real>(points: &[Vec<F>], k: usize) -> Vec<F> {
    let n = points.len();
    let nbrs: Vec<Vec<(usize, F)>> = (0..n).map(|i| knn(points, i, k)).collect();
    let kdist: Vec<F> = nbrs.iter().map(|nb| nb.last().map_or(F::zero(), |x| x.1)).collect();
    // Small offset keeps duplicated points finite.
    let lrd: Vec<F> = nbrs
        .iter()
        .map(|nb| {
            let reach: F = nb.iter().map(|&(j, d)| d.max(kdist[j])).sum::<F>() / F::from_count(nb.len() as u64);
            F::one() / (reach + F::lit(1e-10))
        })
        .collect();
    (0..n)
        .map(|i| {
            let mean: F = nbrs[i].iter().map(|&(j, _)| lrd[j]).sum::<F>() / F::from_count(nbrs[i].len() as u64);
            mean / lrd[i]
        })
        .collect()
}

/// Cluster ids and noise mask for one algorithm run.
pub fn run_algorithm<F: Real>(points: &[Vec<F>], algo: Algorithm) -> Result<(Vec<i64>, Vec<bool>)> {
    match algo {
        Algorithm::KMeans { max_iter } => {
            check_points(points, 2)?;
            let labels = kmeans2(points, max_iter);
            let ones = labels.iter().filter(|&&l| l == 1).count();
            // On a tie the cluster seeded second is noise.
            let noise = i64::from(ones <= points.len() - ones);
            let mask = labels.iter().map(|&l| l == noise).collect();
            Ok((labels, mask))
        }
        Algorithm::Dbscan { eps, min_samples } => {
            check_points(points, 2)?;
            if min_samples == 0 || eps.is_nan() || eps < 0.0 {
                return Err(Error::InvalidArgument(
                    "dbscan needs eps >= 0 and min_samples >= 1".into(),
                ));
            }
            let labels = dbscan(points, F::lit(eps), min_samples);
            let mask = labels.iter().map(|&l| l == NOISE).collect();
            Ok((labels, mask))
        }
        Algorithm::NearestNeighbors { k, quantile: q } => {
            check_points(points, k + 1)?;
            if k == 0 {
                return Err(Error::InvalidArgument("k must be positive".into()));
            }
            let scores = knn_scores(points, k);
            let threshold = quantile(&scores, q);
            Ok(threshold_labels(&scores, threshold))
        }
        Algorithm::Lof { k, threshold } => {
            check_points(points, k + 1)?;
            if k == 0 {
                return Err(Error::InvalidArgument("k must be positive".into()));
            }
            Ok(threshold_labels(&lof_scores(points, k), F::lit(threshold)))
        }
    }
}

fn threshold_labels<F: Real>(scores: &[F], threshold: F) -> (Vec<i64>, Vec<bool>) {
    let mask: Vec<bool> = scores.iter().map(|&s| s > threshold).collect();
    let labels = mask.iter().map(|&m| if m { NOISE } else { 0 }).collect();
    (labels, mask)
}

/// Splits `vectors` into noise and noise-free sets. With `truth`, metrics
/// compare the cluster labels against it; silhouette is measured in the
/// space that was clustered.
pub fn cluster_and_filter<F: Real>(
    vectors: &[Vec<F>],
    method: Method,
    algo: Algorithm,
    truth: Option<&[i64]>,
) -> Result<ClusterReport<F>> {
    check_points(vectors, 2)?;
    let projected = pca(vectors, 2)?;
    let space: &[Vec<F>] = match method {
        Method::Cm1 => vectors,
        Method::Cm2 => &projected,
    };
    let (labels, noise_mask) = run_algorithm(space, algo)?;
    let metrics = truth.map(|t| cluster_metrics(&labels, t, space)).transpose()?;
    let noise = noise_mask.iter().filter(|&&m| m).count();
    Ok(ClusterReport {
        noise_rate: F::from_count(noise as u64) / F::from_count(vectors.len() as u64),
        labels,
        noise_mask,
        metrics,
        projection: projected.iter().map(|p| [p[0], p[1]]).collect(),
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::planted;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn outliers(mask: &[bool]) -> Vec<usize> {
        mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    }

    #[test]
    fn planted_fixture_distances() {
        let (pts, truth) = planted();
        assert_eq!(pts.len(), 60);
        // Every blob point lies within 0.3 per axis of its centre, every
        // outlier is more than 5 away from anything else.
        for (p, t) in pts.iter().zip(&truth) {
            if *t < 2 {
                let c = 3.0 * *t as f64;
                assert!((p[0] - c).abs() <= 0.3 && (p[1] - c).abs() <= 0.3);
            } else {
                assert!(pts.iter().filter(|q| *q != p).all(|q| dist(p, q) > 5.0));
            }
        }
    }

    #[test]
    fn dbscan_and_lof_flag_outliers() {
        let (pts, _) = planted();
        for algo in [
            Algorithm::dbscan(0.5, 4),
            Algorithm::lof(20, 3.0),
            Algorithm::nearest_neighbors(5, 0.95),
        ] {
            for method in [Method::Cm1, Method::Cm2] {
                let r = cluster_and_filter(&pts, method, algo, None).unwrap();
                assert_eq!(outliers(&r.noise_mask), vec![57, 58, 59], "{} {method:?}", algo.name());
                assert_eq!(r.noise_rate, 0.05);
            }
        }
    }

    #[test]
    fn dbscan_labels() {
        let (pts, truth) = planted();
        let (labels, _) = run_algorithm(&pts, Algorithm::dbscan(0.5, 4)).unwrap();
        let expected: Vec<i64> = truth.iter().map(|&t| if t == 2 { NOISE } else { t }).collect();
        assert_eq!(labels, expected);
        let r = cluster_and_filter(&pts, Method::Cm1, Algorithm::dbscan(0.5, 4), Some(&expected)).unwrap();
        let m = r.metrics.unwrap();
        assert_eq!((m.fm, m.acc, m.purity), (1.0, 1.0, 1.0));
        assert!(m.silhouette.unwrap() > 0.5);
    }

    #[test]
    fn identical_points() {
        let pts = vec![vec![1.0f64, 2.0, 3.0, 4.0]; 10];
        let r = cluster_and_filter(&pts, Method::Cm1, Algorithm::dbscan(0.1, 3), None).unwrap();
        assert_eq!(r.noise_rate, 0.0);
        assert!(r.projection.iter().all(|p| *p == [0.0, 0.0]));
    }

    #[test]
    fn kmeans_split() {
        let mut pts = Vec::new();
        for i in 0..90 {
            pts.push(vec![(i % 10) as f64 * 0.01, (i / 10) as f64 * 0.01]);
        }
        for i in 0..10 {
            pts.push(vec![5.0 + i as f64 * 0.01, 5.0]);
        }
        // Centroid assignment oracle: nearest of the two blob centres.
        let c0 = [0.045, 0.04];
        let c1 = [5.045, 5.0];
        let oracle: Vec<bool> = pts.iter().map(|p| dist(p, &c1) < dist(p, &c0)).collect();
        let r = cluster_and_filter(&pts, Method::Cm2, Algorithm::kmeans(), None).unwrap();
        assert_eq!(r.noise_mask, oracle);
        assert_eq!(r.noise_count(), 10);
        assert_relative_eq!(r.noise_rate, 0.1);
    }

    #[test]
    fn too_few_points() {
        assert!(cluster_and_filter(&[vec![0.0f64]], Method::Cm1, Algorithm::kmeans(), None).is_err());
        let pts = vec![vec![0.0f64], vec![1.0], vec![2.0]];
        assert!(run_algorithm(&pts, Algorithm::lof(3, 1.5)).is_err());
        assert!(run_algorithm(&pts, Algorithm::nearest_neighbors(2, 0.9)).is_ok());
    }

    #[test]
    fn pca_axis() {
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![0.0, i as f64, 0.0]).collect();
        let p = pca(&pts, 2).unwrap();
        let first: Vec<f64> = p.iter().map(|x| x[0]).collect();
        for (a, b) in first.iter().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[0.0f64, 10.0], 0.5), 5.0);
        assert_eq!(quantile(&[3.0f64, 1.0, 2.0], 1.0), 3.0);
    }

    proptest! {
        #[test]
        fn report_invariants(pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 6..25), algo in 0usize..4) {
            let points: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0, p.1]).collect();
            let algo = [Algorithm::kmeans(), Algorithm::dbscan(0.8, 3), Algorithm::nearest_neighbors(3, 0.9), Algorithm::lof(4, 1.5)][algo];
            let truth: Vec<i64> = (0..points.len() as i64).map(|i| i % 2).collect();
            let r = cluster_and_filter(&points, Method::Cm1, algo, Some(&truth)).unwrap();
            let mean = r.noise_mask.iter().filter(|&&m| m).count() as f64 / points.len() as f64;
            prop_assert_eq!(r.noise_rate, mean);
            let m = r.metrics.unwrap();
            for v in [m.fm, m.acc, m.purity] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if let Some(s) = m.silhouette {
                prop_assert!((-1.0..=1.0).contains(&s));
            }
        }
    }
}
