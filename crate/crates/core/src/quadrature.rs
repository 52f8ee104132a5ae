//! Quadrature weights on sampled surfaces from nearest-neighbour distances.

use rayon::prelude::*;

fn sorted_neighbour_d2(points: &[[f64; 4]], i: usize, k: usize) -> Vec<(f64, usize)> {
    let p = &points[i];
    let mut d: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, q)| ((0..4).map(|m| (p[m] - q[m]).powi(2)).sum::<f64>(), j))
        .collect();
    let k = k.min(d.len());
    if k > 0 {
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
        d.truncate(k);
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    d
}

/// Area element per sample of a point cloud on a 2-dimensional surface.
///
/// For a locally uniform planar density `ν`, the squared distance to the j-th
/// neighbour has mean `j / (π ν)`, so `2π Σ_{j<=k} r_j² / (k(k+1))` estimates
/// `1/ν` with less variance than the k-th distance alone.
pub fn knn_weights(points: &[[f64; 4]], k: usize) -> Vec<f64> {
    if points.len() < 2 {
        return vec![0.0; points.len()];
    }
    let k = k.min(points.len() - 1);
    let norm = 2.0 * std::f64::consts::PI / (k * (k + 1)) as f64;
    (0..points.len())
        .into_par_iter()
        .map(|i| norm * sorted_neighbour_d2(points, i, k).iter().map(|(d, _)| d).sum::<f64>())
        .collect()
}

/// Number of samples whose neighbour centroid is displaced by more than
/// `0.35 r_k`, the signature of a point on the rim of a bounded patch.
pub fn edge_point_count(points: &[[f64; 4]], k: usize) -> usize {
    if points.len() <= k {
        return points.len();
    }
    (0..points.len())
        .into_par_iter()
        .filter(|&i| {
            let nb = sorted_neighbour_d2(points, i, k);
            let rk = nb.last().map(|(d, _)| d.sqrt()).unwrap_or(0.0);
            let mut c = [0.0; 4];
            for (_, j) in &nb {
                for m in 0..4 {
                    c[m] += (points[*j][m] - points[i][m]) / nb.len() as f64;
                }
            }
            let off = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            off > 0.35 * rk
        })
        .count()
}
