//! Embedding-space geometry diagnostics.
//!
//! The variance profile mean-centers a set of embeddings and reports the
//! fraction of total variance carried by each principal component, the
//! standard anisotropy measure for unconstrained Euclidean spaces. A 2-D
//! projection onto the top two components is provided for plotting.

use serde::{Deserialize, Serialize};

use crate::evaluation::EmbeddingSet;
use crate::linalg::{jacobi_eigen, Matrix};
use crate::{Error, Result};

/// Explained-variance fractions in descending order; they sum to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub source: String,
    pub n_points: usize,
    pub dimension: usize,
    pub fractions: Vec<f64>,
}

impl VarianceProfile {
    /// CSV with `component,fraction,cumulative` rows, 1-indexed components.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("component,fraction,cumulative\n");
        let mut cumulative = 0.0;
        for (i, f) in self.fractions.iter().enumerate() {
            cumulative += f;
            out.push_str(&format!("{},{},{}\n", i + 1, f, cumulative));
        }
        out
    }
}

fn centered_matrix(embs: &EmbeddingSet) -> Result<(Matrix, usize, usize)> {
    let n = embs.len();
    let d = embs.dim();
    if n < 2 {
        return Err(Error::Evaluation(format!(
            "variance analysis needs >= 2 points, got {n}"
        )));
    }
    if d == 0 {
        return Err(Error::Evaluation("zero-dimensional embeddings".into()));
    }
    let mut mean = vec![0.0; d];
    for (_, v) in embs.iter() {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut centered = Matrix::zeros(n, d);
    for (row, (_, v)) in embs.iter().enumerate() {
        for (col, x) in v.iter().enumerate() {
            centered.set(row, col, x - mean[col]);
        }
    }
    Ok((centered, n, d))
}

/// Population covariance `X^T X / n` of the mean-centered data.
fn covariance(centered: &Matrix) -> Matrix {
    let n = centered.rows();
    let d = centered.cols();
    let mut cov = Matrix::zeros(d, d);
    for row in 0..n {
        let r = centered.row(row);
        for i in 0..d {
            for j in i..d {
                let v = cov.get(i, j) + r[i] * r[j];
                cov.set(i, j, v);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / n as f64;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    cov
}

/// Mean-centered PCA variance profile: eigenvalues of the covariance,
/// normalized to fractions of the total variance.
pub fn variance_profile(embs: &EmbeddingSet) -> Result<VarianceProfile> {
    let (centered, n, d) = centered_matrix(embs)?;
    let cov = covariance(&centered);
    let (mut eigenvalues, _) = jacobi_eigen(&cov);
    for v in eigenvalues.iter_mut() {
        // Clamp the Jacobi solver's tiny negative round-off.
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::Evaluation(
            "zero total variance: all points identical".into(),
        ));
    }
    let fractions = eigenvalues.iter().map(|v| v / total).collect();
    Ok(VarianceProfile {
        source: embs.source().to_string(),
        n_points: n,
        dimension: d,
        fractions,
    })
}

/// Sum of the first `k` explained-variance fractions.
pub fn top_k_mass(profile: &VarianceProfile, k: usize) -> Result<f64> {
    if k == 0 || k > profile.fractions.len() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in [1, {}], got {k}",
            profile.fractions.len()
        )));
    }
    Ok(profile.fractions[..k].iter().sum())
}

/// Coordinates along the top two principal axes. Each axis sign is fixed by
/// making its largest-magnitude loading positive, so output is deterministic.
pub fn pca_project_2d(embs: &EmbeddingSet) -> Result<Vec<(String, f64, f64)>> {
    if embs.len() < 3 {
        return Err(Error::Evaluation(format!(
            "2-D projection needs >= 3 points, got {}",
            embs.len()
        )));
    }
    let (centered, _, d) = centered_matrix(embs)?;
    let cov = covariance(&centered);
    let (eigenvalues, vectors) = jacobi_eigen(&cov);
    if eigenvalues[0] <= 0.0 {
        return Err(Error::Evaluation(
            "degenerate variance: all points identical".into(),
        ));
    }

    let axis = |col: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..d).map(|r| vectors.get(r, col)).collect();
        let mut max_idx = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[max_idx].abs() {
                max_idx = i;
            }
        }
        if v[max_idx] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        v
    };
    let ax1 = axis(0);
    let ax2 = if d > 1 { axis(1) } else { vec![0.0; d] };

    Ok(embs
        .iter()
        .enumerate()
        .map(|(row, (key, _))| {
            let r = centered.row(row);
            let x: f64 = r.iter().zip(&ax1).map(|(a, b)| a * b).sum();
            let y: f64 = r.iter().zip(&ax2).map(|(a, b)| a * b).sum();
            (key.to_string(), x, y)
        })
        .collect())
}

/// CSV with `key,x,y,category` rows; the category column may be empty.
pub fn projection_csv(
    projection: &[(String, f64, f64)],
    category_of: impl Fn(&str) -> Option<String>,
) -> String {
    let mut out = String::from("key,x,y,category\n");
    for (key, x, y) in projection {
        let category = category_of(key).unwrap_or_default();
        out.push_str(&format!("{key},{x},{y},{category}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[(&str, &[f64])]) -> EmbeddingSet {
        let mut s = EmbeddingSet::new("test", items[0].1.len());
        for (k, v) in items {
            s.push(*k, v.to_vec()).unwrap();
        }
        s
    }

    #[test]
    fn collinear_points_are_rank_one() {
        let embs = set(&[
            ("a", &[0.0, 0.0, 0.0]),
            ("b", &[1.0, 2.0, -1.0]),
            ("c", &[2.0, 4.0, -2.0]),
            ("d", &[3.0, 6.0, -3.0]),
        ]);
        let profile = variance_profile(&embs).unwrap();
        assert!((profile.fractions[0] - 1.0).abs() < 1e-12);
        assert!(profile.fractions[1].abs() < 1e-12);
        assert!(profile.fractions[2].abs() < 1e-12);
    }

    #[test]
    fn square_corners_split_evenly() {
        let embs = set(&[
            ("a", &[1.0, 1.0, 5.0]),
            ("b", &[1.0, -1.0, 5.0]),
            ("c", &[-1.0, 1.0, 5.0]),
            ("d", &[-1.0, -1.0, 5.0]),
        ]);
        let profile = variance_profile(&embs).unwrap();
        assert!((profile.fractions[0] - 0.5).abs() < 1e-12);
        assert!((profile.fractions[1] - 0.5).abs() < 1e-12);
        assert!(profile.fractions[2].abs() < 1e-12);
    }

    #[test]
    fn fractions_sum_to_one_and_decrease() {
        let embs = set(&[
            ("a", &[0.3, -1.0, 2.0, 0.1]),
            ("b", &[1.3, 0.4, -0.7, 0.9]),
            ("c", &[-2.0, 0.8, 0.3, -0.4]),
            ("d", &[0.5, 1.9, -1.2, 0.7]),
            ("e", &[-0.9, -0.3, 0.8, -1.5]),
        ]);
        let profile = variance_profile(&embs).unwrap();
        let sum: f64 = profile.fractions.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        for w in profile.fractions.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        assert!((top_k_mass(&profile, profile.dimension).unwrap() - 1.0).abs() < 1e-9);
        let t1 = top_k_mass(&profile, 1).unwrap();
        let t2 = top_k_mass(&profile, 2).unwrap();
        assert!(t2 >= t1);
    }

    #[test]
    fn profile_invariant_under_translation_and_scale() {
        let base = [
            [0.3, -1.0, 2.0],
            [1.3, 0.4, -0.7],
            [-2.0, 0.8, 0.3],
            [0.5, 1.9, -1.2],
        ];
        let embs = set(&[
            ("a", &base[0]),
            ("b", &base[1]),
            ("c", &base[2]),
            ("d", &base[3]),
        ]);
        let shifted: Vec<Vec<f64>> = base
            .iter()
            .map(|r| r.iter().map(|x| 3.0 * x + 7.0).collect())
            .collect();
        let embs2 = set(&[
            ("a", &shifted[0]),
            ("b", &shifted[1]),
            ("c", &shifted[2]),
            ("d", &shifted[3]),
        ]);
        let p1 = variance_profile(&embs).unwrap();
        let p2 = variance_profile(&embs2).unwrap();
        for (a, b) in p1.fractions.iter().zip(&p2.fractions) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_preserves_planar_distances() {
        let embs = set(&[
            ("a", &[1.0, 1.0, 0.0]),
            ("b", &[1.0, -1.0, 0.0]),
            ("c", &[-1.0, 1.0, 0.0]),
            ("d", &[-1.0, -1.0, 0.0]),
        ]);
        let proj = pca_project_2d(&embs).unwrap();
        let find = |k: &str| proj.iter().find(|(key, _, _)| key == k).unwrap();
        let dist = |p: &(String, f64, f64), q: &(String, f64, f64)| {
            ((p.1 - q.1).powi(2) + (p.2 - q.2).powi(2)).sqrt()
        };
        // Original square side 2, diagonal 2*sqrt(2).
        assert!((dist(find("a"), find("b")) - 2.0).abs() < 1e-9);
        assert!((dist(find("a"), find("d")) - 2.0 * 2.0f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn collinear_projection_has_zero_y() {
        let embs = set(&[
            ("a", &[0.0, 0.0]),
            ("b", &[1.0, 1.0]),
            ("c", &[2.0, 2.0]),
            ("d", &[3.0, 3.0]),
        ]);
        let proj = pca_project_2d(&embs).unwrap();
        for (_, _, y) in proj {
            assert!(y.abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_inputs_error() {
        let embs = set(&[("a", &[1.0, 1.0]), ("b", &[1.0, 1.0]), ("c", &[1.0, 1.0])]);
        assert!(variance_profile(&embs).is_err());
        assert!(pca_project_2d(&embs).is_err());
        let profile = VarianceProfile {
            source: "x".into(),
            n_points: 2,
            dimension: 2,
            fractions: vec![0.7, 0.3],
        };
        assert!(top_k_mass(&profile, 0).is_err());
        assert!(top_k_mass(&profile, 3).is_err());
    }
}
