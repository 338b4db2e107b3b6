use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

/// Per-column z-score scaling; constant columns are only centred.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let mean = crate::pipeline::centroid(rows)?;
        let n = rows.len() as f64;
        let scale = (0..mean.len())
            .map(|c| {
                let var = rows.iter().map(|r| (r[c] - mean[c]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Fraction of positive labels among the `k` Euclidean-nearest training rows
/// of each test row. Equal distances go to the lower training index.
pub fn knn_predict(train: &[Vec<f64>], positive: &[bool], test: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
    if train.is_empty() {
        return Err(Error::Empty("KNN needs at least one training row".into()));
    }
    if positive.len() != train.len() {
        return Err(Error::Dimension {
            expected: train.len(),
            got: positive.len(),
        });
    }
    if k == 0 || k > train.len() {
        return Err(Error::Parameter(format!("k must lie in 1..={}, got {k}", train.len())));
    }
    let width = train[0].len();
    if let Some((i, _)) = train.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(Error::Dimension {
            expected: width,
            got: train[i].len(),
        }
        .at_row(i));
    }
    test.par_iter()
        .enumerate()
        .map(|(t, row)| {
            if row.len() != width {
                return Err(Error::Dimension {
                    expected: width,
                    got: row.len(),
                }
                .at_row(t));
            }
            let mut dist: Vec<(f64, usize)> = train.iter().enumerate().map(|(i, r)| (sq_dist(r, row), i)).collect();
            let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < dist.len() {
                dist.select_nth_unstable_by(k - 1, by_key);
            }
            let votes = dist[..k].iter().filter(|&&(_, i)| positive[i]).count();
            Ok(votes as f64 / k as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle(train: &[Vec<f64>], positive: &[bool], q: &[f64], k: usize) -> f64 {
        let mut order: Vec<usize> = (0..train.len()).collect();
        let d = |i: usize| -> f64 { train[i].iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() };
        order.sort_by(|&a, &b| d(a).partial_cmp(&d(b)).unwrap().then(a.cmp(&b)));
        order[..k].iter().filter(|&&i| positive[i]).count() as f64 / k as f64
    }

    #[test]
    fn exact_match_with_k1() {
        let train = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, 5.0]];
        let pos = [false, true, false];
        let s = knn_predict(&train, &pos, &[vec![1.0, 1.0], vec![5.0, 5.0]], 1).unwrap();
        assert_eq!(s, vec![1.0, 0.0]);
    }

    #[test]
    fn vote_fraction() {
        let train = vec![vec![0.0], vec![0.1], vec![-0.1], vec![9.0]];
        let pos = [true, true, false, false];
        let s = knn_predict(&train, &pos, &[vec![0.0]], 3).unwrap();
        assert_eq!(s, vec![2.0 / 3.0]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let train = vec![vec![1.0], vec![-1.0], vec![1.0]];
        let s = knn_predict(&train, &[true, false, false], &[vec![0.0]], 1).unwrap();
        assert_eq!(s, vec![1.0]);
        let s = knn_predict(&train, &[false, true, true], &[vec![0.0]], 1).unwrap();
        assert_eq!(s, vec![0.0]);
    }

    #[test]
    fn rejects_bad_k_and_empty_train() {
        assert!(knn_predict(&[], &[], &[vec![0.0]], 1).is_err());
        assert!(knn_predict(&[vec![0.0]], &[true], &[vec![0.0]], 2).is_err());
        assert!(knn_predict(&[vec![0.0]], &[true], &[vec![0.0]], 0).is_err());
    }

    #[test]
    fn agrees_with_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let train: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..3).map(|_| (rng.random_range(0..5) as f64) * 0.5).collect())
            .collect();
        let pos: Vec<bool> = (0..60).map(|_| rng.random::<f64>() < 0.3).collect();
        let test: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..3).map(|_| rng.random_range(0.0..2.5)).collect())
            .collect();
        for k in [1, 3, 5, 7] {
            let got = knn_predict(&train, &pos, &test, k).unwrap();
            for (q, g) in test.iter().zip(got) {
                assert_eq!(g, oracle(&train, &pos, q, k));
            }
        }
    }

    #[test]
    fn standardizer_centres_and_scales() {
        let rows = vec![vec![1.0, 4.0], vec![3.0, 4.0]];
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.transform(&[1.0, 4.0]), vec![-1.0, 0.0]);
        assert_eq!(s.transform(&[3.0, 5.0]), vec![1.0, 1.0]);
    }
}
