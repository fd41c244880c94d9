//! Synthetic minority oversampling.

use rand::Rng as _;

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_K_NEIGHBORS: usize = 5;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest other rows, nearest first, ties by index.
fn nearest(rows: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..rows.len())
        .filter(|&j| j != i)
        .map(|j| (sq_dist(&rows[i], &rows[j]), j))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

/// `target_count - minority.len()` synthetic rows, each on the segment from
/// a random minority row to one of its `k` nearest minority neighbours.
/// A lone minority row is duplicated.
pub fn smote(
    minority: &[Vec<f64>],
    target_count: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if minority.is_empty() {
        return Err(Error::invalid("SMOTE needs at least one minority row"));
    }
    if k == 0 {
        return Err(Error::invalid("SMOTE needs k_neighbors >= 1"));
    }
    let needed = target_count.saturating_sub(minority.len());
    if needed == 0 {
        return Ok(Vec::new());
    }
    if minority.len() == 1 {
        return Ok(vec![minority[0].clone(); needed]);
    }
    let k = k.min(minority.len() - 1);
    let neighbours: Vec<Vec<usize>> = (0..minority.len())
        .map(|i| nearest(minority, i, k))
        .collect();
    let mut rng = seed::rng(seed, &[0x5307e]);
    Ok((0..needed)
        .map(|_| {
            let i = rng.gen_range(0..minority.len());
            let j = neighbours[i][rng.gen_range(0..k)];
            let u: f64 = rng.gen();
            minority[i]
                .iter()
                .zip(&minority[j])
                .map(|(&a, &b)| a + u * (b - a))
                .collect()
        })
        .collect())
}

/// Oversamples the smaller class until both classes have equal counts.
/// Synthetic rows are appended after the originals.
pub fn balance(data: &Dataset, k: usize, seed: u64) -> Result<Dataset> {
    let (spam, benign) = data.class_counts();
    if spam == 0 || benign == 0 {
        return Err(Error::SingleClass);
    }
    let minority_label = spam < benign;
    let minority: Vec<Vec<f64>> = data
        .x
        .iter()
        .zip(&data.y)
        .filter(|(_, &y)| y == minority_label)
        .map(|(x, _)| x.clone())
        .collect();
    let mut out = data.clone();
    for row in smote(&minority, spam.max(benign), k, seed)? {
        out.push(row, minority_label);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nothing_to_add_at_target() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(smote(&rows, 2, 5, 0).unwrap().is_empty());
        assert!(smote(&rows, 1, 5, 0).unwrap().is_empty());
    }

    #[test]
    fn two_points_give_points_on_the_segment() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let out = smote(&rows, 50, 1, 3).unwrap();
        assert_eq!(out.len(), 48);
        for p in out {
            assert_eq!(p[0], p[1]);
            assert!((0.0..=1.0).contains(&p[0]));
        }
    }

    #[test]
    fn single_point_is_duplicated() {
        assert_eq!(
            smote(&[vec![2.0, 3.0]], 4, 5, 0).unwrap(),
            vec![vec![2.0, 3.0]; 3]
        );
    }

    #[test]
    fn invalid_arguments() {
        assert!(smote(&[], 3, 5, 0).is_err());
        assert!(smote(&[vec![0.0]], 3, 0, 0).is_err());
    }

    #[test]
    fn balance_equalizes_classes() {
        let mut d = Dataset::new("n");
        for i in 0..10 {
            d.push(vec![i as f64], false);
        }
        for i in 0..3 {
            d.push(vec![100.0 + i as f64], true);
        }
        let b = balance(&d, 5, 1).unwrap();
        assert_eq!(b.class_counts(), (10, 10));
        assert_eq!(&b.x[..13], &d.x[..]);
    }

    proptest! {
        #[test]
        fn synthetic_rows_stay_in_the_bounding_box(
            rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 2..12),
            extra in 1usize..30,
            seed in any::<u64>(),
        ) {
            // Each synthetic row is a convex combination of two minority
            // rows, so it lies inside the per-coordinate range.
            let out = smote(&rows, rows.len() + extra, 5, seed).unwrap();
            prop_assert_eq!(out.len(), extra);
            for p in &out {
                for (c, v) in p.iter().enumerate() {
                    let lo = rows.iter().map(|r| r[c]).fold(f64::INFINITY, f64::min);
                    let hi = rows.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
                }
                // On a segment between two rows.
                let on_segment = rows.iter().enumerate().any(|(i, a)| rows.iter().skip(i + 1).any(|b| {
                    let d = sq_dist(a, b).sqrt();
                    (sq_dist(a, p).sqrt() + sq_dist(p, b).sqrt() - d).abs() < 1e-9
                }));
                prop_assert!(on_segment || rows.iter().any(|r| sq_dist(r, p) < 1e-18));
            }
        }
    }
}
