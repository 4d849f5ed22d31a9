//! Average-linkage agglomerative clustering of model mastery profiles under
//! cosine distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcf::MasteryMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Cluster ids: `0..n` are the included models in input order, merged
    /// clusters get `n, n + 1, …` in merge order.
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub model_ids: Vec<String>,
    /// Cluster label per model; `None` for excluded (all-zero) rows.
    /// Labels are numbered by the first model they contain.
    pub assignments: Vec<Option<usize>>,
    /// Positions (into `model_ids`) of the rows that entered clustering.
    pub included: Vec<usize>,
    pub merges: Vec<Merge>,
    pub n_clusters: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (1.0 - dot / (na * nb)).max(0.0)
}

/// Clusters arbitrary row vectors. Ties in merge distance go to the
/// lexicographically smallest cluster-id pair.
pub fn cluster_rows(rows: &[Vec<f64>], ids: &[String], n_clusters: usize) -> Result<Clustering> {
    assert_eq!(rows.len(), ids.len());
    let mut warnings = Vec::new();
    let included: Vec<usize> = (0..rows.len())
        .filter(|&r| {
            let nonzero = rows[r].iter().any(|&v| v != 0.0);
            if !nonzero {
                let msg = format!("model {:?} has an all-zero mastery row and is excluded", ids[r]);
                log::warn!("{msg}");
                warnings.push(msg);
            }
            nonzero
        })
        .collect();
    let n = included.len();
    if n < 2 {
        return Err(Error::Precondition(format!("clustering needs at least two non-zero rows, got {n}")));
    }
    if n_clusters == 0 || n_clusters > n {
        return Err(Error::Precondition(format!("n_clusters must be in 1..={n}, got {n_clusters}")));
    }

    let base: Vec<Vec<f64>> = included
        .iter()
        .map(|&a| included.iter().map(|&b| cosine_distance(&rows[a], &rows[b])).collect())
        .collect();

    // active clusters: (id, members as positions into `included`)
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut next_id = n;
    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in 0..active.len() {
            for y in x + 1..active.len() {
                let (ma, mb) = (&active[x].1, &active[y].1);
                let total: f64 = ma.iter().flat_map(|&p| mb.iter().map(move |&q| (p, q))).map(|(p, q)| base[p][q]).sum();
                let d = total / (ma.len() * mb.len()) as f64;
                let key = (active[x].0.min(active[y].0), active[x].0.max(active[y].0));
                let better = match best {
                    None => true,
                    Some((bd, bx, by)) => {
                        let bkey = (active[bx].0.min(active[by].0), active[bx].0.max(active[by].0));
                        d < bd || (d == bd && key < bkey)
                    }
                };
                if better {
                    best = Some((d, x, y));
                }
            }
        }
        let (d, x, y) = best.expect("two or more active clusters");
        let (id_b, mb) = active.remove(y);
        let (id_a, ma) = active.remove(x);
        let mut members = ma;
        members.extend(mb);
        members.sort_unstable();
        merges.push(Merge {
            a: id_a.min(id_b),
            b: id_a.max(id_b),
            distance: d,
            size: members.len(),
        });
        active.push((next_id, members));
        next_id += 1;
    }

    // replay the first n − n_clusters merges
    let mut group: Vec<usize> = (0..n).collect();
    let mut members_of: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for m in merges.iter().take(n - n_clusters) {
        let mut joined = members_of[m.a].clone();
        joined.extend(&members_of[m.b]);
        members_of.push(joined);
    }
    let mut alive: Vec<bool> = vec![true; members_of.len()];
    for m in merges.iter().take(n - n_clusters) {
        alive[m.a] = false;
        alive[m.b] = false;
    }
    let mut clusters: Vec<&Vec<usize>> = members_of.iter().zip(&alive).filter(|(_, &a)| a).map(|(c, _)| c).collect();
    clusters.sort_by_key(|c| *c.iter().min().expect("non-empty cluster"));
    for (label, c) in clusters.iter().enumerate() {
        for &p in c.iter() {
            group[p] = label;
        }
    }
    let mut assignments = vec![None; rows.len()];
    for (p, &r) in included.iter().enumerate() {
        assignments[r] = Some(group[p]);
    }
    Ok(Clustering {
        model_ids: ids.to_vec(),
        assignments,
        included,
        merges,
        n_clusters,
        warnings,
    })
}

/// Clusters the rows of the raw mastery matrix (cosine distance ignores
/// row scale, so no normalization is needed).
pub fn cluster_models(mastery: &MasteryMatrix, n_clusters: usize) -> Result<Clustering> {
    let rows: Vec<Vec<f64>> = mastery.raw.outer_iter().map(|r| r.to_vec()).collect();
    cluster_rows(&rows, &mastery.model_ids, n_clusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("m{i}")).collect()
    }

    #[test]
    fn orthogonal_rows() {
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
    }

    #[test]
    fn identical_rows_merge_first() {
        let rows = vec![vec![1.0, 0.0, 0.2], vec![0.3, 0.9, 0.1], vec![1.0, 0.0, 0.2]];
        let c = cluster_rows(&rows, &ids(3), 2).unwrap();
        assert_eq!((c.merges[0].a, c.merges[0].b), (0, 2));
        assert_eq!(c.merges[0].distance, 0.0);
        assert_eq!(c.assignments, vec![Some(0), Some(1), Some(0)]);
    }

    #[test]
    fn ties_break_toward_lowest_pair() {
        // all three pairwise distances equal
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let c = cluster_rows(&rows, &ids(3), 1).unwrap();
        assert_eq!((c.merges[0].a, c.merges[0].b), (0, 1));
        assert_eq!((c.merges[1].a, c.merges[1].b), (2, 3));
        assert_eq!(c.merges[1].size, 3);
    }

    #[test]
    fn zero_rows_are_excluded() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 0.0], vec![0.9, 0.1], vec![0.0, 1.0]];
        let c = cluster_rows(&rows, &ids(4), 2).unwrap();
        assert_eq!(c.assignments, vec![Some(0), None, Some(0), Some(1)]);
        assert_eq!(c.warnings.len(), 1);
        assert!(cluster_rows(&[vec![1.0]], &ids(1), 1).is_err());
    }

    #[test]
    fn average_linkage_distance() {
        // {0,1} then joined with 2: mean of d(0,2), d(1,2)
        let rows = vec![vec![1.0, 0.0], vec![1.0, 0.1], vec![0.0, 1.0]];
        let c = cluster_rows(&rows, &ids(3), 1).unwrap();
        let want = (cosine_distance(&rows[0], &rows[2]) + cosine_distance(&rows[1], &rows[2])) / 2.0;
        assert!((c.merges[1].distance - want).abs() < 1e-15);
    }
}
