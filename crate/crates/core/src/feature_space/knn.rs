use std::cmp::Ordering;

use super::{Embedding, EmbeddingStore, FeatureError, SequenceId};
use crate::scalar::Scalar;

/// Distance used for neighbour search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Raw Euclidean distance on the stored features.
    #[default]
    Euclidean,
    /// Euclidean distance after scaling both vectors to unit length.
    NormalizedEuclidean,
}

impl Metric {
    pub fn distance<T: Scalar>(self, a: &Embedding<T>, b: &Embedding<T>) -> T {
        match self {
            Metric::Euclidean => a.distance(b),
            Metric::NormalizedEuclidean => a.normalized().distance(&b.normalized()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub id: SequenceId,
    pub distance: T,
}

/// The k nearest neighbours of a query, ascending by distance then id.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet<T> {
    neighbors: Vec<Neighbor<T>>,
}

impl<T: Scalar> NeighborSet<T> {
    pub fn as_slice(&self) -> &[Neighbor<T>] {
        &self.neighbors
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = SequenceId> + '_ {
        self.neighbors.iter().map(|n| n.id)
    }

    pub fn distance_sum(&self) -> T {
        self.neighbors.iter().map(|n| n.distance).sum()
    }
}

impl<T> IntoIterator for NeighborSet<T> {
    type Item = Neighbor<T>;
    type IntoIter = std::vec::IntoIter<Neighbor<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.neighbors.into_iter()
    }
}

/// Parameters of the kNN density estimate `k / (sum of k distances + epsilon)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams<T> {
    k: usize,
    epsilon: T,
    metric: Metric,
}

impl<T: Scalar> DensityParams<T> {
    pub const DEFAULT_K: usize = 10;
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    pub fn new(k: usize, epsilon: T) -> Result<Self, FeatureError> {
        if k == 0 {
            return Err(FeatureError::InvalidParameter(
                "k must be at least 1".into(),
            ));
        }
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err(FeatureError::InvalidParameter(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self {
            k,
            epsilon,
            metric: Metric::Euclidean,
        })
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }
}

impl<T: Scalar> Default for DensityParams<T> {
    fn default() -> Self {
        Self::new(Self::DEFAULT_K, T::lit(Self::DEFAULT_EPSILON)).expect("valid defaults")
    }
}

fn by_distance_then_id<T: Scalar>(a: &Neighbor<T>, b: &Neighbor<T>) -> Ordering {
    a.distance
        .partial_cmp(&b.distance)
        .unwrap_or(Ordering::Equal)
        .then(a.id.cmp(&b.id))
}

/// Exact brute-force kNN over arbitrary `(id, embedding)` pairs.
///
/// The result does not depend on the iteration order of `points`: ties in
/// distance are resolved by ascending id.
pub fn nearest_neighbors<'a, T, I>(
    points: I,
    query: &Embedding<T>,
    k: usize,
    exclude: Option<SequenceId>,
    metric: Metric,
) -> Result<NeighborSet<T>, FeatureError>
where
    T: Scalar,
    I: IntoIterator<Item = (SequenceId, &'a Embedding<T>)>,
{
    if k == 0 {
        return Err(FeatureError::InvalidParameter(
            "k must be at least 1".into(),
        ));
    }
    let query_n;
    let query = match metric {
        Metric::Euclidean => query,
        Metric::NormalizedEuclidean => {
            query_n = query.normalized();
            &query_n
        }
    };
    let mut candidates = Vec::new();
    for (id, point) in points {
        point.check_dim(query.dim())?;
        if Some(id) == exclude {
            continue;
        }
        let distance = match metric {
            Metric::Euclidean => point.distance(query),
            Metric::NormalizedEuclidean => point.normalized().distance(query),
        };
        candidates.push(Neighbor { id, distance });
    }
    if candidates.len() < k {
        return Err(FeatureError::InsufficientPoints {
            required: k,
            available: candidates.len(),
        });
    }
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k - 1, by_distance_then_id);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(by_distance_then_id);
    Ok(NeighborSet {
        neighbors: candidates,
    })
}

/// The `k` stored points closest to `query` in Euclidean distance, optionally
/// skipping the entry `exclude_id` (used when scoring a stored point itself).
pub fn knn_query<T: Scalar>(
    store: &EmbeddingStore<T>,
    query: &Embedding<T>,
    k: usize,
    exclude_id: Option<SequenceId>,
) -> Result<NeighborSet<T>, FeatureError> {
    query.check_dim(store.dim())?;
    nearest_neighbors(
        store.entries().map(|e| (e.id, &e.embedding)),
        query,
        k,
        exclude_id,
        Metric::Euclidean,
    )
}

/// kNN density `k / (sum_j ||query - f_j|| + epsilon)` over the `k` nearest
/// stored points. Always strictly positive.
pub fn knn_density<T: Scalar>(
    store: &EmbeddingStore<T>,
    query: &Embedding<T>,
    params: &DensityParams<T>,
    exclude_id: Option<SequenceId>,
) -> Result<T, FeatureError> {
    query.check_dim(store.dim())?;
    let neighbors = nearest_neighbors(
        store.entries().map(|e| (e.id, &e.embedding)),
        query,
        params.k,
        exclude_id,
        params.metric,
    )?;
    Ok(T::from_count(params.k) / (neighbors.distance_sum() + params.epsilon))
}

#[cfg(test)]
mod tests {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn e(v: &[f64]) -> Embedding<f64> {
        Embedding::new(v.to_vec()).unwrap()
    }

    fn random_store(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingStore<f64> {
        EmbeddingStore::from_embeddings((0..n).map(|_| {
            e(&(0..d)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<_>>())
        }))
        .unwrap()
    }

    /// Exhaustive reference: every distance, full sort.
    fn oracle(store: &EmbeddingStore<f64>, q: &Embedding<f64>, k: usize) -> Vec<(u64, f64)> {
        let mut all: Vec<(u64, f64)> = store
            .entries()
            .map(|en| {
                let s: f64 = en
                    .embedding
                    .as_slice()
                    .iter()
                    .zip(q.as_slice())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                (en.id.0, s.sqrt())
            })
            .collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }

    #[test]
    fn three_four_five_with_self_exclusion() {
        let store =
            EmbeddingStore::from_embeddings(vec![e(&[0.0, 0.0]), e(&[3.0, 4.0]), e(&[6.0, 8.0])])
                .unwrap();
        let n = knn_query(&store, &e(&[0.0, 0.0]), 1, Some(SequenceId(0))).unwrap();
        assert_eq!(
            n.as_slice(),
            &[Neighbor {
                id: SequenceId(1),
                distance: 5.0
            }]
        );
    }

    #[test]
    fn single_point_identity() {
        let store = EmbeddingStore::from_embeddings(vec![e(&[1.5, -2.0])]).unwrap();
        let n = knn_query(&store, &e(&[1.5, -2.0]), 1, None).unwrap();
        assert_eq!(n.as_slice()[0].distance, 0.0);
    }

    #[test]
    fn errors() {
        let store = EmbeddingStore::from_embeddings(vec![e(&[0.0, 0.0]), e(&[1.0, 0.0])]).unwrap();
        assert_eq!(
            knn_query(&store, &e(&[0.0]), 1, None),
            Err(FeatureError::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        );
        assert_eq!(
            knn_query(&store, &e(&[0.0, 0.0]), 2, Some(SequenceId(0))),
            Err(FeatureError::InsufficientPoints {
                required: 2,
                available: 1
            })
        );
        assert!(knn_query(&store, &e(&[0.0, 0.0]), 0, None).is_err());
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let store = random_store(&mut rng, 200, 16);
        for _ in 0..20 {
            let q = e(&(0..16)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<_>>());
            let got: Vec<(u64, f64)> = knn_query(&store, &q, 7, None)
                .unwrap()
                .into_iter()
                .map(|n| (n.id.0, n.distance))
                .collect();
            let want = oracle(&store, &q, 7);
            assert_eq!(got.len(), 7);
            for (g, w) in got.iter().zip(&want) {
                assert_eq!(g.0, w.0);
                assert!((g.1 - w.1).abs() <= 1e-12 * w.1.max(1.0));
            }
        }
    }

    #[test]
    fn ties_break_by_id_regardless_of_layout() {
        // four points equidistant from the origin
        let pts = [
            e(&[1.0, 0.0]),
            e(&[0.0, 1.0]),
            e(&[-1.0, 0.0]),
            e(&[0.0, -1.0]),
        ];
        let mut pairs: Vec<(SequenceId, &Embedding<f64>)> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (SequenceId(i as u64), p))
            .collect();
        let q = e(&[0.0, 0.0]);
        let reference =
            nearest_neighbors(pairs.iter().copied(), &q, 2, None, Metric::Euclidean).unwrap();
        assert_eq!(
            reference.ids().collect::<Vec<_>>(),
            [SequenceId(0), SequenceId(1)]
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            pairs.shuffle(&mut rng);
            let n =
                nearest_neighbors(pairs.iter().copied(), &q, 2, None, Metric::Euclidean).unwrap();
            assert_eq!(n, reference);
        }
    }

    #[test]
    fn density_examples() {
        let dup = EmbeddingStore::from_embeddings(vec![e(&[2.0, 2.0])]).unwrap();
        let p = DensityParams::new(1, 1e-8).unwrap();
        let rho = knn_density(&dup, &e(&[2.0, 2.0]), &p, None).unwrap();
        assert!((rho - 1e8).abs() <= 1e-6);

        // neighbours at 1 and 3: 2 / (4 + eps)
        let store =
            EmbeddingStore::from_embeddings(vec![e(&[1.0]), e(&[-3.0]), e(&[10.0])]).unwrap();
        let p = DensityParams::new(2, 1e-12).unwrap();
        let rho = knn_density(&store, &e(&[0.0]), &p, None).unwrap();
        assert!((rho - 0.5).abs() < 1e-12);
    }

    #[test]
    fn density_matches_distance_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 300;
        let d = 32;
        let k = 10;
        let eps = 1e-8;
        let store = random_store(&mut rng, n, d);
        let pts: Vec<&Embedding<f64>> = store.embeddings().collect();
        // full pairwise matrix
        let mut dm = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..n {
                dm[i][j] = pts[i]
                    .as_slice()
                    .iter()
                    .zip(pts[j].as_slice())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            }
        }
        let params = DensityParams::new(k, eps).unwrap();
        for i in (0..n).step_by(7) {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dm[i][j]).collect();
            row.sort_by(f64::total_cmp);
            let want = k as f64 / (row[..k].iter().sum::<f64>() + eps);
            let got = knn_density(&store, pts[i], &params, Some(SequenceId(i as u64))).unwrap();
            assert!(((got - want) / want).abs() <= 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn normalized_metric_ignores_scale() {
        let store = EmbeddingStore::from_embeddings(vec![e(&[10.0, 0.0]), e(&[0.0, 0.5])]).unwrap();
        let p = DensityParams::new(1, 1e-8)
            .unwrap()
            .with_metric(Metric::NormalizedEuclidean);
        let rho = knn_density(&store, &e(&[1.0, 0.0]), &p, None).unwrap();
        assert!((rho - 1e8).abs() < 1e-3);
        assert_eq!(DensityParams::<f64>::default().metric(), Metric::Euclidean);
    }

    #[test]
    fn works_in_single_precision() {
        let store = EmbeddingStore::from_embeddings(vec![
            Embedding::new(vec![0.0f32, 0.0]).unwrap(),
            Embedding::new(vec![3.0f32, 4.0]).unwrap(),
        ])
        .unwrap();
        let q = Embedding::new(vec![0.0f32, 0.0]).unwrap();
        let rho = knn_density(
            &store,
            &q,
            &DensityParams::new(1, 1e-3).unwrap(),
            Some(SequenceId(0)),
        )
        .unwrap();
        assert!((rho - 1.0 / 5.001).abs() < 1e-6);
    }

    #[test]
    fn invalid_params() {
        assert!(DensityParams::new(0, 1e-8).is_err());
        assert!(DensityParams::new(3, 0.0).is_err());
        assert!(DensityParams::new(3, f64::NAN).is_err());
    }
}
