use super::{Embedding, FeatureError};
use crate::scalar::Scalar;

/// Componentwise arithmetic mean.
///
/// Accumulated as offsets from the first embedding, so identical inputs give
/// back that embedding exactly.
pub fn centroid<'a, T, I>(embeddings: I) -> Result<Embedding<T>, FeatureError>
where
    T: Scalar,
    I: IntoIterator<Item = &'a Embedding<T>>,
{
    let mut iter = embeddings.into_iter();
    let origin = iter.next().ok_or(FeatureError::EmptyInput)?.as_slice();
    let mut offsets = vec![T::zero(); origin.len()];
    let mut count = 1usize;
    for e in iter {
        e.check_dim(origin.len())?;
        for ((acc, &v), &o) in offsets.iter_mut().zip(e.as_slice()).zip(origin) {
            *acc = *acc + (v - o);
        }
        count += 1;
    }
    let n = T::from_count(count);
    Embedding::new(
        origin
            .iter()
            .zip(offsets)
            .map(|(&o, s)| o + s / n)
            .collect(),
    )
}

/// Global deviation: mean Euclidean distance of the embeddings to their centroid.
///
/// Zero exactly when all embeddings coincide.
pub fn global_deviation<'a, T, I>(embeddings: I) -> Result<T, FeatureError>
where
    T: Scalar,
    I: IntoIterator<Item = &'a Embedding<T>>,
    I::IntoIter: Clone,
{
    let iter = embeddings.into_iter();
    let center = centroid(iter.clone())?;
    let (total, count) = iter.fold((T::zero(), 0usize), |(acc, n), e| {
        (acc + e.distance(&center), n + 1)
    });
    Ok(total / T::from_count(count))
}
