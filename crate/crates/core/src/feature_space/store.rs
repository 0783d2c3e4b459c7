use std::collections::VecDeque;
use std::fmt;

use super::{Embedding, FeatureError};
use crate::scalar::Scalar;

/// Insertion ticket of a stored embedding. Monotonically increasing, never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SequenceId(pub u64);

impl fmt::Display for SequenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreEntry<T> {
    pub id: SequenceId,
    pub embedding: Embedding<T>,
}

/// Fixed-capacity, insertion-ordered embedding collection.
///
/// Entries are appended until the store is full (the patrol); afterwards the
/// only mutation is [`EmbeddingStore::replace_oldest`], which keeps the count
/// constant. Mutation needs `&mut self`, so the single-writer rule is enforced
/// by the borrow checker; shared references can be read from any thread.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore<T> {
    dim: usize,
    capacity: usize,
    entries: VecDeque<StoreEntry<T>>,
    next_id: u64,
    revision: u64,
}

impl<T: Scalar> EmbeddingStore<T> {
    pub fn new(dim: usize, capacity: usize) -> Result<Self, FeatureError> {
        if dim == 0 {
            return Err(FeatureError::InvalidParameter(
                "dim must be positive".into(),
            ));
        }
        if capacity == 0 {
            return Err(FeatureError::InvalidParameter(
                "capacity must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            capacity,
            entries: VecDeque::with_capacity(capacity),
            next_id: 0,
            revision: 0,
        })
    }

    /// A full store holding `embeddings` in order, capacity equal to their count.
    pub fn from_embeddings<I>(embeddings: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = Embedding<T>>,
    {
        let embeddings: Vec<_> = embeddings.into_iter().collect();
        let first = embeddings.first().ok_or(FeatureError::EmptyInput)?;
        let mut store = Self::new(first.dim(), embeddings.len())?;
        for e in embeddings {
            store.insert(e)?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, embedding: Embedding<T>) -> Result<SequenceId, FeatureError> {
        embedding.check_dim(self.dim)?;
        if self.is_full() {
            return Err(FeatureError::StoreFull {
                capacity: self.capacity,
            });
        }
        Ok(self.push(embedding))
    }

    /// Evicts the entry with the smallest sequence id and appends `embedding`.
    ///
    /// Returns the evicted id. Only valid once the store is full; on error the
    /// store is left untouched.
    pub fn replace_oldest(&mut self, embedding: Embedding<T>) -> Result<SequenceId, FeatureError> {
        embedding.check_dim(self.dim)?;
        if !self.is_full() {
            return Err(FeatureError::InvalidParameter(format!(
                "store holds {} of {} entries; replacement requires a full store",
                self.len(),
                self.capacity
            )));
        }
        let evicted = self
            .entries
            .pop_front()
            .expect("full store with positive capacity is nonempty");
        self.push(embedding);
        self.revision += 1;
        Ok(evicted.id)
    }

    fn push(&mut self, embedding: Embedding<T>) -> SequenceId {
        let id = SequenceId(self.next_id);
        self.next_id += 1;
        self.entries.push_back(StoreEntry { id, embedding });
        id
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Number of replacements applied since the store filled.
    #[inline]
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &StoreEntry<T>> + Clone {
        self.entries.iter()
    }

    pub fn embeddings(&self) -> impl ExactSizeIterator<Item = &Embedding<T>> + Clone {
        self.entries.iter().map(|e| &e.embedding)
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = SequenceId> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    pub fn get(&self, id: SequenceId) -> Option<&Embedding<T>> {
        // ids are sorted, so binary search over the deque works
        self.entries
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.entries[i].embedding)
    }
}
