use std::ops::Index;

use super::FeatureError;
use crate::scalar::Scalar;

/// A feature vector of finite reals, one per perceived frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    values: Vec<T>,
}

impl<T: Scalar> Embedding<T> {
    /// Builds an embedding, rejecting empty or non-finite vectors.
    pub fn new(values: Vec<T>) -> Result<Self, FeatureError> {
        if values.is_empty() {
            return Err(FeatureError::EmptyInput);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFiniteValue { index });
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Result<Self, FeatureError> {
        Self::new(vec![T::zero(); dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn squared_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| {
                let d = a - b;
                d * d
            })
            .sum()
    }

    pub fn distance(&self, other: &Self) -> T {
        self.squared_distance(other).sqrt()
    }

    pub fn norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Unit-length copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == T::zero() {
            return self.clone();
        }
        Self {
            values: self.values.iter().map(|&v| v / n).collect(),
        }
    }

    /// Converts between scalar widths. Fails if a value overflows the target.
    pub fn cast<U: Scalar>(&self) -> Result<Embedding<U>, FeatureError> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(index, v)| {
                U::from(*v)
                    .filter(|u| u.is_finite())
                    .ok_or(FeatureError::NonFiniteValue { index })
            })
            .collect::<Result<Vec<U>, _>>()?;
        Ok(Embedding { values })
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<(), FeatureError> {
        if self.dim() != expected {
            return Err(FeatureError::DimensionMismatch {
                expected,
                actual: self.dim(),
            });
        }
        Ok(())
    }
}

impl<T> Index<usize> for Embedding<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for Embedding<T> {
    type Error = FeatureError;

    fn try_from(values: Vec<T>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}
