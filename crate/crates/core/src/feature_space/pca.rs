use super::{centroid, Embedding, FeatureError};
use crate::scalar::Scalar;

/// Matrices up to this order are diagonalised directly with cyclic Jacobi;
/// larger problems use block subspace iteration on the implicit covariance.
const DIRECT_LIMIT: usize = 256;
const MAX_JACOBI_SWEEPS: usize = 100;
const MAX_SUBSPACE_ITERS: usize = 2000;
const SUBSPACE_OVERSAMPLE: usize = 8;

/// A fitted principal-component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T> {
    mean: Vec<T>,
    /// Unit principal directions, one row per output dimension.
    components: Vec<Vec<T>>,
    /// Sum of squared centred coordinates along each direction.
    variances: Vec<T>,
    coordinates: Vec<Vec<T>>,
}

impl<T: Scalar> Projection<T> {
    /// Projected coordinates, one row per input embedding.
    pub fn coordinates(&self) -> &[Vec<T>] {
        &self.coordinates
    }

    pub fn into_coordinates(self) -> Vec<Vec<T>> {
        self.coordinates
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    /// Variance captured by each direction (unnormalised: sum of squares).
    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    /// Projects a new point with the fitted mean and directions.
    pub fn transform(&self, e: &Embedding<T>) -> Result<Vec<T>, FeatureError> {
        e.check_dim(self.mean.len())?;
        let centred: Vec<T> = e
            .as_slice()
            .iter()
            .zip(&self.mean)
            .map(|(&x, &m)| x - m)
            .collect();
        Ok(self.components.iter().map(|c| dot(c, &centred)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Solver {
    Auto,
    #[cfg_attr(not(test), allow(dead_code))]
    Direct,
    #[cfg_attr(not(test), allow(dead_code))]
    Subspace,
}

/// Mean-centred projection onto the top `out_dim` principal directions.
///
/// Each direction is oriented so that its first nonzero loading is positive,
/// making the output deterministic.
pub fn pca_project<T: Scalar>(
    embeddings: &[Embedding<T>],
    out_dim: usize,
) -> Result<Projection<T>, FeatureError> {
    pca_project_with(embeddings, out_dim, Solver::Auto)
}

pub(crate) fn pca_project_with<T: Scalar>(
    embeddings: &[Embedding<T>],
    out_dim: usize,
    solver: Solver,
) -> Result<Projection<T>, FeatureError> {
    if embeddings.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let n = embeddings.len();
    let d = embeddings[0].dim();
    if n < 2 {
        return Err(FeatureError::InvalidParameter(
            "projection needs at least two points".into(),
        ));
    }
    if out_dim == 0 || out_dim > n.min(d) {
        return Err(FeatureError::InvalidParameter(format!(
            "out_dim {out_dim} must lie in 1..={}",
            n.min(d)
        )));
    }
    let mean = centroid(embeddings)?.into_vec();
    let distinct = count_distinct(embeddings);
    if distinct < out_dim {
        return Err(FeatureError::RankDeficient {
            distinct,
            requested: out_dim,
        });
    }
    let centred: Vec<Vec<T>> = embeddings
        .iter()
        .map(|e| {
            e.as_slice()
                .iter()
                .zip(&mean)
                .map(|(&x, &m)| x - m)
                .collect()
        })
        .collect();

    let use_direct = match solver {
        Solver::Direct => true,
        Solver::Subspace => false,
        Solver::Auto => n.min(d) <= DIRECT_LIMIT,
    };
    let (mut components, variances) = if use_direct {
        direct_directions(&centred, d, out_dim)
    } else {
        subspace_directions(&centred, d, out_dim)
    };
    for c in components.iter_mut() {
        orient(c);
    }
    let coordinates = centred
        .iter()
        .map(|row| components.iter().map(|c| dot(c, row)).collect())
        .collect();
    Ok(Projection {
        mean,
        components,
        variances,
        coordinates,
    })
}

fn count_distinct<T: Scalar>(embeddings: &[Embedding<T>]) -> usize {
    let mut rows: Vec<&[T]> = embeddings.iter().map(|e| e.as_slice()).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows.dedup();
    rows.len()
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn orient<T: Scalar>(v: &mut [T]) {
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let tol = scale * T::lit(1e-10);
    if let Some(first) = v.iter().find(|x| x.abs() > tol) {
        if *first < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenpairs of the smaller of the covariance (d x d) or Gram (n x n) matrix.
fn direct_directions<T: Scalar>(
    centred: &[Vec<T>],
    d: usize,
    out_dim: usize,
) -> (Vec<Vec<T>>, Vec<T>) {
    let n = centred.len();
    if d <= n {
        let mut cov = vec![T::zero(); d * d];
        for row in centred {
            for i in 0..d {
                let ri = row[i];
                for j in i..d {
                    cov[i * d + j] = cov[i * d + j] + ri * row[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                cov[i * d + j] = cov[j * d + i];
            }
        }
        let (values, vectors) = symmetric_eigen(cov, d);
        let dirs = (0..out_dim)
            .map(|c| (0..d).map(|r| vectors[r * d + c]).collect())
            .collect();
        (
            dirs,
            values[..out_dim]
                .iter()
                .map(|&v| v.max(T::zero()))
                .collect(),
        )
    } else {
        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let g = dot(&centred[i], &centred[j]);
                gram[i * n + j] = g;
                gram[j * n + i] = g;
            }
        }
        let (values, vectors) = symmetric_eigen(gram, n);
        let top = values[0].max(T::zero());
        let floor = top * T::epsilon() * T::from_count(n.max(d)) * T::lit(16.0);
        let mut dirs: Vec<Vec<T>> = Vec::with_capacity(out_dim);
        let mut vars = Vec::with_capacity(out_dim);
        for c in 0..out_dim {
            let lambda = values[c];
            let dir = if lambda > floor && lambda > T::zero() {
                let mut v = vec![T::zero(); d];
                for (i, row) in centred.iter().enumerate() {
                    let u = vectors[i * n + c];
                    for (acc, &x) in v.iter_mut().zip(row) {
                        *acc = *acc + u * x;
                    }
                }
                let s = norm(&v);
                v.iter_mut().for_each(|x| *x = *x / s);
                v
            } else {
                complete_basis(&dirs, d)
            };
            vars.push(lambda.max(T::zero()));
            dirs.push(dir);
        }
        (dirs, vars)
    }
}

/// First standard basis vector not already spanned, orthonormalised against `basis`.
fn complete_basis<T: Scalar>(basis: &[Vec<T>], d: usize) -> Vec<T> {
    for axis in 0..d {
        let mut v = vec![T::zero(); d];
        v[axis] = T::one();
        for b in basis {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, &y)| *x = *x - p * y);
        }
        let s = norm(&v);
        if s > T::lit(1e-3) {
            v.iter_mut().for_each(|x| *x = *x / s);
            return v;
        }
    }
    unreachable!("fewer than d directions requested")
}

/// Cyclic Jacobi eigendecomposition of a symmetric row-major matrix.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// the columns of a row-major matrix.
pub(crate) fn symmetric_eigen<T: Scalar>(mut a: Vec<T>, n: usize) -> (Vec<T>, Vec<T>) {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let frob: T = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let tol = frob * T::epsilon();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: T = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<T>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(T::one()));
                let c = T::one() / t.hypot(T::one());
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    (values, vectors)
}

/// Block power iteration with Rayleigh-Ritz on `X^T X`, never forming it.
fn subspace_directions<T: Scalar>(
    centred: &[Vec<T>],
    d: usize,
    out_dim: usize,
) -> (Vec<Vec<T>>, Vec<T>) {
    let block = (out_dim + SUBSPACE_OVERSAMPLE).min(d).min(centred.len());
    let apply = |v: &[T]| -> Vec<T> {
        let mut out = vec![T::zero(); d];
        for row in centred {
            let p = dot(row, v);
            out.iter_mut().zip(row).for_each(|(o, &x)| *o = *o + p * x);
        }
        out
    };
    // deterministic start: hashed entries in [-1, 1)
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut basis: Vec<Vec<T>> = (0..block)
        .map(|_| {
            (0..d)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    T::lit(((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0)
                })
                .collect()
        })
        .collect();
    orthonormalize(&mut basis, d);

    let mut ritz_values = vec![T::zero(); block];
    for _ in 0..MAX_SUBSPACE_ITERS {
        let images: Vec<Vec<T>> = basis.iter().map(|b| apply(b)).collect();
        let mut h = vec![T::zero(); block * block];
        for i in 0..block {
            for j in i..block {
                let x = dot(&basis[i], &images[j]);
                h[i * block + j] = x;
                h[j * block + i] = x;
            }
        }
        let (values, vecs) = symmetric_eigen(h, block);
        let rotate = |src: &[Vec<T>]| -> Vec<Vec<T>> {
            (0..block)
                .map(|c| {
                    let mut out = vec![T::zero(); d];
                    for (r, s) in src.iter().enumerate() {
                        let w = vecs[r * block + c];
                        out.iter_mut().zip(s).for_each(|(o, &x)| *o = *o + w * x);
                    }
                    out
                })
                .collect()
        };
        basis = rotate(&basis);
        let rotated_images = rotate(&images);
        ritz_values = values;

        let scale = ritz_values[0].abs().max(T::min_positive_value());
        let converged = (0..out_dim).all(|c| {
            let lambda = ritz_values[c];
            let residual: T = rotated_images[c]
                .iter()
                .zip(&basis[c])
                .map(|(&ax, &x)| {
                    let r = ax - lambda * x;
                    r * r
                })
                .sum::<T>()
                .sqrt();
            residual <= scale * T::lit(1e-10).max(T::epsilon() * T::lit(64.0))
        });
        if converged {
            break;
        }
        basis = rotated_images;
        orthonormalize(&mut basis, d);
    }
    basis.truncate(out_dim);
    let vars = ritz_values[..out_dim]
        .iter()
        .map(|&v| v.max(T::zero()))
        .collect();
    (basis, vars)
}

/// Modified Gram-Schmidt; collapsed vectors are replaced from the standard basis.
fn orthonormalize<T: Scalar>(basis: &mut [Vec<T>], d: usize) {
    for i in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(i);
        let v = &mut rest[0];
        let before = norm(v);
        for b in done.iter() {
            let p = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, &y)| *x = *x - p * y);
        }
        let s = norm(v);
        if s <= before * T::lit(1e-10) || s == T::zero() {
            *v = complete_basis(done, d);
        } else {
            v.iter_mut().for_each(|x| *x = *x / s);
        }
    }
}
