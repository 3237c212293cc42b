//! Index bookkeeping for tensor-product spaces. Subsystem 0 is the most significant factor.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

pub fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Row-major strides for the listed factor dimensions.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Check that `parts` are in range, nonempty and pairwise disjoint.
pub fn validate_parts(count: usize, parts: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; count];
    for part in parts {
        if part.is_empty() {
            return Err(Error::BadPartition("empty part".into()));
        }
        for &i in *part {
            if i >= count {
                return Err(Error::SubsystemOutOfRange { index: i, count });
            }
            if seen[i] {
                return Err(Error::BadPartition(format!("subsystem {i} listed twice")));
            }
            seen[i] = true;
        }
    }
    Ok(())
}

/// For each full basis index, its (kept, traced) coordinates. Kept subsystems are read
/// in ascending index order.
pub(crate) fn split_indices(dims: &[usize], keep: &[usize]) -> (Vec<usize>, Vec<usize>, usize, usize) {
    let mut kept_sorted = keep.to_vec();
    kept_sorted.sort_unstable();
    let is_kept: Vec<bool> = (0..dims.len()).map(|i| kept_sorted.binary_search(&i).is_ok()).collect();
    let kdim: usize = kept_sorted.iter().map(|&i| dims[i]).product();
    let tdim = total_dim(dims) / kdim.max(1);
    let n = total_dim(dims);
    let mut kidx = vec![0; n];
    let mut tidx = vec![0; n];
    let mut digits = vec![0usize; dims.len()];
    for full in 0..n {
        let (mut k, mut t) = (0, 0);
        for (s, &d) in digits.iter().enumerate() {
            if is_kept[s] {
                k = k * dims[s] + d;
            } else {
                t = t * dims[s] + d;
            }
        }
        kidx[full] = k;
        tidx[full] = t;
        for s in (0..dims.len()).rev() {
            digits[s] += 1;
            if digits[s] < dims[s] {
                break;
            }
            digits[s] = 0;
        }
    }
    (kidx, tidx, kdim, tdim)
}

/// Partial trace of a square matrix keeping `keep` (result ordered by ascending index).
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let n = m.require_square()?;
    if n != total_dim(dims) {
        return Err(Error::DimensionMismatch(format!("matrix size {n} vs dims {dims:?}")));
    }
    validate_parts(dims.len(), &[keep]).or_else(|e| if keep.is_empty() { Ok(()) } else { Err(e) })?;
    let (kidx, tidx, kdim, tdim) = split_indices(dims, keep);
    // full index of (k, t)
    let mut full_of = vec![0usize; kdim * tdim];
    for f in 0..n {
        full_of[kidx[f] * tdim + tidx[f]] = f;
    }
    let mut out = ComplexMatrix::zeros(kdim, kdim);
    for i in 0..kdim {
        for j in 0..kdim {
            let mut acc = ZERO;
            for t in 0..tdim {
                acc += m[(full_of[i * tdim + t], full_of[j * tdim + t])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Map from new position to old subsystem: new subsystem k is old subsystem `perm[k]`.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut check = perm.to_vec();
    check.sort_unstable();
    if check != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of {} subsystems", dims.len())));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let old_strides = strides(dims);
    let n = total_dim(dims);
    let mut map = vec![0usize; n];
    let mut digits = vec![0usize; dims.len()];
    for slot in map.iter_mut() {
        *slot = digits.iter().zip(perm).map(|(&d, &p)| d * old_strides[p]).sum();
        for s in (0..new_dims.len()).rev() {
            digits[s] += 1;
            if digits[s] < new_dims[s] {
                break;
            }
            digits[s] = 0;
        }
    }
    Ok((map, new_dims))
}

/// Reorder tensor factors of a vector. Returns the new vector and dims.
pub fn permute_vector(v: &[C64], dims: &[usize], perm: &[usize]) -> Result<(Vec<C64>, Vec<usize>)> {
    if v.len() != total_dim(dims) {
        return Err(Error::DimensionMismatch(format!("vector length {} vs dims {dims:?}", v.len())));
    }
    let (map, new_dims) = permutation_map(dims, perm)?;
    Ok((map.iter().map(|&o| v[o]).collect(), new_dims))
}

pub fn permute_matrix(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<(ComplexMatrix, Vec<usize>)> {
    let n = m.require_square()?;
    if n != total_dim(dims) {
        return Err(Error::DimensionMismatch(format!("matrix size {n} vs dims {dims:?}")));
    }
    let (map, new_dims) = permutation_map(dims, perm)?;
    Ok((ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]), new_dims))
}

/// Permute the column (input) index of an operator whose columns carry `dims`.
pub fn permute_columns(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<(ComplexMatrix, Vec<usize>)> {
    if m.cols() != total_dim(dims) {
        return Err(Error::DimensionMismatch(format!("{} columns vs dims {dims:?}", m.cols())));
    }
    let (map, new_dims) = permutation_map(dims, perm)?;
    Ok((ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, map[j])]), new_dims))
}

/// Apply `op` (out × in) to the contiguous factors `[start, start+len)` of a vector.
/// Returns the new vector; those factors are replaced by a single factor of size `op.rows()`.
pub fn apply_local_vector(v: &[C64], dims: &[usize], start: usize, len: usize, op: &ComplexMatrix) -> Result<Vec<C64>> {
    let (left, mid, right) = block_sizes(dims, start, len)?;
    if v.len() != left * mid * right || op.cols() != mid {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} on factors {start}..{} of {dims:?}",
            op.rows(),
            op.cols(),
            start + len
        )));
    }
    let out_mid = op.rows();
    let mut out = vec![ZERO; left * out_mid * right];
    for l in 0..left {
        for i in 0..mid {
            let base_in = (l * mid + i) * right;
            let src = &v[base_in..base_in + right];
            if src.iter().all(|z| *z == ZERO) {
                continue;
            }
            for o in 0..out_mid {
                let k = op[(o, i)];
                if k == ZERO {
                    continue;
                }
                let base_out = (l * out_mid + o) * right;
                for (dst, &s) in out[base_out..base_out + right].iter_mut().zip(src) {
                    *dst += k * s;
                }
            }
        }
    }
    Ok(out)
}

fn block_sizes(dims: &[usize], start: usize, len: usize) -> Result<(usize, usize, usize)> {
    if start + len > dims.len() || len == 0 {
        return Err(Error::SubsystemOutOfRange { index: start + len.max(1) - 1, count: dims.len() });
    }
    Ok((
        total_dim(&dims[..start]),
        total_dim(&dims[start..start + len]),
        total_dim(&dims[start + len..]),
    ))
}

/// (I ⊗ op ⊗ I) m for a matrix whose rows carry `dims`.
pub fn apply_local_left(m: &ComplexMatrix, dims: &[usize], start: usize, len: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (left, mid, right) = block_sizes(dims, start, len)?;
    if m.rows() != left * mid * right || op.cols() != mid {
        return Err(Error::DimensionMismatch("local operator shape".into()));
    }
    let cols = m.cols();
    let out_mid = op.rows();
    let mut out = ComplexMatrix::zeros(left * out_mid * right, cols);
    for l in 0..left {
        for r in 0..right {
            for o in 0..out_mid {
                let dst_row = (l * out_mid + o) * right + r;
                for i in 0..mid {
                    let k = op[(o, i)];
                    if k == ZERO {
                        continue;
                    }
                    let src_row = (l * mid + i) * right + r;
                    for c in 0..cols {
                        let s = m[(src_row, c)];
                        out[(dst_row, c)] += k * s;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Σ_k (I⊗K_k⊗I) m (I⊗K_k⊗I)† for square m carrying `dims`.
pub fn apply_local_kraus(m: &ComplexMatrix, dims: &[usize], start: usize, len: usize, kraus: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut acc: Option<ComplexMatrix> = None;
    for k in kraus {
        let x = apply_local_left(m, dims, start, len, k)?;
        let y = apply_local_left(&x.adjoint(), dims, start, len, k)?.adjoint();
        acc = Some(match acc {
            None => y,
            Some(a) => a.add(&y),
        });
    }
    acc.ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmatrix::matrix::kron_vec;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn permute_swaps_product_vector() {
        let a = vec![c(1.0), c(2.0)];
        let b = vec![c(3.0), c(5.0), c(7.0)];
        let ab = kron_vec(&a, &b);
        let (ba, dims) = permute_vector(&ab, &[2, 3], &[1, 0]).unwrap();
        assert_eq!(dims, vec![3, 2]);
        assert_eq!(ba, kron_vec(&b, &a));
    }

    #[test]
    fn apply_local_on_middle_factor() {
        let a = vec![c(1.0), c(0.0)];
        let b = vec![c(0.0), c(1.0)];
        let cc = vec![c(0.6), c(0.8)];
        let v = kron_vec(&kron_vec(&a, &b), &cc);
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let w = apply_local_vector(&v, &[2, 2, 2], 1, 1, &x).unwrap();
        assert_eq!(w, kron_vec(&kron_vec(&a, &a), &cc));
    }

    #[test]
    fn partial_trace_matrix_of_product() {
        let a = ComplexMatrix::from_diag(&[0.2, 0.8]);
        let b = ComplexMatrix::from_diag(&[0.5, 0.25, 0.25]);
        let ab = a.kron(&b);
        assert!(partial_trace_matrix(&ab, &[2, 3], &[0]).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(partial_trace_matrix(&ab, &[2, 3], &[1]).unwrap().max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn partition_validation() {
        assert!(validate_parts(3, &[&[0], &[1, 2]]).is_ok());
        assert!(matches!(validate_parts(2, &[&[0], &[2]]), Err(Error::SubsystemOutOfRange { .. })));
        assert!(matches!(validate_parts(2, &[&[0], &[0]]), Err(Error::BadPartition(_))));
    }
}
