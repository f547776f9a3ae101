//! Dense real tensors with labeled indices.
//!
//! A [`DenseTensor`] stores its elements row-major over `dims` in the order
//! the dimensions are listed (the last index varies fastest). Every index
//! carries a label that is unique within the tensor; contractions and
//! decompositions address indices by label, never by position.
//!
//! Two operations carry everything above this layer:
//!
//! * [`contract`] sums over paired indices of two tensors (permute, then one
//!   GEMM call).
//! * [`svd_split`] factors a tensor across a bipartition of its labels and
//!   truncates the spectrum by rank and discarded weight.

use ndarray::Array2;
use ndarray_linalg::{JobSvd, SVDDC};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative discarded-weight threshold used wherever truncation occurs.
pub const DEFAULT_CUTOFF: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("data length {got} does not match product of dims {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("{dims} dims but {labels} labels")]
    RankMismatch { dims: usize, labels: usize },
    #[error("zero extent for index `{0}`")]
    ZeroExtent(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("label `{0}` not found")]
    LabelNotFound(String),
    #[error("extent mismatch contracting `{left}` ({left_dim}) with `{right}` ({right_dim})")]
    ExtentMismatch {
        left: String,
        right: String,
        left_dim: usize,
        right_dim: usize,
    },
    #[error("non-finite value in tensor data")]
    NonFinite,
    #[error("row labels must be a nonempty strict subset of the tensor labels")]
    InvalidRowLabels,
    #[error("max_rank must be positive")]
    ZeroRank,
    #[error("singular value decomposition failed to converge")]
    SvdFailed,
}

pub type TensorResult<T> = Result<T, TensorError>;

/// Labeled multi-index array of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    dims: Vec<usize>,
    labels: Vec<String>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new<S: AsRef<str>>(dims: &[usize], labels: &[S], data: Vec<f64>) -> TensorResult<Self> {
        if dims.len() != labels.len() {
            return Err(TensorError::RankMismatch { dims: dims.len(), labels: labels.len() });
        }
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        for (k, label) in labels.iter().enumerate() {
            if labels[..k].contains(label) {
                return Err(TensorError::DuplicateLabel(label.clone()));
            }
            if dims[k] == 0 {
                return Err(TensorError::ZeroExtent(label.clone()));
            }
        }
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(TensorError::ShapeMismatch { expected, got: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        Ok(Self { dims: dims.to_vec(), labels, data })
    }

    pub fn zeros<S: AsRef<str>>(dims: &[usize], labels: &[S]) -> TensorResult<Self> {
        let len = dims.iter().product();
        Self::new(dims, labels, vec![0.0; len])
    }

    /// Rank-0 tensor holding a single value.
    pub fn scalar(value: f64) -> TensorResult<Self> {
        Self::new::<&str>(&[], &[], vec![value])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dim_of(&self, label: &str) -> TensorResult<usize> {
        self.position(label)
            .map(|k| self.dims[k])
            .ok_or_else(|| TensorError::LabelNotFound(label.to_string()))
    }

    /// Value at a multi-index given in the tensor's own dimension order.
    pub fn get(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.rank());
        let mut flat = 0;
        for (i, (&x, &d)) in index.iter().zip(&self.dims).enumerate() {
            assert!(x < d, "index {x} out of range for dimension {i} of extent {d}");
            flat = flat * d + x;
        }
        self.data[flat]
    }

    /// Same data under new labels (one per dimension, in order).
    pub fn with_labels<S: AsRef<str>>(self, labels: &[S]) -> TensorResult<Self> {
        Self::new(&self.dims, labels, self.data)
    }

    pub fn relabel(&mut self, from: &str, to: &str) -> TensorResult<()> {
        let k = self
            .position(from)
            .ok_or_else(|| TensorError::LabelNotFound(from.to_string()))?;
        if from != to && self.position(to).is_some() {
            return Err(TensorError::DuplicateLabel(to.to_string()));
        }
        self.labels[k] = to.to_string();
        Ok(())
    }

    /// Replace the data while keeping dims and labels.
    pub fn with_data(&self, data: Vec<f64>) -> TensorResult<Self> {
        Self::new(&self.dims, &self.labels, data)
    }

    pub fn scaled(&self, factor: f64) -> TensorResult<Self> {
        self.with_data(self.data.iter().map(|v| v * factor).collect())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Reorder dimensions so that the labels appear as in `order`.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> TensorResult<Self> {
        if order.len() != self.rank() {
            return Err(TensorError::RankMismatch { dims: self.rank(), labels: order.len() });
        }
        let mut axes = Vec::with_capacity(order.len());
        for label in order {
            let label = label.as_ref();
            let k = self
                .position(label)
                .ok_or_else(|| TensorError::LabelNotFound(label.to_string()))?;
            if axes.contains(&k) {
                return Err(TensorError::DuplicateLabel(label.to_string()));
            }
            axes.push(k);
        }
        Ok(self.permute_axes(&axes))
    }

    fn permute_axes(&self, axes: &[usize]) -> Self {
        let rank = self.rank();
        if axes.iter().enumerate().all(|(i, &a)| i == a) {
            return self.clone();
        }
        let mut strides = vec![1usize; rank];
        for k in (0..rank.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        let new_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let new_strides: Vec<usize> = axes.iter().map(|&a| strides[a]).collect();
        let labels: Vec<String> = axes.iter().map(|&a| self.labels[a].clone()).collect();

        let mut data = Vec::with_capacity(self.data.len());
        if !self.data.is_empty() {
            // Odometer over the output index; the last axis is the inner loop.
            let last = rank - 1;
            let inner_dim = new_dims[last];
            let inner_stride = new_strides[last];
            let mut counter = vec![0usize; rank];
            let mut offset = 0usize;
            loop {
                let mut src = offset;
                for _ in 0..inner_dim {
                    data.push(self.data[src]);
                    src += inner_stride;
                }
                let mut k = last;
                loop {
                    if k == 0 {
                        return Self { dims: new_dims, labels, data };
                    }
                    k -= 1;
                    counter[k] += 1;
                    offset += new_strides[k];
                    if counter[k] < new_dims[k] {
                        break;
                    }
                    offset -= new_strides[k] * new_dims[k];
                    counter[k] = 0;
                }
            }
        }
        Self { dims: new_dims, labels, data }
    }
}

/// Contract `a` with `b` over the given `(label in a, label in b)` pairs.
///
/// The result carries the uncontracted labels of `a` followed by those of
/// `b`, each group in its original order.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(&str, &str)]) -> TensorResult<DenseTensor> {
    let mut axes_a = Vec::with_capacity(pairs.len());
    let mut axes_b = Vec::with_capacity(pairs.len());
    for &(la, lb) in pairs {
        let ka = a.position(la).ok_or_else(|| TensorError::LabelNotFound(la.to_string()))?;
        let kb = b.position(lb).ok_or_else(|| TensorError::LabelNotFound(lb.to_string()))?;
        if axes_a.contains(&ka) {
            return Err(TensorError::DuplicateLabel(la.to_string()));
        }
        if axes_b.contains(&kb) {
            return Err(TensorError::DuplicateLabel(lb.to_string()));
        }
        if a.dims[ka] != b.dims[kb] {
            return Err(TensorError::ExtentMismatch {
                left: la.to_string(),
                right: lb.to_string(),
                left_dim: a.dims[ka],
                right_dim: b.dims[kb],
            });
        }
        axes_a.push(ka);
        axes_b.push(kb);
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|k| !axes_a.contains(k)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|k| !axes_b.contains(k)).collect();

    let mut dims = Vec::with_capacity(free_a.len() + free_b.len());
    let mut labels: Vec<String> = Vec::with_capacity(dims.capacity());
    for &k in &free_a {
        dims.push(a.dims[k]);
        labels.push(a.labels[k].clone());
    }
    for &k in &free_b {
        if labels.contains(&b.labels[k]) {
            return Err(TensorError::DuplicateLabel(b.labels[k].clone()));
        }
        dims.push(b.dims[k]);
        labels.push(b.labels[k].clone());
    }

    let order_a: Vec<usize> = free_a.iter().chain(&axes_a).copied().collect();
    let order_b: Vec<usize> = axes_b.iter().chain(&free_b).copied().collect();
    let pa = a.permute_axes(&order_a);
    let pb = b.permute_axes(&order_b);

    let m: usize = free_a.iter().map(|&k| a.dims[k]).product();
    let k: usize = axes_a.iter().map(|&x| a.dims[x]).product();
    let n: usize = free_b.iter().map(|&x| b.dims[x]).product();
    let mut data = vec![0.0; m * n];
    gemm(m, k, n, &pa.data, &pb.data, &mut data);
    if data.iter().any(|v| !v.is_finite()) {
        return Err(TensorError::NonFinite);
    }
    Ok(DenseTensor { dims, labels, data })
}

/// Row-major `c = a · b` with `a: m×k`, `b: k×n`.
pub(crate) fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: slice lengths match the row-major strides passed in.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Truncated singular value decomposition of a tensor across a label bipartition.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Row labels followed by the new bond label; columns orthonormal.
    pub left: DenseTensor,
    /// Kept singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Bond label followed by the remaining labels; rows orthonormal.
    pub right: DenseTensor,
    /// Discarded squared weight over total squared weight.
    pub truncation_error: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `right` with each bond row scaled by its singular value.
    pub fn weighted_right(&self) -> DenseTensor {
        scale_rows(&self.right, &self.singular_values)
    }

    /// `left` with each bond column scaled by its singular value.
    pub fn weighted_left(&self) -> DenseTensor {
        let r = self.rank();
        let mut data = self.left.data.clone();
        for row in data.chunks_mut(r) {
            for (v, s) in row.iter_mut().zip(&self.singular_values) {
                *v *= s;
            }
        }
        DenseTensor { dims: self.left.dims.clone(), labels: self.left.labels.clone(), data }
    }
}

fn scale_rows(t: &DenseTensor, weights: &[f64]) -> DenseTensor {
    let cols = t.data.len() / weights.len();
    let mut data = t.data.clone();
    for (row, s) in data.chunks_mut(cols).zip(weights) {
        for v in row {
            *v *= s;
        }
    }
    DenseTensor { dims: t.dims.clone(), labels: t.labels.clone(), data }
}

/// Split `t` into `left · diag(S) · right` with `row_labels` on the left.
///
/// At most `max_rank` singular values are kept; trailing values are further
/// dropped while the discarded squared weight, relative to the total, stays
/// below `cutoff`. At least one value is always kept. On ties at the
/// truncation boundary only the retained subspace is meaningful, not the
/// individual vectors.
pub fn svd_split(
    t: &DenseTensor,
    row_labels: &[&str],
    max_rank: usize,
    cutoff: f64,
    bond: &str,
) -> TensorResult<SvdResult> {
    if max_rank == 0 {
        return Err(TensorError::ZeroRank);
    }
    if row_labels.is_empty() || row_labels.len() >= t.rank() {
        return Err(TensorError::InvalidRowLabels);
    }
    let mut row_axes = Vec::with_capacity(row_labels.len());
    for &label in row_labels {
        let k = t.position(label).ok_or_else(|| TensorError::LabelNotFound(label.to_string()))?;
        if row_axes.contains(&k) {
            return Err(TensorError::DuplicateLabel(label.to_string()));
        }
        row_axes.push(k);
    }
    let col_axes: Vec<usize> = (0..t.rank()).filter(|k| !row_axes.contains(k)).collect();
    let order: Vec<usize> = row_axes.iter().chain(&col_axes).copied().collect();
    let p = t.permute_axes(&order);
    let row_dims: Vec<usize> = row_axes.iter().map(|&k| t.dims[k]).collect();
    let col_dims: Vec<usize> = col_axes.iter().map(|&k| t.dims[k]).collect();
    let m: usize = row_dims.iter().product();
    let n: usize = col_dims.iter().product();

    let (u, s, vt) = thin_svd(m, n, &p.data)?;
    let full = s.len();

    let total: f64 = s.iter().map(|v| v * v).sum();
    let mut keep = max_rank.min(full).max(1);
    let mut discarded: f64 = s[keep..].iter().map(|v| v * v).sum();
    if total == 0.0 {
        keep = 1;
        discarded = 0.0;
    } else {
        while keep > 1 && (discarded + s[keep - 1] * s[keep - 1]) / total < cutoff {
            discarded += s[keep - 1] * s[keep - 1];
            keep -= 1;
        }
    }
    let truncation_error = if total > 0.0 { discarded / total } else { 0.0 };

    let mut left_data = Vec::with_capacity(m * keep);
    for i in 0..m {
        left_data.extend_from_slice(&u[i * full..i * full + keep]);
    }
    let right_data = vt[..keep * n].to_vec();

    let mut left_dims = row_dims;
    left_dims.push(keep);
    let mut left_labels: Vec<String> = row_axes.iter().map(|&k| t.labels[k].clone()).collect();
    left_labels.push(bond.to_string());
    let mut right_dims = vec![keep];
    right_dims.extend(col_dims);
    let mut right_labels = vec![bond.to_string()];
    right_labels.extend(col_axes.iter().map(|&k| t.labels[k].clone()));

    Ok(SvdResult {
        left: DenseTensor::new(&left_dims, &left_labels, left_data)?,
        singular_values: s[..keep].to_vec(),
        right: DenseTensor::new(&right_dims, &right_labels, right_data)?,
        truncation_error,
    })
}

/// Thin SVD of a row-major `m×n` matrix: returns row-major `u` (m×r),
/// singular values sorted nonincreasing, and row-major `vt` (r×n), r = min(m, n).
fn thin_svd(m: usize, n: usize, data: &[f64]) -> TensorResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mat = Array2::from_shape_vec((m, n), data.to_vec()).map_err(|_| TensorError::SvdFailed)?;
    let (u, s, vt) = mat.svddc(JobSvd::Some).map_err(|_| TensorError::SvdFailed)?;
    let (u, vt) = u.zip(vt).ok_or(TensorError::SvdFailed)?;
    // LAPACK returns values in descending order.
    Ok((u.iter().copied().collect(), s.to_vec(), vt.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(dims: &[usize], labels: &[&str], rng: &mut ChaCha8Rng) -> DenseTensor {
        let len = dims.iter().product();
        DenseTensor::new(dims, labels, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn eye(labels: [&str; 2]) -> DenseTensor {
        DenseTensor::new(&[2, 2], &labels, vec![1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn identity_times_identity() {
        let c = contract(&eye(["i", "j"]), &eye(["j", "k"]), &[("j", "j")]).unwrap();
        assert_eq!(c.labels(), ["i", "k"]);
        assert_eq!(c.data(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn dot_product() {
        let a = DenseTensor::new(&[2], &["x"], vec![1.0, 2.0]).unwrap();
        let b = DenseTensor::new(&[2], &["y"], vec![3.0, 4.0]).unwrap();
        let c = contract(&a, &b, &[("x", "y")]).unwrap();
        assert_eq!(c.rank(), 0);
        assert_eq!(c.data(), &[11.0]);
    }

    #[test]
    fn matrix_product_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&[3, 4], &["i", "k"], &mut rng);
        let b = random(&[4, 5], &["k", "j"], &mut rng);
        let c = contract(&a, &b, &[("k", "k")]).unwrap();
        for i in 0..3 {
            for j in 0..5 {
                let mut want = 0.0;
                for k in 0..4 {
                    want += a.get(&[i, k]) * b.get(&[k, j]);
                }
                assert!((c.get(&[i, j]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contraction_errors() {
        let a = eye(["i", "j"]);
        let b = DenseTensor::zeros(&[3, 2], &["k", "l"]).unwrap();
        assert_eq!(
            contract(&a, &b, &[("q", "k")]).unwrap_err(),
            TensorError::LabelNotFound("q".into())
        );
        assert!(matches!(
            contract(&a, &b, &[("j", "k")]).unwrap_err(),
            TensorError::ExtentMismatch { .. }
        ));
        // Free labels would collide in the result.
        assert!(matches!(
            contract(&a, &eye(["i", "m"]), &[("j", "m")]).unwrap_err(),
            TensorError::DuplicateLabel(_)
        ));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            DenseTensor::new(&[2, 2], &["a", "a"], vec![0.0; 4]),
            Err(TensorError::DuplicateLabel(_))
        ));
        assert!(matches!(
            DenseTensor::new(&[2, 2], &["a", "b"], vec![0.0; 3]),
            Err(TensorError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            DenseTensor::new(&[2], &["a"], vec![0.0, f64::NAN]),
            Err(TensorError::NonFinite)
        ));
    }

    #[test]
    fn permute_moves_data() {
        let t = DenseTensor::new(&[2, 3], &["a", "b"], (0..6).map(f64::from).collect()).unwrap();
        let p = t.permute(&["b", "a"]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(t.get(&[i, j]), p.get(&[j, i]));
            }
        }
    }

    #[test]
    fn svd_of_rank_one_matrix() {
        let u = [1.0, -2.0, 0.5, 3.0];
        let v = [0.3, 1.0, -1.0];
        let data: Vec<f64> = u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        let t = DenseTensor::new(&[4, 3], &["r", "c"], data).unwrap();
        let svd = svd_split(&t, &["r"], 10, DEFAULT_CUTOFF, "s").unwrap();
        assert_eq!(svd.rank(), 1);
        assert!(svd.truncation_error <= 1e-14);
    }

    #[test]
    fn svd_identity_rank_one_loses_half() {
        let svd = svd_split(&eye(["a", "b"]), &["a"], 1, 0.0, "s").unwrap();
        assert_eq!(svd.rank(), 1);
        assert!((svd.truncation_error - 0.5).abs() < 1e-15);
    }

    #[test]
    fn svd_full_rank_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = random(&[8, 8], &["r", "c"], &mut rng);
        let svd = svd_split(&t, &["r"], 8, 0.0, "s").unwrap();
        let back = contract(&svd.weighted_left(), &svd.right, &[("s", "s")]).unwrap();
        for (x, y) in back.data().iter().zip(t.data()) {
            assert!((x - y).abs() < 1e-10);
        }
        let s = &svd.singular_values;
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rejects_bad_row_sets() {
        let t = eye(["a", "b"]);
        assert_eq!(svd_split(&t, &[], 2, 0.0, "s").unwrap_err(), TensorError::InvalidRowLabels);
        assert_eq!(
            svd_split(&t, &["a", "b"], 2, 0.0, "s").unwrap_err(),
            TensorError::InvalidRowLabels
        );
    }

    #[test]
    fn svd_of_zero_tensor_keeps_one_value() {
        let t = DenseTensor::zeros(&[2, 3], &["a", "b"]).unwrap();
        let svd = svd_split(&t, &["a"], 4, 1e-10, "s").unwrap();
        assert_eq!(svd.rank(), 1);
        assert_eq!(svd.truncation_error, 0.0);
    }
}
