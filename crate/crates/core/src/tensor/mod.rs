//! Dense real tensors and the multilinear algebra the filters are built on.
//!
//! Storage is first-index-fastest: element `(i_0, i_1, ..., i_{N-1})` lives at
//! `i_0 + I_0 * (i_1 + I_1 * (i_2 + ...))`. With that layout the mode-`n`
//! unfolding maps column `j = l + L * r`, where `l` is the flat index over the
//! modes before `n` and `r` the flat index over the modes after it, and the
//! mode-0 unfolding is the buffer itself.
//!
//! Modes are numbered from zero throughout the crate.

mod hosvd;
pub mod mdt;
mod svd;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{Error, Result};

pub use hosvd::{hosvd, hosvd_reconstruct, HosvdDecomposition};
pub use svd::{left_singular_basis, svd, MatrixFactorization};

/// Column-major dense matrix used for unfoldings and factors.
pub type Matrix = DMatrix<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_dims(&dims)?;
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::invalid(format!(
                "buffer holds {} values but dims {:?} need {}",
                data.len(),
                dims,
                len
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let len = dims.iter().product();
        Ok(Tensor {
            dims,
            data: vec![0.0; len],
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index, in storage order.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_dims(&dims)?;
        let len: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (k, i) in idx.iter_mut().enumerate() {
                *i += 1;
                if *i < dims[k] {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Tensor { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter()
            .zip(&self.dims)
            .rev()
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        if self.dims != other.dims {
            return Err(Error::invalid(format!(
                "dims {:?} and {:?} differ",
                self.dims, other.dims
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Tensor {
            dims: self.dims.clone(),
            data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::invalid("a tensor needs at least one mode"));
    }
    if dims.contains(&0) {
        return Err(Error::invalid(format!("zero extent in dims {dims:?}")));
    }
    Ok(())
}

/// Products of the extents before and after `mode`.
fn split_extents(dims: &[usize], mode: usize) -> (usize, usize) {
    let left = dims[..mode].iter().product();
    let right = dims[mode + 1..].iter().product();
    (left, right)
}

fn check_mode(order: usize, mode: usize) -> Result<()> {
    if mode >= order {
        return Err(Error::invalid(format!(
            "mode {mode} out of range for an order-{order} tensor"
        )));
    }
    Ok(())
}

/// Mode-`mode` matricization: an `I_mode x (product of the other extents)` matrix.
pub fn unfold(t: &Tensor, mode: usize) -> Result<Matrix> {
    check_mode(t.order(), mode)?;
    let n = t.dims[mode];
    let (left, right) = split_extents(&t.dims, mode);
    if left == 1 {
        return Ok(Matrix::from_column_slice(n, right, &t.data));
    }
    let mut out = Matrix::zeros(n, left * right);
    for r in 0..right {
        for i in 0..n {
            let src = &t.data[left * (i + n * r)..left * (i + n * r + 1)];
            for (l, &v) in src.iter().enumerate() {
                out[(i, l + left * r)] = v;
            }
        }
    }
    Ok(out)
}

/// Inverse of [`unfold`].
pub fn fold(m: &Matrix, mode: usize, dims: &[usize]) -> Result<Tensor> {
    check_dims(dims)?;
    check_mode(dims.len(), mode)?;
    let n = dims[mode];
    let (left, right) = split_extents(dims, mode);
    if m.nrows() != n || m.ncols() != left * right {
        return Err(Error::invalid(format!(
            "{}x{} matrix cannot fold into dims {:?} along mode {}",
            m.nrows(),
            m.ncols(),
            dims,
            mode
        )));
    }
    if left == 1 {
        return Tensor::new(dims.to_vec(), m.as_slice().to_vec());
    }
    let mut data = vec![0.0; n * left * right];
    for r in 0..right {
        for i in 0..n {
            let dst = &mut data[left * (i + n * r)..left * (i + n * r + 1)];
            for (l, v) in dst.iter_mut().enumerate() {
                *v = m[(i, l + left * r)];
            }
        }
    }
    Tensor::new(dims.to_vec(), data)
}

/// `t x_mode m`: multiplies every mode-`mode` fiber of `t` by `m`.
pub fn mode_product(t: &Tensor, m: &Matrix, mode: usize) -> Result<Tensor> {
    check_mode(t.order(), mode)?;
    let n = t.dims[mode];
    if m.ncols() != n {
        return Err(Error::invalid(format!(
            "matrix has {} columns but mode {} has extent {}",
            m.ncols(),
            mode,
            n
        )));
    }
    let p = m.nrows();
    let (left, right) = split_extents(&t.dims, mode);
    let mut dims = t.dims.clone();
    dims[mode] = p;
    let mut data = vec![0.0; left * p * right];

    if left == 1 {
        let x = DMatrixView::from_slice(&t.data, n, right);
        let mut y = DMatrixViewMut::from_slice(&mut data, p, right);
        y.gemm(1.0, m, &x, 0.0);
    } else {
        let mt = m.transpose();
        for r in 0..right {
            let x = DMatrixView::from_slice(&t.data[left * n * r..left * n * (r + 1)], left, n);
            let mut y = DMatrixViewMut::from_slice(&mut data[left * p * r..left * p * (r + 1)], left, p);
            y.gemm(1.0, &x, &mt, 0.0);
        }
    }
    Ok(Tensor { dims, data })
}

pub fn frobenius_norm(t: &Tensor) -> f64 {
    t.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Kronecker product: the block matrix `[a_ij * b]`.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}
