//! Dense tensor type and the convolution engine everything else runs on.
//!
//! Tensors are row-major, immutable from the caller's perspective once an
//! operation returns them. Layouts are `Image` (N,C,H,W), `Clip` (N,C,T,H,W)
//! or `Raw` (anything, e.g. kernel stacks).

mod conv;
mod interp;
mod naive;
mod pad;

pub use conv::{
    conv2d, conv3d, conv_grad_bias, conv_grad_input, conv_grad_weights, conv_output_dims,
    AxisPad, ConvDescriptor,
};
pub use interp::{bilinear_upsample, bilinear_upsample_backward};
pub use naive::{conv2d_naive, conv3d_naive};
pub use pad::{pad, pad_backward, PadMode};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// N, C, H, W
    Image,
    /// N, C, T, H, W
    Clip,
    Raw,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    dims: Vec<usize>,
    layout: Layout,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(dims: Vec<usize>, layout: Layout, data: Vec<T>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::shape("tensor must have at least one axis"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::shape(format!("all extents must be >= 1, got {dims:?}")));
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::shape(format!(
                "dims {dims:?} imply {n} elements but data has {}",
                data.len()
            )));
        }
        match layout {
            Layout::Image if dims.len() != 4 => {
                return Err(Error::shape(format!(
                    "Image layout needs 4 axes (N,C,H,W), got {dims:?}"
                )))
            }
            Layout::Clip if dims.len() != 5 => {
                return Err(Error::shape(format!(
                    "Clip layout needs 5 axes (N,C,T,H,W), got {dims:?}"
                )))
            }
            _ => {}
        }
        Ok(Tensor { dims, layout, data })
    }

    pub fn zeros(dims: &[usize], layout: Layout) -> Self {
        let n: usize = dims.iter().product();
        Tensor::new(dims.to_vec(), layout, vec![T::ZERO; n]).expect("valid dims")
    }

    pub fn filled(dims: &[usize], layout: Layout, v: T) -> Self {
        let n: usize = dims.iter().product();
        Tensor::new(dims.to_vec(), layout, vec![v; n]).expect("valid dims")
    }

    pub fn from_fn(dims: &[usize], layout: Layout, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let n: usize = dims.iter().product();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..n {
            data.push(f(&idx));
            for ax in (0..dims.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < dims[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Tensor::new(dims.to_vec(), layout, data).expect("valid dims")
    }

    pub fn image(n: usize, c: usize, h: usize, w: usize, data: Vec<T>) -> Result<Self> {
        Tensor::new(vec![n, c, h, w], Layout::Image, data)
    }

    pub fn clip(n: usize, c: usize, t: usize, h: usize, w: usize, data: Vec<T>) -> Result<Self> {
        Tensor::new(vec![n, c, t, h, w], Layout::Clip, data)
    }

    pub fn raw(dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        Tensor::new(dims, Layout::Raw, data)
    }

    pub fn scalar(v: T) -> Self {
        Tensor::filled(&[1], Layout::Raw, v)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn layout(&self) -> Layout {
        self.layout
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

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for ax in (0..self.dims.len().saturating_sub(1)).rev() {
            s[ax] = s[ax + 1] * self.dims[ax + 1];
        }
        s
    }

    pub fn at(&self, idx: &[usize]) -> T {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0usize;
        for (ax, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.dims[ax]);
            off = off * self.dims[ax] + i;
        }
        self.data[off]
    }

    /// Reinterpret with new dims (element count must match).
    pub fn reshaped(&self, dims: Vec<usize>, layout: Layout) -> Result<Self> {
        Tensor::new(dims, layout, self.data.clone())
    }

    pub fn with_layout(mut self, layout: Layout) -> Result<Self> {
        let nd = match layout {
            Layout::Image => Some(4),
            Layout::Clip => Some(5),
            Layout::Raw => None,
        };
        if let Some(nd) = nd {
            if self.dims.len() != nd {
                return Err(Error::shape(format!(
                    "layout {layout:?} needs {nd} axes, tensor has {}",
                    self.dims.len()
                )));
            }
        }
        self.layout = layout;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor {
            dims: self.dims.clone(),
            layout: self.layout,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::shape(format!(
                "elementwise operands differ: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Tensor {
            dims: self.dims.clone(),
            layout: self.layout,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn abs_max(&self) -> T {
        self.data
            .iter()
            .fold(T::ZERO, |acc, v| acc.maxv(v.abs()))
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    pub fn mean(&self) -> T {
        self.sum() / T::from_f64(self.len() as f64)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims, "max_abs_diff on mismatched dims");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max)
    }

    /// Max absolute difference normalized by the reference's scale.
    pub fn rel_error(&self, reference: &Self) -> f64 {
        let scale = reference.abs_max().to_f64().max(1e-30);
        self.max_abs_diff(reference) / scale
    }

    pub fn convert<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            dims: self.dims.clone(),
            layout: self.layout,
            data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| v.maxv(T::ZERO))
}

pub fn sigmoid<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(sigmoid_scalar)
}

pub(crate) fn sigmoid_scalar<T: Scalar>(v: T) -> T {
    // Split on sign so exp never overflows.
    if v >= T::ZERO {
        T::ONE / (T::ONE + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::ONE + e)
    }
}

pub fn add<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    a.zip_map(b, |x, y| x + y)
}

pub fn sub<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    a.zip_map(b, |x, y| x - y)
}

pub fn mul<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    a.zip_map(b, |x, y| x * y)
}

pub fn div<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    a.zip_map(b, |x, y| x / y)
}

/// Concatenate along the channel axis. Operand channel blocks keep their
/// order: the first operand's channels come first.
pub fn concat_channels<T: Scalar>(parts: &[&Tensor<T>]) -> Result<Tensor<T>> {
    if parts.is_empty() {
        return Err(Error::invalid("concat of zero tensors"));
    }
    let first = parts[0];
    if first.rank() < 3 {
        return Err(Error::shape("concat needs batched tensors (N,C,...)"));
    }
    let mut c_total = 0usize;
    for p in parts {
        if p.rank() != first.rank()
            || p.dims()[0] != first.dims()[0]
            || p.dims()[2..] != first.dims()[2..]
        {
            return Err(Error::shape(format!(
                "concat operands differ outside the channel axis: {:?} vs {:?}",
                first.dims(),
                p.dims()
            )));
        }
        c_total += p.dims()[1];
    }
    let n = first.dims()[0];
    let inner: usize = first.dims()[2..].iter().product();
    let mut dims = first.dims().to_vec();
    dims[1] = c_total;
    let mut data = Vec::with_capacity(n * c_total * inner);
    for ni in 0..n {
        for p in parts {
            let c = p.dims()[1];
            let base = ni * c * inner;
            data.extend_from_slice(&p.data()[base..base + c * inner]);
        }
    }
    Tensor::new(dims, first.layout(), data)
}

/// Split a channel-concatenated tensor back into blocks of the given widths.
pub fn split_channels<T: Scalar>(x: &Tensor<T>, widths: &[usize]) -> Result<Vec<Tensor<T>>> {
    let c: usize = widths.iter().sum();
    if x.rank() < 3 || x.dims()[1] != c {
        return Err(Error::shape(format!(
            "split widths {widths:?} do not sum to channel extent of {:?}",
            x.dims()
        )));
    }
    let n = x.dims()[0];
    let inner: usize = x.dims()[2..].iter().product();
    let mut out = Vec::with_capacity(widths.len());
    for (wi, &w) in widths.iter().enumerate() {
        let offset: usize = widths[..wi].iter().sum();
        let mut dims = x.dims().to_vec();
        dims[1] = w;
        let mut data = Vec::with_capacity(n * w * inner);
        for ni in 0..n {
            let base = (ni * c + offset) * inner;
            data.extend_from_slice(&x.data()[base..base + w * inner]);
        }
        out.push(Tensor::new(dims, x.layout(), data)?);
    }
    Ok(out)
}

/// [T,C,H,W] frame batch -> [1,C,T,H,W] clip.
pub fn frames_to_clip<T: Scalar>(frames: &Tensor<T>) -> Result<Tensor<T>> {
    if frames.rank() != 4 {
        return Err(Error::shape(format!(
            "frames_to_clip expects 4 axes (T,C,H,W), got {:?}",
            frames.dims()
        )));
    }
    let (t, c, h, w) = (
        frames.dims()[0],
        frames.dims()[1],
        frames.dims()[2],
        frames.dims()[3],
    );
    let hw = h * w;
    let mut data = vec![T::ZERO; t * c * hw];
    let src = frames.data();
    for ti in 0..t {
        for ci in 0..c {
            let s = (ti * c + ci) * hw;
            let d = (ci * t + ti) * hw;
            data[d..d + hw].copy_from_slice(&src[s..s + hw]);
        }
    }
    Tensor::clip(1, c, t, h, w, data)
}

/// [1,C,T,H,W] clip -> [T,C,H,W] frame batch.
pub fn clip_to_frames<T: Scalar>(clip: &Tensor<T>) -> Result<Tensor<T>> {
    if clip.rank() != 5 || clip.dims()[0] != 1 {
        return Err(Error::shape(format!(
            "clip_to_frames expects (1,C,T,H,W), got {:?}",
            clip.dims()
        )));
    }
    let (c, t, h, w) = (
        clip.dims()[1],
        clip.dims()[2],
        clip.dims()[3],
        clip.dims()[4],
    );
    let hw = h * w;
    let mut data = vec![T::ZERO; t * c * hw];
    let src = clip.data();
    for ci in 0..c {
        for ti in 0..t {
            let s = (ci * t + ti) * hw;
            let d = (ti * c + ci) * hw;
            data[d..d + hw].copy_from_slice(&src[s..s + hw]);
        }
    }
    Tensor::image(t, c, h, w, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_zero_extent_and_length_mismatch() {
        assert!(Tensor::<f32>::new(vec![2, 0], Layout::Raw, vec![]).is_err());
        assert!(Tensor::<f32>::new(vec![2, 2], Layout::Raw, vec![1.0; 3]).is_err());
        assert!(Tensor::<f32>::new(vec![2, 2], Layout::Image, vec![1.0; 4]).is_err());
    }

    #[test]
    fn elementwise_basics() {
        let x = Tensor::<f32>::raw(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        let s = sigmoid(&Tensor::<f64>::raw(vec![1], vec![0.0]).unwrap());
        assert!((s.data()[0] - 0.5).abs() < 1e-12);
        // extreme inputs stay finite
        let s = sigmoid(&Tensor::<f32>::raw(vec![2], vec![-500.0, 500.0]).unwrap());
        assert!(s.all_finite());
    }

    #[test]
    fn concat_keeps_channel_order() {
        let a = Tensor::<f32>::image(1, 2, 1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::<f32>::image(1, 3, 1, 2, vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0]).unwrap();
        let c = concat_channels(&[&a, &b]).unwrap();
        assert_eq!(c.dims(), &[1, 5, 1, 2]);
        assert_eq!(
            c.data(),
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
        );
        let parts = split_channels(&c, &[2, 3]).unwrap();
        assert_eq!(parts[0].data(), a.data());
        assert_eq!(parts[1].data(), b.data());
    }

    #[test]
    fn frames_clip_round_trip() {
        let frames = Tensor::<f32>::from_fn(&[3, 2, 2, 2], Layout::Image, |i| {
            (i[0] * 1000 + i[1] * 100 + i[2] * 10 + i[3]) as f32
        });
        let clip = frames_to_clip(&frames).unwrap();
        assert_eq!(clip.dims(), &[1, 2, 3, 2, 2]);
        assert_eq!(clip.at(&[0, 1, 2, 0, 1]), 2101.0);
        let back = clip_to_frames(&clip).unwrap();
        assert_eq!(back, frames);
    }
}
