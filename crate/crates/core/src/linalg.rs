//! Small dense vector kernels on slices.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

#[inline]
pub fn norm2_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    norm2_sq(a).sqrt()
}

#[inline]
pub fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

#[inline]
pub fn scale<T: Scalar>(alpha: T, x: &mut [T]) {
    for v in x {
        *v *= alpha;
    }
}

#[inline]
pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

/// `sum_i w_i |x_i|`
#[inline]
pub fn weighted_l1<T: Scalar>(x: &[T], w: &[T]) -> T {
    let mut acc = T::zero();
    for (xi, wi) in x.iter().zip(w) {
        acc += *wi * xi.abs();
    }
    acc
}

/// `max_i |v_i| / w_i`, the dual of the weighted one-norm.
#[inline]
pub fn weighted_dual_norm<T: Scalar>(v: &[T], w: &[T]) -> T {
    let mut m = T::zero();
    for (vi, wi) in v.iter().zip(w) {
        m = m.max(vi.abs() / *wi);
    }
    m
}

#[inline]
pub fn signum0<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}
