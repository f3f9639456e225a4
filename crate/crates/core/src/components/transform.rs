use std::fmt;
use std::sync::Arc;

use crate::element::{ConvertTo, Element};
use crate::operator::{element_at, set_element};

/// Element-wise functor applied after every load and before every store of
/// one memory stream.
#[derive(Clone, Default)]
pub enum Transform<T> {
    #[default]
    Identity,
    /// `max(x, 0)`.
    Relu,
    /// `x · s`.
    Scale(T),
    /// `x + s`.
    Offset(T),
    /// Left to right.
    Chain(Vec<Transform<T>>),
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Element> Transform<T> {
    pub fn custom(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Transform::Custom(Arc::new(f))
    }

    /// `self` followed by `next`.
    pub fn then(self, next: Transform<T>) -> Self {
        match (self, next) {
            (Transform::Identity, t) | (t, Transform::Identity) => t,
            (Transform::Chain(mut v), t) => {
                v.push(t);
                Transform::Chain(v)
            }
            (s, t) => Transform::Chain(vec![s, t]),
        }
    }

    /// True only for the built-in identity, which the kernel skips entirely.
    pub fn is_identity(&self) -> bool {
        match self {
            Transform::Identity => true,
            Transform::Chain(v) => v.iter().all(Transform::is_identity),
            _ => false,
        }
    }

    #[inline]
    pub fn apply(&self, x: T) -> T {
        match self {
            Transform::Identity => x,
            Transform::Relu => x.relu(),
            Transform::Scale(s) => x * *s,
            Transform::Offset(s) => x + *s,
            Transform::Chain(v) => v.iter().fold(x, |acc, t| t.apply(acc)),
            Transform::Custom(f) => f(x),
        }
    }

    pub fn apply_in_place(&self, values: &mut [T]) {
        if self.is_identity() {
            return;
        }
        for v in values {
            *v = self.apply(*v);
        }
    }

    /// Applies the transform to `n` plane-major elements.
    pub(crate) fn apply_planes(&self, planes: &mut [T::Real], n: usize) {
        match self {
            Transform::Identity => {}
            Transform::Relu => map_planes::<T>(planes, n, |x| x.relu()),
            Transform::Scale(s) => map_planes::<T>(planes, n, |x| x * *s),
            Transform::Offset(s) => map_planes::<T>(planes, n, |x| x + *s),
            Transform::Chain(v) => v.iter().for_each(|t| t.apply_planes(planes, n)),
            Transform::Custom(f) => map_planes::<T>(planes, n, |x| f(x)),
        }
    }
}

/// Applies `f` to each of the `n` plane-major elements of `planes`.
#[inline]
pub(crate) fn map_planes<T: Element>(planes: &mut [T::Real], n: usize, f: impl Fn(T) -> T) {
    if T::LANES == 1 {
        for p in &mut planes[..n] {
            *p = f(T::from_lanes(std::slice::from_ref(p))).lane(0);
        }
    } else {
        for e in 0..n {
            set_element::<T>(planes, n, e, f(element_at::<T>(planes, n, e)));
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Transform<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => f.write_str("Identity"),
            Transform::Relu => f.write_str("Relu"),
            Transform::Scale(s) => write!(f, "Scale({s:?})"),
            Transform::Offset(s) => write!(f, "Offset({s:?})"),
            Transform::Chain(v) => f.debug_tuple("Chain").field(v).finish(),
            Transform::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Converts `values` to the compute type, then applies `t` element-wise.
pub fn apply_transform<S: ConvertTo<T>, T: Element>(t: &Transform<T>, values: &[S]) -> Vec<T> {
    values.iter().map(|&v| t.apply(v.convert())).collect()
}

/// The eight memory streams of the kernel.
#[derive(Debug, Clone, Default)]
pub struct Transforms<T> {
    pub global_to_shared_a: Transform<T>,
    pub global_to_shared_b: Transform<T>,
    pub global_to_shared_c: Transform<T>,
    pub shared_to_regs_a: Transform<T>,
    pub shared_to_regs_b: Transform<T>,
    pub shared_to_regs_c: Transform<T>,
    pub regs_to_shared_d: Transform<T>,
    pub shared_to_global_d: Transform<T>,
}

impl<T: Element> Transforms<T> {
    /// Every stream set to a copy of `t`.
    pub fn all(t: Transform<T>) -> Self {
        Transforms {
            global_to_shared_a: t.clone(),
            global_to_shared_b: t.clone(),
            global_to_shared_c: t.clone(),
            shared_to_regs_a: t.clone(),
            shared_to_regs_b: t.clone(),
            shared_to_regs_c: t.clone(),
            regs_to_shared_d: t.clone(),
            shared_to_global_d: t,
        }
    }
}
