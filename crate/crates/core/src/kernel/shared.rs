use std::marker::PhantomData;

use crate::layout::{Sink, Source};

/// A buffer that several workers write concurrently, each to a disjoint
/// region.
#[derive(Debug)]
pub(crate) struct RawShared<'a, R> {
    ptr: *mut R,
    len: usize,
    _borrow: PhantomData<&'a mut [R]>,
}

impl<R> Clone for RawShared<'_, R> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<R> Copy for RawShared<'_, R> {}

// SAFETY: the kernel hands every worker a copy, and workers only touch the
// physical locations of their own output blocks.
unsafe impl<R: Send> Send for RawShared<'_, R> {}
unsafe impl<R: Send> Sync for RawShared<'_, R> {}

impl<'a, R> RawShared<'a, R> {
    pub(crate) fn new(buf: &'a mut [R]) -> Self {
        RawShared {
            ptr: buf.as_mut_ptr(),
            len: buf.len(),
            _borrow: PhantomData,
        }
    }
}

impl<R: Copy> Source<R> for RawShared<'_, R> {
    fn len(&self) -> usize {
        self.len
    }

    #[inline(always)]
    fn get(&self, i: usize) -> R {
        assert!(i < self.len);
        // SAFETY: in bounds; no other worker writes this location.
        unsafe { self.ptr.add(i).read() }
    }

    #[inline(always)]
    fn run(&self, start: usize, len: usize) -> Option<&[R]> {
        assert!(start + len <= self.len);
        // SAFETY: in bounds; the run lies inside this worker's region.
        Some(unsafe { std::slice::from_raw_parts(self.ptr.add(start), len) })
    }
}

impl<R: Copy> Sink<R> for RawShared<'_, R> {
    fn len(&self) -> usize {
        self.len
    }

    #[inline(always)]
    fn set(&mut self, i: usize, v: R) {
        assert!(i < self.len);
        // SAFETY: as for `get`.
        unsafe { self.ptr.add(i).write(v) }
    }

    #[inline(always)]
    fn run_mut(&mut self, start: usize, len: usize) -> Option<&mut [R]> {
        assert!(start + len <= self.len);
        // SAFETY: as for `run`.
        Some(unsafe { std::slice::from_raw_parts_mut(self.ptr.add(start), len) })
    }
}
