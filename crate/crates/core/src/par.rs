//! Execution backend for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through this module. Work is cut into
//! chunks whose boundaries depend only on the problem size, and partial results
//! are combined in chunk order, so a computation returns bit-identical results
//! whether it runs on one thread, many threads, or with the `parallel` feature
//! disabled.

use std::sync::atomic::{AtomicU8, Ordering};

/// How data-parallel loops are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(if cfg!(feature = "parallel") { 1 } else { 0 });

/// Selects the execution mode process-wide. Without the `parallel` feature
/// `Mode::Parallel` silently runs sequentially.
pub fn set_mode(mode: Mode) {
    MODE.store(
        match mode {
            Mode::Sequential => 0,
            Mode::Parallel => 1,
        },
        Ordering::Relaxed,
    );
}

pub fn mode() -> Mode {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == 1 {
        Mode::Parallel
    } else {
        Mode::Sequential
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == Mode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Splits `0..n` into consecutive chunks of `chunk` items and evaluates
/// `f(start, end)` on each, returning per-chunk results in order.
pub fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    map_range(n_chunks, |c| {
        let start = c * chunk;
        f(start, (start + chunk).min(n))
    })
}

/// Pairwise (tree) sum of equally sized vectors; the combination order is
/// fixed by the input order.
pub fn pairwise_sum(mut parts: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    if parts.is_empty() {
        return None;
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop()
}

/// Raw pointer to a slice that lets disjoint index sets be written from
/// several threads.
#[derive(Clone, Copy)]
pub(crate) struct SharedSlice<T> {
    ptr: *mut T,
    len: usize,
}

unsafe impl<T: Send> Send for SharedSlice<T> {}
unsafe impl<T: Send> Sync for SharedSlice<T> {}

impl<T: Copy> SharedSlice<T> {
    pub(crate) fn new(data: &mut [T]) -> Self {
        Self {
            ptr: data.as_mut_ptr(),
            len: data.len(),
        }
    }

    /// # Safety
    /// No other thread may access index `i` concurrently.
    #[inline]
    pub(crate) unsafe fn read(&self, i: usize) -> T {
        debug_assert!(i < self.len);
        *self.ptr.add(i)
    }

    /// # Safety
    /// No other thread may access index `i` concurrently.
    #[inline]
    pub(crate) unsafe fn write(&self, i: usize, v: T) {
        debug_assert!(i < self.len);
        *self.ptr.add(i) = v;
    }
}

/// Calls `f(k)` for `k in 0..n`, in parallel when enabled. `f` must only touch
/// state that is disjoint across `k`.
pub(crate) fn for_each_index<F>(n: usize, min_parallel: usize, f: F)
where
    F: Fn(usize) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if n >= min_parallel && mode() == Mode::Parallel {
        use rayon::prelude::*;
        (0..n).into_par_iter().with_min_len(256).for_each(f);
        return;
    }
    let _ = min_parallel;
    (0..n).for_each(f)
}
