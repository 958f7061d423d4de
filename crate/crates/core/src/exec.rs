//! Execution policy for the data-parallel loops.
//!
//! With the `parallel` feature (on by default) the realization loops and the
//! matrix-free matvec run on the rayon pool. Without it, or with
//! [`Exec::Sequential`], everything runs on the calling thread. Results are
//! collected in index order either way, so reductions see the same operand
//! order regardless of scheduling.

/// Chooses between the rayon pool and the calling thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Minimum chunk length handed to one worker by [`fill_chunks`].
pub const CHUNK: usize = 1 << 12;

/// Calls `f(offset, chunk)` on consecutive chunks of `out`.
pub fn fill_chunks<T, F>(exec: Exec, out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && out.len() > CHUNK {
        use rayon::prelude::*;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(k, chunk)| f(k * CHUNK, chunk));
        return;
    }
    let _ = exec;
    f(0, out)
}

/// Calls `f` on consecutive index ranges covering `0..n`.
pub fn for_each_range<F>(exec: Exec, n: usize, f: F)
where
    F: Fn(std::ops::Range<usize>) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && n > CHUNK {
        use rayon::prelude::*;
        (0..n.div_ceil(CHUNK)).into_par_iter().for_each(|k| f(k * CHUNK..((k + 1) * CHUNK).min(n)));
        return;
    }
    let _ = exec;
    f(0..n)
}

/// Raw pointer handed to workers that write provably disjoint elements.
#[derive(Clone, Copy)]
pub(crate) struct SharedMut<T>(pub *mut T);

// SAFETY: only used by kernels whose writes from different workers never alias.
unsafe impl<T: Send> Send for SharedMut<T> {}
unsafe impl<T: Send> Sync for SharedMut<T> {}

/// Maximum of `f(i)` over `0..n` (0 for empty ranges).
pub fn max_indexed<F>(exec: Exec, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && n > CHUNK {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).reduce(|| 0.0, f64::max);
    }
    let _ = exec;
    (0..n).map(f).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_in_both_modes() {
        let a = map_indexed(Exec::Sequential, 1000, |i| i * i);
        let b = map_indexed(Exec::Parallel, 1000, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn fill_chunks_sees_global_offsets() {
        let mut v = vec![0usize; 3 * CHUNK + 7];
        fill_chunks(Exec::Parallel, &mut v, |off, c| {
            for (k, x) in c.iter_mut().enumerate() {
                *x = off + k;
            }
        });
        assert!(v.iter().enumerate().all(|(i, &x)| i == x));
    }
}
