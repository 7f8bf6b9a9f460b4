//! Execution backend for the data-parallel kernels.
//!
//! Every hot loop in the crate (propagator rows, mode sweeps, column batches,
//! grid rows) goes through [`Backend`]. With the `parallel` feature the
//! default backend distributes work over the rayon pool; without it, or when
//! [`Backend::Sequential`] is requested explicitly, the same closures run in
//! index order on the calling thread. Results are identical either way since
//! each work item writes only its own output slot.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Sequential,
    Parallel,
}

impl Default for Backend {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Backend::Parallel
        } else {
            Backend::Sequential
        }
    }
}

impl Backend {
    /// Whether this backend actually fans out; `Parallel` degrades to
    /// sequential execution when the crate is built without rayon.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Backend::Parallel
    }

    /// Evaluates `f(i)` for `i in 0..len` and collects the results in order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Fills `data` in consecutive chunks of `width`, calling `f(chunk_index, chunk)`.
    pub fn for_each_chunk<T, F>(self, data: &mut [T], width: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        assert!(width > 0, "chunk width must be positive");
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            data.par_chunks_mut(width)
                .enumerate()
                .for_each(|(i, chunk)| f(i, chunk));
            return;
        }
        data.chunks_mut(width).enumerate().for_each(|(i, chunk)| f(i, chunk));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_agree() {
        let seq = Backend::Sequential.map(100, |i| i * i);
        let par = Backend::Parallel.map(100, |i| i * i);
        assert_eq!(seq, par);

        let mut a = vec![0usize; 12];
        let mut b = vec![0usize; 12];
        Backend::Sequential.for_each_chunk(&mut a, 4, |r, row| {
            row.iter_mut().enumerate().for_each(|(c, x)| *x = r * 10 + c)
        });
        Backend::Parallel.for_each_chunk(&mut b, 4, |r, row| {
            row.iter_mut().enumerate().for_each(|(c, x)| *x = r * 10 + c)
        });
        assert_eq!(a, b);
        assert_eq!(a[5], 11);
    }
}
