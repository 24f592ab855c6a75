//! Thin dispatch layer between the rayon and sequential code paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether the current rayon pool has more than one worker.
#[cfg(feature = "parallel")]
fn pooled() -> bool {
    rayon::current_num_threads() > 1
}

#[cfg(feature = "parallel")]
const FILL_BLOCK: usize = 4096;

/// Calls `f(chunk_index, chunk)` for consecutive chunks of `data`.
pub(crate) fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if pooled() {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    data.chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Calls `f(chunk_index, a_chunk, b_chunk)` for matching chunks of two
/// slices of equal length.
pub(crate) fn for_each_chunk_pair<T, F>(a: &mut [T], b: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T], &mut [T]) + Sync + Send,
{
    debug_assert_eq!(a.len(), b.len());
    #[cfg(feature = "parallel")]
    if pooled() {
        a.par_chunks_mut(chunk)
            .zip(b.par_chunks_mut(chunk))
            .enumerate()
            .for_each(|(i, (x, y))| f(i, x, y));
        return;
    }
    a.chunks_mut(chunk)
        .zip(b.chunks_mut(chunk))
        .enumerate()
        .for_each(|(i, (x, y))| f(i, x, y));
}

/// Elementwise `out[i] = f(i)`.
pub(crate) fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if pooled() {
        out.par_chunks_mut(FILL_BLOCK)
            .enumerate()
            .for_each(|(b, chunk)| {
                let base = b * FILL_BLOCK;
                for (i, o) in chunk.iter_mut().enumerate() {
                    *o = f(base + i);
                }
            });
        return;
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

const SUM_BLOCK: usize = 2048;

/// Sum of `f(i)` over `0..len`.
///
/// Partial sums are taken over fixed blocks and combined in order, so the
/// result is bitwise identical for any thread count and for both build modes.
pub(crate) fn sum_indexed<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = len.div_ceil(SUM_BLOCK);
    let block_sum = |b: usize| {
        let end = ((b + 1) * SUM_BLOCK).min(len);
        (b * SUM_BLOCK..end).map(&f).sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    if pooled() {
        let partials: Vec<f64> = (0..blocks).into_par_iter().map(block_sum).collect();
        return partials.into_iter().sum();
    }
    let partials: Vec<f64> = (0..blocks).map(block_sum).collect();
    partials.into_iter().sum()
}

/// Maximum of `f(i)` over `0..len` (0 for empty ranges).
pub(crate) fn max_indexed<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if pooled() {
        return (0..len)
            .into_par_iter()
            .with_min_len(FILL_BLOCK)
            .map(f)
            .reduce(|| 0.0, f64::max);
    }
    (0..len).map(f).fold(0.0, f64::max)
}

/// Maps independent jobs, preserving input order in the output.
pub(crate) fn map_jobs<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Sets the number of worker threads for all data-parallel kernels. Must be
/// called before any parallel work; without the `parallel` feature this is
/// a no-op.
pub fn configure_threads(threads: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

/// Number of worker threads the kernels run on.
pub fn worker_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
