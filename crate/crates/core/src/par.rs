//! Data-parallel helpers. With the `parallel` feature these run on rayon;
//! without it they fall back to plain sequential loops with identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when the crate was built with the rayon backend.
pub const PARALLEL: bool = cfg!(feature = "parallel");

/// Ordered map over a slice.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Ordered map over a slice, always sequential.
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Calls `f(i, chunk)` for each `width`-sized chunk of `data`.
pub fn for_each_chunk<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let width = width.max(1);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(width).enumerate().for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(width).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Runs `f` on a worker with a large stack; deep right-nested sums in the
/// rewrite engine recurse once per summand.
pub fn with_big_stack<R: Send, F: FnOnce() -> R + Send>(f: F) -> R {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(s, f)
            .expect("spawn worker")
            .join()
            .expect("worker panicked")
    })
}

pub const STACK_BYTES: usize = 256 << 20;

/// Runs `f` inside a thread pool whose workers have large stacks.
pub fn in_pool<R: Send, F: FnOnce() -> R + Send>(f: F) -> R {
    #[cfg(feature = "parallel")]
    {
        use std::sync::OnceLock;
        static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
        let pool = POOL.get_or_init(|| {
            rayon::ThreadPoolBuilder::new().stack_size(STACK_BYTES).build().expect("thread pool")
        });
        pool.install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        with_big_stack(f)
    }
}
