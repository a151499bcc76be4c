//! Data-parallel fold over an index range, with a sequential fallback.
//!
//! The `parallel` feature routes work through a rayon pool; without it
//! (or with `workers == 1`) the same fold runs on the calling thread.
//! Every caller keeps results independent of worker count by deriving
//! per-index state from the index alone and merging with associative,
//! commutative operations.

/// Worker-count request: 0 = library default, 1 = in-thread, k = pool of k.
pub(crate) type Workers = usize;

pub(crate) fn fold_indices<W, T, MkWs, Step, Merge>(
    range: std::ops::Range<u64>,
    workers: Workers,
    mk_ws: MkWs,
    step: Step,
    zero: T,
    merge: Merge,
) -> T
where
    W: Send,
    T: Send,
    MkWs: Fn() -> W + Sync + Send,
    Step: Fn(&mut W, u64) -> T + Sync + Send,
    Merge: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers != 1 {
            return fold_par(range, workers, &mk_ws, &step, zero, &merge);
        }
    }
    fold_seq(range, &mk_ws, &step, zero, &merge)
}

pub(crate) fn fold_seq<W, T, MkWs, Step, Merge>(
    range: std::ops::Range<u64>,
    mk_ws: &MkWs,
    step: &Step,
    zero: T,
    merge: &Merge,
) -> T
where
    MkWs: Fn() -> W,
    Step: Fn(&mut W, u64) -> T,
    Merge: Fn(T, T) -> T,
{
    let mut ws = mk_ws();
    let mut acc = zero;
    for i in range {
        acc = merge(acc, step(&mut ws, i));
    }
    acc
}

#[cfg(feature = "parallel")]
fn fold_par<W, T, MkWs, Step, Merge>(
    range: std::ops::Range<u64>,
    workers: Workers,
    mk_ws: &MkWs,
    step: &Step,
    zero: T,
    merge: &Merge,
) -> T
where
    W: Send,
    T: Send,
    MkWs: Fn() -> W + Sync + Send,
    Step: Fn(&mut W, u64) -> T + Sync + Send,
    Merge: Fn(T, T) -> T + Sync + Send,
{
    use rayon::prelude::*;

    let body = || {
        range
            .clone()
            .into_par_iter()
            .map_init(mk_ws, |ws, i| step(ws, i))
            .reduce_with(merge)
    };
    let folded = if workers == 0 {
        body()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("rayon pool");
        pool.install(body)
    };
    match folded {
        Some(t) => merge(zero, t),
        None => zero,
    }
}
