//! Order-preserving parallel map.
//!
//! Sampling runs (multistart seeds, random games) are embarrassingly
//! parallel but their outputs must not depend on scheduling: results are
//! written into a slot per index and reduced in index order. The worker
//! count is capped by the `GAMEFORM_THREADS` environment variable
//! (a positive integer), falling back to the machine's parallelism.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const THREADS_ENV_VAR: &str = "GAMEFORM_THREADS";

/// Effective worker cap: `GAMEFORM_THREADS` when set and valid,
/// otherwise the available hardware parallelism.
pub fn thread_cap() -> usize {
    if let Ok(v) = std::env::var(THREADS_ENV_VAR) {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Applies `f` to every index in `0..n` and returns results in index
/// order. The schedule never changes the output.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = thread_cap().min(n.max(1));
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let out = f(i);
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|s| s.expect("worker filled every slot")).collect()
}
