//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the default mode uses rayon; the mode can be
//! switched at runtime so benchmarks can compare both paths in one build.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

const SEQ: u8 = 0;
const PAR: u8 = 1;

static MODE: AtomicU8 = AtomicU8::new(if cfg!(feature = "parallel") { PAR } else { SEQ });

/// Selects the execution mode; `Parallel` silently degrades without the feature.
pub fn set_mode(m: Mode) {
    MODE.store(if m == Mode::Parallel { PAR } else { SEQ }, Ordering::Relaxed);
}

pub fn mode() -> Mode {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == PAR {
        Mode::Parallel
    } else {
        Mode::Sequential
    }
}

/// Order-preserving map.
pub fn map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == Mode::Parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    items.into_iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    map((0..n).collect(), f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let prev = mode();
        set_mode(Mode::Sequential);
        let a = map_range(100, |i| i * i);
        set_mode(Mode::Parallel);
        let b = map_range(100, |i| i * i);
        set_mode(prev);
        assert_eq!(a, b);
    }
}
