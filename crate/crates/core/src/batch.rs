//! Data-parallel episode generation.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] maps
//! over a rayon pool; without it every mode runs sequentially. Results are
//! always in index order, so output never depends on the mode.

use std::ops::Range;

use crate::error::GenerateError;
use crate::generate::{Episode, EpisodeGenerator, GenerationTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `f(i)` for every `i` in `range`, in order.
pub fn map_indices<T, F>(exec: Execution, range: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            range.into_par_iter().map(f).collect()
        }
        _ => range.map(f).collect(),
    }
}

/// `f(x)` for every item of `items`, in order.
pub fn map_slice<'a, S, T, F>(exec: Execution, items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Episodes `range` of `task`; the first error in index order wins.
pub fn generate_range(
    generator: &EpisodeGenerator<'_>,
    task: &str,
    range: Range<u64>,
    exec: Execution,
) -> Result<Vec<Episode>, GenerateError> {
    map_indices(exec, range, |i| generator.generate(task, i))
        .into_iter()
        .collect()
}

pub fn generate_range_traced(
    generator: &EpisodeGenerator<'_>,
    task: &str,
    range: Range<u64>,
    exec: Execution,
) -> Result<Vec<(Episode, GenerationTrace)>, GenerateError> {
    map_indices(exec, range, |i| generator.generate_traced(task, i))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::generate::GenerationConfig;

    #[test]
    fn modes_agree() {
        let g = EpisodeGenerator::new(Catalog::builtin(), GenerationConfig::canonical(4)).unwrap();
        let seq = generate_range(&g, "CompareColor", 0..64, Execution::Sequential).unwrap();
        let par = generate_range(&g, "CompareColor", 0..64, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq[10], g.generate("CompareColor", 10).unwrap());
    }

    #[test]
    fn errors_surface() {
        let g = EpisodeGenerator::new(Catalog::builtin(), GenerationConfig::canonical(4)).unwrap();
        assert!(generate_range(&g, "Nope", 0..3, Execution::default()).is_err());
        assert_eq!(map_slice(Execution::Parallel, &[1, 2, 3], |x| x * 2), vec![2, 4, 6]);
    }
}
