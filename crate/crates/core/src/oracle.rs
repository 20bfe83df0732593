//! Exhaustive minimum paving of small truncations.
//!
//! Indices are assigned in increasing order. Index 1 always opens class 1 and
//! a new class may only be opened by the next unassigned index, so each set
//! partition is visited once. Margins are correctly rounded sums, hence
//! monotone under adding members: a class whose margin already fell below the
//! threshold can be pruned without losing any solution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gram::GramSystem;
use crate::numeric::ExactSum;
use crate::partition::{Class, IndexRange, Paving};

pub const DEFAULT_EPSILON: f64 = 1e-12;
pub const DEFAULT_SIZE_CAP: usize = 16;

/// `min_{n∈class} (G[n][n] − Σ_{m∈class, m≠n} G[n][m])` over stored entries,
/// correctly rounded per row. Negative margins are legal.
pub fn exact_margin(g: &GramSystem, class: &[usize]) -> Result<f64> {
    if let Some(&index) = class.iter().find(|&&n| n == 0 || n > g.size()) {
        return Err(Error::IndexOutOfRange { index, size: g.size() });
    }
    Ok(margin_unchecked(g, class))
}

fn margin_unchecked(g: &GramSystem, class: &[usize]) -> f64 {
    class
        .iter()
        .map(|&n| {
            let mut acc = ExactSum::new();
            acc.add(g.value(n - 1, n - 1));
            for &m in class {
                if m != n {
                    acc.add(-g.value(n - 1, m - 1));
                }
            }
            acc.value()
        })
        .fold(f64::INFINITY, f64::min)
}

fn admissible(margin: f64, epsilon: f64) -> bool {
    margin >= epsilon && margin > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub epsilon: f64,
    pub cap: usize,
    /// Explore the two placements of index 2 concurrently.
    pub parallel: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON, cap: DEFAULT_SIZE_CAP, parallel: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinPartition {
    /// Minimum number of classes.
    pub classes: usize,
    pub paving: Paving,
    pub margins: Vec<f64>,
}

pub fn min_partition(g: &GramSystem, epsilon: f64) -> Result<MinPartition> {
    min_partition_with(g, OracleOptions { epsilon, ..OracleOptions::default() })
}

pub fn min_partition_with(g: &GramSystem, options: OracleOptions) -> Result<MinPartition> {
    let OracleOptions { epsilon, cap, parallel } = options;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("must be nonnegative, got {epsilon}") });
    }
    let size = g.size();
    if size > cap {
        return Err(Error::SizeCap { size, cap });
    }
    for n in 1..=size {
        let diag = g.value(n - 1, n - 1);
        if !admissible(diag, epsilon) {
            return Err(Error::Infeasible { index: n, diag, epsilon });
        }
    }

    let search = Search { g, epsilon, size };
    // all singletons always work, so this terminates by `limit = size`
    for limit in 1..=size {
        let witness = if parallel { search.run_split(limit) } else { search.run(limit) };
        if let Some(classes) = witness {
            let margins = classes.iter().map(|c| margin_unchecked(g, c)).collect();
            let paving = Paving::new(
                IndexRange::Prefix(size),
                classes.into_iter().map(Class::Explicit).collect(),
                None,
            )?;
            return Ok(MinPartition { classes: limit, paving, margins });
        }
    }
    unreachable!("singleton paving is admissible once every diagonal entry is")
}

struct Search<'a> {
    g: &'a GramSystem,
    epsilon: f64,
    size: usize,
}

impl Search<'_> {
    fn run(&self, limit: usize) -> Option<Vec<Vec<usize>>> {
        let mut classes = vec![vec![1]];
        self.extend(2, limit, &mut classes).then_some(classes)
    }

    /// Same result as [`Search::run`]: the branch with index 2 in class 1 is
    /// preferred, matching the sequential order.
    fn run_split(&self, limit: usize) -> Option<Vec<Vec<usize>>> {
        if self.size < 2 {
            return self.run(limit);
        }
        let together = || {
            let mut classes = vec![vec![1, 2]];
            (self.fits(&classes[0]) && self.extend(3, limit, &mut classes)).then_some(classes)
        };
        let apart = || {
            let mut classes = vec![vec![1], vec![2]];
            (limit >= 2 && self.extend(3, limit, &mut classes)).then_some(classes)
        };
        let (first, second) = rayon::join(together, apart);
        first.or(second)
    }

    fn fits(&self, class: &[usize]) -> bool {
        admissible(margin_unchecked(self.g, class), self.epsilon)
    }

    fn extend(&self, next: usize, limit: usize, classes: &mut Vec<Vec<usize>>) -> bool {
        if next > self.size {
            return true;
        }
        for c in 0..classes.len() {
            classes[c].push(next);
            if self.fits(&classes[c]) && self.extend(next + 1, limit, classes) {
                return true;
            }
            classes[c].pop();
        }
        if classes.len() < limit {
            classes.push(vec![next]);
            if self.extend(next + 1, limit, classes) {
                return true;
            }
            classes.pop();
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_offdiag(size: usize, off: f64) -> GramSystem {
        GramSystem::from_fn(size, |n, m| if n == m { 1.0 } else { off }).unwrap()
    }

    #[test]
    fn exact_margin_examples() {
        let g = constant_offdiag(6, 0.3);
        assert!((exact_margin(&g, &[1, 2, 3, 4]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(exact_margin(&g, &[5]).unwrap(), 1.0);
        let g = constant_offdiag(5, 0.6);
        assert!((exact_margin(&g, &[1, 2, 3]).unwrap() + 0.2).abs() < 1e-15);
        assert_eq!(exact_margin(&g, &[1, 9]), Err(Error::IndexOutOfRange { index: 9, size: 5 }));
    }

    #[test]
    fn hand_instances() {
        let r = min_partition(&constant_offdiag(5, 0.3), 1e-12).unwrap();
        assert_eq!(r.classes, 2);
        assert!(r.margins.iter().all(|&m| m >= 1e-12));
        let r = min_partition(&constant_offdiag(5, 0.6), 1e-12).unwrap();
        assert_eq!(r.classes, 3);
        let diag = constant_offdiag(7, 0.0);
        assert_eq!(min_partition(&diag, 0.5).unwrap().classes, 1);
    }

    #[test]
    fn witness_is_deterministic_and_parallel_agrees() {
        let g = GramSystem::from_fn(9, |n, m| if n == m { 1.0 } else { 0.9 / (1.0 + n.abs_diff(m) as f64) })
            .unwrap();
        let a = min_partition(&g, 1e-12).unwrap();
        let b = min_partition(&g, 1e-12).unwrap();
        let c = min_partition_with(&g, OracleOptions { parallel: true, ..Default::default() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn errors() {
        let g = GramSystem::from_fn(3, |n, m| if n == m { if n == 2 { 0.1 } else { 1.0 } } else { 0.0 }).unwrap();
        assert_eq!(
            min_partition(&g, 0.5),
            Err(Error::Infeasible { index: 2, diag: 0.1, epsilon: 0.5 })
        );
        let big = constant_offdiag(17, 0.0);
        assert_eq!(min_partition(&big, 1e-12), Err(Error::SizeCap { size: 17, cap: 16 }));
        let opts = OracleOptions { cap: 20, ..Default::default() };
        assert_eq!(min_partition_with(&big, opts).unwrap().classes, 1);
    }
}
