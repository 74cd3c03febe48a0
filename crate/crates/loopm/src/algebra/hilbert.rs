//! Hilbert bases of homogeneous linear Diophantine systems over the naturals,
//! via Contejean–Devié completion with componentwise-minimality pruning.

use crate::error::{Error, Result};
use crate::limits::Limits;

/// Homogeneous system `A v = 0` sought over natural vectors `v`.
#[derive(Clone, Debug)]
pub struct DioSystem {
    /// Rows of integer coefficients; all rows share one length.
    pub rows: Vec<Vec<i64>>,
}

impl DioSystem {
    pub fn new(rows: Vec<Vec<i64>>) -> Self {
        if let Some(first) = rows.first() {
            assert!(rows.iter().all(|r| r.len() == first.len()));
        }
        DioSystem { rows }
    }

    pub fn num_unknowns(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    fn apply(&self, v: &[u32]) -> Vec<i128> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v.iter())
                    .map(|(&a, &x)| a as i128 * x as i128)
                    .sum()
            })
            .collect()
    }
}

fn leq(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x <= y)
}

/// Complete set of componentwise-minimal nonzero natural solutions of `A v = 0`.
pub fn hilbert_basis_nat(system: &DioSystem, limits: &Limits) -> Result<Vec<Vec<u32>>> {
    let n = system.num_unknowns();
    if n == 0 {
        return Ok(Vec::new());
    }
    let col_images: Vec<Vec<i128>> = (0..n)
        .map(|j| {
            let mut e = vec![0u32; n];
            e[j] = 1;
            system.apply(&e)
        })
        .collect();

    let mut minimal: Vec<Vec<u32>> = Vec::new();
    // breadth-first: smaller vectors complete first, so the minimality
    // pruning below can cut every runaway branch
    let mut frontier: std::collections::VecDeque<(Vec<u32>, Vec<i128>)> = (0..n)
        .map(|j| {
            let mut e = vec![0u32; n];
            e[j] = 1;
            let img = col_images[j].clone();
            (e, img)
        })
        .collect();
    let mut seen: std::collections::BTreeSet<Vec<u32>> = frontier.iter().map(|(v, _)| v.clone()).collect();

    while let Some((v, img)) = frontier.pop_front() {
        if img.iter().all(|&x| x == 0) {
            if !minimal.iter().any(|m| leq(m, &v)) {
                minimal.retain(|m| !leq(&v, m));
                minimal.push(v);
            }
            continue;
        }
        for j in 0..n {
            // Contejean–Devié: only step in directions decreasing |A v|
            let dot: i128 = img
                .iter()
                .zip(col_images[j].iter())
                .map(|(&a, &b)| a * b)
                .sum();
            if dot >= 0 {
                continue;
            }
            let mut w = v.clone();
            w[j] += 1;
            if w[j] > limits.hilbert_entry_bound {
                return Err(Error::ResourceLimit(format!(
                    "Hilbert basis entry bound {} exceeded",
                    limits.hilbert_entry_bound
                )));
            }
            if minimal.iter().any(|m| leq(m, &w)) || seen.contains(&w) {
                continue;
            }
            let wimg: Vec<i128> = img
                .iter()
                .zip(col_images[j].iter())
                .map(|(&a, &b)| a + b)
                .collect();
            seen.insert(w.clone());
            frontier.push_back((w, wimg));
        }
    }
    minimal.sort();
    Ok(minimal)
}
