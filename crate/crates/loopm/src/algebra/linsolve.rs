//! Exact Gaussian elimination over any of the coefficient fields.

use super::field::Field;

#[derive(Clone, Debug, PartialEq)]
pub enum LinSolve<K> {
    Unique(Vec<K>),
    /// Underdetermined but consistent; carries one witness (free vars = 0).
    NonUnique(Vec<K>),
    NoSolution,
}

/// Solve `A x = b` exactly. `A` may be rectangular.
pub fn solve_linear<K: Field>(a: &[Vec<K>], b: &[K]) -> LinSolve<K> {
    assert_eq!(a.len(), b.len());
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<K>> = a
        .iter()
        .zip(b.iter())
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows).find(|&r| !m[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => continue,
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].inv();
        for x in m[rank].iter_mut() {
            *x = x.mul(&inv);
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=cols {
                    let delta = m[rank][c].mul(&factor);
                    m[r][c] = m[r][c].sub(&delta);
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    // inconsistent row: 0 = nonzero
    for r in rank..rows {
        if !m[r][cols].is_zero() {
            return LinSolve::NoSolution;
        }
    }
    let mut x = vec![K::zero(); cols];
    for col in 0..cols {
        if let Some(r) = pivot_of_col[col] {
            x[col] = m[r][cols].clone();
        }
    }
    if pivot_of_col.iter().all(|p| p.is_some()) {
        LinSolve::Unique(x)
    } else {
        LinSolve::NonUnique(x)
    }
}

/// Basis of the nullspace of `A` (free variables set to 1 one at a time).
pub fn nullspace<K: Field>(a: &[Vec<K>]) -> Vec<Vec<K>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<K>> = a.to_vec();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows).find(|&r| !m[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => continue,
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].inv();
        for x in m[rank].iter_mut() {
            *x = x.mul(&inv);
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..cols {
                    let delta = m[rank][c].mul(&factor);
                    m[r][c] = m[r][c].sub(&delta);
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![K::zero(); cols];
        v[free] = K::one();
        for col in 0..cols {
            if let Some(r) = pivot_of_col[col] {
                v[col] = m[r][free].neg();
            }
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn unique_solution() {
        // x + y = 3, x - y = 1 -> (2, 1)
        let a = vec![vec![q(1), q(1)], vec![q(1), q(-1)]];
        let b = vec![q(3), q(1)];
        assert_eq!(solve_linear(&a, &b), LinSolve::Unique(vec![q(2), q(1)]));
    }

    #[test]
    fn inconsistent() {
        let a = vec![vec![q(1), q(1)], vec![q(1), q(1)]];
        let b = vec![q(1), q(2)];
        assert_eq!(solve_linear(&a, &b), LinSolve::NoSolution);
    }

    #[test]
    fn underdetermined_witness_satisfies_system() {
        let a = vec![vec![q(1), q(1)]];
        let b = vec![q(5)];
        match solve_linear(&a, &b) {
            LinSolve::NonUnique(x) => assert_eq!(x[0].clone() + x[1].clone(), q(5)),
            other => panic!("expected NonUnique, got {:?}", other),
        }
    }

    #[test]
    fn nullspace_of_rank_one() {
        // x + 2y = 0 -> basis {(-2, 1)}
        let a = vec![vec![q(1), q(2)]];
        let ns = nullspace(&a);
        assert_eq!(ns, vec![vec![q(-2), q(1)]]);
    }
}
