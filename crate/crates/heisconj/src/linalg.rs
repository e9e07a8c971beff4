//! Exact integer matrix routines: Hermite normal form, kernels, and
//! linear-system solving over the integers.
//!
//! Lattices are spanned by the *rows* of a matrix in row Hermite normal
//! form: pivot columns strictly increase, pivots are positive, and every
//! entry above a pivot lies in `[0, pivot)`. This canonical form makes
//! lattice equality a plain `==` and gives deterministic coset
//! representatives.

use crate::arith;
use crate::error::{Error, Result};

/// A lattice basis in row Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hnf {
    pub rows: Vec<Vec<i64>>,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl Hnf {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` in place by exact division at the pivots. Returns true
    /// iff the result is the zero vector, i.e. iff `v` lies in the lattice.
    pub fn reduce_exact(&self, v: &mut [i64]) -> Result<bool> {
        debug_assert_eq!(v.len(), self.cols);
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if v[c] % row[c] != 0 {
                return Ok(false);
            }
            let q = v[c] / row[c];
            sub_scaled(v, row, q)?;
        }
        Ok(v.iter().all(|&x| x == 0))
    }

    pub fn contains(&self, v: &[i64]) -> Result<bool> {
        let mut w = v.to_vec();
        self.reduce_exact(&mut w)
    }

    /// Reduces `v` in place to the canonical coset representative: floor
    /// division at each pivot leaves the least non-negative residue there.
    /// Two vectors reduce to the same representative iff they differ by a
    /// lattice vector.
    pub fn reduce_canonical(&self, v: &mut [i64]) -> Result<()> {
        debug_assert_eq!(v.len(), self.cols);
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let q = arith::div_floor(v[c], row[c])?;
            sub_scaled(v, row, q)?;
        }
        Ok(())
    }

    /// Reduces `v` with exact division at pivots, collecting the quotients.
    /// Returns `None` when `v` is not in the lattice.
    fn decompose(&self, v: &mut [i64]) -> Result<Option<Vec<i64>>> {
        let mut qs = Vec::with_capacity(self.rows.len());
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if v[c] % row[c] != 0 {
                return Ok(None);
            }
            let q = v[c] / row[c];
            sub_scaled(v, row, q)?;
            qs.push(q);
        }
        if v.iter().all(|&x| x == 0) {
            Ok(Some(qs))
        } else {
            Ok(None)
        }
    }

    /// Index of the lattice in ℤ^cols: the pivot product when the lattice
    /// has full column rank, `None` (infinite index) otherwise.
    pub fn quotient_order(&self) -> Option<u128> {
        if self.rank() < self.cols {
            return None;
        }
        let mut o: u128 = 1;
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            o = o.checked_mul(row[c] as u128)?;
        }
        Some(o)
    }

    /// All canonical coset representatives; requires a finite quotient.
    pub fn quotient_representatives(&self) -> Result<Vec<Vec<i64>>> {
        if self.rank() < self.cols {
            return Err(Error::InfiniteEnumeration);
        }
        let bounds: Vec<i64> = self
            .rows
            .iter()
            .zip(&self.pivots)
            .map(|(row, &c)| row[c])
            .collect();
        let mut reps = Vec::new();
        let mut cur = vec![0i64; self.cols];
        loop {
            let mut v = vec![0i64; self.cols];
            for (slot, &c) in cur.iter().zip(&self.pivots) {
                v[c] = *slot;
            }
            reps.push(v);
            let mut i = self.cols;
            loop {
                if i == 0 {
                    return Ok(reps);
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < bounds[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }
}

fn sub_scaled(dst: &mut [i64], src: &[i64], q: i64) -> Result<()> {
    if q == 0 {
        return Ok(());
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = arith::sub(*d, arith::mul(q, s)?)?;
    }
    Ok(())
}

fn hnf_in_place(
    mat: &mut [Vec<i64>],
    mut transform: Option<&mut Vec<Vec<i64>>>,
) -> Result<Vec<usize>> {
    let nrows = mat.len();
    let ncols = mat.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        loop {
            let best = (r..nrows)
                .filter(|&i| mat[i][c] != 0)
                .min_by_key(|&i| mat[i][c].unsigned_abs());
            let Some(b) = best else { break };
            mat.swap(r, b);
            if let Some(u) = transform.as_deref_mut() {
                u.swap(r, b);
            }
            let mut clean = true;
            for i in r + 1..nrows {
                if mat[i][c] != 0 {
                    let q = mat[i][c] / mat[r][c];
                    let (head, tail) = mat.split_at_mut(i);
                    sub_scaled(&mut tail[0], &head[r], q)?;
                    if let Some(u) = transform.as_deref_mut() {
                        let (uh, ut) = u.split_at_mut(i);
                        sub_scaled(&mut ut[0], &uh[r], q)?;
                    }
                    if mat[i][c] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if mat[r][c] != 0 {
            if mat[r][c] < 0 {
                for x in mat[r].iter_mut() {
                    *x = arith::neg(*x)?;
                }
                if let Some(u) = transform.as_deref_mut() {
                    for x in u[r].iter_mut() {
                        *x = arith::neg(*x)?;
                    }
                }
            }
            for i in 0..r {
                let q = arith::div_floor(mat[i][c], mat[r][c])?;
                let (head, tail) = mat.split_at_mut(r);
                sub_scaled(&mut head[i], &tail[0], q)?;
                if let Some(u) = transform.as_deref_mut() {
                    let (uh, ut) = u.split_at_mut(r);
                    sub_scaled(&mut uh[i], &ut[0], q)?;
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    Ok(pivots)
}

/// Row Hermite normal form of the lattice spanned by the rows of `mat`.
pub fn row_hnf(mut mat: Vec<Vec<i64>>, cols: usize) -> Result<Hnf> {
    debug_assert!(mat.iter().all(|r| r.len() == cols));
    let pivots = hnf_in_place(&mut mat, None)?;
    mat.truncate(pivots.len());
    Ok(Hnf {
        rows: mat,
        pivots,
        cols,
    })
}

/// As [`row_hnf`], also returning a unimodular `u` with `u * mat = [h; 0]`.
/// The trailing rows of `u` (one per zero row) span the left kernel of `mat`.
pub fn row_hnf_with_transform(mut mat: Vec<Vec<i64>>, cols: usize) -> Result<(Hnf, Vec<Vec<i64>>)> {
    debug_assert!(mat.iter().all(|r| r.len() == cols));
    let n = mat.len();
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    let pivots = hnf_in_place(&mut mat, Some(&mut u))?;
    mat.truncate(pivots.len());
    Ok((
        Hnf {
            rows: mat,
            pivots,
            cols,
        },
        u,
    ))
}

pub fn transpose(mat: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    (0..cols)
        .map(|c| mat.iter().map(|row| row[c]).collect())
        .collect()
}

/// Basis of the right kernel `{x : mat · x = 0}`.
pub fn kernel_basis(mat: &[Vec<i64>], cols: usize) -> Result<Vec<Vec<i64>>> {
    let t = transpose(mat, cols);
    let (h, u) = row_hnf_with_transform(t, mat.len())?;
    Ok(u[h.rank()..].to_vec())
}

/// One integer solution of `mat · x = target`, or `None` when there is none.
pub fn solve_integer(mat: &[Vec<i64>], cols: usize, target: &[i64]) -> Result<Option<Vec<i64>>> {
    debug_assert_eq!(target.len(), mat.len());
    let t = transpose(mat, cols);
    let (h, u) = row_hnf_with_transform(t, mat.len())?;
    let mut rhs = target.to_vec();
    let Some(qs) = h.decompose(&mut rhs)? else {
        return Ok(None);
    };
    let mut x = vec![0i64; cols];
    for (q, urow) in qs.iter().zip(&u) {
        for (xj, &uj) in x.iter_mut().zip(urow) {
            *xj = arith::add(*xj, arith::mul(*q, uj)?)?;
        }
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hnf(rows: &[&[i64]], cols: usize) -> Hnf {
        row_hnf(rows.iter().map(|r| r.to_vec()).collect(), cols).unwrap()
    }

    #[test]
    fn hnf_of_simple_lattice() {
        let h = hnf(&[&[2, 1], &[0, 3]], 2);
        assert_eq!(h.rows, vec![vec![2, 1], vec![0, 3]]);
        assert_eq!(h.pivots, vec![0, 1]);
        assert_eq!(h.quotient_order(), Some(6));
    }

    #[test]
    fn hnf_reduces_above_pivots() {
        // rows (1,5) and (0,3): entry above pivot 3 must land in [0,3)
        let h = hnf(&[&[1, 5], &[0, 3]], 2);
        assert_eq!(h.rows, vec![vec![1, 2], vec![0, 3]]);
    }

    #[test]
    fn membership_and_canonical_reduction() {
        let h = hnf(&[&[2, 1], &[0, 4]], 2);
        assert!(h.contains(&[2, 1]).unwrap());
        assert!(h.contains(&[2, 5]).unwrap());
        assert!(h.contains(&[4, 2]).unwrap());
        assert!(!h.contains(&[1, 0]).unwrap());
        assert!(!h.contains(&[2, 2]).unwrap());

        let mut v = vec![3, 3];
        h.reduce_canonical(&mut v).unwrap();
        assert_eq!(v, vec![1, 2]);
        // idempotent
        let mut w = v.clone();
        h.reduce_canonical(&mut w).unwrap();
        assert_eq!(w, v);
    }

    #[test]
    fn canonical_representatives_enumerate_quotient() {
        let h = hnf(&[&[2, 0], &[0, 2]], 2);
        let reps = h.quotient_representatives().unwrap();
        assert_eq!(reps.len(), 4);
        assert_eq!(reps[0], vec![0, 0]);
        assert_eq!(reps[3], vec![1, 1]);
    }

    #[test]
    fn kernel_of_scaling_map() {
        // kernel of [2 4] (one equation 2x + 4y = 0) is spanned by (2, -1)
        let k = kernel_basis(&[vec![2, 4]], 2).unwrap();
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert_eq!(2 * v[0] + 4 * v[1], 0);
        assert!(v[0] != 0 || v[1] != 0);
        assert_eq!(v[0].abs(), 2);
    }

    #[test]
    fn kernel_of_empty_matrix_is_everything() {
        let k = kernel_basis(&[], 3).unwrap();
        assert_eq!(k.len(), 3);
    }

    #[test]
    fn solve_finds_integer_solutions() {
        // x + 3y = 7 has solutions; 2x + 4y = 7 has none
        let s = solve_integer(&[vec![1, 3]], 2, &[7]).unwrap().unwrap();
        assert_eq!(s[0] + 3 * s[1], 7);
        assert!(solve_integer(&[vec![2, 4]], 2, &[7]).unwrap().is_none());
        // 2x2 system
        let s = solve_integer(&[vec![2, 0], vec![1, 3]], 2, &[4, 8])
            .unwrap()
            .unwrap();
        assert_eq!(s, vec![2, 2]);
    }

    #[test]
    fn transform_rows_multiply_back() {
        let mat = vec![vec![6, 4], vec![2, 8]];
        let (h, u) = row_hnf_with_transform(mat.clone(), 2).unwrap();
        for (i, urow) in u.iter().enumerate() {
            let prod: Vec<i64> = (0..2)
                .map(|c| urow.iter().zip(&mat).map(|(&ui, row)| ui * row[c]).sum())
                .collect();
            if i < h.rank() {
                assert_eq!(prod, h.rows[i]);
            } else {
                assert_eq!(prod, vec![0, 0]);
            }
        }
    }
}
