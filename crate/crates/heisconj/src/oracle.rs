//! Independent brute-force conjugacy deciders. These never consult the
//! invariant machinery: the finite oracle enumerates all conjugators, and
//! the integer oracle solves the conjugation system directly from its two
//! equations. Every positive verdict carries a conjugator that is
//! re-verified before being returned.

use crate::arith;
use crate::congruence::{solve_linear_diophantine, DiophantineSolutions};
use crate::error::{Error, Result};
use crate::heis::{ExtElement, ExtGroup};
use crate::zheis::ZExtElement;

/// Default cap on the extended-group order for exhaustive enumeration.
pub const DEFAULT_ORDER_BOUND: u128 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Exhaustive,
    Parametric,
    NaiveScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub candidates_tested: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict<E> {
    pub conjugate: bool,
    pub witness: Option<E>,
    pub method: OracleMethod,
    pub stats: SearchStats,
}

/// Decides conjugacy in a finite extended group by enumerating every
/// conjugator. Refuses groups larger than `bound`.
pub fn oracle_finite_bounded(
    group: &ExtGroup,
    x1: &ExtElement,
    x2: &ExtElement,
    bound: u128,
) -> Result<OracleVerdict<ExtElement>> {
    let order = group.order()?.ok_or(Error::InfiniteEnumeration)?;
    if order > bound {
        return Err(Error::OrderBound { order, bound });
    }
    let mut stats = SearchStats::default();
    for g in group.enumerate()? {
        stats.candidates_tested += 1;
        if group.conjugate(&g, x1)? == *x2 {
            debug_assert_eq!(group.conjugate(&g, x1)?, *x2);
            return Ok(OracleVerdict {
                conjugate: true,
                witness: Some(g),
                method: OracleMethod::Exhaustive,
                stats,
            });
        }
    }
    Ok(OracleVerdict {
        conjugate: false,
        witness: None,
        method: OracleMethod::Exhaustive,
        stats,
    })
}

pub fn oracle_finite(
    group: &ExtGroup,
    x1: &ExtElement,
    x2: &ExtElement,
) -> Result<OracleVerdict<ExtElement>> {
    oracle_finite_bounded(group, x1, x2, DEFAULT_ORDER_BOUND)
}

/// Conjugation-orbit labels for every element of a finite extended group,
/// indexed by enumeration order; each label is the orbit's least element
/// index. Computed purely by conjugation, independent of any invariants.
pub fn conjugacy_partition(group: &ExtGroup, bound: u128) -> Result<Vec<usize>> {
    let order = group.order()?.ok_or(Error::InfiniteEnumeration)?;
    if order > bound {
        return Err(Error::OrderBound { order, bound });
    }
    let elements = group.enumerate()?;
    let index: std::collections::BTreeMap<&ExtElement, usize> = elements.iter().zip(0..).collect();
    let mut labels = vec![usize::MAX; elements.len()];
    for i in 0..elements.len() {
        if labels[i] != usize::MAX {
            continue;
        }
        for g in &elements {
            let y = group.conjugate(g, &elements[i])?;
            labels[index[&y]] = i;
        }
    }
    Ok(labels)
}

/// Value of the second conjugation equation's defect:
/// `k·tri(n′) − k′·tri(n) − n′·p₁ − (c₁ − c₂)`, which must vanish mod `n`.
fn second_equation_defect(
    x1: &ZExtElement,
    x2: &ZExtElement,
    n_prime: i64,
    k_prime: i64,
) -> Result<i64> {
    let (n, k) = (x1.n, x1.k);
    let lhs = arith::sub(
        arith::sub(
            arith::mul(k, arith::tri(n_prime)?)?,
            arith::mul(k_prime, arith::tri(n)?)?,
        )?,
        arith::mul(n_prime, x1.p)?,
    )?;
    arith::sub(lhs, arith::sub(x1.c, x2.c)?)
}

/// Extends a `(n′, k′)` solution of the conjugation system to a verified
/// full conjugator `(p′, 0, n′, k′)`: the `c`-component of the
/// partial conjugation differs from the target by a multiple of `n`,
/// absorbed by `p′`.
fn extend_witness(
    x1: &ZExtElement,
    x2: &ZExtElement,
    n_prime: i64,
    k_prime: i64,
) -> Result<ZExtElement> {
    let g0 = ZExtElement::new(0, 0, n_prime, k_prime);
    let y0 = x1.conjugate_by(&g0)?;
    let p_prime = if x1.n == 0 {
        0
    } else {
        let diff = arith::sub(y0.c, x2.c)?;
        if diff % x1.n != 0 {
            return Err(Error::InvariantViolation(
                "second-equation residue is not a multiple of n".into(),
            ));
        }
        diff / x1.n
    };
    let witness = ZExtElement::new(p_prime, 0, n_prime, k_prime);
    if x1.conjugate_by(&witness)? != *x2 {
        return Err(Error::InvariantViolation(
            "extended witness fails to conjugate".into(),
        ));
    }
    Ok(witness)
}

/// Decides conjugacy in the integer model directly from the system
///
/// ```text
/// p₁ − p₂ = kn′ − k′n
/// c₁ − c₂ = k·tri(n′) − k′·tri(n) − n′p₁   (mod n; exact when n = 0)
/// ```
///
/// The first equation is solved as a linear Diophantine family and the
/// family is swept over one period `t ∈ [0, 2·gcd(n,k))`; the quadratic
/// term has period `2n` in `n′` and the `k′`-term period 2, so the defect
/// of the second equation is `2g`-periodic along the family.
pub fn oracle_z(x1: &ZExtElement, x2: &ZExtElement) -> Result<OracleVerdict<ZExtElement>> {
    let mut stats = SearchStats::default();
    let reject = |stats| {
        Ok(OracleVerdict {
            conjugate: false,
            witness: None,
            method: OracleMethod::Parametric,
            stats,
        })
    };
    if x1.n != x2.n || x1.k != x2.k {
        return reject(stats);
    }
    let (n, k) = (x1.n, x1.k);
    let dp = arith::sub(x1.p, x2.p)?;
    if n == 0 && k == 0 {
        // p must match and c may shift by any multiple of p
        if dp != 0 {
            return reject(stats);
        }
        let dc = arith::sub(x2.c, x1.c)?;
        if !arith::divides(x1.p, dc) {
            return reject(stats);
        }
        let n_prime = if x1.p == 0 { 0 } else { dc / x1.p };
        stats.candidates_tested = 1;
        let witness = extend_witness(x1, x2, n_prime, 0)?;
        return Ok(OracleVerdict {
            conjugate: true,
            witness: Some(witness),
            method: OracleMethod::Parametric,
            stats,
        });
    }
    // k·n′ − n·k′ = dp
    let family = match solve_linear_diophantine(k, arith::neg(n)?, dp)? {
        DiophantineSolutions::None => return reject(stats),
        DiophantineSolutions::All => unreachable!("(n, k) ≠ (0, 0)"),
        DiophantineSolutions::Family(f) => f,
    };
    let g = arith::gcd(n, k)?;
    for t in 0..arith::mul(2, g)? {
        stats.candidates_tested += 1;
        let n_prime = arith::add(family.x0, arith::mul(t, family.step_x)?)?;
        let k_prime = arith::add(family.y0, arith::mul(t, family.step_y)?)?;
        let defect = second_equation_defect(x1, x2, n_prime, k_prime)?;
        let hit = if n == 0 { defect == 0 } else { defect % n == 0 };
        if hit {
            let witness = extend_witness(x1, x2, n_prime, k_prime)?;
            return Ok(OracleVerdict {
                conjugate: true,
                witness: Some(witness),
                method: OracleMethod::Parametric,
                stats,
            });
        }
    }
    reject(stats)
}

/// Naive validation scan: tries every `(n′, k′)` in the window that solves
/// the first equation exactly, checking the second. Exists to guard the
/// parametric sweep's period claim; quadratically slower by construction.
pub fn oracle_z_naive(
    x1: &ZExtElement,
    x2: &ZExtElement,
    window: i64,
) -> Result<OracleVerdict<ZExtElement>> {
    let mut stats = SearchStats::default();
    let no = |stats| {
        Ok(OracleVerdict {
            conjugate: false,
            witness: None,
            method: OracleMethod::NaiveScan,
            stats,
        })
    };
    if x1.n != x2.n || x1.k != x2.k {
        return no(stats);
    }
    let (n, k) = (x1.n, x1.k);
    let dp = arith::sub(x1.p, x2.p)?;
    for n_prime in -window..=window {
        // k·n′ − n·k′ = dp
        let rem = arith::sub(arith::mul(k, n_prime)?, dp)?;
        let k_primes: Vec<i64> = if n != 0 {
            if rem % n != 0 || (rem / n).abs() > window {
                continue;
            }
            vec![rem / n]
        } else if rem == 0 {
            // k′ unconstrained; it only enters via k′·tri(n) = 0 here
            vec![0]
        } else {
            continue;
        };
        for k_prime in k_primes {
            stats.candidates_tested += 1;
            let defect = second_equation_defect(x1, x2, n_prime, k_prime)?;
            let hit = if n == 0 { defect == 0 } else { defect % n == 0 };
            if hit {
                let witness = extend_witness(x1, x2, n_prime, k_prime)?;
                return Ok(OracleVerdict {
                    conjugate: true,
                    witness: Some(witness),
                    method: OracleMethod::NaiveScan,
                    stats,
                });
            }
        }
    }
    no(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionMismatch {
    pub i: usize,
    pub j: usize,
    pub same_in_a: bool,
    pub same_in_b: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionReport {
    pub equal: bool,
    pub elements: usize,
    pub classes_a: usize,
    pub classes_b: usize,
    pub first_mismatch: Option<PartitionMismatch>,
}

/// Compares the partitions induced by two labelings of the same element
/// list; on inequality reports the first offending pair.
pub fn partition_compare<A: PartialEq, B: PartialEq>(a: &[A], b: &[B]) -> PartitionReport {
    assert_eq!(a.len(), b.len(), "labelings must cover the same elements");
    let mut first_mismatch = None;
    'outer: for i in 0..a.len() {
        for j in i + 1..a.len() {
            let same_a = a[i] == a[j];
            let same_b = b[i] == b[j];
            if same_a != same_b {
                first_mismatch = Some(PartitionMismatch {
                    i,
                    j,
                    same_in_a: same_a,
                    same_in_b: same_b,
                });
                break 'outer;
            }
        }
    }
    PartitionReport {
        equal: first_mismatch.is_none(),
        elements: a.len(),
        classes_a: count_classes(a),
        classes_b: count_classes(b),
        first_mismatch,
    }
}

fn count_classes<T: PartialEq>(labels: &[T]) -> usize {
    let mut reps: Vec<&T> = Vec::new();
    for l in labels {
        if !reps.contains(&l) {
            reps.push(l);
        }
    }
    reps.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{AbHom, CyclicProduct};
    use crate::heis::HeisenbergData;

    fn small64() -> ExtGroup {
        let g4 = CyclicProduct::new(vec![4]).unwrap();
        let g2 = CyclicProduct::new(vec![2]).unwrap();
        let d = HeisenbergData::new(
            g2.clone(),
            g4.clone(),
            g4.clone(),
            vec![vec![g4.reduce(&[2]).unwrap()]],
        )
        .unwrap();
        let k_p = AbHom::new(g2.clone(), g4, vec![vec![2]]).unwrap();
        let aut = d.graded_aut(k_p, None, None).unwrap();
        let kg = d.k_group(g2, vec![aut]).unwrap();
        ExtGroup::new(d, kg)
    }

    fn zel(p: i64, c: i64, n: i64, k: i64) -> ZExtElement {
        ZExtElement::new(p, c, n, k)
    }

    #[test]
    fn oracle_finite_examples() {
        let g = small64();
        let x = g.element(&[1], &[2], &[1], &[1]).unwrap();
        let v = oracle_finite(&g, &x, &x).unwrap();
        assert!(v.conjugate);
        assert_eq!(v.witness, Some(g.identity()));

        // different n components are never conjugate
        let y = g.element(&[1], &[2], &[0], &[1]).unwrap();
        let v = oracle_finite(&g, &x, &y).unwrap();
        assert!(!v.conjugate);
        assert_eq!(v.stats.candidates_tested, 64);

        // a genuine conjugate pair, witness re-verified
        let conjugator = g.element(&[3], &[1], &[1], &[0]).unwrap();
        let z = g.conjugate(&conjugator, &x).unwrap();
        let v = oracle_finite(&g, &x, &z).unwrap();
        assert!(v.conjugate);
        let w = v.witness.unwrap();
        assert_eq!(g.conjugate(&w, &x).unwrap(), z);
    }

    #[test]
    fn oracle_finite_respects_bound() {
        let g = small64();
        let x = g.identity();
        assert!(matches!(
            oracle_finite_bounded(&g, &x, &x, 10),
            Err(Error::OrderBound {
                order: 64,
                bound: 10
            })
        ));
    }

    #[test]
    fn oracle_z_examples() {
        let v = oracle_z(&zel(0, 0, 3, 1), &zel(-1, -3, 3, 1)).unwrap();
        assert!(v.conjugate);
        let w = v.witness.unwrap();
        assert_eq!((w.n, w.k), (1, 0));
        assert_eq!(zel(0, 0, 3, 1).conjugate_by(&w).unwrap(), zel(-1, -3, 3, 1));

        let v = oracle_z(&zel(0, 0, 3, 1), &zel(1, 1, 3, 1)).unwrap();
        assert!(!v.conjugate);
        assert_eq!(v.stats.candidates_tested, 2);

        for x in [
            zel(0, 0, 3, 1),
            zel(4, -2, 0, 3),
            zel(1, 1, 0, 0),
            zel(-3, 2, 6, 4),
        ] {
            let v = oracle_z(&x, &x).unwrap();
            assert!(v.conjugate);
            assert_eq!(x.conjugate_by(&v.witness.unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn oracle_z_witness_needs_nonzero_p_prime() {
        // (0,0,3,0) ~ (0,-3,3,0) only through conjugators with p′ ≠ 0
        let x1 = zel(0, 0, 3, 0);
        let x2 = zel(0, -3, 3, 0);
        let v = oracle_z(&x1, &x2).unwrap();
        assert!(v.conjugate);
        let w = v.witness.unwrap();
        assert_ne!(w.p, 0);
        assert_eq!(x1.conjugate_by(&w).unwrap(), x2);
    }

    #[test]
    fn oracle_z_is_symmetric() {
        let mut elems = Vec::new();
        for n in [0i64, 2, 3] {
            for k in [0i64, 2] {
                for p in -2..=2 {
                    for c in -2..=2 {
                        elems.push(zel(p, c, n, k));
                    }
                }
            }
        }
        for x in &elems {
            for y in &elems {
                assert_eq!(
                    oracle_z(x, y).unwrap().conjugate,
                    oracle_z(y, x).unwrap().conjugate,
                    "x={x:?} y={y:?}"
                );
            }
        }
    }

    #[test]
    fn oracle_z_matches_naive_scan_on_a_small_box() {
        for n in 1..=4i64 {
            for k in 0..=3i64 {
                for p1 in -3..=3 {
                    for p2 in -3..=3 {
                        for c1 in -2..=2 {
                            for c2 in -2..=2 {
                                let x1 = zel(p1, c1, n, k);
                                let x2 = zel(p2, c2, n, k);
                                assert_eq!(
                                    oracle_z(&x1, &x2).unwrap().conjugate,
                                    oracle_z_naive(&x1, &x2, 200).unwrap().conjugate,
                                    "x1={x1:?} x2={x2:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_z_agrees_with_finite_oracle_semantics_n_zero() {
        // n = 0 slices, including k = 0
        for k in 0..=3i64 {
            for p1 in -3..=3 {
                for p2 in -3..=3 {
                    for c1 in -3..=3 {
                        for c2 in -3..=3 {
                            let x1 = zel(p1, c1, 0, k);
                            let x2 = zel(p2, c2, 0, k);
                            let fast = oracle_z(&x1, &x2).unwrap();
                            let slow = oracle_z_naive(&x1, &x2, 200).unwrap();
                            assert_eq!(fast.conjugate, slow.conjugate);
                            if let Some(w) = fast.witness {
                                assert_eq!(x1.conjugate_by(&w).unwrap(), x2);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn negative_n_and_k_agree_with_the_naive_scan() {
        // sign conventions are a design decision; validate them against the
        // sign-free naive scan
        for n in [-4i64, -3, -2, -1] {
            for k in -3..=3i64 {
                for p1 in -2..=2 {
                    for p2 in -2..=2 {
                        for c1 in -2..=2 {
                            for c2 in -2..=2 {
                                let x1 = zel(p1, c1, n, k);
                                let x2 = zel(p2, c2, n, k);
                                let fast =
                                    crate::zheis::is_conjugate_z(&x1, &x2).unwrap().conjugate;
                                let slow = oracle_z(&x1, &x2).unwrap().conjugate;
                                let naive = oracle_z_naive(&x1, &x2, 200).unwrap().conjugate;
                                assert_eq!(fast, naive, "x1={x1:?} x2={x2:?}");
                                assert_eq!(slow, naive, "x1={x1:?} x2={x2:?}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn partition_compare_examples() {
        let a = vec![0, 0, 1, 2];
        assert!(partition_compare(&a, &a).equal);

        // refining a class is detected with a witness pair
        let b = vec![0, 3, 1, 2];
        let rep = partition_compare(&a, &b);
        assert!(!rep.equal);
        let m = rep.first_mismatch.unwrap();
        assert_eq!((m.i, m.j), (0, 1));
        assert!(m.same_in_a);
        assert!(!m.same_in_b);
        assert_eq!(rep.classes_a, 3);
        assert_eq!(rep.classes_b, 4);
    }

    #[test]
    fn oracle_partition_on_small64() {
        let g = small64();
        let labels = conjugacy_partition(&g, DEFAULT_ORDER_BOUND).unwrap();
        assert_eq!(labels.len(), 64);
        // labels are consistent with pairwise oracle verdicts on a sample
        let elems = g.enumerate().unwrap();
        for i in (0..64).step_by(7) {
            for j in (0..64).step_by(11) {
                let same = labels[i] == labels[j];
                let verdict = oracle_finite(&g, &elems[i], &elems[j]).unwrap().conjugate;
                assert_eq!(same, verdict);
            }
        }
    }
}
