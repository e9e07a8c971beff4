//! Extended-gcd toolkit and the decision procedure for a pair of
//! simultaneous linear congruences `ax ≡ b, cx ≡ d (mod n)`.
//!
//! The solvability criterion is: `(a,n) | b` and
//! `d·(a,n) − b·c·w ≡ 0 (mod n·(a,c,n))`, with `w` a solution of
//! `(a/(a,n))·w ≡ 1 (mod n/(a,n))`. Solving additionally constructs the
//! witness `x = w·b/(a,n) + i·n/(a,n)` and verifies it against both
//! congruences before returning.

use crate::arith;
use crate::error::{Error, Result};

/// Extended Euclid: returns `(g, u, v)` with `g = gcd(a,b) ≥ 0` and
/// `a·u + b·v = g`; by convention `ext_gcd(0,0) = (0,0,0)`.
pub fn ext_gcd(a: i64, b: i64) -> Result<(i64, i64, i64)> {
    if a == 0 && b == 0 {
        return Ok((0, 0, 0));
    }
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, arith::sub(old_r, arith::mul(q, r)?)?);
        (old_s, s) = (s, arith::sub(old_s, arith::mul(q, s)?)?);
        (old_t, t) = (t, arith::sub(old_t, arith::mul(q, t)?)?);
    }
    if old_r < 0 {
        old_r = arith::neg(old_r)?;
        old_s = arith::neg(old_s)?;
        old_t = arith::neg(old_t)?;
    }
    debug_assert_eq!(
        arith::add(arith::mul(a, old_s)?, arith::mul(b, old_t)?)?,
        old_r
    );
    Ok((old_r, old_s, old_t))
}

/// One solution family of `αx + βy = γ`: all solutions are
/// `(x₀ + t·step_x, y₀ + t·step_y)` for `t ∈ ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiophantineFamily {
    pub x0: i64,
    pub y0: i64,
    pub step_x: i64,
    pub step_y: i64,
}

/// Solution set of a linear Diophantine equation in two unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiophantineSolutions {
    None,
    /// `0x + 0y = 0`: every pair solves.
    All,
    Family(DiophantineFamily),
}

/// Solves `αx + βy = γ` over the integers. With `g = gcd(α,β)`, the family
/// steps are `(β/g, −α/g)`.
pub fn solve_linear_diophantine(alpha: i64, beta: i64, gamma: i64) -> Result<DiophantineSolutions> {
    if alpha == 0 && beta == 0 {
        return Ok(if gamma == 0 {
            DiophantineSolutions::All
        } else {
            DiophantineSolutions::None
        });
    }
    let (g, u, v) = ext_gcd(alpha, beta)?;
    if gamma % g != 0 {
        return Ok(DiophantineSolutions::None);
    }
    let scale = gamma / g;
    Ok(DiophantineSolutions::Family(DiophantineFamily {
        x0: arith::mul(u, scale)?,
        y0: arith::mul(v, scale)?,
        step_x: beta / g,
        step_y: arith::neg(alpha / g)?,
    }))
}

/// Least non-negative solution of `ax ≡ b (mod n)`, `None` when unsolvable.
/// `n = 0` means the exact equation `ax = b`.
pub fn solve_linear_congruence(a: i64, b: i64, n: i64) -> Result<Option<i64>> {
    debug_assert!(n >= 0);
    if n == 0 {
        if a == 0 {
            return Ok(if b == 0 { Some(0) } else { None });
        }
        return Ok(if b % a == 0 { Some(b / a) } else { None });
    }
    // n > 0 here, so g >= 1
    let g = arith::gcd(a, n)?;
    if b % g != 0 {
        return Ok(None);
    }
    let n1 = n / g;
    if n1 == 1 {
        return Ok(Some(0));
    }
    let (_, u, _) = ext_gcd(arith::modulo(a / g, n1)?, n1)?;
    let x = arith::modulo(arith::mul(u, arith::modulo(b / g, n1)?)?, n1)?;
    Ok(Some(x))
}

/// The least non-negative `w` with `(a/(a,n))·w ≡ 1 (mod n/(a,n))`;
/// returns 0 when the reduced modulus is 1.
pub fn canonical_w(a: i64, n: i64) -> Result<i64> {
    if n < 1 {
        return Err(Error::Precondition(format!("modulus n = {n} must be >= 1")));
    }
    let g = arith::gcd(a, n)?;
    let n1 = n / g;
    if n1 == 1 {
        return Ok(0);
    }
    solve_linear_congruence(a / g, 1, n1)?
        .ok_or_else(|| Error::InvariantViolation("reduced coefficient not invertible".into()))
}

/// The system `ax ≡ b (mod n)`, `cx ≡ d (mod n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CongruenceSystem {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub n: i64,
}

impl CongruenceSystem {
    pub fn new(a: i64, b: i64, c: i64, d: i64, n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Precondition(format!("modulus n = {n} must be >= 1")));
        }
        Ok(Self { a, b, c, d, n })
    }

    pub fn is_satisfied_by(&self, x: i64) -> Result<bool> {
        let first = arith::modulo(arith::sub(arith::mul(self.a, x)?, self.b)?, self.n)? == 0;
        let second = arith::modulo(arith::sub(arith::mul(self.c, x)?, self.d)?, self.n)? == 0;
        Ok(first && second)
    }
}

/// Solvability certificate: the system is solvable iff `g1 | b` and
/// `residual = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveCertificate {
    /// `gcd(a, n)`
    pub g1: i64,
    /// the canonical unit inverse used in the residual
    pub w: i64,
    /// `d·(a,n) − b·c·w` reduced modulo `n·(a,c,n)`
    pub residual: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOutcome {
    pub solvable: bool,
    /// a verified solution in `[0, n)` when solvable
    pub witness: Option<i64>,
    pub certificate: SolveCertificate,
}

/// Decides the system by the two-part criterion and, when solvable,
/// constructs and verifies a witness. A criterion/witness disagreement is
/// an internal bug and surfaces as `InvariantViolation`.
pub fn solve_congruence_pair(sys: &CongruenceSystem) -> Result<SolveOutcome> {
    let CongruenceSystem { a, b, c, d, n } = *sys;
    let g1 = arith::gcd(a, n)?;
    let w = canonical_w(a, n)?;
    let g3 = arith::gcd3(a, c, n)?;
    let modulus = arith::mul(n, g3)?;
    let residual = arith::modulo(
        arith::sub(arith::mul(d, g1)?, arith::mul(arith::mul(b, c)?, w)?)?,
        modulus,
    )?;
    let certificate = SolveCertificate { g1, w, residual };
    let solvable = arith::divides(g1, b) && residual == 0;
    if !solvable {
        return Ok(SolveOutcome {
            solvable: false,
            witness: None,
            certificate,
        });
    }
    // witness per the construction x = w·b' + i·n/(a,n), where i solves
    // c·(n/(a,n))·i ≡ d − c·b'·w (mod n); note g1 = gcd(a,n) >= 1 since n >= 1
    let b1 = b / g1;
    let step = n / g1;
    let rhs = arith::sub(d, arith::mul(arith::mul(c, b1)?, w)?)?;
    let i = solve_linear_congruence(arith::mul(c, step)?, rhs, n)?.ok_or_else(|| {
        Error::InvariantViolation("criterion succeeded but witness equation is unsolvable".into())
    })?;
    let x = arith::modulo(arith::add(arith::mul(w, b1)?, arith::mul(i, step)?)?, n)?;
    if !sys.is_satisfied_by(x)? {
        return Err(Error::InvariantViolation(format!(
            "constructed witness {x} fails the system {sys:?}"
        )));
    }
    Ok(SolveOutcome {
        solvable: true,
        witness: Some(x),
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_gcd_examples() {
        assert_eq!(ext_gcd(12, 18).unwrap(), (6, -1, 1));
        assert_eq!(ext_gcd(0, 0).unwrap(), (0, 0, 0));
        assert_eq!(ext_gcd(7, 0).unwrap(), (7, 1, 0));
    }

    #[test]
    fn ext_gcd_identity_holds() {
        for a in -30..=30 {
            for b in -30..=30 {
                let (g, u, v) = ext_gcd(a, b).unwrap();
                assert_eq!(a * u + b * v, g);
                assert_eq!(g, arith::gcd(a, b).unwrap());
            }
        }
    }

    #[test]
    fn diophantine_examples() {
        let DiophantineSolutions::Family(f) = solve_linear_diophantine(1, -3, 5).unwrap() else {
            panic!("expected a family");
        };
        assert_eq!((f.x0, f.y0, f.step_x, f.step_y), (5, 0, -3, -1));
        assert_eq!(f.x0 - 3 * f.y0, 5);

        assert_eq!(
            solve_linear_diophantine(2, 4, 3).unwrap(),
            DiophantineSolutions::None
        );

        let DiophantineSolutions::Family(f) = solve_linear_diophantine(3, -7, 0).unwrap() else {
            panic!("expected a family");
        };
        assert_eq!((f.x0, f.y0), (0, 0));

        assert_eq!(
            solve_linear_diophantine(0, 0, 0).unwrap(),
            DiophantineSolutions::All
        );
        assert_eq!(
            solve_linear_diophantine(0, 0, 1).unwrap(),
            DiophantineSolutions::None
        );
    }

    #[test]
    fn diophantine_family_sweeps_solutions() {
        for alpha in -6..=6i64 {
            for beta in -6..=6i64 {
                if alpha == 0 && beta == 0 {
                    continue;
                }
                for gamma in -10..=10i64 {
                    match solve_linear_diophantine(alpha, beta, gamma).unwrap() {
                        DiophantineSolutions::Family(f) => {
                            for t in -4..=4 {
                                let x = f.x0 + t * f.step_x;
                                let y = f.y0 + t * f.step_y;
                                assert_eq!(alpha * x + beta * y, gamma);
                            }
                        }
                        DiophantineSolutions::None => {
                            assert_ne!(gamma % arith::gcd(alpha, beta).unwrap(), 0);
                        }
                        DiophantineSolutions::All => unreachable!(),
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_w_examples() {
        assert_eq!(canonical_w(4, 6).unwrap(), 2);
        assert_eq!(canonical_w(1, 5).unwrap(), 1);
        assert_eq!(canonical_w(6, 6).unwrap(), 0);
        assert_eq!(canonical_w(0, 7).unwrap(), 0);
    }

    #[test]
    fn canonical_w_satisfies_its_congruence() {
        for a in -40..=40i64 {
            for n in 1..=40i64 {
                let g = arith::gcd(a, n).unwrap();
                let n1 = n / g;
                let w = canonical_w(a, n).unwrap();
                assert!((0..n1.max(1)).contains(&w));
                if n1 > 1 {
                    assert_eq!(((a / g) * w).rem_euclid(n1), 1, "a={a} n={n}");
                }
            }
        }
    }

    #[test]
    fn congruence_pair_examples() {
        let sys = CongruenceSystem::new(4, 2, 3, 3, 6).unwrap();
        let out = solve_congruence_pair(&sys).unwrap();
        assert!(out.solvable);
        assert_eq!(out.witness, Some(5));
        assert_eq!(out.certificate.g1, 2);
        assert_eq!(out.certificate.w, 2);
        assert_eq!(out.certificate.residual, 0);

        let sys = CongruenceSystem::new(4, 2, 3, 1, 6).unwrap();
        let out = solve_congruence_pair(&sys).unwrap();
        assert!(!out.solvable);
        assert_eq!(out.certificate.residual, 2);

        for n in 1..=10 {
            let sys = CongruenceSystem::new(1, 0, 0, 0, n).unwrap();
            let out = solve_congruence_pair(&sys).unwrap();
            assert!(out.solvable);
            assert_eq!(out.witness, Some(0));
        }
    }

    #[test]
    fn solver_matches_brute_force_small() {
        for n in 1..=12i64 {
            for a in -n..=n {
                for b in -n..=n {
                    for c in -n..=n {
                        for d in -n..=n {
                            let sys = CongruenceSystem::new(a, b, c, d, n).unwrap();
                            let brute = (0..n).any(|x| sys.is_satisfied_by(x).unwrap());
                            let out = solve_congruence_pair(&sys).unwrap();
                            assert_eq!(out.solvable, brute, "{sys:?}");
                            if let Some(x) = out.witness {
                                assert!(sys.is_satisfied_by(x).unwrap());
                                assert!((0..n).contains(&x));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn criterion_independent_of_w_choice() {
        // every valid w below the reduced modulus gives the same verdict
        for n in 1..=10i64 {
            for a in -n..=n {
                let g = arith::gcd(a, n).unwrap();
                let n1 = n / g;
                let valid_w: Vec<i64> = (0..n1.max(1))
                    .filter(|&w| n1 <= 1 || ((a / g) * w).rem_euclid(n1) == 1)
                    .collect();
                for c in -n..=n {
                    let g3 = arith::gcd3(a, c, n).unwrap();
                    for b in -n..=n {
                        for d in -n..=n {
                            let verdicts: Vec<bool> = valid_w
                                .iter()
                                .map(|&w| {
                                    arith::divides(g, b)
                                        && (d * g - b * c * w).rem_euclid(n * g3) == 0
                                })
                                .collect();
                            assert!(
                                verdicts.windows(2).all(|p| p[0] == p[1]),
                                "w-dependent verdict at a={a} b={b} c={c} d={d} n={n}"
                            );
                        }
                    }
                }
            }
        }
    }
}
