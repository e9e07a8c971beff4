//! The extended integer Heisenberg group: `N = P = C = K = ℤ`, pairings by
//! multiplication, and the canonical action `k(p, c, n) = (p + kn,
//! c + k·n(n−1)/2, n)`. Elements are plain integer quadruples and every
//! formula is closed-form.
//!
//! Conjugacy of `(p₁,c₁,n,k)` and `(p₂,c₂,n,k)` reduces to
//!
//! ```text
//! p₁ − p₂ = kn′ − k′n
//! c₁ − c₂ = k·n′(n′−1)/2 − k′·n(n−1)/2 − n′p₁   (mod n)
//! ```
//!
//! For odd `n` this collapses to one two-congruence system; for even `n`
//! there are two solvability branches (0- and 1-equivalence) and
//! conjugacy is their union; `n = 0` makes the equations exact.

use crate::arith;
use crate::congruence::{canonical_w, solve_congruence_pair, CongruenceSystem, SolveOutcome};
use crate::error::{Error, Result};

/// An element `(p, c, n, k)` of the extended integer Heisenberg group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZExtElement {
    pub p: i64,
    pub c: i64,
    pub n: i64,
    pub k: i64,
}

impl ZExtElement {
    pub fn new(p: i64, c: i64, n: i64, k: i64) -> Self {
        Self { p, c, n, k }
    }

    pub fn identity() -> Self {
        Self::new(0, 0, 0, 0)
    }

    /// Extended product, left operand primed.
    pub fn mul(&self, y: &ZExtElement) -> Result<ZExtElement> {
        let shifted_p = arith::add(y.p, arith::mul(self.k, y.n)?)?;
        Ok(ZExtElement {
            p: arith::add(self.p, shifted_p)?,
            c: arith::add(
                arith::add(y.c, self.c)?,
                arith::add(
                    arith::mul(self.k, arith::tri(y.n)?)?,
                    arith::mul(self.n, shifted_p)?,
                )?,
            )?,
            n: arith::add(y.n, self.n)?,
            k: arith::add(y.k, self.k)?,
        })
    }

    pub fn inv(&self) -> Result<ZExtElement> {
        Ok(ZExtElement {
            p: arith::add(arith::neg(self.p)?, arith::mul(self.k, self.n)?)?,
            c: arith::add(
                arith::sub(
                    arith::neg(self.c)?,
                    arith::mul(self.k, arith::tri(arith::neg(self.n)?)?)?,
                )?,
                arith::mul(self.n, self.p)?,
            )?,
            n: arith::neg(self.n)?,
            k: arith::neg(self.k)?,
        })
    }

    pub fn conjugate_by(&self, g: &ZExtElement) -> Result<ZExtElement> {
        g.mul(self)?.mul(&g.inv()?)
    }
}

/// The invariant record of one element, shaped by the parity of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZInvariantRecord {
    /// Odd `n`: `{n, k, p mod (n,k), −p²w − (n,k)(2c+p) mod n(n,k,p)}`.
    Odd {
        n: i64,
        k: i64,
        g: i64,
        p_residue: i64,
        j: i64,
        j_modulus: i64,
        w: i64,
    },
    /// Even `n ≠ 0`: the unordered pairs `{I₁, I₂}` mod `(2n,k)` and
    /// `{J₁, J₂}` mod `2n(2n,k,2p)` are the comparable payload.
    Even {
        n: i64,
        k: i64,
        g: i64,
        i1: i64,
        i2: i64,
        j1: i64,
        j2: i64,
        j_modulus: i64,
        w: i64,
    },
    /// `n = 0`: conjugation shifts `(p, c)` along an explicit orbit; the
    /// canonical orbit form is an exact full invariant.
    Degenerate {
        k: i64,
        p_residue: i64,
        c_residue: i64,
    },
}

/// `−p²·w − g·(2c + p)`, the shared J-expression.
fn j_raw(p: i64, c: i64, g: i64, w: i64) -> Result<i64> {
    let sq = arith::mul(p, p)?;
    arith::sub(
        arith::neg(arith::mul(sq, w)?)?,
        arith::mul(g, arith::add(arith::mul(2, c)?, p)?)?,
    )
}

/// The correction `w·n·(2p + n)` distinguishing `J₂` from `J₁`.
fn j_shift(p: i64, n: i64, w: i64) -> Result<i64> {
    arith::mul(arith::mul(w, n)?, arith::add(arith::mul(2, p)?, n)?)
}

/// Invariants for odd `n`; errors on even or zero `n`.
pub fn odd_invariants(x: &ZExtElement) -> Result<ZInvariantRecord> {
    if x.n == 0 || x.n % 2 == 0 {
        return Err(Error::WrongVariant(format!(
            "odd invariants need odd n, got n = {}",
            x.n
        )));
    }
    let na = arith::abs(x.n)?;
    let w = canonical_w(x.k, na)?;
    let g = arith::gcd(x.n, x.k)?;
    let j_modulus = arith::mul(na, arith::gcd3(x.n, x.k, x.p)?)?;
    Ok(ZInvariantRecord::Odd {
        n: x.n,
        k: x.k,
        g,
        p_residue: arith::modulo(x.p, g)?,
        j: arith::modulo(j_raw(x.p, x.c, g, w)?, j_modulus)?,
        j_modulus,
        w,
    })
}

/// Invariants for even nonzero `n`; errors on odd or zero `n`.
pub fn even_invariants(x: &ZExtElement) -> Result<ZInvariantRecord> {
    if x.n == 0 || x.n % 2 != 0 {
        return Err(Error::WrongVariant(format!(
            "even invariants need even nonzero n, got n = {}",
            x.n
        )));
    }
    let n2 = arith::mul(2, x.n)?;
    let n2a = arith::abs(n2)?;
    let w = canonical_w(x.k, n2a)?;
    let g = arith::gcd(n2, x.k)?;
    let j_modulus = arith::mul(n2a, arith::gcd3(n2, x.k, arith::mul(2, x.p)?)?)?;
    let j1 = j_raw(x.p, x.c, g, w)?;
    let j2 = arith::sub(j1, j_shift(x.p, x.n, w)?)?;
    Ok(ZInvariantRecord::Even {
        n: x.n,
        k: x.k,
        g,
        i1: arith::modulo(x.p, g)?,
        i2: arith::modulo(arith::add(x.p, x.n)?, g)?,
        j1: arith::modulo(j1, j_modulus)?,
        j2: arith::modulo(j2, j_modulus)?,
        j_modulus,
        w,
    })
}

/// The canonical-orbit record for `n = 0`; errors on nonzero `n`.
pub fn degenerate_invariants(x: &ZExtElement) -> Result<ZInvariantRecord> {
    if x.n != 0 {
        return Err(Error::WrongVariant(format!(
            "degenerate invariants need n = 0, got n = {}",
            x.n
        )));
    }
    if x.k == 0 {
        let c_residue = if x.p == 0 {
            x.c
        } else {
            arith::modulo(x.c, arith::abs(x.p)?)?
        };
        return Ok(ZInvariantRecord::Degenerate {
            k: 0,
            p_residue: x.p,
            c_residue,
        });
    }
    // conjugation moves (p, c) to (p − kn′, c + n′p − k·tri(n′)); normalize
    // p into [0, |k|) and carry c along the same orbit step
    let p_residue = arith::modulo(x.p, arith::abs(x.k)?)?;
    let n_prime = arith::sub(x.p, p_residue)? / x.k;
    let c_residue = arith::sub(
        arith::add(x.c, arith::mul(n_prime, x.p)?)?,
        arith::mul(x.k, arith::tri(n_prime)?)?,
    )?;
    Ok(ZInvariantRecord::Degenerate {
        k: x.k,
        p_residue,
        c_residue,
    })
}

/// Dispatches on the parity of `n`.
pub fn invariants(x: &ZExtElement) -> Result<ZInvariantRecord> {
    if x.n == 0 {
        degenerate_invariants(x)
    } else if x.n % 2 == 0 {
        even_invariants(x)
    } else {
        odd_invariants(x)
    }
}

/// Why (or why not) two elements are conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZConjugacyDetail {
    /// `n` or `k` differ; never conjugate.
    ComponentMismatch,
    /// Odd `n`: the verdict of the two-congruence system.
    Odd { system: SolveOutcome },
    /// Even `n ≠ 0`: the two solvability branches.
    Even {
        zero_equivalent: bool,
        one_equivalent: bool,
    },
    /// `n = 0, k ≠ 0`: `n′` is forced by divisibility, then the exact
    /// `c`-equation decides.
    DegenerateForcedShift { n_prime: Option<i64> },
    /// `n = 0, k = 0`: `p₁ = p₂` and `p | c₁ − c₂` decide.
    DegenerateCentral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZConjugacyOutcome {
    pub conjugate: bool,
    pub detail: ZConjugacyDetail,
}

/// `x₁ ~ x₂` iff the branch-appropriate system is solvable.
pub fn is_conjugate_z(x1: &ZExtElement, x2: &ZExtElement) -> Result<ZConjugacyOutcome> {
    if x1.n != x2.n || x1.k != x2.k {
        return Ok(ZConjugacyOutcome {
            conjugate: false,
            detail: ZConjugacyDetail::ComponentMismatch,
        });
    }
    let (n, k) = (x1.n, x1.k);
    if n == 0 {
        return is_conjugate_degenerate(x1, x2);
    }
    let dp = arith::sub(x1.p, x2.p)?;
    if n % 2 != 0 {
        // odd n: k·n′ ≡ p₁−p₂ and −(p₁+p₂)·n′ ≡ (2c₁+p₁)−(2c₂+p₂) (mod |n|)
        let d = arith::sub(
            arith::add(arith::mul(2, x1.c)?, x1.p)?,
            arith::add(arith::mul(2, x2.c)?, x2.p)?,
        )?;
        let sys = CongruenceSystem::new(
            k,
            dp,
            arith::neg(arith::add(x1.p, x2.p)?)?,
            d,
            arith::abs(n)?,
        )?;
        let out = solve_congruence_pair(&sys)?;
        return Ok(ZConjugacyOutcome {
            conjugate: out.solvable,
            detail: ZConjugacyDetail::Odd { system: out },
        });
    }
    // even n ≠ 0: 0-equivalence and 1-equivalence, with moduli taken from x1
    let n2 = arith::mul(2, n)?;
    let g = arith::gcd(n2, k)?;
    let w = canonical_w(k, arith::abs(n2)?)?;
    let m = arith::mul(arith::abs(n2)?, arith::gcd3(n2, k, arith::mul(2, x1.p)?)?)?;
    let j1_x1 = j_raw(x1.p, x1.c, g, w)?;
    let j1_x2 = j_raw(x2.p, x2.c, g, w)?;
    let j2_x1 = arith::sub(j1_x1, j_shift(x1.p, n, w)?)?;
    let zero_equivalent = arith::divides(g, dp) && arith::divides(m, arith::sub(j1_x1, j1_x2)?);
    let one_equivalent =
        arith::divides(g, arith::sub(dp, n)?) && arith::divides(m, arith::sub(j2_x1, j1_x2)?);
    Ok(ZConjugacyOutcome {
        conjugate: zero_equivalent || one_equivalent,
        detail: ZConjugacyDetail::Even {
            zero_equivalent,
            one_equivalent,
        },
    })
}

fn is_conjugate_degenerate(x1: &ZExtElement, x2: &ZExtElement) -> Result<ZConjugacyOutcome> {
    let k = x1.k;
    if k == 0 {
        // p₂ = p₁ and c₂ = c₁ − n′p₁ for some n′
        let dc = arith::sub(x1.c, x2.c)?;
        let conjugate = x1.p == x2.p && arith::divides(x1.p, dc);
        return Ok(ZConjugacyOutcome {
            conjugate,
            detail: ZConjugacyDetail::DegenerateCentral,
        });
    }
    // p₁ − p₂ = kn′ forces n′; then exact c equation
    let dp = arith::sub(x1.p, x2.p)?;
    if !arith::divides(k, dp) {
        return Ok(ZConjugacyOutcome {
            conjugate: false,
            detail: ZConjugacyDetail::DegenerateForcedShift { n_prime: None },
        });
    }
    let n_prime = dp / k;
    let rhs = arith::sub(
        arith::mul(k, arith::tri(n_prime)?)?,
        arith::mul(n_prime, x1.p)?,
    )?;
    let conjugate = arith::sub(x1.c, x2.c)? == rhs;
    Ok(ZConjugacyOutcome {
        conjugate,
        detail: ZConjugacyDetail::DegenerateForcedShift {
            n_prime: Some(n_prime),
        },
    })
}
