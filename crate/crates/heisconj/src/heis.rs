//! Heisenberg group data and arithmetic: the pairing, the base group law,
//! graded automorphisms built from a `(k_p, k_c)` pair, automorphism
//! subgroups, and the extended group `((P ⊕ C) ⋊ N) ⋊ K`.
//!
//! A graded automorphism acts as `k(p, c, n) = (p + k_p(n), c + k_c(n), n)`
//! where `k_p : N → P` is a homomorphism and `k_c : N → C` satisfies
//!
//! ```text
//! k_c(n₁ + n₂) = k_c(n₁) + k_c(n₂) + n₁(k_p(n₂))
//! ```
//!
//! Such a `k_c` exists iff the cross-term matrix `eᵢ(k_p(eⱼ))` is symmetric
//! and, for each finite factor, `(lᵢ(lᵢ−1)/2)·eᵢ(k_p(eᵢ)) ∈ lᵢC`; it is then
//! assembled from per-generator constants `xᵢ` solving
//! `lᵢxᵢ + (lᵢ(lᵢ−1)/2)·eᵢ(k_p(eᵢ)) = 0` plus an arbitrary homomorphism.

use crate::abelian::{AbElement, AbHom, CyclicProduct};
use crate::arith;
use crate::congruence::solve_linear_congruence;
use crate::error::{Error, Result};

/// A triple of abelian groups `(N, P, C)` with a pairing `N × P → C`,
/// the pairing given on generators and extended bilinearly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeisenbergData {
    n_group: CyclicProduct,
    p_group: CyclicProduct,
    c_group: CyclicProduct,
    /// `pairing[i][j] = (eᵢ, fⱼ) ∈ C` for the i-th N and j-th P generator
    pairing: Vec<Vec<AbElement>>,
}

impl HeisenbergData {
    pub fn new(
        n_group: CyclicProduct,
        p_group: CyclicProduct,
        c_group: CyclicProduct,
        pairing: Vec<Vec<AbElement>>,
    ) -> Result<Self> {
        if pairing.len() != n_group.rank() || pairing.iter().any(|row| row.len() != p_group.rank())
        {
            return Err(Error::Dimension(format!(
                "pairing tensor must be {}x{}",
                n_group.rank(),
                p_group.rank()
            )));
        }
        for (i, row) in pairing.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v.parent() != c_group {
                    return Err(Error::Spec(format!(
                        "pairing value at ({i},{j}) is not in C"
                    )));
                }
                let li = n_group.moduli()[i];
                let lj = p_group.moduli()[j];
                if li >= 1 && !v.scale(li)?.is_zero() {
                    return Err(Error::Spec(format!(
                        "pairing not well-defined at ({i},{j}): {li}·value is nonzero"
                    )));
                }
                if lj >= 1 && !v.scale(lj)?.is_zero() {
                    return Err(Error::Spec(format!(
                        "pairing not well-defined at ({i},{j}): {lj}·value is nonzero"
                    )));
                }
            }
        }
        Ok(Self {
            n_group,
            p_group,
            c_group,
            pairing,
        })
    }

    /// The integer model: N = P = C = ℤ with multiplication as pairing.
    pub fn integer_model() -> Self {
        let z = CyclicProduct::integer_line();
        let one = z.reduce(&[1]).unwrap();
        Self {
            n_group: z.clone(),
            p_group: z.clone(),
            c_group: z,
            pairing: vec![vec![one]],
        }
    }

    pub fn n_group(&self) -> &CyclicProduct {
        &self.n_group
    }

    pub fn p_group(&self) -> &CyclicProduct {
        &self.p_group
    }

    pub fn c_group(&self) -> &CyclicProduct {
        &self.c_group
    }

    /// Bilinear extension of the generator pairing.
    pub fn pairing_apply(&self, n: &AbElement, p: &AbElement) -> Result<AbElement> {
        if *n.parent() != self.n_group || *p.parent() != self.p_group {
            return Err(Error::Dimension(
                "pairing arguments in the wrong groups".into(),
            ));
        }
        let mut acc = self.c_group.zero();
        for (i, &ni) in n.coords().iter().enumerate() {
            if ni == 0 {
                continue;
            }
            for (j, &pj) in p.coords().iter().enumerate() {
                if pj == 0 {
                    continue;
                }
                acc = acc.add(&self.pairing[i][j].scale(arith::mul(ni, pj)?)?)?;
            }
        }
        Ok(acc)
    }

    pub fn element(&self, n: &[i64], p: &[i64], c: &[i64]) -> Result<HeisElement> {
        Ok(HeisElement {
            n: self.n_group.reduce(n)?,
            p: self.p_group.reduce(p)?,
            c: self.c_group.reduce(c)?,
        })
    }

    pub fn identity(&self) -> HeisElement {
        HeisElement {
            n: self.n_group.zero(),
            p: self.p_group.zero(),
            c: self.c_group.zero(),
        }
    }

    fn check_member(&self, x: &HeisElement) -> Result<()> {
        if *x.n.parent() != self.n_group
            || *x.p.parent() != self.p_group
            || *x.c.parent() != self.c_group
        {
            return Err(Error::Dimension(
                "element of a different Heisenberg group".into(),
            ));
        }
        Ok(())
    }

    /// The unipotent product `(n, p, c)·(n′, p′, c′) = (n+n′, p+p′, c+c′+(n,p′))`.
    pub fn mul(&self, x: &HeisElement, y: &HeisElement) -> Result<HeisElement> {
        self.check_member(x)?;
        self.check_member(y)?;
        Ok(HeisElement {
            n: x.n.add(&y.n)?,
            p: x.p.add(&y.p)?,
            c: x.c.add(&y.c)?.add(&self.pairing_apply(&x.n, &y.p)?)?,
        })
    }

    /// `(n, p, c)⁻¹ = (−n, −p, −c + (n, p))`.
    pub fn inv(&self, x: &HeisElement) -> Result<HeisElement> {
        self.check_member(x)?;
        Ok(HeisElement {
            n: x.n.neg()?,
            p: x.p.neg()?,
            c: x.c.neg()?.add(&self.pairing_apply(&x.n, &x.p)?)?,
        })
    }

    pub fn order(&self) -> Result<Option<u128>> {
        let (Some(a), Some(b), Some(c)) = (
            self.n_group.order()?,
            self.p_group.order()?,
            self.c_group.order()?,
        ) else {
            return Ok(None);
        };
        a.checked_mul(b)
            .and_then(|ab| ab.checked_mul(c))
            .map(Some)
            .ok_or(Error::Overflow("heis group order"))
    }

    pub fn enumerate(&self) -> Result<Vec<HeisElement>> {
        let npc = self
            .n_group
            .direct_sum(&self.p_group)
            .direct_sum(&self.c_group);
        let mut out = Vec::new();
        for v in npc.enumerate()? {
            let rn = self.n_group.rank();
            let rp = self.p_group.rank();
            out.push(HeisElement {
                n: self.n_group.reduce(&v.coords()[..rn])?,
                p: self.p_group.reduce(&v.coords()[rn..rn + rp])?,
                c: self.c_group.reduce(&v.coords()[rn + rp..])?,
            });
        }
        Ok(out)
    }

    /// Builds a graded automorphism from `k_p`, checking both existence
    /// conditions. Missing `x_choices` are filled with the least
    /// non-negative solutions of `lᵢxᵢ + (lᵢ(lᵢ−1)/2)·eᵢ(k_p(eᵢ)) = 0`
    /// (free factors get 0); supplied choices are validated against the
    /// same equation.
    pub fn graded_aut(
        &self,
        k_p: AbHom,
        x_choices: Option<Vec<AbElement>>,
        hom_part: Option<AbHom>,
    ) -> Result<GradedAut> {
        if *k_p.source() != self.n_group || *k_p.target() != self.p_group {
            return Err(Error::Dimension("k_p must map N to P".into()));
        }
        let hom_part = match hom_part {
            Some(h) => {
                if *h.source() != self.n_group || *h.target() != self.c_group {
                    return Err(Error::Dimension("hom part must map N to C".into()));
                }
                h
            }
            None => AbHom::zero(self.n_group.clone(), self.c_group.clone()),
        };
        let s = self.n_group.rank();
        let mut cross = Vec::with_capacity(s);
        for i in 0..s {
            let ei = self.n_group.generator(i)?;
            let mut row = Vec::with_capacity(s);
            for j in 0..s {
                row.push(self.pairing_apply(&ei, &k_p.column(j)?)?);
            }
            cross.push(row);
        }
        for (i, row) in cross.iter().enumerate() {
            for (j, val) in row.iter().enumerate().skip(i + 1) {
                if *val != cross[j][i] {
                    return Err(Error::NoGradedExtension(format!(
                        "cross terms are asymmetric at ({i},{j}): {:?} vs {:?}",
                        val.coords(),
                        cross[j][i].coords()
                    )));
                }
            }
        }
        let x_choices = match x_choices {
            Some(xs) => {
                if xs.len() != s {
                    return Err(Error::Dimension(
                        "one x choice per N generator required".into(),
                    ));
                }
                for (i, x) in xs.iter().enumerate() {
                    if *x.parent() != self.c_group {
                        return Err(Error::InvalidChoice(format!("x[{i}] is not in C")));
                    }
                    let li = self.n_group.moduli()[i];
                    let lhs = x.scale(li)?.add(&cross[i][i].scale(arith::tri(li)?)?)?;
                    if !lhs.is_zero() {
                        return Err(Error::InvalidChoice(format!(
                            "x[{i}] does not solve its generator equation"
                        )));
                    }
                }
                xs
            }
            None => {
                let mut xs = Vec::with_capacity(s);
                for (i, &li) in self.n_group.moduli().iter().enumerate() {
                    if li == 0 {
                        xs.push(self.c_group.zero());
                        continue;
                    }
                    let rhs = cross[i][i].scale(arith::tri(li)?)?.neg()?;
                    // solve lᵢ·x = rhs componentwise in C
                    let mut coords = Vec::with_capacity(self.c_group.rank());
                    for (t, &m) in rhs.coords().iter().zip(self.c_group.moduli()) {
                        match solve_linear_congruence(li, *t, m)? {
                            Some(v) => coords.push(v),
                            None => {
                                return Err(Error::NoGradedExtension(format!(
                                    "(l(l-1)/2)·e(k_p(e)) is not in l·C at generator {i}"
                                )))
                            }
                        }
                    }
                    xs.push(self.c_group.reduce(&coords)?);
                }
                xs
            }
        };
        Ok(GradedAut {
            k_p,
            x_choices,
            hom_part,
            cross,
        })
    }

    /// The trivial automorphism.
    pub fn trivial_aut(&self) -> GradedAut {
        let s = self.n_group.rank();
        GradedAut {
            k_p: AbHom::zero(self.n_group.clone(), self.p_group.clone()),
            x_choices: vec![self.c_group.zero(); s],
            hom_part: AbHom::zero(self.n_group.clone(), self.c_group.clone()),
            cross: vec![vec![self.c_group.zero(); s]; s],
        }
    }

    /// Validates generator orders and wraps the automorphisms as a K-group.
    pub fn k_group(&self, group: CyclicProduct, generator_auts: Vec<GradedAut>) -> Result<KGroup> {
        if generator_auts.len() != group.rank() {
            return Err(Error::Dimension(
                "one automorphism per K generator required".into(),
            ));
        }
        for (i, (aut, &l)) in generator_auts.iter().zip(group.moduli()).enumerate() {
            if *aut.k_p.source() != self.n_group || *aut.k_p.target() != self.p_group {
                return Err(Error::Dimension(format!(
                    "K generator {i} acts on the wrong groups"
                )));
            }
            if l >= 1 && !aut.scale(l)?.is_trivial()? {
                return Err(Error::Spec(format!(
                    "K generator {i} violates its order: {l}-fold composition is not trivial"
                )));
            }
        }
        Ok(KGroup {
            group,
            generator_auts,
        })
    }
}

/// An element `(n, p, c)` of a Heisenberg group, components canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisElement {
    pub n: AbElement,
    pub p: AbElement,
    pub c: AbElement,
}

/// A graded automorphism, stored as `k_p` plus the data of `k_c`: the
/// per-generator constants `xᵢ`, a homomorphism part, and the cached cross
/// terms `eᵢ(k_p(eⱼ))`.
#[derive(Debug, Clone)]
pub struct GradedAut {
    k_p: AbHom,
    x_choices: Vec<AbElement>,
    hom_part: AbHom,
    cross: Vec<Vec<AbElement>>,
}

impl GradedAut {
    pub fn k_p(&self) -> &AbHom {
        &self.k_p
    }

    pub fn x_choices(&self) -> &[AbElement] {
        &self.x_choices
    }

    pub fn hom_part(&self) -> &AbHom {
        &self.hom_part
    }

    /// `k_c(m₁e₁ + … + m_se_s) = Σ_{i<j} mᵢmⱼ·eᵢ(k_p(eⱼ))
    ///  + Σᵢ [½mᵢ(mᵢ−1)·eᵢ(k_p(eᵢ)) + mᵢxᵢ] + hom(n)`.
    pub fn kc_eval(&self, n: &AbElement) -> Result<AbElement> {
        if n.parent() != self.k_p.source() {
            return Err(Error::Dimension("kc argument must lie in N".into()));
        }
        let m = n.coords();
        let mut acc = self.hom_part.apply(n)?;
        for (i, &mi) in m.iter().enumerate() {
            if mi == 0 {
                continue;
            }
            for (j, &mj) in m.iter().enumerate().skip(i + 1) {
                if mj == 0 {
                    continue;
                }
                acc = acc.add(&self.cross[i][j].scale(arith::mul(mi, mj)?)?)?;
            }
            acc = acc.add(&self.cross[i][i].scale(arith::tri(mi)?)?)?;
            acc = acc.add(&self.x_choices[i].scale(mi)?)?;
        }
        Ok(acc)
    }

    /// `k(p, c, n) = (p + k_p(n), c + k_c(n), n)`.
    pub fn apply(&self, x: &HeisElement) -> Result<HeisElement> {
        Ok(HeisElement {
            n: x.n.clone(),
            p: x.p.add(&self.k_p.apply(&x.n)?)?,
            c: x.c.add(&self.kc_eval(&x.n)?)?,
        })
    }

    /// Composition adds the data componentwise.
    pub fn compose(&self, other: &GradedAut) -> Result<GradedAut> {
        let k_p = self.k_p.add(&other.k_p)?;
        let x_choices = self
            .x_choices
            .iter()
            .zip(&other.x_choices)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        let hom_part = self.hom_part.add(&other.hom_part)?;
        let cross = self
            .cross
            .iter()
            .zip(&other.cross)
            .map(|(ra, rb)| {
                ra.iter()
                    .zip(rb)
                    .map(|(a, b)| a.add(b))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GradedAut {
            k_p,
            x_choices,
            hom_part,
            cross,
        })
    }

    /// The m-fold composition (inverse for m = −1).
    pub fn scale(&self, m: i64) -> Result<GradedAut> {
        let k_p = self.k_p.scale(m)?;
        let x_choices = self
            .x_choices
            .iter()
            .map(|x| x.scale(m))
            .collect::<Result<Vec<_>>>()?;
        let hom_part = self.hom_part.scale(m)?;
        let cross = self
            .cross
            .iter()
            .map(|row| row.iter().map(|v| v.scale(m)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(GradedAut {
            k_p,
            x_choices,
            hom_part,
            cross,
        })
    }

    /// Value of `k_c` on the i-th generator: `xᵢ + hom(eᵢ)`. Together with
    /// `k_p` these values determine the automorphism.
    pub fn kc_generator_values(&self) -> Result<Vec<AbElement>> {
        (0..self.x_choices.len())
            .map(|i| {
                let ei = self.k_p.source().generator(i)?;
                self.x_choices[i].add(&self.hom_part.apply(&ei)?)
            })
            .collect()
    }

    pub fn is_trivial(&self) -> Result<bool> {
        Ok(self.k_p.is_zero() && self.kc_generator_values()?.iter().all(AbElement::is_zero))
    }
}

/// Functional equality: same `k_p` and the same `k_c` (different
/// `(x, hom)` splittings of the same function compare equal).
impl PartialEq for GradedAut {
    fn eq(&self, other: &Self) -> bool {
        self.k_p == other.k_p
            && match (self.kc_generator_values(), other.kc_generator_values()) {
                (Ok(a), Ok(b)) => a == b,
                _ => false,
            }
    }
}

impl Eq for GradedAut {}

/// A subgroup `K` of the graded automorphisms, given by a cyclic-product
/// presentation and one automorphism per generator. Generator orders are
/// validated at construction, so the additive extension `K → Aut_gr` is a
/// well-defined homomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KGroup {
    group: CyclicProduct,
    generator_auts: Vec<GradedAut>,
}

impl KGroup {
    pub fn group(&self) -> &CyclicProduct {
        &self.group
    }

    pub fn generator_auts(&self) -> &[GradedAut] {
        &self.generator_auts
    }

    /// The automorphism attached to `k ∈ K` by additive extension.
    pub fn aut_of(&self, data: &HeisenbergData, k: &AbElement) -> Result<GradedAut> {
        if *k.parent() != self.group {
            return Err(Error::Dimension("element not in K".into()));
        }
        let mut acc = data.trivial_aut();
        for (aut, &m) in self.generator_auts.iter().zip(k.coords()) {
            if m != 0 {
                acc = acc.compose(&aut.scale(m)?)?;
            }
        }
        Ok(acc)
    }
}

/// The extended Heisenberg group `((P ⊕ C) ⋊ N) ⋊ K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtGroup {
    heis: HeisenbergData,
    kgroup: KGroup,
}

/// An element `(p, c, n, k)` of the extended group, components canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElement {
    pub p: AbElement,
    pub c: AbElement,
    pub n: AbElement,
    pub k: AbElement,
}

impl ExtGroup {
    pub fn new(heis: HeisenbergData, kgroup: KGroup) -> Self {
        Self { heis, kgroup }
    }

    /// The extended integer Heisenberg group: everything ℤ, pairing `np`,
    /// and `K = ℤ` acting by `k(p, c, n) = (p + kn, c + k·n(n−1)/2, n)`.
    pub fn integer_model() -> Self {
        let heis = HeisenbergData::integer_model();
        let z = CyclicProduct::integer_line();
        let k_p = AbHom::new(z.clone(), z.clone(), vec![vec![1]]).unwrap();
        let gen = heis.graded_aut(k_p, None, None).unwrap();
        let kgroup = heis.k_group(z, vec![gen]).unwrap();
        Self { heis, kgroup }
    }

    pub fn heis(&self) -> &HeisenbergData {
        &self.heis
    }

    pub fn kgroup(&self) -> &KGroup {
        &self.kgroup
    }

    pub fn element(&self, p: &[i64], c: &[i64], n: &[i64], k: &[i64]) -> Result<ExtElement> {
        Ok(ExtElement {
            p: self.heis.p_group().reduce(p)?,
            c: self.heis.c_group().reduce(c)?,
            n: self.heis.n_group().reduce(n)?,
            k: self.kgroup.group().reduce(k)?,
        })
    }

    pub fn identity(&self) -> ExtElement {
        ExtElement {
            p: self.heis.p_group().zero(),
            c: self.heis.c_group().zero(),
            n: self.heis.n_group().zero(),
            k: self.kgroup.group().zero(),
        }
    }

    fn check_member(&self, x: &ExtElement) -> Result<()> {
        if *x.p.parent() != *self.heis.p_group()
            || *x.c.parent() != *self.heis.c_group()
            || *x.n.parent() != *self.heis.n_group()
            || *x.k.parent() != *self.kgroup.group()
        {
            return Err(Error::Dimension(
                "element of a different extended group".into(),
            ));
        }
        Ok(())
    }

    pub fn aut_of(&self, k: &AbElement) -> Result<GradedAut> {
        self.kgroup.aut_of(&self.heis, k)
    }

    /// The extended product; the left operand carries the primes:
    /// `(p′,c′,n′,k′) * (p₁,c₁,n₁,k₁)
    ///   = (p′+p₁+k′_p(n₁), c₁+c′+k′_c(n₁)+n′(p₁+k′_p(n₁)), n₁+n′, k₁+k′)`.
    pub fn mul(&self, x: &ExtElement, y: &ExtElement) -> Result<ExtElement> {
        self.check_member(x)?;
        self.check_member(y)?;
        let k_aut = self.aut_of(&x.k)?;
        let shifted_p = y.p.add(&k_aut.k_p().apply(&y.n)?)?;
        Ok(ExtElement {
            p: x.p.add(&shifted_p)?,
            c: y.c
                .add(&x.c)?
                .add(&k_aut.kc_eval(&y.n)?)?
                .add(&self.heis.pairing_apply(&x.n, &shifted_p)?)?,
            n: y.n.add(&x.n)?,
            k: y.k.add(&x.k)?,
        })
    }

    /// Closed-form inverse: `(−p − k_p(−n), −c − k_c(−n) + (n,p), −n, −k)`,
    /// with `k_p, k_c` the components of the element's own `k`.
    pub fn inv(&self, x: &ExtElement) -> Result<ExtElement> {
        self.check_member(x)?;
        let k_aut = self.aut_of(&x.k)?;
        let neg_n = x.n.neg()?;
        Ok(ExtElement {
            p: x.p.neg()?.sub(&k_aut.k_p().apply(&neg_n)?)?,
            c: x.c
                .neg()?
                .sub(&k_aut.kc_eval(&neg_n)?)?
                .add(&self.heis.pairing_apply(&x.n, &x.p)?)?,
            n: neg_n,
            k: x.k.neg()?,
        })
    }

    /// `g x g⁻¹`; the result keeps the `n` and `k` components of `x`.
    pub fn conjugate(&self, g: &ExtElement, x: &ExtElement) -> Result<ExtElement> {
        self.mul(&self.mul(g, x)?, &self.inv(g)?)
    }

    pub fn order(&self) -> Result<Option<u128>> {
        let (Some(h), Some(k)) = (self.heis.order()?, self.kgroup.group().order()?) else {
            return Ok(None);
        };
        h.checked_mul(k)
            .map(Some)
            .ok_or(Error::Overflow("extended group order"))
    }

    /// All elements, odometer order over `(p, c, n, k)` with the rightmost
    /// coordinate fastest.
    pub fn enumerate(&self) -> Result<Vec<ExtElement>> {
        let pcnk = self
            .heis
            .p_group()
            .direct_sum(self.heis.c_group())
            .direct_sum(self.heis.n_group())
            .direct_sum(self.kgroup.group());
        let rp = self.heis.p_group().rank();
        let rc = self.heis.c_group().rank();
        let rn = self.heis.n_group().rank();
        let mut out = Vec::new();
        for v in pcnk.enumerate()? {
            let w = v.coords();
            out.push(ExtElement {
                p: self.heis.p_group().reduce(&w[..rp])?,
                c: self.heis.c_group().reduce(&w[rp..rp + rc])?,
                n: self.heis.n_group().reduce(&w[rp + rc..rp + rc + rn])?,
                k: self.kgroup.group().reduce(&w[rp + rc + rn..])?,
            });
        }
        Ok(out)
    }
}
