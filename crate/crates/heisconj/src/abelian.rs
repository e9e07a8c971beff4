//! Finitely generated abelian groups presented as products of cyclic
//! factors, their elements, homomorphisms, and subgroups.
//!
//! A modulus of `0` encodes a ℤ factor; congruence mod 0 is equality. This
//! one convention lets the same code serve finite groups and the integer
//! model.

use crate::arith;
use crate::error::{Error, Result};
use crate::linalg::{self, Hnf};

/// A product of cyclic groups `ℤ/l₁ × … × ℤ/l_s`, with `lᵢ = 0` meaning ℤ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicProduct {
    moduli: Vec<i64>,
}

impl CyclicProduct {
    pub fn new(moduli: Vec<i64>) -> Result<Self> {
        if let Some(l) = moduli.iter().find(|&&l| l < 0) {
            return Err(Error::Spec(format!("negative modulus {l}")));
        }
        Ok(Self { moduli })
    }

    /// The group ℤ, a single free factor.
    pub fn integer_line() -> Self {
        Self { moduli: vec![0] }
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_finite(&self) -> bool {
        self.moduli.iter().all(|&l| l >= 1)
    }

    /// Number of elements, `None` for infinite groups.
    pub fn order(&self) -> Result<Option<u128>> {
        if !self.is_finite() {
            return Ok(None);
        }
        let mut o: u128 = 1;
        for &l in &self.moduli {
            o = o
                .checked_mul(l as u128)
                .ok_or(Error::Overflow("group order"))?;
        }
        Ok(Some(o))
    }

    /// Canonical representative of a raw coordinate vector.
    pub fn reduce(&self, raw: &[i64]) -> Result<AbElement> {
        if raw.len() != self.rank() {
            return Err(Error::Dimension(format!(
                "coordinate vector of length {} in a rank-{} group",
                raw.len(),
                self.rank()
            )));
        }
        let coords = raw
            .iter()
            .zip(&self.moduli)
            .map(|(&v, &l)| arith::modulo(v, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(AbElement {
            parent: self.clone(),
            coords,
        })
    }

    pub fn zero(&self) -> AbElement {
        AbElement {
            parent: self.clone(),
            coords: vec![0; self.rank()],
        }
    }

    pub fn generator(&self, i: usize) -> Result<AbElement> {
        let mut raw = vec![0; self.rank()];
        if i >= self.rank() {
            return Err(Error::Dimension(format!(
                "generator index {i} out of range"
            )));
        }
        raw[i] = 1;
        self.reduce(&raw)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut moduli = self.moduli.clone();
        moduli.extend_from_slice(&other.moduli);
        Self { moduli }
    }

    /// Lattice rows `lᵢ·eᵢ` for the finite factors.
    pub(crate) fn relation_rows(&self) -> Vec<Vec<i64>> {
        self.moduli
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l >= 1)
            .map(|(i, &l)| {
                let mut row = vec![0i64; self.rank()];
                row[i] = l;
                row
            })
            .collect()
    }

    /// Yields every element exactly once, in lexicographic coordinate order
    /// (rightmost coordinate fastest). Errors on infinite groups.
    pub fn enumerate(&self) -> Result<ElementIter<'_>> {
        if !self.is_finite() {
            return Err(Error::InfiniteEnumeration);
        }
        Ok(ElementIter {
            group: self,
            next: Some(vec![0; self.rank()]),
        })
    }
}

pub struct ElementIter<'a> {
    group: &'a CyclicProduct,
    next: Option<Vec<i64>>,
}

impl Iterator for ElementIter<'_> {
    type Item = AbElement;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.next.take()?;
        let elem = AbElement {
            parent: self.group.clone(),
            coords: cur.clone(),
        };
        let mut nxt = cur;
        let mut i = nxt.len();
        loop {
            if i == 0 {
                self.next = None;
                break;
            }
            i -= 1;
            nxt[i] += 1;
            if nxt[i] < self.group.moduli[i] {
                self.next = Some(nxt);
                break;
            }
            nxt[i] = 0;
        }
        Some(elem)
    }
}

/// An element of a [`CyclicProduct`], held in canonical reduced form:
/// `0 ≤ coordᵢ < lᵢ` on finite factors, arbitrary on ℤ factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbElement {
    parent: CyclicProduct,
    coords: Vec<i64>,
}

impl AbElement {
    pub fn parent(&self) -> &CyclicProduct {
        &self.parent
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_same_parent(&self, other: &AbElement) -> Result<()> {
        if self.parent != other.parent {
            return Err(Error::Dimension("elements of different groups".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &AbElement) -> Result<AbElement> {
        self.check_same_parent(other)?;
        let raw = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| arith::add(a, b))
            .collect::<Result<Vec<_>>>()?;
        self.parent.reduce(&raw)
    }

    pub fn sub(&self, other: &AbElement) -> Result<AbElement> {
        self.check_same_parent(other)?;
        let raw = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| arith::sub(a, b))
            .collect::<Result<Vec<_>>>()?;
        self.parent.reduce(&raw)
    }

    pub fn neg(&self) -> Result<AbElement> {
        let raw = self
            .coords
            .iter()
            .map(|&a| arith::neg(a))
            .collect::<Result<Vec<_>>>()?;
        self.parent.reduce(&raw)
    }

    pub fn scale(&self, m: i64) -> Result<AbElement> {
        let raw = self
            .coords
            .iter()
            .map(|&a| arith::mul(m, a))
            .collect::<Result<Vec<_>>>()?;
        self.parent.reduce(&raw)
    }

    /// Splits an element of a direct sum back into its two halves.
    pub fn split(
        &self,
        left: &CyclicProduct,
        right: &CyclicProduct,
    ) -> Result<(AbElement, AbElement)> {
        if left.rank() + right.rank() != self.parent.rank() {
            return Err(Error::Dimension("split ranks do not match".into()));
        }
        let l = left.reduce(&self.coords[..left.rank()])?;
        let r = right.reduce(&self.coords[left.rank()..])?;
        Ok((l, r))
    }

    /// Concatenates two elements into the direct sum of their parents.
    pub fn join(&self, other: &AbElement) -> Result<AbElement> {
        let parent = self.parent.direct_sum(&other.parent);
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        parent.reduce(&coords)
    }
}

/// A homomorphism between cyclic products, given by an integer matrix:
/// `matrix[i][j]` is the i-th target coordinate of the image of the j-th
/// source generator. Well-definedness (`lⱼ · column j ≡ 0` in the target)
/// is validated at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbHom {
    source: CyclicProduct,
    target: CyclicProduct,
    matrix: Vec<Vec<i64>>,
}

impl AbHom {
    pub fn new(
        source: CyclicProduct,
        target: CyclicProduct,
        matrix: Vec<Vec<i64>>,
    ) -> Result<Self> {
        if matrix.len() != target.rank() || matrix.iter().any(|row| row.len() != source.rank()) {
            return Err(Error::Dimension(format!(
                "hom matrix must be {}x{}",
                target.rank(),
                source.rank()
            )));
        }
        // reduce entries into canonical target residues
        let matrix = matrix
            .iter()
            .zip(target.moduli())
            .map(|(row, &m)| {
                row.iter()
                    .map(|&v| arith::modulo(v, m))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (j, &lj) in source.moduli().iter().enumerate() {
            if lj == 0 {
                continue;
            }
            for (i, &mi) in target.moduli().iter().enumerate() {
                let v = arith::mul(lj, matrix[i][j])?;
                if arith::modulo(v, mi)? != 0 {
                    return Err(Error::Spec(format!(
                        "hom not well-defined: {lj} * entry[{i}][{j}] = {v} is nonzero in the target"
                    )));
                }
            }
        }
        Ok(Self {
            source,
            target,
            matrix,
        })
    }

    pub fn zero(source: CyclicProduct, target: CyclicProduct) -> Self {
        let matrix = vec![vec![0; source.rank()]; target.rank()];
        Self {
            source,
            target,
            matrix,
        }
    }

    pub fn identity(group: &CyclicProduct) -> Result<Self> {
        let n = group.rank();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        Self::new(group.clone(), group.clone(), matrix)
    }

    pub fn source(&self) -> &CyclicProduct {
        &self.source
    }

    pub fn target(&self) -> &CyclicProduct {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    /// Image of the j-th source generator.
    pub fn column(&self, j: usize) -> Result<AbElement> {
        let raw: Vec<i64> = self.matrix.iter().map(|row| row[j]).collect();
        self.target.reduce(&raw)
    }

    pub fn apply(&self, x: &AbElement) -> Result<AbElement> {
        if *x.parent() != self.source {
            return Err(Error::Dimension("element not in the hom's source".into()));
        }
        let mut raw = vec![0i64; self.target.rank()];
        for (i, row) in self.matrix.iter().enumerate() {
            for (&m, &c) in row.iter().zip(x.coords()) {
                raw[i] = arith::add(raw[i], arith::mul(m, c)?)?;
            }
        }
        self.target.reduce(&raw)
    }

    pub fn add(&self, other: &AbHom) -> Result<AbHom> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::Dimension("homs with different end groups".into()));
        }
        let matrix = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| arith::add(x, y))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        AbHom::new(self.source.clone(), self.target.clone(), matrix)
    }

    pub fn scale(&self, m: i64) -> Result<AbHom> {
        let matrix = self
            .matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| arith::mul(m, x))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        AbHom::new(self.source.clone(), self.target.clone(), matrix)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|row| row.iter().all(|&v| v == 0))
    }

    /// Kernel as a subgroup of the source, computed on the preimage lattice
    /// `{x ∈ ℤ^s : Mx ∈ target relations}` via an integer kernel.
    pub fn kernel(&self) -> Result<Subgroup> {
        let s = self.source.rank();
        // augment the matrix with the target relation columns and take the
        // integer kernel; the source projection spans the preimage lattice
        let relation_cols: Vec<Vec<i64>> = self.target.relation_rows();
        let mut rows: Vec<Vec<i64>> = Vec::with_capacity(self.target.rank());
        for (i, mrow) in self.matrix.iter().enumerate() {
            let mut row = mrow.clone();
            for rel in &relation_cols {
                row.push(rel[i]);
            }
            rows.push(row);
        }
        let total_cols = s + relation_cols.len();
        let basis = linalg::kernel_basis(&rows, total_cols)?;
        let projected: Vec<Vec<i64>> = basis.into_iter().map(|v| v[..s].to_vec()).collect();
        Subgroup::from_lattice_vectors(self.source.clone(), projected)
    }

    /// Image as a subgroup of the target, generated by the column images.
    pub fn image(&self) -> Result<Subgroup> {
        let gens = (0..self.source.rank())
            .map(|j| self.column(j))
            .collect::<Result<Vec<_>>>()?;
        Subgroup::from_generators(self.target.clone(), gens)
    }
}

/// A subgroup of a [`CyclicProduct`], stored as the generating elements
/// plus the Hermite-form basis of the preimage lattice in ℤ^s (generators
/// together with the ambient relations `lᵢ·eᵢ`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    ambient: CyclicProduct,
    generators: Vec<AbElement>,
    lattice: Hnf,
}

impl Subgroup {
    pub fn from_generators(ambient: CyclicProduct, generators: Vec<AbElement>) -> Result<Self> {
        for g in &generators {
            if *g.parent() != ambient {
                return Err(Error::Dimension(
                    "generator outside the ambient group".into(),
                ));
            }
        }
        let vectors = generators.iter().map(|g| g.coords().to_vec()).collect();
        let mut sub = Self::from_lattice_vectors(ambient, vectors)?;
        sub.generators = generators;
        Ok(sub)
    }

    pub(crate) fn from_lattice_vectors(
        ambient: CyclicProduct,
        vectors: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let mut rows = vectors;
        rows.extend(ambient.relation_rows());
        let lattice = linalg::row_hnf(rows, ambient.rank())?;
        let generators = lattice
            .rows
            .iter()
            .map(|r| ambient.reduce(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ambient,
            generators,
            lattice,
        })
    }

    pub fn trivial(ambient: CyclicProduct) -> Result<Self> {
        Self::from_lattice_vectors(ambient, Vec::new())
    }

    pub fn whole(ambient: CyclicProduct) -> Result<Self> {
        let gens = (0..ambient.rank())
            .map(|i| ambient.generator(i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(ambient, gens)
    }

    pub fn ambient(&self) -> &CyclicProduct {
        &self.ambient
    }

    /// Group generators (the reduced lattice basis rows).
    pub fn generators(&self) -> &[AbElement] {
        &self.generators
    }

    pub fn contains(&self, x: &AbElement) -> Result<bool> {
        if *x.parent() != self.ambient {
            return Err(Error::Dimension("element outside the ambient group".into()));
        }
        self.lattice.contains(x.coords())
    }

    /// Canonical coset representative of `x + self`: representatives are
    /// equal iff the difference lies in the subgroup.
    pub fn coset_canonical(&self, x: &AbElement) -> Result<AbElement> {
        if *x.parent() != self.ambient {
            return Err(Error::Dimension("element outside the ambient group".into()));
        }
        let mut v = x.coords().to_vec();
        self.lattice.reduce_canonical(&mut v)?;
        self.ambient.reduce(&v)
    }

    /// Order of the quotient `ambient / self`, `None` when infinite.
    pub fn quotient_order(&self) -> Option<u128> {
        self.lattice.quotient_order()
    }

    /// Canonical representatives of all cosets; errors when the quotient is
    /// infinite.
    pub fn quotient_representatives(&self) -> Result<Vec<AbElement>> {
        let reps = self.lattice.quotient_representatives()?;
        reps.iter().map(|v| self.ambient.reduce(v)).collect()
    }

    /// Every element of the subgroup itself; requires a finite ambient.
    pub fn elements(&self) -> Result<Vec<AbElement>> {
        let mut out = Vec::new();
        for x in self.ambient.enumerate()? {
            if self.contains(&x)? {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Smallest subgroup containing both operands.
    pub fn join(&self, other: &Subgroup) -> Result<Subgroup> {
        if self.ambient != other.ambient {
            return Err(Error::Dimension("subgroups of different groups".into()));
        }
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Subgroup::from_generators(self.ambient.clone(), gens)
    }

    pub fn is_whole_group(&self) -> bool {
        self.quotient_order() == Some(1)
    }
}
