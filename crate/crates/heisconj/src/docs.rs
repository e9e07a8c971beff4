//! JSON interchange documents: group specifications, elements, invariant
//! records, and conjugacy reports. All construction-time validation from
//! the core modules runs when a document is turned into a runtime model.
//!
//! A group spec is either `{"model": "integer"}` (the extended integer
//! Heisenberg group) or an explicit description:
//!
//! ```json
//! {
//!   "N": {"moduli": [2]},
//!   "P": {"moduli": [4]},
//!   "C": {"moduli": [4]},
//!   "pairing": [[[2]]],
//!   "K": {"moduli": [2], "generators": [{"k_p": [[2]]}]}
//! }
//! ```
//!
//! Moduli are non-negative, with `0` standing for a ℤ factor. `pairing` is
//! an `s_N × s_P` array of C-coordinate vectors. Each K generator carries
//! its `k_p` matrix (`s_P × s_N`), an optional per-N-generator choice `x`
//! of C-vectors, and an optional homomorphism part `hom` (`s_C × s_N`).

use serde::{Deserialize, Serialize};

use crate::abelian::{AbElement, AbHom, CyclicProduct};
use crate::conj::InvariantRecord;
use crate::error::{Error, Result};
use crate::heis::{ExtElement, ExtGroup, GradedAut, HeisenbergData};
use crate::zheis::{ZExtElement, ZInvariantRecord};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpecDocument {
    Integer(IntegerModelDoc),
    Explicit(ExplicitGroupDoc),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegerModelDoc {
    pub model: IntegerModelTag,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegerModelTag {
    Integer,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGroupDoc {
    #[serde(rename = "N")]
    pub n: GroupDoc,
    #[serde(rename = "P")]
    pub p: GroupDoc,
    #[serde(rename = "C")]
    pub c: GroupDoc,
    /// `s_N × s_P` array of C-coordinate vectors
    pub pairing: Vec<Vec<Vec<i64>>>,
    #[serde(rename = "K")]
    pub k: KGroupDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub moduli: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGroupDoc {
    pub moduli: Vec<i64>,
    pub generators: Vec<KGeneratorDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGeneratorDoc {
    pub k_p: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hom: Option<Vec<Vec<i64>>>,
}

/// A loaded and validated group model.
#[derive(Debug, Clone)]
pub enum Model {
    /// The extended integer Heisenberg group, integer quadruples.
    Integer,
    /// Any explicitly described instance (possibly with ℤ factors).
    Explicit(Box<ExtGroup>),
}

impl Model {
    pub fn parse_json(text: &str) -> Result<Model> {
        let doc: GroupSpecDocument = serde_json::from_str(text)
            .map_err(|e| Error::Spec(format!("malformed group spec JSON: {e}")))?;
        Model::from_document(&doc)
    }

    pub fn from_document(doc: &GroupSpecDocument) -> Result<Model> {
        match doc {
            GroupSpecDocument::Integer(_) => Ok(Model::Integer),
            GroupSpecDocument::Explicit(spec) => {
                Ok(Model::Explicit(Box::new(build_ext_group(spec)?)))
            }
        }
    }
}

pub fn build_ext_group(spec: &ExplicitGroupDoc) -> Result<ExtGroup> {
    let n_group = CyclicProduct::new(spec.n.moduli.clone())?;
    let p_group = CyclicProduct::new(spec.p.moduli.clone())?;
    let c_group = CyclicProduct::new(spec.c.moduli.clone())?;
    if spec.pairing.len() != n_group.rank()
        || spec.pairing.iter().any(|row| row.len() != p_group.rank())
    {
        return Err(Error::Spec(format!(
            "pairing must be a {}x{} array of C-vectors",
            n_group.rank(),
            p_group.rank()
        )));
    }
    let pairing = spec
        .pairing
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| c_group.reduce(v))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let data = HeisenbergData::new(n_group.clone(), p_group.clone(), c_group.clone(), pairing)?;
    let k_group = CyclicProduct::new(spec.k.moduli.clone())?;
    let auts = spec
        .k
        .generators
        .iter()
        .enumerate()
        .map(|(gi, gen)| build_generator_aut(&data, &n_group, &p_group, &c_group, gi, gen))
        .collect::<Result<Vec<GradedAut>>>()?;
    let kgroup = data.k_group(k_group, auts)?;
    Ok(ExtGroup::new(data, kgroup))
}

fn build_generator_aut(
    data: &HeisenbergData,
    n_group: &CyclicProduct,
    p_group: &CyclicProduct,
    c_group: &CyclicProduct,
    gi: usize,
    gen: &KGeneratorDoc,
) -> Result<GradedAut> {
    let k_p = AbHom::new(n_group.clone(), p_group.clone(), gen.k_p.clone())
        .map_err(|e| Error::Spec(format!("K generator {gi}: {e}")))?;
    let x = gen
        .x
        .as_ref()
        .map(|vs| {
            if vs.len() != n_group.rank() {
                return Err(Error::Spec(format!(
                    "K generator {gi}: one x vector per N generator required"
                )));
            }
            vs.iter()
                .map(|v| c_group.reduce(v))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let hom = gen
        .hom
        .as_ref()
        .map(|m| {
            AbHom::new(n_group.clone(), c_group.clone(), m.clone())
                .map_err(|e| Error::Spec(format!("K generator {gi} hom part: {e}")))
        })
        .transpose()?;
    data.graded_aut(k_p, x, hom)
}

/// One component of an element document: a plain integer in the integer
/// model, a coordinate vector otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordDoc {
    Scalar(i64),
    Vector(Vec<i64>),
}

impl CoordDoc {
    fn as_scalar(&self) -> Result<i64> {
        match self {
            CoordDoc::Scalar(v) => Ok(*v),
            CoordDoc::Vector(_) => Err(Error::Element(
                "the integer model takes plain integers, not vectors".into(),
            )),
        }
    }

    fn as_vector(&self) -> Result<&[i64]> {
        match self {
            CoordDoc::Vector(v) => Ok(v),
            CoordDoc::Scalar(_) => Err(Error::Element(
                "explicit models take coordinate vectors, not plain integers".into(),
            )),
        }
    }
}

/// An element `(p, c, n, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDocument {
    pub p: CoordDoc,
    pub c: CoordDoc,
    pub n: CoordDoc,
    pub k: CoordDoc,
}

/// A parsed element of whichever model is loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelElement {
    Integer(ZExtElement),
    Explicit(ExtElement),
}

pub fn element_from_doc(model: &Model, doc: &ElementDocument) -> Result<ModelElement> {
    match model {
        Model::Integer => Ok(ModelElement::Integer(ZExtElement::new(
            doc.p.as_scalar()?,
            doc.c.as_scalar()?,
            doc.n.as_scalar()?,
            doc.k.as_scalar()?,
        ))),
        Model::Explicit(group) => Ok(ModelElement::Explicit(group.element(
            doc.p.as_vector()?,
            doc.c.as_vector()?,
            doc.n.as_vector()?,
            doc.k.as_vector()?,
        )?)),
    }
}

pub fn parse_element(model: &Model, text: &str) -> Result<ModelElement> {
    let doc: ElementDocument = serde_json::from_str(text)
        .map_err(|e| Error::Element(format!("malformed element JSON: {e}")))?;
    element_from_doc(model, &doc)
}

pub fn element_to_doc(el: &ModelElement) -> ElementDocument {
    match el {
        ModelElement::Integer(z) => ElementDocument {
            p: CoordDoc::Scalar(z.p),
            c: CoordDoc::Scalar(z.c),
            n: CoordDoc::Scalar(z.n),
            k: CoordDoc::Scalar(z.k),
        },
        ModelElement::Explicit(x) => ElementDocument {
            p: CoordDoc::Vector(x.p.coords().to_vec()),
            c: CoordDoc::Vector(x.c.coords().to_vec()),
            n: CoordDoc::Vector(x.n.coords().to_vec()),
            k: CoordDoc::Vector(x.k.coords().to_vec()),
        },
    }
}

pub fn ext_element_to_doc(x: &ExtElement) -> ElementDocument {
    element_to_doc(&ModelElement::Explicit(x.clone()))
}

/// JSON form of a [`ZInvariantRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum ZInvariantDoc {
    Odd {
        n: i64,
        k: i64,
        g: i64,
        p_residue: i64,
        j: i64,
        j_modulus: i64,
        w: i64,
    },
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
    Degenerate {
        k: i64,
        p_residue: i64,
        c_residue: i64,
    },
}

impl From<ZInvariantRecord> for ZInvariantDoc {
    fn from(r: ZInvariantRecord) -> Self {
        match r {
            ZInvariantRecord::Odd {
                n,
                k,
                g,
                p_residue,
                j,
                j_modulus,
                w,
            } => ZInvariantDoc::Odd {
                n,
                k,
                g,
                p_residue,
                j,
                j_modulus,
                w,
            },
            ZInvariantRecord::Even {
                n,
                k,
                g,
                i1,
                i2,
                j1,
                j2,
                j_modulus,
                w,
            } => ZInvariantDoc::Even {
                n,
                k,
                g,
                i1,
                i2,
                j1,
                j2,
                j_modulus,
                w,
            },
            ZInvariantRecord::Degenerate {
                k,
                p_residue,
                c_residue,
            } => ZInvariantDoc::Degenerate {
                k,
                p_residue,
                c_residue,
            },
        }
    }
}

fn coords_of(e: &AbElement) -> Vec<i64> {
    e.coords().to_vec()
}

/// JSON form of an [`InvariantRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteInvariantDoc {
    pub n: Vec<i64>,
    pub k: Vec<i64>,
    #[serde(rename = "R")]
    pub r: Vec<i64>,
    #[serde(rename = "S")]
    pub s: Vec<i64>,
    /// generators of the preimage of V in C
    pub v_generators: Vec<Vec<i64>>,
    pub basepoint: ElementDocument,
}

impl From<&InvariantRecord> for FiniteInvariantDoc {
    fn from(r: &InvariantRecord) -> Self {
        FiniteInvariantDoc {
            n: coords_of(&r.n),
            k: coords_of(&r.k),
            r: coords_of(&r.r),
            s: coords_of(&r.s),
            v_generators: r
                .v
                .generators()
                .iter()
                .filter(|g| !g.is_zero())
                .map(coords_of)
                .collect(),
            basepoint: ext_element_to_doc(&r.basepoint),
        }
    }
}

/// Output of `is-conjugate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjugacyDoc {
    pub conjugate: bool,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ElementDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Output of `classes`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassesDoc {
    pub order: u64,
    pub class_count: usize,
    pub classes: Vec<ClassDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassDoc {
    pub representative: ElementDocument,
    pub size: usize,
    pub invariants: FiniteInvariantDoc,
}
