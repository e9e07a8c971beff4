//! The self-certification suite: every mathematical claim the crate relies
//! on, checked against independent routes at full strength. The CLI
//! `selftest` subcommand and the acceptance test target both run this.
//!
//! All checks are exact integer comparisons; randomized parts draw from a
//! seeded stream, so output is byte-identical for a fixed configuration.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::abelian::{AbElement, AbHom, CyclicProduct, Subgroup};
use crate::arith;
use crate::catalog;
use crate::congruence::{solve_congruence_pair, CongruenceSystem};
use crate::conj::ConjContext;
use crate::error::Result;
use crate::heis::{ExtElement, ExtGroup, HeisElement, HeisenbergData};
use crate::oracle::{conjugacy_partition, oracle_z, oracle_z_naive, partition_compare};
use crate::zheis::{
    even_invariants, is_conjugate_z, odd_invariants, ZExtElement, ZInvariantRecord,
};

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub seed: u64,
    /// modulus range `[1, congruence_n_max]` for the congruence sweep
    pub congruence_n_max: i64,
    pub z_n_max: i64,
    pub z_k_max: i64,
    pub z_coord: i64,
    pub naive_window: i64,
    pub group_law_samples: u64,
    pub invariance_samples: u64,
    pub extra_instances: Vec<(String, ExtGroup)>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            seed: 0x4845_4953,
            congruence_n_max: 40,
            z_n_max: 8,
            z_k_max: 6,
            z_coord: 5,
            naive_window: 200,
            group_law_samples: 1000,
            invariance_samples: 500,
            extra_instances: Vec::new(),
        }
    }
}

impl SelftestConfig {
    /// Scales the exhaustive ranges by a single effort bound; `box_size`
    /// 40 reproduces the defaults.
    pub fn with_box(box_size: i64, seed: u64) -> Self {
        let b = box_size.max(1);
        Self {
            seed,
            congruence_n_max: b,
            z_n_max: b.min(8),
            z_k_max: b.min(6),
            z_coord: b.min(5),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn format_line(&self) -> String {
        format!(
            "criterion {} {}: {} — {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

type CR<T> = std::result::Result<T, String>;

type CriterionFn = fn(&SelftestConfig) -> CR<String>;

fn lib<T>(r: Result<T>, what: &str) -> CR<T> {
    r.map_err(|e| format!("{what}: {e}"))
}

const CRITERIA: &[(u32, &str, CriterionFn)] = &[
    (
        1,
        "two-congruence solver vs brute force",
        criterion_congruence_pairs,
    ),
    (2, "group-law certification", criterion_group_law),
    (
        3,
        "graded-automorphism existence and formula",
        criterion_graded_auts,
    ),
    (
        4,
        "full invariant system vs conjugation orbits",
        criterion_full_system,
    ),
    (
        5,
        "odd-order simplification consistency",
        criterion_odd_case,
    ),
    (
        6,
        "integer-model decision vs oracles",
        criterion_integer_model,
    ),
    (7, "polarization additivity", criterion_polarization),
];

fn evaluate(
    (id, name, f): &(u32, &'static str, CriterionFn),
    cfg: &SelftestConfig,
) -> CriterionResult {
    match f(cfg) {
        Ok(detail) => CriterionResult {
            id: *id,
            name,
            passed: true,
            detail,
        },
        Err(detail) => CriterionResult {
            id: *id,
            name,
            passed: false,
            detail,
        },
    }
}

/// Runs criteria 1–7 in order.
pub fn run(cfg: &SelftestConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|c| evaluate(c, cfg)).collect()
}

/// Runs a single criterion by its number.
pub fn run_criterion(id: u32, cfg: &SelftestConfig) -> Option<CriterionResult> {
    CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| evaluate(c, cfg))
}

pub fn all_passed(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.passed)
}

fn instances(cfg: &SelftestConfig) -> CR<Vec<(String, ExtGroup)>> {
    let mut v = lib(catalog::finite_instances(), "catalog load")?;
    v.extend(cfg.extra_instances.iter().cloned());
    Ok(v)
}

// criterion 1 ---------------------------------------------------------

fn criterion_congruence_pairs(cfg: &SelftestConfig) -> CR<String> {
    let per_n: Vec<CR<u64>> = (1..=cfg.congruence_n_max)
        .into_par_iter()
        .map(|n| {
            let mut count = 0u64;
            for a in -n..=n {
                for b in -n..=n {
                    for c in -n..=n {
                        for d in -n..=n {
                            let sys = lib(CongruenceSystem::new(a, b, c, d, n), "system")?;
                            let out = lib(solve_congruence_pair(&sys), "solver")?;
                            let mut brute = false;
                            for x in 0..n {
                                if lib(sys.is_satisfied_by(x), "check")? {
                                    brute = true;
                                    break;
                                }
                            }
                            if out.solvable != brute {
                                return Err(format!(
                                    "verdict mismatch at (a,b,c,d,n)=({a},{b},{c},{d},{n}): solver {} vs brute force {}",
                                    out.solvable, brute
                                ));
                            }
                            match out.witness {
                                Some(x) => {
                                    if !(0..n).contains(&x) || !lib(sys.is_satisfied_by(x), "check")? {
                                        return Err(format!(
                                            "bad witness {x} at (a,b,c,d,n)=({a},{b},{c},{d},{n})"
                                        ));
                                    }
                                }
                                None => {
                                    if out.solvable {
                                        return Err(format!(
                                            "solvable without witness at (a,b,c,d,n)=({a},{b},{c},{d},{n})"
                                        ));
                                    }
                                }
                            }
                            count += 1;
                        }
                    }
                }
            }
            Ok(count)
        })
        .collect();
    let mut total = 0u64;
    for r in per_n {
        total += r?;
    }
    Ok(format!(
        "exact agreement on {total} systems, n in [1,{}], coefficients in [-n,n]",
        cfg.congruence_n_max
    ))
}

// criterion 2 ---------------------------------------------------------

fn unipotent_mul(x: (i64, i64, i64), y: (i64, i64, i64)) -> (i64, i64, i64) {
    (x.0 + y.0, x.1 + y.1, x.2 + y.2 + x.0 * y.1)
}

fn semidirect_mul(g: &ExtGroup, x: &ExtElement, y: &ExtElement) -> Result<ExtElement> {
    let aut = g.aut_of(&x.k)?;
    let acted = aut.apply(&HeisElement {
        n: y.n.clone(),
        p: y.p.clone(),
        c: y.c.clone(),
    })?;
    let base = g.heis().mul(
        &HeisElement {
            n: x.n.clone(),
            p: x.p.clone(),
            c: x.c.clone(),
        },
        &acted,
    )?;
    Ok(ExtElement {
        p: base.p,
        c: base.c,
        n: base.n,
        k: x.k.add(&y.k)?,
    })
}

fn axioms_via_table<E: Ord + Clone>(
    name: &str,
    elems: &[E],
    identity: &E,
    mul: impl Fn(&E, &E) -> Result<E>,
    inv: impl Fn(&E) -> Result<E>,
) -> CR<u64> {
    let n = elems.len();
    let index: BTreeMap<&E, usize> = elems.iter().zip(0..).collect();
    let id_idx = index[identity];
    let mut table = vec![0usize; n * n];
    for i in 0..n {
        for j in 0..n {
            let prod = lib(mul(&elems[i], &elems[j]), "mul")?;
            let Some(&p) = index.get(&prod) else {
                return Err(format!("{name}: product left the group"));
            };
            table[i * n + j] = p;
        }
    }
    for i in 0..n {
        if table[id_idx * n + i] != i || table[i * n + id_idx] != i {
            return Err(format!("{name}: identity axiom fails at index {i}"));
        }
        let xi = lib(inv(&elems[i]), "inv")?;
        let Some(&ii) = index.get(&xi) else {
            return Err(format!("{name}: inverse left the group"));
        };
        if table[i * n + ii] != id_idx || table[ii * n + i] != id_idx {
            return Err(format!("{name}: inverse axiom fails at index {i}"));
        }
    }
    let mut checked = 0u64;
    for i in 0..n {
        for j in 0..n {
            let ij = table[i * n + j];
            for k in 0..n {
                if table[ij * n + k] != table[i * n + table[j * n + k]] {
                    return Err(format!("{name}: associativity fails at ({i},{j},{k})"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn criterion_group_law(cfg: &SelftestConfig) -> CR<String> {
    // base group law vs 3x3 unipotent matrix multiplication
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xa2a2);
    let zm = HeisenbergData::integer_model();
    for _ in 0..cfg.group_law_samples {
        let v: Vec<i64> = (0..6).map(|_| rng.random_range(-50..=50)).collect();
        let x = lib(zm.element(&[v[0]], &[v[1]], &[v[2]]), "element")?;
        let y = lib(zm.element(&[v[3]], &[v[4]], &[v[5]]), "element")?;
        let got = lib(zm.mul(&x, &y), "heis mul")?;
        let want = unipotent_mul((v[0], v[1], v[2]), (v[3], v[4], v[5]));
        if (got.n.coords()[0], got.p.coords()[0], got.c.coords()[0]) != want {
            return Err(format!("heis_mul disagrees with matrix oracle on {v:?}"));
        }
    }
    // extended group law vs semidirect evaluation
    let g = ExtGroup::integer_model();
    for _ in 0..cfg.group_law_samples {
        let v: Vec<i64> = (0..8).map(|_| rng.random_range(-50..=50)).collect();
        let x = lib(g.element(&[v[0]], &[v[1]], &[v[2]], &[v[3]]), "element")?;
        let y = lib(g.element(&[v[4]], &[v[5]], &[v[6]], &[v[7]]), "element")?;
        if lib(g.mul(&x, &y), "ext mul")? != lib(semidirect_mul(&g, &x, &y), "semidirect")? {
            return Err(format!(
                "ext_mul disagrees with semidirect evaluation on {v:?}"
            ));
        }
    }
    // associativity, identity, inverses on random ℤ-model triples
    for _ in 0..cfg.group_law_samples {
        let v: Vec<i64> = (0..9).map(|_| rng.random_range(-50..=50)).collect();
        let a = lib(zm.element(&[v[0]], &[v[1]], &[v[2]]), "element")?;
        let b = lib(zm.element(&[v[3]], &[v[4]], &[v[5]]), "element")?;
        let c = lib(zm.element(&[v[6]], &[v[7]], &[v[8]]), "element")?;
        let lhs = lib(zm.mul(&lib(zm.mul(&a, &b), "mul")?, &c), "mul")?;
        let rhs = lib(zm.mul(&a, &lib(zm.mul(&b, &c), "mul")?), "mul")?;
        if lhs != rhs {
            return Err(format!("heis associativity fails on {v:?}"));
        }
        let ai = lib(zm.inv(&a), "inv")?;
        if lib(zm.mul(&a, &ai), "mul")? != zm.identity()
            || lib(zm.mul(&ai, &a), "mul")? != zm.identity()
        {
            return Err(format!("heis inverse fails on {v:?}"));
        }
    }
    for _ in 0..cfg.group_law_samples {
        let v: Vec<i64> = (0..12).map(|_| rng.random_range(-50..=50)).collect();
        let a = lib(g.element(&[v[0]], &[v[1]], &[v[2]], &[v[3]]), "element")?;
        let b = lib(g.element(&[v[4]], &[v[5]], &[v[6]], &[v[7]]), "element")?;
        let c = lib(g.element(&[v[8]], &[v[9]], &[v[10]], &[v[11]]), "element")?;
        let lhs = lib(g.mul(&lib(g.mul(&a, &b), "mul")?, &c), "mul")?;
        let rhs = lib(g.mul(&a, &lib(g.mul(&b, &c), "mul")?), "mul")?;
        if lhs != rhs {
            return Err(format!("ext associativity fails on {v:?}"));
        }
        let ai = lib(g.inv(&a), "inv")?;
        if lib(g.mul(&a, &ai), "mul")? != g.identity()
            || lib(g.mul(&ai, &a), "mul")? != g.identity()
        {
            return Err(format!("ext inverse fails on {v:?}"));
        }
    }
    // exhaustive axioms on every finite instance of order ≤ 512
    let mut triples = 0u64;
    let mut tables = 0usize;
    for (name, grp) in instances(cfg)? {
        let order = lib(grp.order(), "order")?.unwrap_or(u128::MAX);
        if order > 512 {
            continue;
        }
        let elems = lib(grp.enumerate(), "enumerate")?;
        triples += axioms_via_table(
            &format!("{name} extended"),
            &elems,
            &grp.identity(),
            |a, b| grp.mul(a, b),
            |a| grp.inv(a),
        )?;
        let heis_elems = lib(grp.heis().enumerate(), "enumerate")?;
        triples += axioms_via_table(
            &format!("{name} base"),
            &heis_elems,
            &grp.heis().identity(),
            |a, b| grp.heis().mul(a, b),
            |a| grp.heis().inv(a),
        )?;
        tables += 2;
    }
    Ok(format!(
        "{} random matrix-oracle products, {} random semidirect products, 2x{} random axiom triples, {triples} associativity triples over {tables} exhaustive tables",
        cfg.group_law_samples, cfg.group_law_samples, cfg.group_law_samples
    ))
}

// criterion 3 ---------------------------------------------------------

fn crossed_condition_holds(
    data: &HeisenbergData,
    aut: &crate::heis::GradedAut,
    n1: &AbElement,
    n2: &AbElement,
) -> Result<bool> {
    let lhs = aut.kc_eval(&n1.add(n2)?)?;
    let rhs = aut
        .kc_eval(n1)?
        .add(&aut.kc_eval(n2)?)?
        .add(&data.pairing_apply(n1, &aut.k_p().apply(n2)?)?)?;
    Ok(lhs == rhs)
}

/// Independent existence oracle: tries every generator-value assignment
/// `k_c(eᵢ) ∈ C`, builds the function by the recurrence
/// `k_c(m + eᵢ) = k_c(m) + k_c(eᵢ) + m(k_p(eᵢ))`, and checks the crossed condition on
/// all of N × N.
fn kc_exists_by_search(data: &HeisenbergData, k_p: &AbHom) -> Result<bool> {
    let n_group = data.n_group();
    let c_group = data.c_group();
    let ns: Vec<AbElement> = n_group.enumerate()?.collect();
    let cs: Vec<AbElement> = c_group.enumerate()?.collect();
    let s = n_group.rank();
    let mut choice = vec![0usize; s];
    loop {
        let ys: Vec<&AbElement> = choice.iter().map(|&i| &cs[i]).collect();
        let mut table: BTreeMap<&AbElement, AbElement> = BTreeMap::new();
        table.insert(&ns[0], c_group.zero());
        for m in &ns[1..] {
            let j = m
                .coords()
                .iter()
                .rposition(|&v| v > 0)
                .expect("nonzero element");
            let mut prev_coords = m.coords().to_vec();
            prev_coords[j] -= 1;
            let prev = n_group.reduce(&prev_coords)?;
            let ej = n_group.generator(j)?;
            let val = table[&prev]
                .add(ys[j])?
                .add(&data.pairing_apply(&prev, &k_p.apply(&ej)?)?)?;
            table.insert(m, val);
        }
        let mut ok = true;
        'pairs: for m1 in &ns {
            for m2 in &ns {
                let lhs = &table[&m1.add(m2)?];
                let rhs = table[m1]
                    .add(&table[m2])?
                    .add(&data.pairing_apply(m1, &k_p.apply(m2)?)?)?;
                if *lhs != rhs {
                    ok = false;
                    break 'pairs;
                }
            }
        }
        if ok {
            return Ok(true);
        }
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(false);
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < cs.len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// All well-defined hom matrices between two finite cyclic products.
fn all_homs(src: &CyclicProduct, tgt: &CyclicProduct) -> Result<Vec<AbHom>> {
    let mut entry_choices: Vec<Vec<i64>> = Vec::new();
    for &mi in tgt.moduli() {
        for &lj in src.moduli() {
            entry_choices.push(
                (0..mi)
                    .filter(|&v| arith::modulo(lj * v, mi).unwrap_or(1) == 0)
                    .collect(),
            );
        }
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; entry_choices.len()];
    loop {
        let mut matrix = vec![vec![0i64; src.rank()]; tgt.rank()];
        for (pos, &k) in idx.iter().enumerate() {
            matrix[pos / src.rank()][pos % src.rank()] = entry_choices[pos][k];
        }
        out.push(AbHom::new(src.clone(), tgt.clone(), matrix)?);
        let mut i = idx.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < entry_choices[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

fn criterion_graded_auts(cfg: &SelftestConfig) -> CR<String> {
    // the crossed condition and cross-symmetry, exhaustively for every K-element
    // automorphism of each finite catalog instance
    let mut cocycle_checks = 0u64;
    for (name, g) in instances(cfg)? {
        let data = g.heis();
        let ns: Vec<AbElement> = lib(data.n_group().enumerate(), "enumerate")?.collect();
        for k in lib(g.kgroup().group().enumerate(), "enumerate")? {
            let aut = lib(g.aut_of(&k), "aut_of")?;
            for n1 in &ns {
                for n2 in &ns {
                    if !lib(
                        crossed_condition_holds(data, &aut, n1, n2),
                        "crossed condition",
                    )? {
                        return Err(format!(
                            "crossed condition fails in {name} at k={:?}",
                            k.coords()
                        ));
                    }
                    let a = lib(
                        data.pairing_apply(n1, &lib(aut.k_p().apply(n2), "k_p")?),
                        "pairing",
                    )?;
                    let b = lib(
                        data.pairing_apply(n2, &lib(aut.k_p().apply(n1), "k_p")?),
                        "pairing",
                    )?;
                    if a != b {
                        return Err(format!("cross-symmetry fails in {name}"));
                    }
                    cocycle_checks += 1;
                }
            }
        }
    }
    // adding any homomorphism N → C to the k_c data preserves the crossed condition
    let mut hom_variants = 0u64;
    for (name, g) in instances(cfg)? {
        let data = g.heis();
        let ns: Vec<AbElement> = lib(data.n_group().enumerate(), "enumerate")?.collect();
        for hom in lib(all_homs(data.n_group(), data.c_group()), "homs")? {
            for base in g.kgroup().generator_auts() {
                let aut = lib(
                    data.graded_aut(base.k_p().clone(), None, Some(hom.clone())),
                    "graded_aut with hom part",
                )?;
                for n1 in &ns {
                    for n2 in &ns {
                        if !lib(
                            crossed_condition_holds(data, &aut, n1, n2),
                            "crossed condition",
                        )? {
                            return Err(format!(
                                "crossed condition broken by a hom part in {name}"
                            ));
                        }
                    }
                }
                hom_variants += 1;
            }
        }
    }
    // ℤ-model crossed condition on the stated window
    let zm = HeisenbergData::integer_model();
    let z = CyclicProduct::integer_line();
    for k in -3..=3i64 {
        let k_p = lib(AbHom::new(z.clone(), z.clone(), vec![vec![k]]), "k_p")?;
        let aut = lib(zm.graded_aut(k_p, None, None), "graded_aut")?;
        for a in -20..=20i64 {
            for b in -20..=20i64 {
                let n1 = lib(z.reduce(&[a]), "reduce")?;
                let n2 = lib(z.reduce(&[b]), "reduce")?;
                if !lib(
                    crossed_condition_holds(&zm, &aut, &n1, &n2),
                    "crossed condition",
                )? {
                    return Err(format!(
                        "ℤ-model crossed condition fails at k={k}, ({a},{b})"
                    ));
                }
                cocycle_checks += 1;
            }
        }
    }
    // acceptance boundary: the constructor accepts exactly the k_p with a
    // valid k_c, against the exhaustive generator-value search
    #[allow(clippy::type_complexity)]
    let shapes: &[(&[i64], &[i64], &[i64], &[&[i64]])] = &[
        (&[2], &[2], &[2], &[&[1]]),
        (&[2], &[4], &[4], &[&[2]]),
        (&[3], &[3], &[9], &[&[3]]),
        (&[4], &[4], &[4], &[&[1]]),
        (&[2, 2], &[2], &[4], &[&[2], &[2]]),
        (&[2, 2], &[2, 2], &[2], &[&[1, 0], &[0, 1]]),
    ];
    let mut boundary_checks = 0u64;
    let mut accepted = 0u64;
    for &(nm, pm, cm, pairing_rows) in shapes {
        let n_group = lib(CyclicProduct::new(nm.to_vec()), "group")?;
        let p_group = lib(CyclicProduct::new(pm.to_vec()), "group")?;
        let c_group = lib(CyclicProduct::new(cm.to_vec()), "group")?;
        let pairing = pairing_rows
            .iter()
            .map(|row| {
                row.chunks(c_group.rank())
                    .map(|v| c_group.reduce(v))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| format!("pairing: {e}"))?;
        let data = lib(
            HeisenbergData::new(n_group.clone(), p_group.clone(), c_group, pairing),
            "data",
        )?;
        for k_p in lib(all_homs(&n_group, &p_group), "homs")? {
            let built = data.graded_aut(k_p.clone(), None, None).is_ok();
            let searched = lib(kc_exists_by_search(&data, &k_p), "search")?;
            if built != searched {
                return Err(format!(
                    "constructor/search disagreement on N={nm:?}, P={pm:?}, k_p={:?}",
                    k_p.matrix()
                ));
            }
            boundary_checks += 1;
            if built {
                accepted += 1;
            }
        }
    }
    // the shipped rejection spec must fail with a no-graded-extension error
    match crate::docs::Model::parse_json(catalog::NO_EXTENSION_JSON) {
        Err(crate::error::Error::NoGradedExtension(_)) => {}
        other => {
            return Err(format!(
                "rejection catalog spec was not rejected correctly: {other:?}"
            ))
        }
    }
    // the canonical ℤ-model k_c matches the recurrence iteration on [-20, 20]
    for k in [-3i64, -1, 1, 2, 3] {
        let k_p = lib(AbHom::new(z.clone(), z.clone(), vec![vec![k]]), "k_p")?;
        let aut = lib(zm.graded_aut(k_p, None, None), "graded_aut")?;
        let kc = |n: i64| -> CR<i64> {
            Ok(lib(aut.kc_eval(&z.reduce(&[n]).unwrap()), "kc")?.coords()[0])
        };
        let kc1 = kc(1)?;
        let mut up = 0i64;
        for n in 0..20i64 {
            up = up + kc1 + n * k;
            if kc(n + 1)? != up {
                return Err(format!("k_c iteration mismatch at k={k}, n={}", n + 1));
            }
        }
        let mut down = 0i64;
        for n in 0..20i64 {
            let m = -n;
            down = down - kc1 - (m - 1) * k;
            if kc(m - 1)? != down {
                return Err(format!("k_c iteration mismatch at k={k}, n={}", m - 1));
            }
        }
    }
    Ok(format!(
        "{cocycle_checks} crossed-condition/symmetry checks, {hom_variants} hom-part variants, {boundary_checks} constructor-vs-search homs ({accepted} accepted), rejection spec verified"
    ))
}

// criterion 4 ---------------------------------------------------------

fn fiber_contexts(g: &ExtGroup) -> Result<Vec<ConjContext>> {
    let mut out = Vec::new();
    for n in g.heis().n_group().enumerate()? {
        for k in g.kgroup().group().enumerate()? {
            out.push(ConjContext::new(g, &n, &k)?);
        }
    }
    Ok(out)
}

fn neg_set(ctx: &ConjContext, s: &BTreeSet<AbElement>) -> Result<BTreeSet<AbElement>> {
    s.iter()
        .map(|v| ctx.im_n().coset_canonical(&v.neg()?))
        .collect()
}

fn sum_sets(
    ctx: &ConjContext,
    a: &BTreeSet<AbElement>,
    b: &BTreeSet<AbElement>,
) -> Result<BTreeSet<AbElement>> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(ctx.im_n().coset_canonical(&x.add(y)?)?);
        }
    }
    Ok(out)
}

fn coset_laws_on_fiber(ctx: &ConjContext) -> CR<u64> {
    let records = lib(ctx.fiber_records(), "fiber records")?;
    let mut by_r: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, (_, rec)) in records.iter().enumerate() {
        by_r.entry(rec.r.coords().to_vec()).or_default().push(i);
    }
    let mut checks = 0u64;
    for indices in by_r.values() {
        let xs: Vec<&ExtElement> = indices.iter().map(|&i| &records[i].0).collect();
        // V computed from every element of the class must coincide and be a
        // subgroup (0, closure under + and −)
        let v0 = lib(ctx.defect_value_set(xs[0]), "defect_value_set")?;
        for x in &xs {
            if lib(ctx.defect_value_set(x), "defect_value_set")? != v0 {
                return Err("V depends on the chosen element".into());
            }
        }
        if !v0.contains(&lib(
            ctx.im_n().coset_canonical(&xs[0].c.parent().zero()),
            "zero",
        )?) {
            return Err("0 is missing from V".into());
        }
        if lib(sum_sets(ctx, &v0, &v0), "sum")? != v0 || lib(neg_set(ctx, &v0), "neg")? != v0 {
            return Err("V is not closed under the group operations".into());
        }
        // pairwise V sets
        let m = xs.len();
        let mut pair_cosets: Vec<BTreeSet<AbElement>> = Vec::with_capacity(m * m);
        for x1 in &xs {
            for x2 in &xs {
                pair_cosets.push(lib(ctx.defect_coset(x1, x2), "defect coset")?);
            }
        }
        for i in 0..m {
            for j in 0..m {
                let vij = &pair_cosets[i * m + j];
                // antisymmetry: V_ij = −V_ji
                if *vij != lib(neg_set(ctx, &pair_cosets[j * m + i]), "neg")? {
                    return Err("defect-coset antisymmetry fails".into());
                }
                // each V_ij is a single coset of V
                if vij.len() != v0.len() {
                    return Err("|V_ij| != |V|".into());
                }
                let pick = vij.iter().next().expect("nonempty");
                let shifted: BTreeSet<AbElement> = v0
                    .iter()
                    .map(|w| ctx.im_n().coset_canonical(&pick.add(w).unwrap()))
                    .collect::<Result<_>>()
                    .map_err(|e| format!("shift: {e}"))?;
                if shifted != *vij {
                    return Err("V_ij is not a coset of V".into());
                }
                checks += 1;
            }
        }
        // cocycle law: V_ij + V_jl = V_il
        for i in 0..m {
            for j in 0..m {
                for l in 0..m {
                    if lib(
                        sum_sets(ctx, &pair_cosets[i * m + j], &pair_cosets[j * m + l]),
                        "sum",
                    )? != pair_cosets[i * m + l]
                    {
                        return Err("defect-coset cocycle law fails".into());
                    }
                    checks += 1;
                }
            }
        }
    }
    Ok(checks)
}

fn criterion_full_system(cfg: &SelftestConfig) -> CR<String> {
    let mut compared = 0usize;
    let mut coset_checks = 0u64;
    let mut class_counts: Vec<String> = Vec::new();
    for (name, g) in instances(cfg)? {
        let order = lib(g.order(), "order")?.unwrap_or(u128::MAX);
        if order > 5000 {
            continue;
        }
        let elems = lib(g.enumerate(), "enumerate")?;
        let index: BTreeMap<&ExtElement, usize> = elems.iter().zip(0..).collect();
        let oracle_labels = lib(conjugacy_partition(&g, 5000), "oracle partition")?;
        let mut inv_labels: Vec<Option<Vec<i64>>> = vec![None; elems.len()];
        let contexts = lib(fiber_contexts(&g), "contexts")?;
        type FiberOutcome = (Vec<(usize, Vec<i64>)>, u64);
        let fiber_results: Vec<CR<FiberOutcome>> = contexts
            .par_iter()
            .map(|ctx| {
                let records = lib(ctx.fiber_records(), "fiber records")?;
                let mut labels = Vec::with_capacity(records.len());
                for (x, rec) in &records {
                    let Some(&i) = index.get(x) else {
                        return Err("fiber element missing from enumeration".into());
                    };
                    labels.push((i, rec.label()));
                }
                let checks = coset_laws_on_fiber(ctx)?;
                Ok((labels, checks))
            })
            .collect();
        for r in fiber_results {
            let (labels, checks) = r?;
            coset_checks += checks;
            for (i, l) in labels {
                inv_labels[i] = Some(l);
            }
        }
        let inv_labels: Vec<Vec<i64>> = inv_labels
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or("some element received no invariant label")?;
        let report = partition_compare(&inv_labels, &oracle_labels);
        if !report.equal {
            let m = report.first_mismatch.expect("mismatch");
            return Err(format!(
                "{name}: partitions differ at pair ({}, {}): invariants say {}, orbits say {} (labels {:?} / {:?}, orbit ids {} / {})",
                m.i, m.j, m.same_in_a, m.same_in_b,
                inv_labels[m.i], inv_labels[m.j],
                oracle_labels[m.i], oracle_labels[m.j]
            ));
        }
        compared += 1;
        class_counts.push(format!(
            "{name}: {} classes over {} elements",
            report.classes_a, report.elements
        ));
    }
    Ok(format!(
        "partition equality on {compared} instances ({}), {coset_checks} coset-lemma checks",
        class_counts.join("; ")
    ))
}

// criterion 5 ---------------------------------------------------------

fn doubled_defect_identity(ctx: &ConjContext, xs: &[&ExtElement]) -> CR<u64> {
    // the doubled defect coset must equal {2c₁ − 2c₂ + (k̃_p⁻¹(p₁−p₂))(p₁+p₂)} mod Im n
    let g = ctx.group();
    let heis = g.heis();
    let kn_gens: Vec<AbElement> = g
        .kgroup()
        .generator_auts()
        .iter()
        .map(|a| a.k_p().apply(ctx.fixed_n()))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| format!("K(n): {e}"))?;
    let kn = lib(
        Subgroup::from_generators(heis.p_group().clone(), kn_gens),
        "K(n)",
    )?;
    let k_aut = lib(g.aut_of(ctx.fixed_k()), "aut")?;
    let mut checks = 0u64;
    for x1 in xs {
        for x2 in xs {
            let coset = lib(ctx.defect_coset(x1, x2), "defect coset")?;
            let doubled: BTreeSet<AbElement> = coset
                .iter()
                .map(|v| ctx.im_n().coset_canonical(&v.scale(2)?))
                .collect::<Result<_>>()
                .map_err(|e| format!("double: {e}"))?;
            let dp = lib(x1.p.sub(&x2.p), "dp")?;
            let base = lib(
                x1.c.scale(2).and_then(|a| a.sub(&x2.c.scale(2)?)),
                "2c1-2c2",
            )?;
            let psum = lib(x1.p.add(&x2.p), "p1+p2")?;
            let mut rhs = BTreeSet::new();
            for n2 in lib(heis.n_group().enumerate(), "enumerate")? {
                let img = lib(k_aut.k_p().apply(&n2), "k_p")?;
                if lib(kn.contains(&lib(img.sub(&dp), "sub")?), "contains")? {
                    let val = lib(
                        base.add(&lib(heis.pairing_apply(&n2, &psum), "pairing")?),
                        "value",
                    )?;
                    rhs.insert(lib(ctx.im_n().coset_canonical(&val), "reduce")?);
                }
            }
            if doubled != rhs {
                return Err(format!(
                    "doubled defect-coset identity fails at p1={:?}, p2={:?}",
                    x1.p.coords(),
                    x2.p.coords()
                ));
            }
            checks += 1;
        }
    }
    Ok(checks)
}

fn criterion_odd_case(cfg: &SelftestConfig) -> CR<String> {
    let mut applicable = 0usize;
    let mut inapplicable = 0usize;
    let mut surjective_fibers = 0usize;
    let mut fallback_fibers = 0usize;
    let mut doubled_checks = 0u64;
    for (name, g) in instances(cfg)? {
        let order = lib(g.order(), "order")?.unwrap_or(u128::MAX);
        if order > 5000 {
            continue;
        }
        for ctx in lib(fiber_contexts(&g), "contexts")? {
            let records = lib(ctx.fiber_records(), "fiber records")?;
            let first = &records[0].0;
            match ctx.odd_case_invariants(first) {
                Err(crate::error::Error::OddCaseInapplicable(_)) => {
                    inapplicable += 1;
                    continue;
                }
                Err(e) => return Err(format!("{name}: odd case errored: {e}")),
                Ok(out) => {
                    if out.surjective {
                        surjective_fibers += 1;
                    } else {
                        fallback_fibers += 1;
                    }
                }
            }
            applicable += 1;
            // the odd-case labels must induce the same partition as the
            // general records
            let mut odd_labels = Vec::with_capacity(records.len());
            let mut gen_labels = Vec::with_capacity(records.len());
            for (x, rec) in &records {
                let out = lib(ctx.odd_case_invariants(x), "odd case")?;
                odd_labels.push(out.payload.label());
                gen_labels.push(rec.label());
            }
            let report = partition_compare(&odd_labels, &gen_labels);
            if !report.equal {
                let m = report.first_mismatch.expect("mismatch");
                return Err(format!(
                    "{name}: odd-case partition differs from the general one at pair ({}, {})",
                    m.i, m.j
                ));
            }
            // the doubled-coset identity of the odd-order case, per R-class
            let mut by_r: BTreeMap<Vec<i64>, Vec<&ExtElement>> = BTreeMap::new();
            for (x, rec) in &records {
                by_r.entry(rec.r.coords().to_vec()).or_default().push(x);
            }
            for xs in by_r.values() {
                doubled_checks += doubled_defect_identity(&ctx, xs)?;
            }
        }
    }
    if applicable == 0 {
        return Err("no catalog fiber satisfies the odd-order hypotheses".into());
    }
    Ok(format!(
        "{applicable} applicable fibers agree with the general system ({surjective_fibers} fast-path, {fallback_fibers} fallback), {inapplicable} fibers correctly gated, {doubled_checks} doubled-coset identities"
    ))
}

// criterion 6 ---------------------------------------------------------

fn criterion_integer_model(cfg: &SelftestConfig) -> CR<String> {
    let mut pairs: Vec<(i64, i64)> = Vec::new();
    for n in 1..=cfg.z_n_max {
        for k in 0..=cfg.z_k_max {
            pairs.push((n, k));
        }
    }
    let per_pair: Vec<CR<(u64, u64, u64, u64)>> = pairs
        .par_iter()
        .map(|&(n, k)| {
            let mut decided = 0u64;
            let mut naive_checked = 0u64;
            let mut even_pairs = 0u64;
            let mut audit_disagreements = 0u64;
            let r = cfg.z_coord;
            for p1 in -r..=r {
                for c1 in -r..=r {
                    let x1 = ZExtElement::new(p1, c1, n, k);
                    for p2 in -r..=r {
                        for c2 in -r..=r {
                            let x2 = ZExtElement::new(p2, c2, n, k);
                            let fast = lib(is_conjugate_z(&x1, &x2), "decision")?;
                            let slow = lib(oracle_z(&x1, &x2), "oracle")?;
                            if fast.conjugate != slow.conjugate {
                                return Err(format!(
                                    "decision vs oracle mismatch at {x1:?} ~ {x2:?}"
                                ));
                            }
                            decided += 1;
                            let naive =
                                lib(oracle_z_naive(&x1, &x2, cfg.naive_window), "naive scan")?;
                            if naive.conjugate != slow.conjugate {
                                return Err(format!("sweep-period violation at {x1:?} ~ {x2:?}"));
                            }
                            naive_checked += 1;
                            if n % 2 != 0 {
                                // the odd record is a proven full system
                                let same = lib(odd_invariants(&x1), "record")?
                                    == lib(odd_invariants(&x2), "record")?;
                                if same != fast.conjugate {
                                    return Err(format!(
                                        "odd record is not a full invariant at {x1:?} ~ {x2:?}"
                                    ));
                                }
                            } else {
                                // whether the unordered I/J sets alone form a
                                // full system is audited and reported, never
                                // asserted
                                even_pairs += 1;
                                let e1 = lib(even_invariants(&x1), "record")?;
                                let e2 = lib(even_invariants(&x2), "record")?;
                                if even_records_match(&e1, &e2) != fast.conjugate {
                                    audit_disagreements += 1;
                                }
                            }
                        }
                    }
                }
            }
            Ok((decided, naive_checked, even_pairs, audit_disagreements))
        })
        .collect();
    let mut decided = 0u64;
    let mut naive_checked = 0u64;
    let mut even_pairs = 0u64;
    let mut audit_disagreements = 0u64;
    for r in per_pair {
        let (d, nv, ep, ad) = r?;
        decided += d;
        naive_checked += nv;
        even_pairs += ep;
        audit_disagreements += ad;
    }
    // conjugation invariance of the records on random pairs
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xa6a6);
    let odd_ns = [1i64, 3, 5, -1, -3, -5];
    let even_ns = [2i64, 4, 6, -2, -4, -6];
    for i in 0..cfg.invariance_samples {
        let n = odd_ns[(i % odd_ns.len() as u64) as usize];
        let x = ZExtElement::new(
            rng.random_range(-6..=6),
            rng.random_range(-6..=6),
            n,
            rng.random_range(-6..=6),
        );
        let g = ZExtElement::new(
            rng.random_range(-6..=6),
            rng.random_range(-6..=6),
            rng.random_range(-6..=6),
            rng.random_range(-6..=6),
        );
        let y = lib(x.conjugate_by(&g), "conjugate")?;
        if lib(odd_invariants(&x), "odd record")? != lib(odd_invariants(&y), "odd record")? {
            return Err(format!("odd payload not invariant: x={x:?} g={g:?}"));
        }
    }
    for i in 0..cfg.invariance_samples {
        let n = even_ns[(i % even_ns.len() as u64) as usize];
        let x = ZExtElement::new(
            rng.random_range(-6..=6),
            rng.random_range(-6..=6),
            n,
            rng.random_range(-6..=6),
        );
        let g = ZExtElement::new(
            rng.random_range(-6..=6),
            rng.random_range(-6..=6),
            rng.random_range(-6..=6),
            rng.random_range(-6..=6),
        );
        let y = lib(x.conjugate_by(&g), "conjugate")?;
        let rx = lib(even_invariants(&x), "even record")?;
        let ry = lib(even_invariants(&y), "even record")?;
        let (
            ZInvariantRecord::Even {
                i1: a1,
                i2: a2,
                j1: b1,
                j2: b2,
                ..
            },
            ZInvariantRecord::Even {
                i1: c1,
                i2: c2,
                j1: d1,
                j2: d2,
                ..
            },
        ) = (rx, ry)
        else {
            return Err("even record expected".into());
        };
        let mut ia = [a1, a2];
        ia.sort_unstable();
        let mut ib = [c1, c2];
        ib.sort_unstable();
        let mut ja = [b1, b2];
        ja.sort_unstable();
        let mut jb = [d1, d2];
        jb.sort_unstable();
        if ia != ib || ja != jb {
            return Err(format!("even I/J sets not invariant: x={x:?} g={g:?}"));
        }
    }
    Ok(format!(
        "{decided} exhaustive decisions agree with the parametric oracle, {naive_checked} agree with the naive scan (window {}), {}+{} random invariance checks; even-record set-equality audit: {audit_disagreements} disagreements on {even_pairs} pairs",
        cfg.naive_window, cfg.invariance_samples, cfg.invariance_samples
    ))
}

/// Set-level comparison of two even records: equal `{I₁,I₂}` and `{J₁,J₂}`
/// over matching moduli.
fn even_records_match(a: &ZInvariantRecord, b: &ZInvariantRecord) -> bool {
    let (
        ZInvariantRecord::Even {
            g: g1,
            i1: a1,
            i2: a2,
            j1: b1,
            j2: b2,
            j_modulus: m1,
            ..
        },
        ZInvariantRecord::Even {
            g: g2,
            i1: c1,
            i2: c2,
            j1: d1,
            j2: d2,
            j_modulus: m2,
            ..
        },
    ) = (a, b)
    else {
        return false;
    };
    if g1 != g2 || m1 != m2 {
        return false;
    }
    let mut ia = [a1, a2];
    ia.sort_unstable();
    let mut ib = [c1, c2];
    ib.sort_unstable();
    let mut ja = [b1, b2];
    ja.sort_unstable();
    let mut jb = [d1, d2];
    jb.sort_unstable();
    ia == ib && ja == jb
}

// criterion 7 ---------------------------------------------------------

fn criterion_polarization(cfg: &SelftestConfig) -> CR<String> {
    let mut checks = 0u64;
    for (name, g) in instances(cfg)? {
        let data = g.heis();
        let ns: Vec<AbElement> = lib(data.n_group().enumerate(), "enumerate")?.collect();
        for k in lib(g.kgroup().group().enumerate(), "enumerate")? {
            let aut = lib(g.aut_of(&k), "aut")?;
            let phi = |n: &AbElement| -> Result<AbElement> {
                aut.kc_eval(n)?
                    .scale(2)?
                    .sub(&data.pairing_apply(n, &aut.k_p().apply(n)?)?)
            };
            for n1 in &ns {
                for n2 in &ns {
                    let lhs = lib(phi(&lib(n1.add(n2), "add")?), "phi")?;
                    let rhs = lib(lib(phi(n1), "phi")?.add(&lib(phi(n2), "phi")?), "add")?;
                    if lhs != rhs {
                        return Err(format!("polarization not additive in {name}"));
                    }
                    checks += 1;
                }
            }
        }
    }
    // ℤ-model: φ_k(n) = −kn for the canonical action
    let zm = HeisenbergData::integer_model();
    let z = CyclicProduct::integer_line();
    for k in -3..=3i64 {
        let k_p = lib(AbHom::new(z.clone(), z.clone(), vec![vec![k]]), "k_p")?;
        let aut = lib(zm.graded_aut(k_p, None, None), "aut")?;
        let phi = |n: i64| -> CR<i64> {
            let ne = lib(z.reduce(&[n]), "reduce")?;
            let v = lib(
                aut.kc_eval(&ne)
                    .and_then(|x| x.scale(2))
                    .and_then(|x| x.sub(&zm.pairing_apply(&ne, &aut.k_p().apply(&ne)?)?)),
                "phi",
            )?;
            Ok(v.coords()[0])
        };
        for n in -20..=20i64 {
            if phi(n)? != -k * n {
                return Err(format!("ℤ-model polarization is not −kn at k={k}, n={n}"));
            }
            for m in -20..=20i64 {
                if phi(n + m)? != phi(n)? + phi(m)? {
                    return Err(format!("ℤ-model polarization not additive at k={k}"));
                }
                checks += 1;
            }
        }
    }
    Ok(format!(
        "{checks} additivity checks, ℤ-model closed form verified"
    ))
}
