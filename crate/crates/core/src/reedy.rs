//! The `(A₋, A₊)` generalized Reedy structure of sites without diagonals.
//!
//! `A₋` is generated by projections, connections, symmetries and reversals;
//! `A₊` by faces, symmetries and reversals. In a site without diagonals these
//! are exactly the surjective and the injective site maps, which
//! [`verify_reedy_axioms`] checks against the generated subcategories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{classify_map, compose, CubeMap};
use crate::error::{Error, Result};
use crate::report::{Check, Witness};
use crate::sites::{enumerate_generated, GeneratorClass, HomSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MorphismClass {
    /// Degeneracy: surjective, not injective.
    Minus,
    /// Face-class map: injective, not surjective.
    Plus,
    Iso,
    Mixed,
}

impl MorphismClass {
    pub fn in_minus(self) -> bool {
        matches!(self, MorphismClass::Minus | MorphismClass::Iso)
    }

    pub fn in_plus(self) -> bool {
        matches!(self, MorphismClass::Plus | MorphismClass::Iso)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    /// The degeneracy part, in `A₋`.
    pub q: CubeMap,
    /// The face part, in `A₊`.
    pub i: CubeMap,
}

pub(crate) fn require_member(src: &dyn HomSource, f: &CubeMap) -> Result<()> {
    if src.contains(f)? {
        Ok(())
    } else {
        Err(Error::NotAMember { map: f.to_string(), site: src.config().to_string() })
    }
}

pub(crate) fn require_non_diagonal(src: &dyn HomSource) -> Result<()> {
    let cfg = src.config();
    if cfg.diagonals {
        Err(Error::DiagonalSite(cfg.to_string()))
    } else {
        Ok(())
    }
}

/// Class of a site map by shape. Since every map factors as `i ∘ q`, a
/// surjective map has `i` an iso and an injective one has `q` an iso.
pub fn classify(src: &dyn HomSource, f: &CubeMap) -> Result<MorphismClass> {
    require_non_diagonal(src)?;
    require_member(src, f)?;
    Ok(shape_class(f))
}

pub(crate) fn shape_class(f: &CubeMap) -> MorphismClass {
    let s = classify_map(f);
    match (s.surjective, s.injective) {
        (true, true) => MorphismClass::Iso,
        (true, false) => MorphismClass::Minus,
        (false, true) => MorphismClass::Plus,
        (false, false) => MorphismClass::Mixed,
    }
}

/// The image of a site map is a face of the codomain. `i` includes that face
/// and `q` is `f` with its constant output coordinates deleted.
pub fn factorize(src: &dyn HomSource, f: &CubeMap) -> Result<Factorization> {
    require_non_diagonal(src)?;
    require_member(src, f)?;
    let (q, i) = face_factorization(f)?;
    for (part, name) in [(&q, "degeneracy part"), (&i, "face part")] {
        if !src.contains(part)? {
            return Err(Error::Internal(format!("{name} {part} of {f} is not a site map")));
        }
    }
    Ok(Factorization { q, i })
}

/// The factorization through the smallest face containing the image, without
/// any membership checks.
pub(crate) fn face_factorization(f: &CubeMap) -> Result<(CubeMap, CubeMap)> {
    let free: Vec<usize> = (1..=f.cod()).filter(|&i| !f.coord_is_constant(i)).collect();
    let base = f.apply(0);
    let k = free.len();
    let q = CubeMap::from_fn(f.dom(), k, |v| {
        let w = f.apply(v);
        free.iter().enumerate().fold(0u32, |acc, (pos, &i)| acc | (((w >> (i - 1)) & 1) << pos))
    });
    if !classify_map(&q).surjective {
        return Err(Error::Internal(format!("image of {f} is not a face of □{}", f.cod())));
    }
    let fixed = free.iter().fold(base, |acc, &i| acc & !(1 << (i - 1)));
    let i = CubeMap::from_fn(k, f.cod(), |u| {
        free.iter().enumerate().fold(fixed, |acc, (pos, &i)| acc | (((u >> pos) & 1) << (i - 1)))
    });
    Ok((q, i))
}

/// First section of `f` in vertex-table order, if any.
pub fn find_section(src: &dyn HomSource, f: &CubeMap) -> Result<Option<CubeMap>> {
    require_member(src, f)?;
    if !classify_map(f).surjective {
        return Ok(None);
    }
    let candidates = src.homs(f.cod(), f.dom())?;
    Ok(candidates.all.iter().find(|s| compose(f, s).expect("dims match").is_identity()).cloned())
}

/// Extends `g` along the surjection `q`: the unique `h` with `h ∘ q = g`, if
/// `g` is constant on the fibres of `q`.
pub(crate) fn descend(q: &CubeMap, g: &CubeMap, cod: usize) -> Option<CubeMap> {
    let mut table = vec![u32::MAX; 1 << q.cod()];
    for v in 0..(1u32 << q.dom()) {
        let slot = &mut table[q.apply(v) as usize];
        let w = g.apply(v);
        if *slot == u32::MAX {
            *slot = w;
        } else if *slot != w {
            return None;
        }
    }
    if table.contains(&u32::MAX) {
        return None;
    }
    CubeMap::new(q.cod(), cod, table).ok()
}

/// All `(q, i)` with `q ∈ A₋`, `i ∈ A₊` and `i ∘ q = f`, through cubes of
/// dimension at most `max_dim`.
pub fn all_factorizations(src: &dyn HomSource, f: &CubeMap, max_dim: usize) -> Result<Vec<Factorization>> {
    let mut out = Vec::new();
    for j in 0..=max_dim.min(f.dom()) {
        let minus = src.homs(f.dom(), j)?;
        let plus = src.homs(j, f.cod())?;
        for q in &minus.minus {
            if let Some(i) = descend(q, f, f.cod()) {
                if plus.plus.binary_search(&i).is_ok() {
                    out.push(Factorization { q: q.clone(), i });
                }
            }
        }
    }
    Ok(out)
}

fn map_repro(cmd: &str, cfg: &str, f: &CubeMap) -> String {
    format!("cubeforge {cmd} --site {cfg} --map '{f}'")
}

/// Factorization existence and uniqueness up to unique iso, strict degree
/// monotonicity, closure of both classes under composition, and agreement of
/// the classes with their generated subcategories, for all dims `≤ max_dim`.
pub fn verify_reedy_axioms(src: &dyn HomSource, max_dim: usize) -> Result<Check> {
    require_non_diagonal(src)?;
    let cfg = src.config();
    let site = cfg.to_string();
    let dims: Vec<(usize, usize)> =
        (0..=max_dim).flat_map(|n| (0..=max_dim).map(move |m| (n, m))).collect();
    // warm the cache sequentially so the parallel sweep only reads
    for &(n, m) in &dims {
        src.homs(n, m)?;
    }
    let isos: Vec<Vec<CubeMap>> = (0..=max_dim).map(|n| src.isos(n)).collect::<Result<_>>()?;

    let parts: Vec<Check> = dims
        .par_iter()
        .map(|&(n, m)| -> Result<Check> {
            let mut c = Check::new("reedy-axioms");
            let homs = src.homs(n, m)?;

            // generated classes agree with the shape classes
            let generated_minus = enumerate_generated(&cfg, GeneratorClass::Degeneracies, n, m)?;
            if generated_minus != homs.minus {
                c.violation(Witness::new(format!(
                    "A₋(□{n},□{m}) generated by degeneracy generators has {} maps, surjective site maps {}",
                    generated_minus.len(),
                    homs.minus.len()
                )));
            }
            let generated_plus = enumerate_generated(&cfg, GeneratorClass::Faces, n, m)?;
            if generated_plus != homs.plus {
                c.violation(Witness::new(format!(
                    "A₊(□{n},□{m}) generated by face generators has {} maps, injective site maps {}",
                    generated_plus.len(),
                    homs.plus.len()
                )));
            }

            for f in &homs.all {
                c.examined += 1;
                let fs = all_factorizations(src, f, max_dim)?;
                let Some(first) = fs.first() else {
                    c.violation(
                        Witness::new("no (A₋, A₊) factorization")
                            .with_maps([f])
                            .with_repro(map_repro("factor", &site, f)),
                    );
                    continue;
                };
                for other in &fs[1..] {
                    let j = first.q.cod();
                    if other.q.cod() != j {
                        c.violation(
                            Witness::new("two factorizations through cubes of different dimension")
                                .with_maps([f, &first.q, &other.q]),
                        );
                        continue;
                    }
                    let linking = isos[j]
                        .iter()
                        .filter(|phi| {
                            compose(phi, &first.q).expect("dims") == other.q
                                && compose(&other.i, phi).expect("dims") == first.i
                        })
                        .count();
                    if linking != 1 {
                        c.violation(
                            Witness::new(format!("{linking} isomorphisms relate two factorizations"))
                                .with_maps([f, &first.q, &first.i, &other.q, &other.i]),
                        );
                    }
                }
            }

            for q in &homs.minus {
                if !classify_map(q).iso && m >= n {
                    c.violation(Witness::new("non-iso degeneracy does not lower degree").with_maps([q]));
                }
            }
            for i in &homs.plus {
                if !classify_map(i).iso && m <= n {
                    c.violation(Witness::new("non-iso face map does not raise degree").with_maps([i]));
                }
            }
            for k in 0..=max_dim {
                let next = src.homs(m, k)?;
                let target = src.homs(n, k)?;
                for q1 in &homs.minus {
                    for q2 in &next.minus {
                        let q = compose(q2, q1)?;
                        if target.minus.binary_search(&q).is_err() {
                            c.violation(Witness::new("A₋ not closed under composition").with_maps([q1, q2]));
                        }
                    }
                }
                for i1 in &homs.plus {
                    for i2 in &next.plus {
                        let i = compose(i2, i1)?;
                        if target.plus.binary_search(&i).is_err() {
                            c.violation(Witness::new("A₊ not closed under composition").with_maps([i1, i2]));
                        }
                    }
                }
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;

    let mut check = Check::new("reedy-axioms").for_site(&site);
    for p in parts {
        check.merge(p);
    }
    let summary = format!("{} morphisms with dims ≤ {max_dim}, {} violations", check.examined, check.violations);
    Ok(check.finish(true, summary))
}

/// Outcome of searching splittings for every idempotent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdempotentSurvey {
    pub idempotents: usize,
    pub split: usize,
    /// Idempotents with no splitting through any cube of dim `≤ max_dim`.
    pub nonsplit: Vec<CubeMap>,
}

/// A splitting `e = s ∘ r`, `r ∘ s = id`, through a cube of dim `≤ max_dim`.
pub fn split_idempotent(src: &dyn HomSource, e: &CubeMap, max_dim: usize) -> Result<Option<(CubeMap, CubeMap)>> {
    let image = {
        let mut t = e.table().to_vec();
        t.sort_unstable();
        t.dedup();
        t.len()
    };
    if !image.is_power_of_two() {
        return Ok(None);
    }
    let k = image.trailing_zeros() as usize;
    if k > max_dim {
        return Ok(None);
    }
    let n = e.dom();
    let back = src.homs(k, n)?;
    for r in &src.homs(n, k)?.minus {
        if let Some(s) = descend(r, e, n) {
            if back.contains(&s) && compose(r, &s)?.is_identity() {
                return Ok(Some((r.clone(), s)));
            }
        }
    }
    Ok(None)
}

pub fn survey_idempotents(src: &dyn HomSource, max_dim: usize) -> Result<IdempotentSurvey> {
    let mut survey = IdempotentSurvey { idempotents: 0, split: 0, nonsplit: Vec::new() };
    for n in 0..=max_dim {
        for e in &src.homs(n, n)?.all {
            if compose(e, e)? != *e {
                continue;
            }
            survey.idempotents += 1;
            match split_idempotent(src, e, max_dim)? {
                Some(_) => survey.split += 1,
                None => survey.nonsplit.push(e.clone()),
            }
        }
    }
    Ok(survey)
}

/// Every idempotent splits for sites without diagonals and for `ds`, `dsr`;
/// the remaining diagonal sites are expected to have non-split idempotents,
/// which are then reported as notes.
pub fn verify_idempotents_split(src: &dyn HomSource, max_dim: usize) -> Result<Check> {
    let cfg = src.config();
    let survey = survey_idempotents(src, max_dim)?;
    let expect_split = !cfg.diagonals || cfg.connections == crate::sites::Connections::None;
    let mut c = Check::new("idempotents").for_site(cfg);
    c.examined = survey.idempotents as u64;
    if expect_split {
        for e in &survey.nonsplit {
            c.violation(
                Witness::new("idempotent does not split")
                    .with_maps([e])
                    .with_repro(format!("cubeforge idempotents --site {cfg} --max-dim {max_dim}")),
            );
        }
    } else {
        if survey.nonsplit.is_empty() {
            c.violation(Witness::new("expected a non-split idempotent, found none"));
        }
        for e in &survey.nonsplit {
            c.note(Witness::new("non-split idempotent").with_maps([e]));
        }
    }
    let summary = format!(
        "{} idempotents on cubes of dim ≤ {max_dim}, {} split, {} do not",
        survey.idempotents,
        survey.split,
        survey.nonsplit.len()
    );
    Ok(c.finish(expect_split, summary))
}

/// Maps in `A₊` are monomorphisms of the site: post-composition with them is
/// injective on `Hom(□ᵏ, □ⁿ)` for every `k ≤ max_dim`.
pub fn plus_monomorphism_check(src: &dyn HomSource, max_dim: usize) -> Result<Check> {
    require_non_diagonal(src)?;
    let cfg = src.config();
    let mut c = Check::new("plus-monomorphisms").for_site(cfg);
    for n in 0..=max_dim {
        for m in n..=max_dim {
            for f in &src.homs(n, m)?.plus {
                c.examined += 1;
                for k in 0..=max_dim {
                    let homs = src.homs(k, n)?;
                    let mut images: Vec<CubeMap> = homs.all.iter().map(|g| compose(f, g)).collect::<Result<_>>()?;
                    images.sort();
                    images.dedup();
                    if images.len() != homs.all.len() {
                        c.violation(
                            Witness::new(format!("not left-cancellable against maps out of □{k}"))
                                .with_maps([f])
                                .with_repro(map_repro("classify", &cfg.to_string(), f)),
                        );
                    }
                }
            }
        }
    }
    let summary = format!("{} maps of A₊ with dims ≤ {max_dim} are monomorphisms", c.examined);
    Ok(c.finish(true, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sites::{PatchedSite, Site};
    use crate::words::{evaluate, parse};

    fn site(s: &str) -> Site {
        Site::new(s.parse().unwrap()).unwrap()
    }

    fn eval(text: &str, dom: usize) -> CubeMap {
        evaluate(&parse(text, dom).unwrap()).unwrap()
    }

    #[test]
    fn classification_examples() {
        let s = site("cs");
        assert_eq!(classify(&s, &eval("m1", 2)).unwrap(), MorphismClass::Minus);
        assert_eq!(classify(&s, &eval("d1-", 1)).unwrap(), MorphismClass::Plus);
        assert_eq!(classify(&s, &eval("d1+ . p1", 1)).unwrap(), MorphismClass::Mixed);
        assert_eq!(classify(&s, &eval("x1", 2)).unwrap(), MorphismClass::Iso);
        assert!(matches!(classify(&s, &eval("r1", 1)), Err(Error::NotAMember { .. })));
        assert!(matches!(classify(&site("dcs"), &eval("m1", 2)), Err(Error::DiagonalSite(_))));
    }

    #[test]
    fn factorization_examples() {
        let s = site("c");
        let f = factorize(&s, &eval("d1+ . p1", 1)).unwrap();
        assert_eq!((f.q, f.i), (eval("p1", 1), eval("d1+", 0)));
        let f = factorize(&s, &eval("m1", 2)).unwrap();
        assert_eq!((f.q, f.i), (eval("m1", 2), CubeMap::identity(1)));
        let g = eval("d2- . j1", 2);
        // recompute the composite independently: (x, y) ↦ (x ∨ y, 0)
        assert_eq!(g, CubeMap::from_fn(2, 2, |v| (v != 0) as u32));
        let f = factorize(&s, &g).unwrap();
        assert_eq!((f.q.clone(), f.i.clone()), (eval("j1", 2), eval("d2-", 1)));
        assert_eq!(compose(&f.i, &f.q).unwrap(), g);
    }

    #[test]
    fn section_examples() {
        let s = site("cs");
        assert_eq!(find_section(&s, &eval("p1", 1)).unwrap(), Some(eval("d1-", 0)));
        assert_eq!(find_section(&s, &eval("m1", 2)).unwrap(), Some(eval("d1+", 1)));
        assert_eq!(find_section(&s, &eval("d1-", 0)).unwrap(), None);
        // brute force over all 16 maps □¹ → □²: the sections of γ∧ in the site
        let sections: Vec<CubeMap> = (0..16u32)
            .map(|t| CubeMap::new(1, 2, vec![t & 3, t >> 2]).unwrap())
            .filter(|c| crate::sites::is_member(s.cfg(), c))
            .filter(|c| compose(&eval("m1", 2), c).unwrap().is_identity())
            .collect();
        assert_eq!(sections, vec![eval("d1+", 1), eval("d2+", 1)]);
    }

    #[test]
    fn reedy_axioms_hold_on_small_sites() {
        for cfg in ["plain", "csr", "cw"] {
            let c = verify_reedy_axioms(&site(cfg), 2).unwrap();
            assert!(c.status.is_pass(), "{cfg}: {:?}", c.witnesses);
        }
    }

    #[test]
    fn corrupted_hom_set_is_detected() {
        let s = site("plain");
        let patched = PatchedSite { inner: &s, removed: vec![eval("d1+", 1)], added: vec![] };
        let c = verify_reedy_axioms(&patched, 2).unwrap();
        assert!(!c.status.is_pass());
        assert!(c.violations > 0);
        let patched = PatchedSite { inner: &s, removed: vec![], added: vec![eval("c1", 1)] };
        let c = verify_reedy_axioms(&patched, 2).unwrap();
        assert!(!c.status.is_pass());
    }

    #[test]
    fn idempotent_examples() {
        let c = verify_idempotents_split(&site("cs"), 2).unwrap();
        assert!(c.status.is_pass() && c.notes.is_empty());
        let survey = survey_idempotents(&site("dcs"), 2).unwrap();
        // e(x, y) = (x, x ∧ y): image {00, 10, 11} is a 3-chain, so no cube splits it
        let e = CubeMap::from_fn(2, 2, |v| (v & 1) | ((v & 1) & (v >> 1)) << 1);
        assert_eq!(compose(&e, &e).unwrap(), e);
        assert!(survey.nonsplit.contains(&e));
        let id = CubeMap::identity(2);
        assert_eq!(split_idempotent(&site("dcs"), &id, 2).unwrap(), Some((id.clone(), id)));
    }
}
