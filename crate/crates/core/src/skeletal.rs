//! Dependency partitions, pseudo-sections and strong skeletality.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{classify_map, compose, dependency, CubeMap};
use crate::error::{Error, Result};
use crate::reedy::{require_member, require_non_diagonal};
use crate::report::{Check, Witness};
use crate::sites::HomSource;

/// Input variables of a degeneracy grouped by the output that reads them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyPartition {
    /// `parts[i - 1]` is the set of inputs output `i` depends on.
    pub parts: Vec<Vec<usize>>,
    pub trivial: Vec<usize>,
}

impl DependencyPartition {
    /// The parts as a set, forgetting which output each feeds.
    pub fn unordered(&self) -> Vec<Vec<usize>> {
        let mut parts = self.parts.clone();
        parts.sort();
        parts
    }

    /// Output fed by input `j`, if any.
    pub fn part_of(&self, j: usize) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(&j)).map(|i| i + 1)
    }
}

fn require_degeneracy(src: &dyn HomSource, p: &CubeMap) -> Result<()> {
    require_member(src, p)?;
    if classify_map(p).surjective {
        Ok(())
    } else {
        Err(Error::NotADegeneracy { map: p.to_string(), site: src.config().to_string() })
    }
}

pub fn dependency_partition(src: &dyn HomSource, p: &CubeMap) -> Result<DependencyPartition> {
    require_non_diagonal(src)?;
    require_degeneracy(src, p)?;
    partition_of(p)
}

pub(crate) fn partition_of(p: &CubeMap) -> Result<DependencyPartition> {
    let d = dependency(p);
    if !d.pairwise_disjoint() {
        return Err(Error::Internal(format!("dependency sets of {p} overlap")));
    }
    Ok(DependencyPartition { parts: d.sets.clone(), trivial: d.trivial() })
}

/// Injective site maps `ι: □ᵐ → □ⁿ` with `p ∘ ι` a site isomorphism, where
/// `p: □ⁿ → □ᵐ`. Sorted by vertex table.
pub fn pseudo_sections(src: &dyn HomSource, p: &CubeMap) -> Result<Vec<CubeMap>> {
    require_degeneracy(src, p)?;
    let isos = src.isos(p.cod())?;
    let candidates = src.homs(p.cod(), p.dom())?;
    Ok(candidates
        .plus
        .iter()
        .filter(|i| isos.binary_search(&compose(p, i).expect("dims match")).is_ok())
        .cloned()
        .collect())
}

/// Pseudo-sections found by scanning every site map into `dom p` from cubes
/// of dimension `≤ max_dim`, with no shape restriction.
pub fn pseudo_sections_unrestricted(src: &dyn HomSource, p: &CubeMap, max_dim: usize) -> Result<Vec<CubeMap>> {
    require_member(src, p)?;
    let mut out = Vec::new();
    for c in 0..=max_dim {
        for i in &src.homs(c, p.dom())?.all {
            if classify_map(&compose(p, i)?).iso && src.contains(&compose(p, i)?)? {
                out.push(i.clone());
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn is_pseudo_equal(src: &dyn HomSource, p: &CubeMap, q: &CubeMap) -> Result<bool> {
    if p.dom() != q.dom() {
        return Err(Error::DimensionMismatch { left: p.dom(), right: q.dom() });
    }
    if p.cod() != q.cod() {
        return Ok(false);
    }
    Ok(src.isos(p.cod())?.iter().any(|phi| compose(phi, p).expect("dims match") == *q))
}

fn nonconstant_outputs(i: &CubeMap) -> Vec<usize> {
    (1..=i.cod()).filter(|&j| !i.coord_is_constant(j)).collect()
}

/// Per-degeneracy checks: a section exists, the dependency sets partition the
/// inputs (ordered by output without symmetries), and the pseudo-sections
/// interact with the partition as they should.
fn check_degeneracy(src: &dyn HomSource, p: &CubeMap, ps: &[CubeMap]) -> Result<Check> {
    let cfg = src.config();
    let mut c = Check::new("strong-skeletality");
    c.examined = 1;
    let site = cfg.to_string();
    let repro = format!("cubeforge pseudo-sections --site {site} --map '{p}'");
    let fail = |c: &mut Check, what: String| {
        c.violation(Witness::new(what).with_maps([p]).with_repro(repro.clone()));
    };

    let part = match partition_of(p) {
        Ok(part) => part,
        Err(e) => {
            fail(&mut c, e.to_string());
            return Ok(c);
        }
    };
    if part.parts.iter().any(|s| s.is_empty()) {
        fail(&mut c, "degeneracy has a constant output".into());
    }
    if !cfg.symmetries && part.parts.windows(2).any(|w| w[0].last() > w[1].first()) {
        fail(&mut c, "dependency parts not ordered by output in a site without symmetries".into());
    }

    let sections: Vec<&CubeMap> = ps.iter().filter(|i| compose(p, i).expect("dims").is_identity()).collect();
    if sections.is_empty() {
        fail(&mut c, "degeneracy has no section".into());
    }
    for s in &sections {
        let js = nonconstant_outputs(s);
        let in_order = js.len() == p.cod() && js.iter().enumerate().all(|(k, &j)| part.parts[k].contains(&j));
        if in_order {
            continue;
        }
        let w = Witness::new(format!("section non-constant in outputs {js:?} against parts {:?}", part.parts))
            .with_maps([p, s]);
        // with symmetries a section may meet the parts in permuted order; the
        // permuted condition is checked on all pseudo-sections below
        if cfg.symmetries {
            c.note(w);
        } else {
            c.violation(w);
        }
    }
    for i in ps {
        let js = nonconstant_outputs(i);
        // the outputs of p fed by the non-constant directions of ι must be a permutation
        let mut fed: Vec<Option<usize>> = js.iter().map(|&j| part.part_of(j)).collect();
        let identity_order = fed.iter().enumerate().all(|(k, o)| *o == Some(k + 1));
        fed.sort();
        fed.dedup();
        let bijective = js.len() == p.cod() && fed.len() == p.cod() && fed.iter().all(Option::is_some);
        if !bijective || (!cfg.symmetries && !identity_order) {
            c.violation(
                Witness::new(format!("pseudo-section non-constant in {js:?} does not match parts {:?}", part.parts))
                    .with_maps([p, i]),
            );
        }
    }

    let moving = |j: usize| ps.iter().filter(move |i| !i.coord_is_constant(j));
    let n = p.dom();
    for j in 1..=n {
        match part.part_of(j) {
            None => {
                if let Some(i) = moving(j).next() {
                    c.violation(
                        Witness::new(format!("pseudo-section moves trivial input {j}")).with_maps([p, i]),
                    );
                }
            }
            Some(_) => {
                if moving(j).next().is_none() {
                    fail(&mut c, format!("no pseudo-section moves input {j}"));
                }
            }
        }
        for k in j + 1..=n {
            let (Some(a), Some(b)) = (part.part_of(j), part.part_of(k)) else { continue };
            let both = moving(j).find(|i| !i.coord_is_constant(k));
            match (a == b, both) {
                (true, Some(i)) => c.violation(
                    Witness::new(format!("pseudo-section moves codependent inputs {j} and {k}"))
                        .with_maps([p, i]),
                ),
                (false, None) => fail(&mut c, format!("no pseudo-section moves both {j} and {k}")),
                _ => {}
            }
        }
    }
    Ok(c)
}

/// Degeneracies out of `□ⁿ` with equal pseudo-section sets are pseudo-equal,
/// and have the same dependency partition, for every `n ≤ max_dim`.
pub fn strong_skeletality_check(src: &dyn HomSource, max_dim: usize) -> Result<Check> {
    require_non_diagonal(src)?;
    let cfg = src.config();
    let mut check = Check::new("strong-skeletality").for_site(cfg);
    for n in 0..=max_dim {
        for m in 0..=n {
            src.homs(n, m)?;
            src.homs(m, n)?;
            src.isos(m)?;
        }
        let degeneracies: Vec<CubeMap> =
            (0..=n).map(|m| src.homs(n, m).map(|h| h.minus.clone())).collect::<Result<Vec<_>>>()?.concat();
        let with_ps: Vec<(CubeMap, Vec<CubeMap>)> = degeneracies
            .into_par_iter()
            .map(|p| pseudo_sections(src, &p).map(|ps| (p, ps)))
            .collect::<Result<_>>()?;

        let parts: Vec<Check> =
            with_ps.par_iter().map(|(p, ps)| check_degeneracy(src, p, ps)).collect::<Result<_>>()?;
        for part in parts {
            check.merge(part);
        }

        let mut groups: BTreeMap<&[CubeMap], Vec<&CubeMap>> = BTreeMap::new();
        for (p, ps) in &with_ps {
            groups.entry(ps.as_slice()).or_default().push(p);
        }
        for members in groups.values() {
            let first = members[0];
            let first_part = partition_of(first).ok();
            for other in &members[1..] {
                if !is_pseudo_equal(src, first, other)? {
                    check.violation(
                        Witness::new("equal pseudo-section sets but not pseudo-equal")
                            .with_maps([first, *other])
                            .with_repro(format!("cubeforge skeletal --site {cfg} --max-dim {n}")),
                    );
                }
                let other_part = partition_of(other).ok();
                let same = match (&first_part, &other_part) {
                    (Some(a), Some(b)) if cfg.symmetries => a.unordered() == b.unordered() && a.trivial == b.trivial,
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                };
                if !same {
                    check.violation(
                        Witness::new("equal pseudo-section sets but different dependency partitions")
                            .with_maps([first, *other]),
                    );
                }
            }
        }
    }
    let summary = format!("{} degeneracies out of cubes of dim ≤ {max_dim}, {} violations", check.examined, check.violations);
    Ok(check.finish(true, summary))
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
    fn partition_examples() {
        let s = site("cs");
        let p = dependency_partition(&s, &eval("m1 . p3", 3)).unwrap();
        assert_eq!(p, DependencyPartition { parts: vec![vec![1, 2]], trivial: vec![3] });
        let p = dependency_partition(&s, &eval("j2 . j1 . x2", 4)).unwrap();
        assert_eq!(p.parts, vec![vec![1, 3], vec![2, 4]]);
        let p = dependency_partition(&s, &CubeMap::identity(3)).unwrap();
        assert_eq!(p.parts, vec![vec![1], vec![2], vec![3]]);
        assert!(p.trivial.is_empty());
        assert!(matches!(dependency_partition(&s, &eval("d1+", 1)), Err(Error::NotADegeneracy { .. })));
    }

    #[test]
    fn pseudo_section_examples() {
        let s = site("plain");
        assert_eq!(pseudo_sections(&s, &eval("p1", 1)).unwrap(), vec![eval("d1-", 0), eval("d1+", 0)]);
        let s = site("cws");
        assert_eq!(pseudo_sections(&s, &eval("m1", 2)).unwrap(), vec![eval("d1+", 1), eval("d2+", 1)]);
    }

    #[test]
    fn restricted_search_matches_unrestricted() {
        for cfg in ["plain", "sr", "csr", "cv"] {
            let s = site(cfg);
            for n in 0..=2 {
                for m in 0..=n {
                    for p in &s.homs(n, m).unwrap().minus {
                        assert_eq!(
                            pseudo_sections(&s, p).unwrap(),
                            pseudo_sections_unrestricted(&s, p, 2).unwrap(),
                            "{cfg} {p}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pseudo_equality_examples() {
        let s = site("csr");
        let p = eval("m1", 2);
        assert!(is_pseudo_equal(&s, &p, &p).unwrap());
        assert!(is_pseudo_equal(&s, &p, &eval("r1 . m1", 2)).unwrap());
        for cfg in ["plain", "csr", "s"] {
            assert!(!is_pseudo_equal(&site(cfg), &eval("p1", 2), &eval("p2", 2)).unwrap());
        }
    }

    #[test]
    fn strongly_skeletal_small() {
        for cfg in ["plain", "cs", "sr", "cw"] {
            let c = strong_skeletality_check(&site(cfg), 2).unwrap();
            assert!(c.status.is_pass(), "{cfg}: {:?}", c.witnesses);
        }
    }

    #[test]
    fn missing_section_is_reported() {
        let s = site("plain");
        let patched = PatchedSite { inner: &s, removed: vec![eval("d1-", 0), eval("d1+", 0)], added: vec![] };
        let c = strong_skeletality_check(&patched, 1).unwrap();
        assert!(!c.status.is_pass());
    }
}
