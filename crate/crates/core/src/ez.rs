//! Absolute pushouts of degeneracy spans, certified through the Yoneda
//! embedding up to a fixed level.
//!
//! A cocone `(d, g', f')` on a span `b ←f− a −g→ c` is accepted at level `K`
//! when, for every `k ≤ K`, the canonical map
//! `Hom(□ᵏ,b) ⊔_{Hom(□ᵏ,a)} Hom(□ᵏ,c) → Hom(□ᵏ,d)` is a bijection.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{classify_map, compose, CubeMap};
use crate::error::{Error, Result};
use crate::reedy::{descend, require_member, require_non_diagonal};
use crate::report::{Check, Witness};
use crate::sites::HomSource;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        // keep the smaller index as root so representatives are minimal
        if a < b {
            self.0[b] = a;
        } else {
            self.0[a] = b;
        }
    }
}

/// The set-level pushout `Hom(□ᵏ,b) ⊔_{Hom(□ᵏ,a)} Hom(□ᵏ,c)`.
#[derive(Clone, Debug)]
pub struct LevelwisePushout {
    pub level: usize,
    /// `Hom(□ᵏ, b)`, sorted; indices `0..left.len()` in `class_of`.
    pub left: Vec<CubeMap>,
    /// `Hom(□ᵏ, c)`, sorted; indices follow `left`.
    pub right: Vec<CubeMap>,
    pub class_of: Vec<usize>,
    /// Smallest element index of each class, in increasing order.
    pub representatives: Vec<usize>,
}

impl LevelwisePushout {
    pub fn class_count(&self) -> usize {
        self.representatives.len()
    }

    pub fn element(&self, idx: usize) -> &CubeMap {
        if idx < self.left.len() {
            &self.left[idx]
        } else {
            &self.right[idx - self.left.len()]
        }
    }
}

fn check_span(f: &CubeMap, g: &CubeMap) -> Result<()> {
    if f.dom() != g.dom() {
        return Err(Error::DimensionMismatch { left: f.dom(), right: g.dom() });
    }
    for h in [f, g] {
        if !classify_map(h).surjective {
            return Err(Error::NotADegeneracy { map: h.to_string(), site: "span".into() });
        }
    }
    Ok(())
}

pub fn levelwise_pushout(src: &dyn HomSource, f: &CubeMap, g: &CubeMap, k: usize) -> Result<LevelwisePushout> {
    check_span(f, g)?;
    let left = src.homs(k, f.cod())?.all.clone();
    let right = src.homs(k, g.cod())?.all.clone();
    let offset = left.len();
    let mut uf = UnionFind::new(left.len() + right.len());
    for x in &src.homs(k, f.dom())?.all {
        let y = compose(f, x)?;
        let z = compose(g, x)?;
        let (Ok(i), Ok(j)) = (left.binary_search(&y), right.binary_search(&z)) else {
            return Err(Error::Internal(format!("hom-set at level {k} not closed under composition")));
        };
        uf.union(i, offset + j);
    }
    let mut class_of = Vec::with_capacity(uf.0.len());
    let mut representatives = Vec::new();
    let mut seen = HashMap::new();
    for idx in 0..uf.0.len() {
        let root = uf.find(idx);
        let class = *seen.entry(root).or_insert_with(|| {
            representatives.push(idx);
            representatives.len() - 1
        });
        class_of.push(class);
    }
    Ok(LevelwisePushout { level: k, left, right, class_of, representatives })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushoutCertificate {
    pub f: CubeMap,
    pub g: CubeMap,
    /// Dimension of the cocone vertex `□ᵈ`.
    pub d: usize,
    /// `g': b → d`, the cobase change of `g` along `f`.
    pub g_prime: CubeMap,
    /// `f': c → d`, the cobase change of `f` along `g`.
    pub f_prime: CubeMap,
    pub verified_levels: usize,
    pub universal_ok: bool,
    pub levelwise_ok: bool,
    /// Whether the certificate was moved along isomorphisms from another span.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub transported: bool,
}

/// Whether the canonical comparison map is a bijection at level `k`.
fn level_bijective(src: &dyn HomSource, f: &CubeMap, g: &CubeMap, gp: &CubeMap, fp: &CubeMap, k: usize) -> Result<bool> {
    let po = levelwise_pushout(src, f, g, k)?;
    let target = src.homs(k, gp.cod())?;
    let mut image: Vec<Option<usize>> = vec![None; po.class_count()];
    let mut hit = vec![false; target.all.len()];
    for (idx, &class) in po.class_of.iter().enumerate() {
        let leg = if idx < po.left.len() { gp } else { fp };
        let w = compose(leg, po.element(idx))?;
        let Ok(t) = target.all.binary_search(&w) else { return Ok(false) };
        match image[class] {
            None => {
                if hit[t] {
                    return Ok(false);
                }
                hit[t] = true;
                image[class] = Some(t);
            }
            Some(prev) if prev != t => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(hit.iter().all(|&h| h))
}

fn certify(src: &dyn HomSource, f: &CubeMap, g: &CubeMap, gp: CubeMap, fp: CubeMap, levels: usize) -> Result<Option<PushoutCertificate>> {
    for k in 0..=levels {
        if !level_bijective(src, f, g, &gp, &fp, k)? {
            return Ok(None);
        }
    }
    Ok(Some(PushoutCertificate {
        f: f.clone(),
        g: g.clone(),
        d: gp.cod(),
        g_prime: gp,
        f_prime: fp,
        verified_levels: levels,
        universal_ok: true,
        levelwise_ok: true,
        transported: false,
    }))
}

/// Commuting cocones with both legs degeneracies, vertex dim `≤ min(dim b, dim c)`.
fn candidate_cocones(src: &dyn HomSource, f: &CubeMap, g: &CubeMap) -> Result<Vec<(CubeMap, CubeMap)>> {
    let mut out = Vec::new();
    for d in 0..=f.cod().min(g.cod()) {
        let right = src.homs(g.cod(), d)?;
        for gp in &src.homs(f.cod(), d)?.minus {
            let Some(fp) = descend(g, &compose(gp, f)?, d) else { continue };
            if right.minus.binary_search(&fp).is_ok() {
                out.push((gp.clone(), fp));
            }
        }
    }
    Ok(out)
}

/// First cocone, in search order, whose comparison maps are bijective at
/// every level `≤ levels`.
pub fn find_absolute_pushout(src: &dyn HomSource, f: &CubeMap, g: &CubeMap, levels: usize) -> Result<Option<PushoutCertificate>> {
    require_non_diagonal(src)?;
    require_member(src, f)?;
    require_member(src, g)?;
    check_span(f, g)?;
    for (gp, fp) in candidate_cocones(src, f, g)? {
        if let Some(cert) = certify(src, f, g, gp, fp, levels)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// Every cocone that passes, for the essential uniqueness check.
pub fn all_absolute_pushouts(src: &dyn HomSource, f: &CubeMap, g: &CubeMap, levels: usize) -> Result<Vec<PushoutCertificate>> {
    check_span(f, g)?;
    let mut out = Vec::new();
    for (gp, fp) in candidate_cocones(src, f, g)? {
        if let Some(cert) = certify(src, f, g, gp, fp, levels)? {
            out.push(cert);
        }
    }
    Ok(out)
}

/// Degeneracies out of `□ⁿ` up to post-composition with isomorphisms.
struct Canon {
    degeneracies: Vec<CubeMap>,
    isos_dom: Vec<CubeMap>,
    /// `canon[h]` is `(φ, min_φ φ∘h)` for every `h = deg ∘ α`.
    canon: HashMap<CubeMap, (CubeMap, CubeMap)>,
}

impl Canon {
    fn new(src: &dyn HomSource, n: usize) -> Result<Self> {
        let mut degeneracies = Vec::new();
        for m in 0..=n {
            degeneracies.extend(src.homs(n, m)?.minus.iter().cloned());
        }
        let isos_dom = src.isos(n)?;
        let isos_cod: Vec<Vec<CubeMap>> = (0..=n).map(|m| src.isos(m)).collect::<Result<_>>()?;
        let mut canon = HashMap::new();
        for h in &degeneracies {
            let (phi, best) = isos_cod[h.cod()]
                .iter()
                .map(|phi| (phi, compose(phi, h).expect("dims")))
                .min_by(|a, b| a.1.cmp(&b.1))
                .expect("identity is an iso");
            canon.insert(h.clone(), (phi.clone(), best));
        }
        Ok(Canon { degeneracies, isos_dom, canon })
    }

    /// Orbit representative of the span `(f, g)` under
    /// `(f, g) ↦ (φ f α, ψ g α)`, with the `φ, ψ` used.
    fn representative(&self, f: &CubeMap, g: &CubeMap) -> Result<((CubeMap, CubeMap), CubeMap, CubeMap)> {
        let mut best: Option<((CubeMap, CubeMap), CubeMap, CubeMap)> = None;
        for alpha in &self.isos_dom {
            let fa = compose(f, alpha)?;
            let ga = compose(g, alpha)?;
            let (phi, f0) = self.lookup(&fa)?;
            let (psi, g0) = self.lookup(&ga)?;
            let key = (f0.clone(), g0.clone());
            if best.as_ref().is_none_or(|b| key < b.0) {
                best = Some((key, phi.clone(), psi.clone()));
            }
        }
        Ok(best.expect("identity is an iso"))
    }

    fn lookup(&self, h: &CubeMap) -> Result<&(CubeMap, CubeMap)> {
        self.canon
            .get(h)
            .ok_or_else(|| Error::Internal(format!("{h} is not a degeneracy of the site")))
    }
}

fn span_repro(cfg: &str, f: &CubeMap, g: &CubeMap, levels: usize) -> String {
    format!("cubeforge pushout --site {cfg} --map '{f}' --map '{g}' --levels {levels}")
}

/// Certifies an absolute pushout for every span of degeneracies out of cubes
/// of dim `≤ max_dim`, to level `levels`. Spans are reduced to orbits under
/// isomorphisms; each orbit representative is certified levelwise and the
/// certificate is transported to the other members, whose squares and legs
/// are then rechecked directly.
pub fn ez_category_check(src: &dyn HomSource, max_dim: usize, levels: usize) -> Result<(Check, Vec<PushoutCertificate>)> {
    require_non_diagonal(src)?;
    let cfg = src.config();
    let site = cfg.to_string();
    let mut check = Check::new("ez-category").for_site(cfg);
    let mut certificates = Vec::new();
    let mut orbit_total = 0usize;

    for n in 0..=max_dim {
        for m in 0..=n {
            for k in 0..=levels {
                src.homs(k, m)?;
            }
        }
        let canon = Canon::new(src, n)?;
        let degs = &canon.degeneracies;
        let pairs: Vec<(usize, usize)> =
            (0..degs.len()).flat_map(|i| (0..degs.len()).map(move |j| (i, j))).collect();
        let reps: Vec<((CubeMap, CubeMap), CubeMap, CubeMap)> = pairs
            .par_iter()
            .map(|&(i, j)| canon.representative(&degs[i], &degs[j]))
            .collect::<Result<_>>()?;

        let mut orbits: Vec<(CubeMap, CubeMap)> = reps.iter().map(|r| r.0.clone()).collect();
        orbits.sort();
        orbits.dedup();
        orbit_total += orbits.len();
        let certified: Vec<Option<PushoutCertificate>> = orbits
            .par_iter()
            .map(|(f, g)| find_absolute_pushout(src, f, g, levels))
            .collect::<Result<_>>()?;
        let by_orbit: HashMap<&(CubeMap, CubeMap), &Option<PushoutCertificate>> =
            orbits.iter().zip(&certified).collect();

        if n <= 2 {
            for (f, g) in &orbits {
                let all = all_absolute_pushouts(src, f, g, levels)?;
                for other in all.iter().skip(1) {
                    let first = &all[0];
                    let linked = first.d == other.d
                        && src.isos(first.d)?.iter().any(|phi| {
                            compose(phi, &first.g_prime).expect("dims") == other.g_prime
                                && compose(phi, &first.f_prime).expect("dims") == other.f_prime
                        });
                    if !linked {
                        check.violation(
                            Witness::new("two certified pushouts with non-isomorphic vertices")
                                .with_maps([f, g, &first.g_prime, &other.g_prime]),
                        );
                    }
                }
            }
        }

        let results: Vec<(Check, Option<PushoutCertificate>)> = pairs
            .par_iter()
            .zip(&reps)
            .map(|(&(i, j), (key, phi, psi))| -> Result<(Check, Option<PushoutCertificate>)> {
                let (f, g) = (&degs[i], &degs[j]);
                let mut c = Check::new("ez-category");
                c.examined = 1;
                let repro = span_repro(&site, f, g, levels);
                let Some(base) = by_orbit[key] else {
                    c.violation(
                        Witness::new(format!("no cocone certified to level {levels}"))
                            .with_maps([f, g])
                            .with_repro(repro),
                    );
                    return Ok((c, None));
                };
                let transported = key != &(f.clone(), g.clone());
                let gp = compose(&base.g_prime, phi)?;
                let fp = compose(&base.f_prime, psi)?;
                if compose(&gp, f)? != compose(&fp, g)? {
                    c.violation(Witness::new("transported square does not commute").with_maps([f, g, &gp, &fp]));
                }
                let homs_b = src.homs(f.cod(), gp.cod())?;
                let homs_c = src.homs(g.cod(), fp.cod())?;
                if homs_b.minus.binary_search(&gp).is_err() || homs_c.minus.binary_search(&fp).is_err() {
                    c.violation(
                        Witness::new("cocone leg is not a degeneracy").with_maps([f, g, &gp, &fp]).with_repro(repro.clone()),
                    );
                }
                for leg in [&gp, &fp] {
                    if !has_section(src, leg)? {
                        c.violation(
                            Witness::new("cobase change of a split epimorphism has no section")
                                .with_maps([f, g, leg])
                                .with_repro(repro.clone()),
                        );
                    }
                }
                let cert = PushoutCertificate {
                    f: f.clone(),
                    g: g.clone(),
                    d: base.d,
                    g_prime: gp,
                    f_prime: fp,
                    verified_levels: levels,
                    universal_ok: base.universal_ok,
                    levelwise_ok: base.levelwise_ok,
                    transported,
                };
                Ok((c, Some(cert)))
            })
            .collect::<Result<_>>()?;
        for (c, cert) in results {
            check.merge(c);
            certificates.extend(cert);
        }
    }
    let summary = format!(
        "{} degeneracy spans out of cubes of dim ≤ {max_dim} ({orbit_total} orbits certified directly), certified to level {levels}, {} violations",
        check.examined, check.violations
    );
    Ok((check.finish(true, summary), certificates))
}

fn has_section(src: &dyn HomSource, f: &CubeMap) -> Result<bool> {
    Ok(src.homs(f.cod(), f.dom())?.all.iter().any(|s| compose(f, s).expect("dims").is_identity()))
}

/// Whether post-composition with `f` is surjective onto `Hom(□ᵏ, cod f)` for
/// every `k ≤ levels`.
pub fn is_yoneda_epi(src: &dyn HomSource, f: &CubeMap, levels: usize) -> Result<bool> {
    for k in 0..=levels {
        let target = src.homs(k, f.cod())?;
        let mut hit = vec![false; target.all.len()];
        for x in &src.homs(k, f.dom())?.all {
            if let Ok(t) = target.all.binary_search(&compose(f, x)?) {
                hit[t] = true;
            }
        }
        if !hit.iter().all(|&h| h) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Has a section ⟺ is a degeneracy ⟺ is Yoneda-epi up to level `max_dim`,
/// for every map between cubes of dim `≤ max_dim`; and the legs of certified
/// pushout squares of spans out of cubes of dim `≤ min(max_dim, 2)` split.
pub fn split_epi_equivalences_check(src: &dyn HomSource, max_dim: usize) -> Result<Check> {
    let cfg = src.config();
    let site = cfg.to_string();
    let mut check = Check::new("split-epi").for_site(cfg);
    for n in 0..=max_dim {
        for m in 0..=max_dim {
            src.homs(n, m)?;
        }
    }
    let dims: Vec<(usize, usize)> =
        (0..=max_dim).flat_map(|n| (0..=max_dim).map(move |m| (n, m))).collect();
    let parts: Vec<Check> = dims
        .par_iter()
        .map(|&(n, m)| -> Result<Check> {
            let mut c = Check::new("split-epi");
            for f in &src.homs(n, m)?.all {
                c.examined += 1;
                let section = has_section(src, f)?;
                let minus = classify_map(f).surjective;
                let yoneda = is_yoneda_epi(src, f, max_dim)?;
                if section != minus || minus != yoneda {
                    c.violation(
                        Witness::new(format!("section: {section}, degeneracy: {minus}, Yoneda-epi: {yoneda}"))
                            .with_maps([f])
                            .with_repro(format!("cubeforge section --site {site} --map '{f}'")),
                    );
                }
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    for p in parts {
        check.merge(p);
    }
    if !cfg.diagonals {
        let (ez, _) = ez_category_check(src, max_dim.min(2), max_dim)?;
        check.merge(ez);
    }
    let summary = format!("{} maps and spans with dims ≤ {max_dim}, {} violations", check.examined, check.violations);
    Ok(check.finish(true, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sites::Site;
    use crate::words::{evaluate, parse};

    fn site(s: &str) -> Site {
        Site::new(s.parse().unwrap()).unwrap()
    }

    fn eval(text: &str, dom: usize) -> CubeMap {
        evaluate(&parse(text, dom).unwrap()).unwrap()
    }

    #[test]
    fn levelwise_examples() {
        let s = site("plain");
        let p = eval("p1", 1);
        assert_eq!(levelwise_pushout(&s, &p, &p, 0).unwrap().class_count(), 1);
        let id = CubeMap::identity(2);
        for k in 0..=2 {
            assert_eq!(levelwise_pushout(&s, &id, &id, k).unwrap().class_count(), s.homs(k, 2).unwrap().all.len());
        }
        // brute force: Hom(□¹,□¹) ⊔ Hom(□¹,□¹) modulo (π¹x, π²x) over x ∈ Hom(□¹,□²)
        let (f, g) = (eval("p1", 2), eval("p2", 2));
        let h11 = s.homs(1, 1).unwrap().all.clone();
        let mut rel: Vec<Vec<bool>> = vec![vec![false; 6]; 6];
        for x in &s.homs(1, 2).unwrap().all {
            let a = h11.binary_search(&compose(&f, x).unwrap()).unwrap();
            let b = 3 + h11.binary_search(&compose(&g, x).unwrap()).unwrap();
            rel[a][b] = true;
            rel[b][a] = true;
        }
        for i in 0..6 {
            rel[i][i] = true;
        }
        for k in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    if rel[i][k] && rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
        let classes = (0..6).filter(|&i| (0..i).all(|j| !rel[i][j])).count();
        assert_eq!(levelwise_pushout(&s, &f, &g, 1).unwrap().class_count(), classes);
    }

    #[test]
    fn pushout_examples() {
        let s = site("plain");
        let p = eval("p1", 2);
        let c = find_absolute_pushout(&s, &p, &p, 3).unwrap().unwrap();
        assert_eq!((c.d, c.g_prime.is_identity(), c.f_prime.is_identity()), (1, true, true));
        let (f, g) = (eval("p1 . p1", 2), eval("p1 . p2", 2));
        let c = find_absolute_pushout(&s, &f, &g, 3).unwrap().unwrap();
        assert_eq!(c.d, 0);
        let s = site("cs");
        let c = find_absolute_pushout(&s, &eval("m1", 2), &eval("j1", 2), 3).unwrap().unwrap();
        assert_eq!(compose(&c.g_prime, &c.f).unwrap(), compose(&c.f_prime, &c.g).unwrap());
        assert!(c.d <= 1);
    }

    #[test]
    fn two_projections_do_not_push_out_to_a_line() {
        let s = site("plain");
        let (f, g) = (eval("p1", 2), eval("p2", 2));
        let c = find_absolute_pushout(&s, &f, &g, 2).unwrap().unwrap();
        assert_eq!(c.d, 0);
    }

    #[test]
    fn ez_small() {
        for cfg in ["plain", "csr", "cws"] {
            let (c, certs) = ez_category_check(&site(cfg), 2, 3).unwrap();
            assert!(c.status.is_pass(), "{cfg}: {:?}", c.witnesses);
            assert_eq!(certs.len() as u64, c.examined);
        }
    }

    #[test]
    fn split_epi_examples() {
        let s = site("c");
        assert!(is_yoneda_epi(&s, &eval("p1", 1), 3).unwrap());
        assert!(!is_yoneda_epi(&s, &eval("d1-", 0), 3).unwrap());
        let c = split_epi_equivalences_check(&s, 2).unwrap();
        assert!(c.status.is_pass(), "{:?}", c.witnesses);
    }
}
