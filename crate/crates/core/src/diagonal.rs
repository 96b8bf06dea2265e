//! Cube sites with diagonals as categories of finite Boolean algebras, their
//! idempotents and Karoubi envelopes, and the counterexamples showing that
//! the sites with connections are not Eilenberg-Zilber even after splitting
//! idempotents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cube::{compose, CubeMap};
use crate::error::{Error, Result};
use crate::order::{downset_lattice, lattices_up_to_iso, posets_up_to_iso, FinLattice, FinPoset};
use crate::reedy::survey_idempotents;
use crate::report::{Check, Witness};
use crate::sites::{enumerate_homs, is_member, Connections, HomSource, SiteConfig};

/// Maps between finite lattices, by the structure they preserve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapClass {
    All,
    Monotone,
    /// Binary meets only; the top need not be preserved.
    MeetPreserving,
    JoinPreserving,
}

impl MapClass {
    /// The class a diagonal site consists of, or `None` for `ds`, `dsr`.
    pub fn for_site(cfg: &SiteConfig) -> Option<MapClass> {
        match (cfg.connections, cfg.reversals) {
            (Connections::None, _) => None,
            (Connections::Meet, _) => Some(MapClass::MeetPreserving),
            (Connections::Join, _) => Some(MapClass::JoinPreserving),
            (Connections::Both, false) => Some(MapClass::Monotone),
            (Connections::Both, true) => Some(MapClass::All),
        }
    }

    pub fn admits(self, p: &FinLattice, q: &FinLattice, f: &[usize]) -> bool {
        let n = p.len();
        (0..n).all(|a| (0..n).all(|b| self.pair_ok(p, q, f, a, b)))
    }

    fn pair_ok(self, p: &FinLattice, q: &FinLattice, f: &[usize], a: usize, b: usize) -> bool {
        match self {
            MapClass::All => true,
            MapClass::Monotone => !p.leq(a, b) || q.leq(f[a], f[b]),
            MapClass::MeetPreserving => f[p.meet(a, b)] == q.meet(f[a], f[b]),
            MapClass::JoinPreserving => f[p.join(a, b)] == q.join(f[a], f[b]),
        }
    }
}

const MAP_BUDGET: f64 = 1e8;

/// All maps `p → q` in the class, as value tables, in lexicographic order.
/// `allowed[a]` optionally restricts the value at `a`.
fn search_maps(p: &FinLattice, q: &FinLattice, cls: MapClass, allowed: Option<&[Vec<usize>]>) -> Result<Vec<Vec<usize>>> {
    let n = p.len();
    let space: f64 = match allowed {
        Some(al) => al.iter().map(|v| v.len() as f64).product(),
        None => (q.len() as f64).powi(n as i32),
    };
    if space > MAP_BUDGET && cls == MapClass::All {
        return Err(Error::ResourceBound(format!("{space:.0} candidate maps")));
    }
    let mut out = Vec::new();
    let mut f = vec![usize::MAX; n];
    fn rec(
        i: usize,
        p: &FinLattice,
        q: &FinLattice,
        cls: MapClass,
        allowed: Option<&[Vec<usize>]>,
        f: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = p.len();
        if i == n {
            out.push(f.clone());
            return;
        }
        let values: Vec<usize> = match allowed {
            Some(al) => al[i].clone(),
            None => (0..q.len()).collect(),
        };
        for v in values {
            f[i] = v;
            // check every constraint whose elements are now all assigned
            let ok = (0..=i).all(|a| {
                let b = i;
                let extra = match cls {
                    MapClass::MeetPreserving => p.meet(a, b),
                    MapClass::JoinPreserving => p.join(a, b),
                    _ => 0,
                };
                if extra > i {
                    return true;
                }
                cls.pair_ok(p, q, f, a, b) && cls.pair_ok(p, q, f, b, a)
            });
            let ok = ok
                && match cls {
                    // a constraint may complete when its meet or join is assigned last
                    MapClass::MeetPreserving | MapClass::JoinPreserving => (0..i).all(|a| {
                        (0..i).all(|b| {
                            let m = if cls == MapClass::MeetPreserving { p.meet(a, b) } else { p.join(a, b) };
                            m != i || cls.pair_ok(p, q, f, a, b)
                        })
                    }),
                    _ => true,
                };
            if ok {
                rec(i + 1, p, q, cls, allowed, f, out);
            }
        }
        f[i] = usize::MAX;
    }
    rec(0, p, q, cls, allowed, &mut f, &mut out);
    Ok(out)
}

pub fn enumerate_maps(p: &FinLattice, q: &FinLattice, cls: MapClass) -> Result<Vec<Vec<usize>>> {
    search_maps(p, q, cls, None)
}

/// Maps whose coordinates are constants or single inputs, negated inputs
/// allowed with reversals: the morphisms of `ds` and `dsr`.
pub fn literal_maps(n: usize, m: usize, reversals: bool) -> Vec<CubeMap> {
    // choice per output: 0, 1, then x_j, then ¬x_j
    let per = 2 + n * if reversals { 2 } else { 1 };
    let total = per.pow(m as u32);
    let mut out: Vec<CubeMap> = (0..total)
        .map(|mut code| {
            let choices: Vec<usize> = (0..m)
                .map(|_| {
                    let c = code % per;
                    code /= per;
                    c
                })
                .collect();
            CubeMap::from_fn(n, m, |v| {
                choices.iter().enumerate().fold(0u32, |acc, (i, &c)| {
                    let bit = match c {
                        0 => 0,
                        1 => 1,
                        c if c < 2 + n => (v >> (c - 2)) & 1,
                        c => 1 ^ ((v >> (c - 2 - n)) & 1),
                    };
                    acc | (bit << i)
                })
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn tables_to_maps(n: usize, m: usize, tables: Vec<Vec<usize>>) -> Vec<CubeMap> {
    let mut maps: Vec<CubeMap> = tables
        .into_iter()
        .map(|t| CubeMap::new(n, m, t.into_iter().map(|v| v as u32).collect()).expect("valid table"))
        .collect();
    maps.sort();
    maps
}

/// The maps `2ⁿ → 2ᵐ` the site should have according to its order-theoretic
/// description.
pub fn characterized_homs(cfg: &SiteConfig, n: usize, m: usize) -> Result<Vec<CubeMap>> {
    if !cfg.diagonals {
        return Err(Error::NonDiagonalSite(cfg.to_string()));
    }
    Ok(match MapClass::for_site(cfg) {
        None => literal_maps(n, m, cfg.reversals),
        Some(cls) => tables_to_maps(n, m, enumerate_maps(&FinLattice::boolean(n), &FinLattice::boolean(m), cls)?),
    })
}

/// Compares the closure of the generators at the given slack with the
/// order-theoretic description and with the membership test.
pub fn identify_diagonal_site(cfg: &SiteConfig, n: usize, m: usize, slack: usize) -> Result<Check> {
    if !cfg.diagonals {
        return Err(Error::NonDiagonalSite(cfg.to_string()));
    }
    let closure = enumerate_homs(cfg, n, m, slack)?;
    let expected = characterized_homs(cfg, n, m)?;
    let mut c = Check::new(format!("identify Hom(□{n},□{m})")).for_site(cfg);
    c.examined = closure.maps.len().max(expected.len()) as u64;
    let repro = format!("cubeforge homs --site {cfg} --from {n} --to {m} --slack {slack}");
    for f in closure.maps.iter().filter(|f| expected.binary_search(f).is_err()) {
        c.violation(Witness::new("generated map outside the characterization").with_maps([f]).with_repro(repro.clone()));
    }
    for f in expected.iter().filter(|f| !closure.contains(f)) {
        c.violation(Witness::new("characterized map not generated").with_maps([f]).with_repro(repro.clone()));
    }
    for f in expected.iter().filter(|f| !is_member(cfg, f)) {
        c.violation(Witness::new("characterized map rejected by the membership test").with_maps([f]));
    }
    if !closure.complete {
        c.note(Witness::new(format!("closure at slack {slack} not known to be saturated")));
    }
    let what = match MapClass::for_site(cfg) {
        None => "constant-or-literal maps".to_string(),
        Some(cls) => format!("{cls:?} maps"),
    };
    let summary = if c.violations == 0 {
        format!("closure equals the {what}, both of size {}", expected.len())
    } else {
        format!("closure has {} maps, {what} {}", closure.maps.len(), expected.len())
    };
    Ok(c.finish(false, summary))
}

/// `|Hom(□ⁿ, □¹)|` in `dcs`, by the membership test over all truth tables and
/// by closure for `n ≤ closure_max_n`, against the brute-force count of
/// monotone functions.
pub fn dedekind_agreement(max_n: usize, closure_max_n: usize, slack: usize) -> Result<Check> {
    let cfg: SiteConfig = "dcs".parse()?;
    let mut c = Check::new("dedekind-counts").for_site(cfg);
    let mut counts = Vec::new();
    for n in 0..=max_n {
        let oracle = dedekind_count(n)?;
        let closure =
            if n <= closure_max_n { enumerate_homs(&cfg, n, 1, slack)?.maps.len() as u64 } else { oracle };
        let members =
            (0..1u64 << (1 << n)).filter(|t| is_member(&cfg, &CubeMap::from_fn(n, 1, |v| ((t >> v) & 1) as u32))).count() as u64;
        c.examined += 1;
        if closure != oracle || members != oracle {
            c.violation(Witness::new(format!(
                "n = {n}: closure {closure}, membership {members}, monotone functions {oracle}"
            )));
        }
        counts.push(oracle.to_string());
    }
    Ok(c.finish(false, format!(
        "|Hom(□ⁿ,□¹)| = {} for n = 0..={max_n}, closure compared for n ≤ {}",
        counts.join(", "),
        closure_max_n.min(max_n)
    )))
}

/// Number of monotone Boolean functions of `n` variables, by testing every
/// truth table directly.
pub fn dedekind_count(n: usize) -> Result<u64> {
    if n > 4 {
        return Err(Error::ResourceBound(format!("2^(2^{n}) truth tables")));
    }
    let size = 1u32 << n;
    let count = (0..1u64 << size)
        .filter(|&t| {
            (0..size).all(|v| (0..n).all(|i| v & (1 << i) != 0 || (t >> v) & 1 <= (t >> (v | 1 << i)) & 1))
        })
        .count();
    Ok(count as u64)
}

/// First idempotent on `□ⁿ`, `n ≤ max_dim`, in vertex-table order, that
/// splits through no cube of dimension `≤ max_dim`.
pub fn find_nonsplit_idempotent(src: &dyn HomSource, max_dim: usize) -> Result<Option<CubeMap>> {
    let cfg = src.config();
    if !cfg.diagonals {
        return Err(Error::NonDiagonalSite(cfg.to_string()));
    }
    Ok(survey_idempotents(src, max_dim)?.nonsplit.into_iter().next())
}

fn image_of(e: &CubeMap) -> Vec<usize> {
    let mut img: Vec<usize> = e.table().iter().map(|&v| v as usize).collect();
    img.sort_unstable();
    img.dedup();
    img
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImageClass {
    pub size: usize,
    pub lattice: bool,
    pub distributive: bool,
    /// Elements with their covers, in the image's own labels.
    pub hasse: Vec<(String, String)>,
    /// First idempotent found with this image.
    pub example: CubeMap,
}

fn hasse(p: &FinPoset) -> Vec<(String, String)> {
    let n = p.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && p.leq(a, b) && !(0..n).any(|c| c != a && c != b && p.leq(a, c) && p.leq(c, b)) {
                out.push((p.name(a).to_string(), p.name(b).to_string()));
            }
        }
    }
    out
}

/// Images of idempotents on cubes of dim `≤ max_dim`, up to isomorphism of
/// the induced order (up to cardinality with reversals, where order is not
/// structure), checked against the expected kind of object.
pub fn karoubi_images(src: &dyn HomSource, max_dim: usize) -> Result<(Check, Vec<ImageClass>)> {
    let cfg = src.config();
    if !cfg.diagonals {
        return Err(Error::NonDiagonalSite(cfg.to_string()));
    }
    let cls = MapClass::for_site(&cfg);
    let mut c = Check::new("karoubi-images").for_site(cfg);
    let mut classes: BTreeMap<(usize, Vec<bool>), ImageClass> = BTreeMap::new();
    for n in 0..=max_dim {
        let cube = FinLattice::boolean(n);
        for e in &src.homs(n, n)?.all {
            if compose(e, e)? != *e {
                continue;
            }
            c.examined += 1;
            let img = image_of(e);
            let sub = cube.poset().restrict(&img);
            let key = if cfg.reversals { (img.len(), Vec::new()) } else { (img.len(), sub.canonical_form()) };
            if classes.contains_key(&key) {
                continue;
            }
            let lattice = FinLattice::from_poset(sub.clone());
            let distributive = lattice.as_ref().is_ok_and(|l| l.is_distributive());
            let ok = match cls {
                // a subcube: the image of a face-like embedding of □ᵏ
                None => {
                    img.len().is_power_of_two()
                        && src.homs(img.len().trailing_zeros() as usize, n)?.plus.iter().any(|i| image_of(i) == img)
                }
                Some(MapClass::Monotone) => lattice.is_ok(),
                Some(MapClass::MeetPreserving | MapClass::JoinPreserving) => distributive,
                Some(MapClass::All) => !img.is_empty(),
            };
            if !ok {
                c.violation(Witness::new(format!("idempotent image of size {} has the wrong kind", img.len())).with_maps([e]));
            }
            classes.insert(
                key,
                ImageClass { size: img.len(), lattice: lattice.is_ok(), distributive, hasse: hasse(&sub), example: e.clone() },
            );
        }
    }
    let classes: Vec<ImageClass> = classes.into_values().collect();
    let summary = format!("{} idempotents, {} image classes up to isomorphism", c.examined, classes.len());
    Ok((c.finish(true, summary), classes))
}

/// Retraction of `2^k` onto a lattice, as an idempotent on `□ᵏ`.
fn retraction_idempotent(k: usize, section: impl Fn(u32) -> u32, retract: impl Fn(u32) -> u32) -> CubeMap {
    CubeMap::from_fn(k, k, |v| section(retract(v)))
}

/// Every target object of size `≤ bound` is the image of an idempotent of the
/// site: lattices via down-sets and joins (`dcs`), distributive lattices via
/// Birkhoff and the adjoints of the forgetful map to a powerset (`dcws`,
/// `dcvs`), nonempty sets (`dcsr`).
pub fn karoubi_converse(cfg: &SiteConfig, bound: usize) -> Result<Check> {
    let cls = MapClass::for_site(cfg).ok_or_else(|| Error::InvalidSite(format!("{cfg} has no connections")))?;
    let mut c = Check::new("karoubi-converse").for_site(cfg);
    let realize = |c: &mut Check, e: CubeMap, target: Option<&FinPoset>, size: usize| {
        c.examined += 1;
        let img = image_of(&e);
        let image_ok = compose(&e, &e).is_ok_and(|ee| ee == e)
            && img.len() == size
            && target.is_none_or(|t| FinLattice::boolean(e.dom()).poset().restrict(&img).is_isomorphic(t));
        if !is_member(cfg, &e) || !image_ok {
            c.violation(Witness::new(format!("no idempotent realizes an object of size {size}")).with_maps([&e]));
        }
    };
    match cls {
        MapClass::Monotone => {
            for size in 1..=bound {
                for l in lattices_up_to_iso(size)? {
                    // x ↦ ↓x into the powerset of L, retracted by taking joins
                    let down = l.poset().principal_downsets();
                    let e = retraction_idempotent(
                        size,
                        |x| down[x as usize] as u32,
                        |s| (0..size).filter(|&a| s & (1 << a) != 0).fold(l.bottom(), |acc, a| l.join(acc, a)) as u32,
                    );
                    realize(&mut c, e, Some(l.poset()), size);
                }
            }
        }
        MapClass::MeetPreserving | MapClass::JoinPreserving => {
            for size in 1..=bound {
                for l in lattices_up_to_iso(size)?.into_iter().filter(FinLattice::is_distributive) {
                    let ji = l.join_irreducibles();
                    let p = l.poset().restrict(&ji);
                    let downsets = p.downsets()?;
                    let k = p.len();
                    let meet = cls == MapClass::MeetPreserving;
                    // interior (right adjoint) for meets, closure (left adjoint) for joins
                    let e = retraction_idempotent(k, |x| x, |s| {
                        let s = s as u64;
                        let pick = if meet {
                            downsets.iter().filter(|&&d| d & s == d).max_by_key(|d| d.count_ones())
                        } else {
                            downsets.iter().filter(|&&d| d & s == s).min_by_key(|d| d.count_ones())
                        };
                        *pick.expect("∅ and the whole poset are down-sets") as u32
                    });
                    realize(&mut c, e, Some(l.poset()), size);
                }
            }
        }
        MapClass::All => {
            for size in 1..=bound {
                let k = (usize::BITS - (size - 1).leading_zeros()) as usize;
                let e = CubeMap::from_fn(k, k, |v| v.min(size as u32 - 1));
                realize(&mut c, e, None, size);
            }
        }
    }
    let summary = format!("{} objects of size ≤ {bound} realized as idempotent images", c.examined);
    Ok(c.finish(true, summary))
}

/// Outcome of searching split-epi / mono factorizations of `h: D → C`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorizationSearch {
    pub image_size: usize,
    /// Orders on the image examined as candidate intermediate objects.
    pub candidates: usize,
    /// A factorization, as the intermediate order's cover relation.
    pub found: Option<Vec<(usize, usize)>>,
}

/// Searches factorizations `h = m ∘ e` with `e` a split epimorphism and `m`
/// injective, both in `cls`, through a lattice of size `≤ bound` satisfying
/// `accept`. Since `e` is onto and `m` is injective, the intermediate object
/// is the image of `h` with an order between the one generated by `h` and the
/// one induced from the codomain; every such order is tried.
pub fn search_split_epi_mono(
    d: &FinLattice,
    cod: &FinLattice,
    h: &[usize],
    cls: MapClass,
    accept: impl Fn(&FinLattice) -> bool,
    bound: usize,
) -> Result<FactorizationSearch> {
    let mut img: Vec<usize> = h.to_vec();
    img.sort_unstable();
    img.dedup();
    let k = img.len();
    let mut search = FactorizationSearch { image_size: k, candidates: 0, found: None };
    if k > bound {
        return Ok(search);
    }
    let at = |x: usize| img.binary_search(&h[x]).expect("in image");
    let mut lower = vec![vec![false; k]; k];
    for (a, row) in lower.iter_mut().enumerate() {
        row[a] = true;
    }
    for x in 0..d.len() {
        for y in 0..d.len() {
            if d.leq(x, y) {
                lower[at(x)][at(y)] = true;
            }
        }
    }
    let closed = FinPoset::from_relation(
        (0..k).map(|i| i.to_string()).collect(),
        &(0..k).flat_map(|a| (0..k).map(move |b| (a, b))).filter(|&(a, b)| lower[a][b]).collect::<Vec<_>>(),
    );
    let Ok(closed) = closed else { return Ok(search) };
    let free: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && !closed.leq(a, b) && cod.leq(img[a], img[b]))
        .collect();
    if (0..k).any(|a| (0..k).any(|b| closed.leq(a, b) && !cod.leq(img[a], img[b]))) {
        // h is not monotone; no intermediate order exists
        return Ok(search);
    }
    if free.len() > 20 {
        return Err(Error::ResourceBound(format!("{} optional order relations", free.len())));
    }
    let names: Vec<String> = img.iter().map(|&c| cod.poset().name(c).to_string()).collect();
    for mask in 0..1u64 << free.len() {
        let mut pairs: Vec<(usize, usize)> =
            (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).filter(|&(a, b)| closed.leq(a, b)).collect();
        pairs.extend(free.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &p)| p));
        let Ok(order) = FinPoset::from_relation(names.clone(), &pairs) else { continue };
        // the closure may add relations outside the codomain order
        if (0..k).any(|a| (0..k).any(|b| order.leq(a, b) && !cod.leq(img[a], img[b]))) {
            continue;
        }
        search.candidates += 1;
        let Ok(l) = FinLattice::from_poset(order) else { continue };
        if !accept(&l) {
            continue;
        }
        let e: Vec<usize> = (0..d.len()).map(at).collect();
        let m: Vec<usize> = img.clone();
        if !cls.admits(d, &l, &e) || !cls.admits(&l, cod, &m) {
            continue;
        }
        let fibres: Vec<Vec<usize>> = (0..k).map(|a| (0..d.len()).filter(|&x| e[x] == a).collect()).collect();
        if !search_maps(&l, d, cls, Some(&fibres))?.is_empty() {
            search.found = Some(pairs);
            return Ok(search);
        }
    }
    Ok(search)
}

/// The poset `y₁ > p < x > q < y₂`.
pub fn w_poset() -> FinPoset {
    let names = ["y1", "p", "x", "q", "y2"].map(String::from).to_vec();
    FinPoset::from_relation(names, &[(1, 0), (1, 2), (3, 2), (3, 4)]).expect("W is a poset")
}

/// `N₅`: `0 < a < b < 1` and `0 < c < 1`.
pub fn n5() -> FinLattice {
    let names = ["0", "a", "b", "c", "1"].map(String::from).to_vec();
    let p = FinPoset::from_relation(names, &[(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]).expect("N5 is a poset");
    FinLattice::from_poset(p).expect("N5 is a lattice")
}

/// The lattice `2^W`, the quotient `P = 2^W/(y₁ ∼ y₂)` and the projection.
pub fn w_quotient() -> Result<(FinLattice, Vec<usize>, FinPoset, Vec<usize>)> {
    let w = w_poset();
    let (two_w, yoneda) = downset_lattice(&w)?;
    let y1 = yoneda[w.index("y1").expect("y1")];
    let y2 = yoneda[w.index("y2").expect("y2")];
    let (p, proj) = two_w.poset().quotient(&[(y1, y2)])?;
    Ok((two_w, yoneda, p, proj))
}

/// `P` is not a lattice: `p` and `q` have upper bounds `x` and `y` but no
/// least one.
pub fn quotient_nonlattice_check() -> Result<Check> {
    let mut c = Check::new("quotient-not-a-lattice");
    let w = w_poset();
    let (two_w, yoneda, p, proj) = w_quotient()?;
    let at = |name: &str| proj[yoneda[w.index(name).expect("element of W")]];
    let (pp, qq, xx, yy) = (at("p"), at("q"), at("x"), at("y1"));
    c.examined = p.len() as u64;
    let bounds_ok = [xx, yy].iter().all(|&u| p.leq(pp, u) && p.leq(qq, u));
    let join = p.join(pp, qq);
    if !bounds_ok || join.is_some() || two_w.len() != 13 || p.len() != 12 {
        c.violation(Witness::new(format!(
            "expected |2^W| = 13, |P| = 12 and no join of p, q; got {}, {}, join {:?}",
            two_w.len(),
            p.len(),
            join.map(|j| p.name(j).to_string())
        )));
    } else {
        c.note(Witness::new(format!(
            "{} and {} are both below {} and {} but have no least upper bound",
            p.name(pp),
            p.name(qq),
            p.name(xx),
            p.name(yy)
        )));
    }
    let summary = format!(
        "|2^W| = {}, |P| = {}, pair ({}, {}) has no join in P",
        two_w.len(),
        p.len(),
        p.name(pp),
        p.name(qq)
    );
    Ok(c.finish(false, summary))
}

/// `2^W → P → 2^P` has no split-epi / mono factorization through a finite
/// lattice of size `≤ bound` in monotone maps.
pub fn lattice_factorization_check(bound: usize) -> Result<Check> {
    let mut c = Check::new("no-lattice-factorization");
    let (two_w, _, p, proj) = w_quotient()?;
    let (two_p, yoneda_p) = downset_lattice(&p)?;
    let h: Vec<usize> = (0..two_w.len()).map(|x| yoneda_p[proj[x]]).collect();
    if !MapClass::Monotone.admits(&two_w, &two_p, &h) {
        c.violation(Witness::new("the composite 2^W → P → 2^P is not monotone"));
    }
    let s = search_split_epi_mono(&two_w, &two_p, &h, MapClass::Monotone, |_| true, bound)?;
    c.examined = s.candidates as u64;
    if let Some(order) = &s.found {
        c.violation(Witness::new(format!("factorization through the order {order:?}")));
    }
    let summary = format!(
        "image of size {}, {} candidate intermediate orders within bound {bound}, none a lattice admitting a split epimorphism",
        s.image_size, s.candidates
    );
    Ok(c.finish(true, summary))
}

/// `2⁴ → N₅ → 2^{N₅}`, with `φ(S) = ⋀_{g ∉ S} g` over the non-top elements,
/// has no split-epi / mono factorization through a distributive lattice of
/// size `≤ bound` in binary-meet-preserving maps.
pub fn distributive_factorization_check(bound: usize) -> Result<Check> {
    let mut c = Check::new("no-distributive-factorization");
    let l = n5();
    if l.is_distributive() {
        c.violation(Witness::new("N5 came out distributive"));
    }
    let gens: Vec<usize> = (0..l.len()).filter(|&g| g != l.top()).collect();
    let d = FinLattice::boolean(gens.len());
    let phi: Vec<usize> = (0..d.len())
        .map(|s| gens.iter().enumerate().filter(|(i, _)| s & (1 << i) == 0).fold(l.top(), |acc, (_, &g)| l.meet(acc, g)))
        .collect();
    if !MapClass::MeetPreserving.admits(&d, &l, &phi) || (0..l.len()).any(|a| !phi.contains(&a)) {
        c.violation(Witness::new("φ is not a meet-preserving surjection"));
    }
    let (two_l, yoneda) = downset_lattice(l.poset())?;
    let h: Vec<usize> = phi.iter().map(|&a| yoneda[a]).collect();
    let s = search_split_epi_mono(&d, &two_l, &h, MapClass::MeetPreserving, FinLattice::is_distributive, bound)?;
    c.examined = s.candidates as u64;
    if let Some(order) = &s.found {
        c.violation(Witness::new(format!("factorization through the order {order:?}")));
    }
    let summary = format!(
        "image of size {}, {} candidate intermediate orders within bound {bound}, none distributive with a split epimorphism",
        s.image_size, s.candidates
    );
    Ok(c.finish(true, summary))
}

pub fn verify_counterexamples(bound: usize) -> Result<Vec<Check>> {
    Ok(vec![quotient_nonlattice_check()?, lattice_factorization_check(bound)?, distributive_factorization_check(bound)?])
}

/// Finite nonempty sets with degree `|S| − 1`: surjection / injection
/// factorizations are unique up to unique bijection, non-bijective
/// surjections lower degree and injections raise it, surjections split, and
/// surjections with the same pseudo-sections are pseudo-equal.
pub fn nonempty_sets_check(bound: usize) -> Result<Check> {
    if bound > 5 {
        return Err(Error::ResourceBound(format!("all maps between sets of size ≤ {bound}")));
    }
    let mut c = Check::new("nonempty-sets-reedy");
    let maps = |n: usize, m: usize| -> Vec<Vec<usize>> {
        (0..m.pow(n as u32))
            .map(|mut code| {
                (0..n)
                    .map(|_| {
                        let v = code % m;
                        code /= m;
                        v
                    })
                    .collect()
            })
            .collect()
    };
    let surjective = |f: &[usize], m: usize| (0..m).all(|b| f.contains(&b));
    let injective = |f: &[usize]| (0..f.len()).all(|a| (a + 1..f.len()).all(|b| f[a] != f[b]));
    let comp = |g: &[usize], f: &[usize]| f.iter().map(|&x| g[x]).collect::<Vec<_>>();
    for n in 1..=bound {
        for m in 1..=bound {
            for f in maps(n, m) {
                c.examined += 1;
                let (surj, inj) = (surjective(&f, m), injective(&f));
                if (surj && !inj && m >= n) || (inj && !surj && m <= n) {
                    c.violation(Witness::new(format!("{f:?} breaks degree monotonicity")));
                }
                let j = {
                    let mut im = f.clone();
                    im.sort_unstable();
                    im.dedup();
                    im.len()
                };
                let factorizations: Vec<(Vec<usize>, Vec<usize>)> = maps(n, j)
                    .into_iter()
                    .filter(|q| surjective(q, j))
                    .flat_map(|q| maps(j, m).into_iter().filter(|i| injective(i)).map(move |i| (q.clone(), i)))
                    .filter(|(q, i)| comp(i, q) == f)
                    .collect();
                let bijections: Vec<Vec<usize>> = maps(j, j).into_iter().filter(|b| injective(b)).collect();
                let (q0, i0) = &factorizations[0];
                for (q, i) in &factorizations {
                    let linking = bijections.iter().filter(|b| comp(b, q0) == *q && comp(i, b) == *i0).count();
                    if linking != 1 {
                        c.violation(Witness::new(format!("{f:?}: factorizations related by {linking} bijections")));
                    }
                }
                if surj && !maps(m, n).iter().any(|s| comp(&f, s) == (0..m).collect::<Vec<_>>()) {
                    c.violation(Witness::new(format!("surjection {f:?} has no section")));
                }
            }
        }
        for m in 1..=n {
            let surjections: Vec<Vec<usize>> = maps(n, m).into_iter().filter(|f| surjective(f, m)).collect();
            let bijections: Vec<Vec<usize>> = maps(m, m).into_iter().filter(|b| injective(b)).collect();
            let pseudo = |p: &[usize]| -> Vec<Vec<usize>> {
                maps(m, n).into_iter().filter(|i| injective(&comp(p, i))).collect()
            };
            let mut groups: BTreeMap<Vec<Vec<usize>>, Vec<Vec<usize>>> = BTreeMap::new();
            for p in surjections {
                groups.entry(pseudo(&p)).or_default().push(p);
            }
            for members in groups.values() {
                for p in &members[1..] {
                    if !bijections.iter().any(|b| comp(b, &members[0]) == *p) {
                        c.violation(Witness::new(format!("{:?} and {p:?} share pseudo-sections", members[0])));
                    }
                }
            }
        }
    }
    let summary = format!("{} maps between nonempty sets of size ≤ {bound}, degree |S| - 1", c.examined);
    Ok(c.finish(true, summary))
}

/// Posets up to isomorphism of every size `≤ max`, for Birkhoff checks.
pub fn small_posets(max: usize) -> Result<Vec<FinPoset>> {
    let mut out = Vec::new();
    for n in 0..=max {
        out.extend(posets_up_to_iso(n)?);
    }
    Ok(out)
}
