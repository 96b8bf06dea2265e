//! Cubical sites: which generators are admitted, their hom-sets, and membership.
//!
//! Two independent routes decide whether a vertex table is a site morphism:
//!
//! * [`enumerate_homs`] saturates the identities under post-composition with
//!   single generator atoms. This is the oracle.
//! * [`is_member`] decides membership structurally: read-once coordinate
//!   functions with disjoint supports for sites without diagonals, and the
//!   order-theoretic characterizations for sites with diagonals.
//!
//! [`Site`] caches hom-sets for the verification sweeps. Sites without
//! diagonals draw them from the closure; sites with diagonals draw them from
//! the direct characterization, since the closure is only saturated
//! empirically there.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::cube::{classify_map, dependency, CubeMap};
use crate::error::{Error, Result};
use crate::words::{atoms_at, ConnKind, GeneratorAtom};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Connections {
    None,
    Meet,
    Join,
    Both,
}

impl Connections {
    pub fn has_meet(self) -> bool {
        matches!(self, Connections::Meet | Connections::Both)
    }

    pub fn has_join(self) -> bool {
        matches!(self, Connections::Join | Connections::Both)
    }
}

/// Which structural generators a cubical site admits beyond faces and
/// projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteConfig {
    pub connections: Connections,
    pub symmetries: bool,
    pub reversals: bool,
    pub diagonals: bool,
}

impl SiteConfig {
    pub const PLAIN: SiteConfig = SiteConfig {
        connections: Connections::None,
        symmetries: false,
        reversals: false,
        diagonals: false,
    };

    /// Builds and validates a configuration.
    pub fn new(connections: Connections, symmetries: bool, reversals: bool, diagonals: bool) -> Result<Self> {
        let cfg = SiteConfig { connections, symmetries, reversals, diagonals };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.diagonals && !self.symmetries {
            return Err(Error::InvalidSite(
                "a site with diagonals automatically has symmetries; set s=1".to_string(),
            ));
        }
        if self.reversals && matches!(self.connections, Connections::Meet | Connections::Join) {
            return Err(Error::InvalidSite(
                "a site with reversals and one connection automatically has both; use c=both".to_string(),
            ));
        }
        Ok(())
    }

    /// All 18 valid configurations, non-diagonal ones first.
    pub fn all_valid() -> Vec<SiteConfig> {
        let mut out = Vec::new();
        for diagonals in [false, true] {
            for connections in [Connections::None, Connections::Meet, Connections::Join, Connections::Both] {
                for symmetries in [false, true] {
                    for reversals in [false, true] {
                        let cfg = SiteConfig { connections, symmetries, reversals, diagonals };
                        if cfg.validate().is_ok() {
                            out.push(cfg);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn non_diagonal() -> Vec<SiteConfig> {
        SiteConfig::all_valid().into_iter().filter(|c| !c.diagonals).collect()
    }

    pub fn diagonal() -> Vec<SiteConfig> {
        SiteConfig::all_valid().into_iter().filter(|c| c.diagonals).collect()
    }

    /// The canonical short name, e.g. `csr`, `cws`, `dcs`, `plain`.
    pub fn alias(&self) -> String {
        let mut s = String::new();
        if self.diagonals {
            s.push('d');
        }
        s.push_str(match self.connections {
            Connections::None => "",
            Connections::Meet => "cw",
            Connections::Join => "cv",
            Connections::Both => "c",
        });
        if self.symmetries {
            s.push('s');
        }
        if self.reversals {
            s.push('r');
        }
        if s.is_empty() {
            s.push_str("plain");
        }
        s
    }

    fn from_alias(s: &str) -> Option<SiteConfig> {
        if s == "plain" {
            return Some(SiteConfig::PLAIN);
        }
        let mut rest = s;
        let diagonals = rest.starts_with('d');
        if diagonals {
            rest = &rest[1..];
        }
        let connections = if let Some(r) = rest.strip_prefix("cw") {
            rest = r;
            Connections::Meet
        } else if let Some(r) = rest.strip_prefix("cv") {
            rest = r;
            Connections::Join
        } else if let Some(r) = rest.strip_prefix('c') {
            rest = r;
            Connections::Both
        } else {
            Connections::None
        };
        let symmetries = rest.starts_with('s');
        if symmetries {
            rest = &rest[1..];
        }
        let reversals = rest.starts_with('r');
        if reversals {
            rest = &rest[1..];
        }
        (rest.is_empty() && !s.is_empty()).then_some(SiteConfig { connections, symmetries, reversals, diagonals })
    }

    fn from_fields(s: &str) -> Result<SiteConfig> {
        let mut cfg = SiteConfig::PLAIN;
        for field in s.split(',') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::InvalidSite(format!("expected key=value, got `{field}`")))?;
            let flag = |v: &str| match v.trim() {
                "1" | "true" | "yes" => Ok(true),
                "0" | "false" | "no" => Ok(false),
                other => Err(Error::InvalidSite(format!("expected 0 or 1, got `{other}`"))),
            };
            match key.trim() {
                "c" => {
                    cfg.connections = match value.trim() {
                        "none" | "0" => Connections::None,
                        "meet" => Connections::Meet,
                        "join" => Connections::Join,
                        "both" | "1" => Connections::Both,
                        other => return Err(Error::InvalidSite(format!("unknown connections `{other}`"))),
                    }
                }
                "s" => cfg.symmetries = flag(value)?,
                "r" => cfg.reversals = flag(value)?,
                "d" => cfg.diagonals = flag(value)?,
                other => return Err(Error::InvalidSite(format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    /// The key-value form `c=both,s=1,r=0,d=0`.
    pub fn fields(&self) -> String {
        let c = match self.connections {
            Connections::None => "none",
            Connections::Meet => "meet",
            Connections::Join => "join",
            Connections::Both => "both",
        };
        format!(
            "c={c},s={},r={},d={}",
            self.symmetries as u8, self.reversals as u8, self.diagonals as u8
        )
    }
}

impl fmt::Display for SiteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alias())
    }
}

impl FromStr for SiteConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let cfg = if s.contains('=') {
            SiteConfig::from_fields(s)?
        } else {
            SiteConfig::from_alias(s).ok_or_else(|| Error::InvalidSite(format!("unknown site `{s}`")))?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// Closure oracle
// ---------------------------------------------------------------------------

/// Default cap on the number of maps the closure may visit.
pub const DEFAULT_STATE_BUDGET: usize = 12_000_000;

/// Maps out of `□ⁿ` packed as consecutive coordinate truth tables, `2ⁿ` bits each.
struct Packed {
    width: u32,
    mask: u128,
}

fn shl(x: u128, s: u32) -> u128 {
    if s >= 128 {
        0
    } else {
        x << s
    }
}

fn shr(x: u128, s: u32) -> u128 {
    if s >= 128 {
        0
    } else {
        x >> s
    }
}

impl Packed {
    fn new(n: usize) -> Self {
        let width = 1u32 << n;
        let mask = if width >= 128 { u128::MAX } else { (1u128 << width) - 1 };
        Packed { width, mask }
    }

    fn col(&self, x: u128, i: u32) -> u128 {
        shr(x, i * self.width) & self.mask
    }

    fn low(&self, x: u128, i: u32) -> u128 {
        let s = i * self.width;
        if s >= 128 {
            x
        } else {
            x & ((1u128 << s) - 1)
        }
    }

    fn insert(&self, x: u128, i: u32, c: u128) -> u128 {
        let high = shr(x, i * self.width);
        self.low(x, i) | shl(c, i * self.width) | shl(high, (i + 1) * self.width)
    }

    fn delete(&self, x: u128, i: u32) -> u128 {
        self.low(x, i) | shl(shr(x, (i + 1) * self.width), i * self.width)
    }

    fn set(&self, x: u128, i: u32, c: u128) -> u128 {
        (x & !shl(self.mask, i * self.width)) | shl(c, i * self.width)
    }

    fn identity(&self, n: usize) -> u128 {
        (0..n as u32).fold(0, |acc, i| {
            let col = (0..self.width).filter(|v| (v >> i) & 1 == 1).fold(0u128, |c, v| c | (1 << v));
            acc | shl(col, i * self.width)
        })
    }

    fn apply(&self, atom: GeneratorAtom, x: u128) -> u128 {
        let at = (atom.slot() - 1) as u32;
        match atom {
            GeneratorAtom::Face { eps, .. } => self.insert(x, at, if eps { self.mask } else { 0 }),
            GeneratorAtom::Proj { .. } => self.delete(x, at),
            GeneratorAtom::Conn { kind, .. } => {
                let (a, b) = (self.col(x, at), self.col(x, at + 1));
                let c = match kind {
                    ConnKind::Meet => a & b,
                    ConnKind::Join => a | b,
                };
                self.set(self.delete(x, at + 1), at, c)
            }
            GeneratorAtom::Sym { .. } => {
                let (a, b) = (self.col(x, at), self.col(x, at + 1));
                self.set(self.set(x, at, b), at + 1, a)
            }
            GeneratorAtom::Rev { .. } => x ^ shl(self.mask, at * self.width),
            GeneratorAtom::Diag { .. } => self.insert(x, at + 1, self.col(x, at)),
        }
    }

    fn unpack(&self, n: usize, k: usize, x: u128) -> CubeMap {
        CubeMap::from_fn(n, k, |v| {
            (0..k as u32).fold(0u32, |acc, i| acc | ((((self.col(x, i) >> v) & 1) as u32) << i))
        })
    }
}

/// Every map out of `□ⁿ` reachable from the identity by post-composing single
/// atoms, with all intermediate cubes of dimension at most `max_dim`.
/// Entry `k` of the result holds the reachable maps into `□^k`.
fn closure_from(
    cfg: &SiteConfig,
    class: GeneratorClass,
    n: usize,
    max_dim: usize,
    budget: usize,
) -> Result<Vec<HashSet<u128>>> {
    let packed = Packed::new(n);
    if n > 6 || (max_dim.max(n) + 1) as u64 * packed.width as u64 > 128 {
        return Err(Error::ResourceBound(format!(
            "closure from □{n} up to □{max_dim} exceeds the packed table width"
        )));
    }
    let atoms: Vec<Vec<GeneratorAtom>> = (0..=max_dim)
        .map(|k| {
            atoms_at(cfg, k)
                .into_iter()
                .filter(|a| class.admits(*a) && a.cod_dim(k).is_some_and(|c| c <= max_dim))
                .collect()
        })
        .collect();
    let mut seen: Vec<HashSet<u128>> = vec![HashSet::new(); max_dim + 1];
    let mut frontier = vec![(n, packed.identity(n))];
    seen[n].insert(frontier[0].1);
    let mut total = 1usize;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (k, x) in frontier {
            for &atom in &atoms[k] {
                let cod = atom.cod_dim(k).expect("filtered above");
                let y = packed.apply(atom, x);
                if seen[cod].insert(y) {
                    total += 1;
                    if total > budget {
                        return Err(Error::ResourceBound(format!(
                            "closure for {cfg} from □{n} (dims ≤ {max_dim}) visited more than {budget} maps"
                        )));
                    }
                    next.push((cod, y));
                }
            }
        }
        frontier = next;
    }
    Ok(seen)
}

/// Restricts the closure to part of the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorClass {
    All,
    /// Projections, connections, symmetries and reversals.
    Degeneracies,
    /// Faces, symmetries and reversals.
    Faces,
}

impl GeneratorClass {
    fn admits(self, atom: GeneratorAtom) -> bool {
        match (self, atom) {
            (GeneratorClass::All, _) => true,
            (_, GeneratorAtom::Sym { .. } | GeneratorAtom::Rev { .. }) => true,
            (GeneratorClass::Degeneracies, GeneratorAtom::Proj { .. } | GeneratorAtom::Conn { .. }) => true,
            (GeneratorClass::Faces, GeneratorAtom::Face { .. }) => true,
            _ => false,
        }
    }
}

/// Maps `□ⁿ → □ᵐ` in the monoidal subcategory generated by one class of
/// generators. Degeneracy generators never raise dimension and face
/// generators never lower it, so intermediates stay within `max(n, m)`.
pub fn enumerate_generated(cfg: &SiteConfig, class: GeneratorClass, n: usize, m: usize) -> Result<Vec<CubeMap>> {
    cfg.validate()?;
    let packed = Packed::new(n);
    let levels = closure_from(cfg, class, n, n.max(m), DEFAULT_STATE_BUDGET)?;
    let mut maps: Vec<CubeMap> = levels[m].iter().map(|&x| packed.unpack(n, m, x)).collect();
    maps.sort();
    Ok(maps)
}

/// A hom-set produced by the closure oracle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomSet {
    pub cfg: SiteConfig,
    pub n: usize,
    pub m: usize,
    pub slack: usize,
    /// Sorted by vertex table.
    pub maps: Vec<CubeMap>,
    /// Whether the closure is known to be saturated.
    pub complete: bool,
}

impl HomSet {
    pub fn contains(&self, f: &CubeMap) -> bool {
        self.maps.binary_search(f).is_ok()
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

pub fn enumerate_homs(cfg: &SiteConfig, n: usize, m: usize, slack: usize) -> Result<HomSet> {
    enumerate_homs_with_budget(cfg, n, m, slack, DEFAULT_STATE_BUDGET)
}

/// Saturates `Hom(□ⁿ, -)` over cubes of dimension `≤ max(n, m) + slack`.
///
/// Without diagonals every map factors as `i c s r p` with no intermediate
/// cube larger than `max(n, m)`, so slack 0 is already complete. With
/// diagonals the result is marked complete only if one more level of slack
/// adds nothing, and that re-run fits in the budget.
pub fn enumerate_homs_with_budget(
    cfg: &SiteConfig,
    n: usize,
    m: usize,
    slack: usize,
    budget: usize,
) -> Result<HomSet> {
    cfg.validate()?;
    let max_dim = n.max(m) + slack;
    let packed = Packed::new(n);
    let collect = |levels: &[HashSet<u128>]| {
        let mut maps: Vec<CubeMap> = levels[m].iter().map(|&x| packed.unpack(n, m, x)).collect();
        maps.sort();
        maps
    };
    let maps = collect(&closure_from(cfg, GeneratorClass::All, n, max_dim, budget)?);
    let complete = if !cfg.diagonals {
        true
    } else {
        match closure_from(cfg, GeneratorClass::All, n, max_dim + 1, budget) {
            Ok(levels) => collect(&levels) == maps,
            Err(e) if e.is_resource_bound() => false,
            Err(e) => return Err(e),
        }
    };
    Ok(HomSet { cfg: *cfg, n, m, slack, maps, complete })
}

// ---------------------------------------------------------------------------
// Structural membership
// ---------------------------------------------------------------------------

/// Which read-once formulas a coordinate function may be.
#[derive(Clone, Copy, Debug)]
struct Clone_ {
    meet: bool,
    join: bool,
    negation: bool,
    ordered: bool,
}

/// Truth table of a coordinate function restricted to the variables it
/// depends on, indexed by the bits of those variables in increasing order.
fn restrict(f: &CubeMap, output: usize, vars: &[usize]) -> Vec<bool> {
    (0..1u32 << vars.len())
        .map(|a| {
            let v = vars.iter().enumerate().fold(0u32, |acc, (k, &j)| acc | (((a >> k) & 1) << (j - 1)));
            f.coord(output, v)
        })
        .collect()
}

/// `tt` depends on all of its `k` variables. Decides whether it is a
/// read-once formula in the clone, by recursive bipartition of the variables.
fn read_once(tt: &[bool], k: usize, clone: Clone_) -> bool {
    if k == 1 {
        return match (tt[0], tt[1]) {
            (false, true) => true,
            (true, false) => clone.negation,
            _ => false,
        };
    }
    let full = (1u32 << k) - 1;
    let splits: Vec<u32> = if clone.ordered {
        (1..k).map(|t| (1u32 << t) - 1).collect()
    } else {
        // subsets containing variable 0, proper and nonempty
        (1..full).filter(|s| s & 1 == 1).collect()
    };
    for left in splits {
        let (a_vars, b_vars): (Vec<u32>, Vec<u32>) = (0..k as u32).partition(|&i| (left >> i) & 1 == 1);
        if clone.meet && split_product(tt, &a_vars, &b_vars, true, clone) {
            return true;
        }
        if clone.join && split_product(tt, &a_vars, &b_vars, false, clone) {
            return true;
        }
    }
    false
}

/// Tests `tt = g(A) ∧ h(B)` (`and = true`) or `tt = g(A) ∨ h(B)`, and recurses.
fn split_product(tt: &[bool], a_vars: &[u32], b_vars: &[u32], and: bool, clone: Clone_) -> bool {
    let spread = |bits: u32, vars: &[u32]| {
        vars.iter().enumerate().fold(0u32, |acc, (k, &j)| acc | (((bits >> k) & 1) << j))
    };
    let target = and; // the value forming a product set
    let rows: Vec<bool> = (0..1u32 << a_vars.len())
        .map(|a| (0..1u32 << b_vars.len()).any(|b| tt[(spread(a, a_vars) | spread(b, b_vars)) as usize] == target))
        .collect();
    let cols: Vec<bool> = (0..1u32 << b_vars.len())
        .map(|b| (0..1u32 << a_vars.len()).any(|a| tt[(spread(a, a_vars) | spread(b, b_vars)) as usize] == target))
        .collect();
    for a in 0..1u32 << a_vars.len() {
        for b in 0..1u32 << b_vars.len() {
            let v = tt[(spread(a, a_vars) | spread(b, b_vars)) as usize];
            if (v == target) != (rows[a as usize] && cols[b as usize]) {
                return false;
            }
        }
    }
    let g: Vec<bool> = rows.iter().map(|&r| if and { r } else { !r }).collect();
    let h: Vec<bool> = cols.iter().map(|&c| if and { c } else { !c }).collect();
    read_once(&g, a_vars.len(), clone) && read_once(&h, b_vars.len(), clone)
}

/// Structural membership decision. See the module docs.
pub fn is_member(cfg: &SiteConfig, f: &CubeMap) -> bool {
    if cfg.diagonals {
        return is_member_diagonal(cfg, f);
    }
    // each input feeds at most one output; most tables fail here
    for j in 0..f.dom() {
        let bit = 1u32 << j;
        let changed = (0..1u32 << f.dom())
            .filter(|v| v & bit == 0)
            .fold(0u32, |acc, v| acc | (f.apply(v) ^ f.apply(v | bit)));
        if changed.count_ones() > 1 {
            return false;
        }
    }
    let deps = dependency(f);
    if !deps.pairwise_disjoint() {
        return false;
    }
    let clone = Clone_ {
        meet: cfg.connections.has_meet(),
        join: cfg.connections.has_join(),
        negation: cfg.reversals,
        ordered: !cfg.symmetries,
    };
    let mut last_max = 0usize;
    for i in 1..=f.cod() {
        let vars = deps.of(i);
        if vars.is_empty() {
            continue;
        }
        if !cfg.symmetries {
            if vars[0] <= last_max {
                return false;
            }
            last_max = *vars.last().expect("nonempty");
        }
        if !read_once(&restrict(f, i, vars), vars.len(), clone) {
            return false;
        }
    }
    true
}

fn is_member_diagonal(cfg: &SiteConfig, f: &CubeMap) -> bool {
    let vertices = 0..1u32 << f.dom();
    match (cfg.connections, cfg.reversals) {
        (Connections::None, negation) => {
            let deps = dependency(f);
            (1..=f.cod()).all(|i| match deps.of(i) {
                [] => true,
                [j] => {
                    let tt = restrict(f, i, &[*j]);
                    tt == [false, true] || (negation && tt == [true, false])
                }
                _ => false,
            })
        }
        (Connections::Meet, _) => vertices
            .clone()
            .all(|v| vertices.clone().all(|w| f.apply(v & w) == f.apply(v) & f.apply(w))),
        (Connections::Join, _) => vertices
            .clone()
            .all(|v| vertices.clone().all(|w| f.apply(v | w) == f.apply(v) | f.apply(w))),
        (Connections::Both, false) => vertices.clone().all(|v| {
            (0..f.dom()).all(|j| {
                let w = v | (1 << j);
                f.apply(v) & !f.apply(w) == 0
            })
        }),
        (Connections::Both, true) => true,
    }
}

/// Isomorphisms `□ⁿ → □ⁿ` of the site: coordinate permutations if the site has
/// symmetries, coordinate-wise reversals if it has reversals. Sorted.
pub fn iso_group(cfg: &SiteConfig, n: usize) -> Vec<CubeMap> {
    let perms: Vec<Vec<usize>> = if cfg.symmetries { permutations(n) } else { vec![(0..n).collect()] };
    let masks: Vec<u32> = if cfg.reversals { (0..1u32 << n).collect() } else { vec![0] };
    let mut out = Vec::with_capacity(perms.len() * masks.len());
    for perm in &perms {
        for &mask in &masks {
            out.push(CubeMap::from_fn(n, n, |v| {
                let moved = perm.iter().enumerate().fold(0u32, |acc, (src, &dst)| acc | (((v >> src) & 1) << dst));
                moved ^ mask
            }));
        }
    }
    out.sort();
    out
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

// ---------------------------------------------------------------------------
// Cached hom-sets
// ---------------------------------------------------------------------------

/// A hom-set split by shape. Every list is sorted by vertex table.
#[derive(Debug)]
pub struct Homs {
    pub all: Vec<CubeMap>,
    /// Surjective members: the degeneracies `A₋`.
    pub minus: Vec<CubeMap>,
    /// Injective members: the face class `A₊`.
    pub plus: Vec<CubeMap>,
}

impl Homs {
    pub fn new(mut all: Vec<CubeMap>) -> Self {
        all.sort();
        all.dedup();
        let minus = all.iter().filter(|f| classify_map(f).surjective).cloned().collect();
        let plus = all.iter().filter(|f| classify_map(f).injective).cloned().collect();
        Homs { all, minus, plus }
    }

    pub fn contains(&self, f: &CubeMap) -> bool {
        self.all.binary_search(f).is_ok()
    }
}

/// Source of hom-sets for the verification sweeps.
pub trait HomSource: Sync {
    fn config(&self) -> SiteConfig;

    fn homs(&self, n: usize, m: usize) -> Result<Arc<Homs>>;

    fn contains(&self, f: &CubeMap) -> Result<bool> {
        Ok(self.homs(f.dom(), f.cod())?.contains(f))
    }

    fn isos(&self, n: usize) -> Result<Vec<CubeMap>> {
        Ok(self.homs(n, n)?.all.iter().filter(|f| classify_map(f).iso).cloned().collect())
    }
}

/// A site with a write-once hom-set cache.
pub struct Site {
    cfg: SiteConfig,
    budget: usize,
    cache: RwLock<HashMap<(usize, usize), Arc<Homs>>>,
}

impl Site {
    pub fn new(cfg: SiteConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Site { cfg, budget: DEFAULT_STATE_BUDGET, cache: RwLock::new(HashMap::new()) })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn cfg(&self) -> &SiteConfig {
        &self.cfg
    }

    fn compute(&self, n: usize, m: usize) -> Result<Vec<CubeMap>> {
        if !self.cfg.diagonals {
            return Ok(enumerate_homs_with_budget(&self.cfg, n, m, 0, self.budget)?.maps);
        }
        // Diagonal sites are cartesian: a map is any tuple of admissible
        // coordinate functions.
        let coords: Vec<u64> = (0..1u64 << (1u32 << n))
            .filter(|&tt| is_member(&self.cfg, &CubeMap::from_fn(n, 1, |v| ((tt >> v) & 1) as u32)))
            .collect();
        let count = (coords.len() as f64).powi(m as i32);
        if count > self.budget as f64 {
            return Err(Error::ResourceBound(format!(
                "Hom(□{n}, □{m}) in {} has about {count:.0} maps",
                self.cfg
            )));
        }
        let mut tuples: Vec<Vec<u64>> = vec![Vec::new()];
        for _ in 0..m {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    coords.iter().map(move |&c| {
                        let mut t = t.clone();
                        t.push(c);
                        t
                    })
                })
                .collect();
        }
        Ok(tuples
            .into_iter()
            .map(|cols| {
                CubeMap::from_fn(n, m, |v| {
                    cols.iter().enumerate().fold(0u32, |acc, (i, c)| acc | ((((c >> v) & 1) as u32) << i))
                })
            })
            .collect())
    }
}

impl HomSource for Site {
    fn config(&self) -> SiteConfig {
        self.cfg
    }

    fn homs(&self, n: usize, m: usize) -> Result<Arc<Homs>> {
        if let Some(h) = self.cache.read().expect("cache lock").get(&(n, m)) {
            return Ok(Arc::clone(h));
        }
        let homs = Arc::new(Homs::new(self.compute(n, m)?));
        let mut cache = self.cache.write().expect("cache lock");
        Ok(Arc::clone(cache.entry((n, m)).or_insert(homs)))
    }
}

/// A hom source with maps removed or added; used to inject faults into the
/// verification sweeps.
pub struct PatchedSite<'a> {
    pub inner: &'a dyn HomSource,
    pub removed: Vec<CubeMap>,
    pub added: Vec<CubeMap>,
}

impl HomSource for PatchedSite<'_> {
    fn config(&self) -> SiteConfig {
        self.inner.config()
    }

    fn homs(&self, n: usize, m: usize) -> Result<Arc<Homs>> {
        let base = self.inner.homs(n, m)?;
        let mut all: Vec<CubeMap> = base.all.iter().filter(|f| !self.removed.contains(f)).cloned().collect();
        all.extend(self.added.iter().filter(|f| f.dom() == n && f.cod() == m).cloned());
        Ok(Arc::new(Homs::new(all)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{evaluate, parse};

    fn site(s: &str) -> SiteConfig {
        s.parse().unwrap()
    }

    fn eval(text: &str, dom: usize) -> CubeMap {
        evaluate(&parse(text, dom).unwrap()).unwrap()
    }

    #[test]
    fn config_counts_and_aliases() {
        assert_eq!(SiteConfig::non_diagonal().len(), 12);
        assert_eq!(SiteConfig::diagonal().len(), 6);
        for cfg in SiteConfig::all_valid() {
            assert_eq!(cfg.alias().parse::<SiteConfig>().unwrap(), cfg);
            assert_eq!(cfg.fields().parse::<SiteConfig>().unwrap(), cfg);
        }
        assert_eq!(site("c=both,s=1,r=0,d=0"), site("cs"));
        assert_eq!(site("cw").connections, Connections::Meet);
        assert!("cwr".parse::<SiteConfig>().is_err());
        assert!("d".parse::<SiteConfig>().is_err());
        assert!("c=meet,r=1".parse::<SiteConfig>().is_err());
        assert!("bogus".parse::<SiteConfig>().is_err());
        assert!("".parse::<SiteConfig>().is_err());
    }

    #[test]
    fn packed_atoms_agree_with_vertex_tables() {
        let cfg = site("dcsr");
        for n in 0..=3 {
            let packed = Packed::new(n);
            for k in 0..=4usize {
                // a fixed non-trivial starting map □ⁿ → □^k
                let start = CubeMap::from_fn(n, k, |v| (v.wrapping_mul(2654435761) >> 7) & ((1 << k) - 1));
                let x = (0..k as u32).fold(0u128, |acc, i| acc | ((start.column(i as usize + 1) as u128) << (i * packed.width)));
                assert_eq!(packed.unpack(n, k, x), start);
                for atom in atoms_at(&cfg, k) {
                    let want = atom.to_map(k).unwrap().after(&start).unwrap();
                    let got = packed.unpack(n, want.cod(), packed.apply(atom, x));
                    assert_eq!(got, want, "{atom} on {start}");
                }
            }
        }
    }

    #[test]
    fn plain_endomaps_of_interval() {
        let h = enumerate_homs(&SiteConfig::PLAIN, 1, 1, 0).unwrap();
        assert_eq!(h.maps, vec![eval("d1- . p1", 1), CubeMap::identity(1), eval("d1+ . p1", 1)]);
        assert!(h.complete);
        // independent check: all four functions 2 → 2 except negation
        let all: Vec<CubeMap> = (0..4u32).map(|t| CubeMap::new(1, 1, vec![t & 1, t >> 1]).unwrap()).collect();
        let kept: Vec<_> = all.into_iter().filter(|f| f.table() != [1, 0]).collect();
        assert_eq!(kept.len(), h.len());
        assert!(kept.iter().all(|f| h.contains(f)));
    }

    #[test]
    fn csr_binary_functions_exclude_parities() {
        let h = enumerate_homs(&site("csr"), 2, 1, 0).unwrap();
        assert_eq!(h.len(), 14);
        let xor = CubeMap::new(2, 1, vec![0, 1, 1, 0]).unwrap();
        let xnor = CubeMap::new(2, 1, vec![1, 0, 0, 1]).unwrap();
        assert!(!h.contains(&xor) && !h.contains(&xnor));
        for tt in 0..16u32 {
            let f = CubeMap::from_fn(2, 1, |v| (tt >> v) & 1);
            assert_eq!(is_member(&site("csr"), &f), h.contains(&f));
        }
    }

    #[test]
    fn zero_cube_endomorphisms() {
        for cfg in SiteConfig::all_valid() {
            let h = enumerate_homs(&cfg, 0, 0, if cfg.diagonals { 2 } else { 0 }).unwrap();
            assert_eq!(h.maps, vec![CubeMap::identity(0)]);
        }
    }

    #[test]
    fn membership_examples() {
        let meet_join = CubeMap::from_fn(2, 2, |v| ((v & 1) & (v >> 1)) | (((v & 1) | (v >> 1)) << 1));
        assert!(!is_member(&site("cs"), &meet_join));
        assert!(is_member(&site("dcs"), &meet_join));
        let maj = CubeMap::from_fn(3, 1, |v| (v.count_ones() >= 2) as u32);
        assert!(!is_member(&site("csr"), &maj));
        assert!(is_member(&site("dcs"), &maj));
        let rho = eval("r1", 1);
        assert!(!is_member(&SiteConfig::PLAIN, &rho));
        assert!(is_member(&site("r"), &rho));
    }

    #[test]
    fn ordering_without_symmetries() {
        // (x, y, z) ↦ (x ∧ z, y) interleaves supports: needs symmetries
        let f = CubeMap::from_fn(3, 2, |v| ((v & 1) & (v >> 2)) | (((v >> 1) & 1) << 1));
        assert!(!is_member(&site("c"), &f));
        assert!(is_member(&site("cs"), &f));
        // (x, y, z) ↦ x ∧ z skips the trivial y: fine without symmetries
        let g = CubeMap::from_fn(3, 1, |v| (v & 1) & (v >> 2));
        assert!(is_member(&site("cw"), &g));
        assert!(!is_member(&site("cv"), &g));
        // x ∧ (y ∨ z) vs (x ∧ z) ∨ y: the second needs a non-contiguous split
        let h = CubeMap::from_fn(3, 1, |v| ((v & 1) & (v >> 2)) | ((v >> 1) & 1));
        assert!(!is_member(&site("c"), &h));
        assert!(is_member(&site("cs"), &h));
    }

    #[test]
    fn iso_groups() {
        assert_eq!(iso_group(&SiteConfig::PLAIN, 2), vec![CubeMap::identity(2)]);
        assert_eq!(iso_group(&site("s"), 2), vec![CubeMap::identity(2), eval("x1", 2)]);
        assert_eq!(iso_group(&site("sr"), 2).len(), 8);
        assert_eq!(iso_group(&site("r"), 3).len(), 8);
        assert_eq!(iso_group(&site("csr"), 3).len(), 48);
        // oracle: bijective members of Hom(□², □²) in □_{s,r}
        let h = enumerate_homs(&site("sr"), 2, 2, 0).unwrap();
        let bij: Vec<_> = h.maps.iter().filter(|f| f.shape().iso).cloned().collect();
        assert_eq!(bij, iso_group(&site("sr"), 2));
    }

    #[test]
    fn cached_site_matches_closure() {
        let s = Site::new(site("cs")).unwrap();
        let a = s.homs(2, 1).unwrap();
        let b = s.homs(2, 1).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.all, enumerate_homs(&site("cs"), 2, 1, 0).unwrap().maps);
        assert_eq!(s.isos(2).unwrap(), iso_group(&site("cs"), 2));
    }

    #[test]
    fn budget_is_enforced() {
        let err = enumerate_homs_with_budget(&site("dcsr"), 2, 2, 2, 100).unwrap_err();
        assert!(err.is_resource_bound());
    }
}
