//! Truncated cubical sets and their Eilenberg-Zilber decompositions.
//!
//! A cubical set is stored by its cells in each dimension `≤ trunc` and the
//! contravariant action of every generator atom between those dimensions. On
//! load the action is extended to all site maps by a breadth-first walk over
//! words, which doubles as the functoriality check.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{classify_map, compose, CubeMap};
use crate::error::{Error, Result};
use crate::reedy::require_non_diagonal;
use crate::report::{Check, Witness};
use crate::sites::{HomSource, Site, SiteConfig};
use crate::words::{atoms_at, GeneratorAtom, GeneratorWord};

/// The on-disk form. Action keys are `"<atom>@<k>"`, where `k` is the
/// dimension of the cube the atom starts from; the action runs the other way,
/// from cells of the atom's codomain to cells of dimension `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicalSetFile {
    pub site: String,
    pub trunc: usize,
    pub cells: BTreeMap<String, Vec<String>>,
    pub actions: BTreeMap<String, BTreeMap<String, String>>,
}

pub struct TruncatedCubicalSet {
    site: Site,
    trunc: usize,
    cells: Vec<Vec<String>>,
    atoms: BTreeMap<(GeneratorAtom, usize), Vec<usize>>,
    /// Action of every site map between dims `≤ trunc`, from cells of its
    /// codomain to cells of its domain.
    maps: HashMap<CubeMap, Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EzDecomposition {
    pub dim: usize,
    pub cell: String,
    /// Degeneracy `q: □ᵏ → □ʲ`.
    pub q: CubeMap,
    /// Nondegenerate `y ∈ X_j` with `q*(y) = x`.
    pub y: String,
}

fn key(atom: GeneratorAtom, dim: usize) -> String {
    format!("{atom}@{dim}")
}

impl TruncatedCubicalSet {
    /// Builds and validates a cubical set from cell lists and atom actions on
    /// cell indices.
    pub fn new(
        cfg: SiteConfig,
        trunc: usize,
        cells: Vec<Vec<String>>,
        atoms: BTreeMap<(GeneratorAtom, usize), Vec<usize>>,
    ) -> Result<Self> {
        let site = Site::new(cfg)?;
        if cells.len() > trunc + 1 {
            return Err(Error::CubicalSet(format!("cells above the truncation {trunc}")));
        }
        let mut cells = cells;
        cells.resize(trunc + 1, Vec::new());
        for dim in 0..=trunc {
            for atom in atoms_at(&cfg, dim) {
                let cod = atom.cod_dim(dim).expect("atom fits");
                if cod > trunc {
                    continue;
                }
                let Some(table) = atoms.get(&(atom, dim)) else {
                    if cells[cod].is_empty() {
                        continue;
                    }
                    return Err(Error::CubicalSet(format!("missing action for {}", key(atom, dim))));
                };
                if table.len() != cells[cod].len() || table.iter().any(|&c| c >= cells[dim].len()) {
                    return Err(Error::CubicalSet(format!("action {} does not map X{cod} to X{dim}", key(atom, dim))));
                }
            }
        }
        let mut x = TruncatedCubicalSet { site, trunc, cells, atoms, maps: HashMap::new() };
        x.extend_to_maps()?;
        Ok(x)
    }

    pub fn empty(cfg: SiteConfig, trunc: usize) -> Result<Self> {
        TruncatedCubicalSet::new(cfg, trunc, vec![Vec::new(); trunc + 1], BTreeMap::new())
    }

    fn atom_action(&self, atom: GeneratorAtom, dim: usize) -> Vec<usize> {
        let cod = atom.cod_dim(dim).expect("atom fits");
        self.atoms.get(&(atom, dim)).cloned().unwrap_or_else(|| {
            debug_assert!(self.cells[cod].is_empty());
            Vec::new()
        })
    }

    /// Breadth-first over words out of each `□ⁿ`. Every edge `f ↦ a ∘ f` is
    /// compared against the action already recorded for `a ∘ f`, which by
    /// induction on word length makes all words for a map act alike.
    fn extend_to_maps(&mut self) -> Result<()> {
        let cfg = self.site.config();
        let mut maps: HashMap<CubeMap, Vec<usize>> = HashMap::new();
        for n in 0..=self.trunc {
            let mut words: HashMap<CubeMap, GeneratorWord> = HashMap::new();
            let id = CubeMap::identity(n);
            let id_action: Vec<usize> = (0..self.cells[n].len()).collect();
            words.insert(id.clone(), GeneratorWord::identity(n));
            maps.insert(id.clone(), id_action);
            let mut queue = VecDeque::from([id]);
            while let Some(f) = queue.pop_front() {
                let m = f.cod();
                for atom in atoms_at(&cfg, m) {
                    let cod = atom.cod_dim(m).expect("atom fits");
                    if cod > self.trunc {
                        continue;
                    }
                    let step = atom.to_map(m)?;
                    let g = compose(&step, &f)?;
                    let acts = self.atom_action(atom, m);
                    let current = &maps[&f];
                    let action: Vec<usize> = acts.iter().map(|&c| current[c]).collect();
                    let mut word = words[&f].clone();
                    word.push(atom);
                    match maps.get(&g) {
                        Some(existing) if *existing != action => {
                            return Err(Error::Functoriality {
                                left: words[&g].to_string(),
                                right: word.to_string(),
                                map: g.to_string(),
                            });
                        }
                        Some(_) => {}
                        None => {
                            maps.insert(g.clone(), action);
                            words.insert(g.clone(), word);
                            queue.push_back(g);
                        }
                    }
                }
            }
        }
        self.maps = maps;
        Ok(())
    }

    pub fn config(&self) -> SiteConfig {
        self.site.config()
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn cells(&self, dim: usize) -> &[String] {
        self.cells.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn cell_index(&self, dim: usize, id: &str) -> Option<usize> {
        self.cells(dim).iter().position(|c| c == id)
    }

    /// `f*(x)` for `f: □ʲ → □ᵏ` and `x ∈ X_k`, as a cell index in `X_j`.
    pub fn act(&self, f: &CubeMap, x: usize) -> Result<usize> {
        let table = self
            .maps
            .get(f)
            .ok_or_else(|| Error::CubicalSet(format!("{f} is not a site map within the truncation")))?;
        table.get(x).copied().ok_or_else(|| Error::CubicalSet(format!("no cell {x} in X{}", f.cod())))
    }

    /// Representable `y□ᵐ`: `X_k = Hom(□ᵏ, □ᵐ)` acted on by precomposition.
    pub fn representable(cfg: SiteConfig, m: usize, trunc: usize) -> Result<Self> {
        let site = Site::new(cfg)?;
        let homs: Vec<Vec<CubeMap>> =
            (0..=trunc).map(|k| site.homs(k, m).map(|h| h.all.clone())).collect::<Result<_>>()?;
        let cells = homs.iter().map(|h| h.iter().map(|f| f.to_string()).collect()).collect();
        let mut atoms = BTreeMap::new();
        for dim in 0..=trunc {
            for atom in atoms_at(&cfg, dim) {
                let cod = atom.cod_dim(dim).expect("atom fits");
                if cod > trunc {
                    continue;
                }
                let a = atom.to_map(dim)?;
                let table = homs[cod]
                    .iter()
                    .map(|x| {
                        let y = compose(x, &a).expect("dims match");
                        homs[dim].binary_search(&y).map_err(|_| Error::Internal(format!("{y} missing from Hom")))
                    })
                    .collect::<Result<_>>()?;
                atoms.insert((atom, dim), table);
            }
        }
        TruncatedCubicalSet::new(cfg, trunc, cells, atoms)
    }

    /// The quotient by the smallest congruence identifying each given pair of
    /// same-dimensional cells. Classes are named by their first cell.
    pub fn quotient(&self, pairs: &[(usize, &str, &str)]) -> Result<Self> {
        let mut parent: Vec<Vec<usize>> = self.cells.iter().map(|c| (0..c.len()).collect()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut pending: Vec<(usize, usize, usize)> = Vec::new();
        for &(dim, a, b) in pairs {
            let ia = self.cell_index(dim, a).ok_or_else(|| Error::CubicalSet(format!("no cell {a} in X{dim}")))?;
            let ib = self.cell_index(dim, b).ok_or_else(|| Error::CubicalSet(format!("no cell {b} in X{dim}")))?;
            pending.push((dim, ia, ib));
        }
        while let Some((dim, a, b)) = pending.pop() {
            let (ra, rb) = (find(&mut parent[dim], a), find(&mut parent[dim], b));
            if ra == rb {
                continue;
            }
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[dim][hi] = lo;
            for ((atom, to), table) in &self.atoms {
                if atom.cod_dim(*to) == Some(dim) {
                    pending.push((*to, table[a], table[b]));
                }
            }
        }
        let mut cells = Vec::new();
        let mut index: Vec<Vec<usize>> = Vec::new();
        for (dim, p) in parent.iter_mut().enumerate() {
            let mut names = Vec::new();
            let mut idx = vec![0; p.len()];
            let mut seen = HashMap::new();
            for x in 0..p.len() {
                let r = find(p, x);
                idx[x] = *seen.entry(r).or_insert_with(|| {
                    names.push(self.cells[dim][r].clone());
                    names.len() - 1
                });
            }
            cells.push(names);
            index.push(idx);
        }
        let mut atoms = BTreeMap::new();
        for ((atom, to), table) in &self.atoms {
            let cod = atom.cod_dim(*to).expect("atom fits");
            let mut t = vec![0; cells[cod].len()];
            for (x, &y) in table.iter().enumerate() {
                t[index[cod][x]] = index[*to][y];
            }
            atoms.insert((*atom, *to), t);
        }
        TruncatedCubicalSet::new(self.config(), self.trunc, cells, atoms)
    }

    pub fn from_file(file: &CubicalSetFile) -> Result<Self> {
        let cfg: SiteConfig = file.site.parse()?;
        let trunc = file.trunc;
        let mut cells = vec![Vec::new(); trunc + 1];
        for (dim, ids) in &file.cells {
            let d: usize = dim.parse().map_err(|_| Error::CubicalSet(format!("bad dimension key {dim:?}")))?;
            if d > trunc {
                return Err(Error::CubicalSet(format!("cells in dimension {d} above the truncation {trunc}")));
            }
            cells[d] = ids.clone();
        }
        let mut atoms = BTreeMap::new();
        for (k, table) in &file.actions {
            let (atom_text, dim_text) =
                k.split_once('@').ok_or_else(|| Error::CubicalSet(format!("action key {k:?} lacks '@'")))?;
            let atom: GeneratorAtom = atom_text.parse()?;
            let dim: usize = dim_text.parse().map_err(|_| Error::CubicalSet(format!("bad dimension in {k:?}")))?;
            let cod = atom
                .cod_dim(dim)
                .ok_or_else(|| Error::SlotOutOfRange { atom: atom.to_string(), dim })?;
            if dim > trunc || cod > trunc {
                return Err(Error::CubicalSet(format!("action {k} leaves the truncation")));
            }
            if !atom.allowed_in(&cfg) {
                return Err(Error::CubicalSet(format!("atom {atom} is not in the site {cfg}")));
            }
            let lookup = |d: usize, id: &str| {
                cells[d]
                    .iter()
                    .position(|c| c == id)
                    .ok_or_else(|| Error::CubicalSet(format!("action {k} names unknown cell {id:?} of X{d}")))
            };
            let mut t = vec![usize::MAX; cells[cod].len()];
            for (from, to) in table {
                t[lookup(cod, from)?] = lookup(dim, to)?;
            }
            if let Some(missing) = t.iter().position(|&c| c == usize::MAX) {
                return Err(Error::CubicalSet(format!("action {k} undefined on {:?}", cells[cod][missing])));
            }
            atoms.insert((atom, dim), t);
        }
        TruncatedCubicalSet::new(cfg, trunc, cells, atoms)
    }

    pub fn to_file(&self) -> CubicalSetFile {
        let cells = self.cells.iter().enumerate().map(|(d, c)| (d.to_string(), c.clone())).collect();
        let actions = self
            .atoms
            .iter()
            .map(|((atom, dim), table)| {
                let cod = atom.cod_dim(*dim).expect("atom fits");
                let t = table
                    .iter()
                    .enumerate()
                    .map(|(x, &y)| (self.cells[cod][x].clone(), self.cells[*dim][y].clone()))
                    .collect();
                (key(*atom, *dim), t)
            })
            .collect();
        CubicalSetFile { site: self.config().alias(), trunc: self.trunc, cells, actions }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: CubicalSetFile = serde_json::from_str(&text)?;
        TruncatedCubicalSet::from_file(&file)
    }

    /// For every dimension, whether each cell is a degeneracy of a lower one.
    pub fn degenerate_cells(&self) -> Result<Vec<Vec<bool>>> {
        let mut out = Vec::new();
        for k in 0..=self.trunc {
            let mut deg = vec![false; self.cells[k].len()];
            for j in 0..k {
                for q in &self.site.homs(k, j)?.minus {
                    for y in 0..self.cells[j].len() {
                        deg[self.act(q, y)?] = true;
                    }
                }
            }
            out.push(deg);
        }
        Ok(out)
    }

    /// All `(q, y)` with `q: □ᵏ → □ʲ` a degeneracy and `q*(y) = x`, by
    /// increasing `j`, then `q`, then `y`.
    fn factorizations(&self, k: usize, x: usize) -> Result<Vec<(CubeMap, usize)>> {
        let mut out = Vec::new();
        for j in 0..=k {
            for q in &self.site.homs(k, j)?.minus {
                for y in 0..self.cells[j].len() {
                    if self.act(q, y)? == x {
                        out.push((q.clone(), y));
                    }
                }
            }
        }
        Ok(out)
    }

    /// The first factorization through a cube of minimal dimension.
    pub fn ez_decompose(&self, k: usize, x: usize) -> Result<EzDecomposition> {
        if x >= self.cells(k).len() {
            return Err(Error::CubicalSet(format!("no cell {x} in X{k}")));
        }
        let (q, y) = self
            .factorizations(k, x)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Internal("the identity always factors a cell".into()))?;
        Ok(EzDecomposition { dim: k, cell: self.cells[k][x].clone(), y: self.cells[q.cod()][y].clone(), q })
    }
}

/// For every cell, all decompositions `(q, y)` with `y` nondegenerate are
/// related by a unique isomorphism, and every factorization of minimal degree
/// is such a decomposition.
pub fn ez_uniqueness_check(x: &TruncatedCubicalSet) -> Result<Check> {
    require_non_diagonal(x.site())?;
    let cfg = x.config();
    let mut check = Check::new("ez-lemma").for_site(cfg);
    let degenerate = x.degenerate_cells()?;
    for j in 0..=x.trunc() {
        x.site().isos(j)?;
    }
    for k in 0..=x.trunc() {
        let parts: Vec<Check> = (0..x.cells(k).len())
            .into_par_iter()
            .map(|cell| -> Result<Check> {
                let mut c = Check::new("ez-lemma");
                c.examined = 1;
                let id = &x.cells(k)[cell];
                let all = x.factorizations(k, cell)?;
                let Some(min_dim) = all.first().map(|(q, _)| q.cod()) else {
                    c.violation(Witness::new(format!("cell {id} of X{k} has no factorization")));
                    return Ok(c);
                };
                for (q, y) in all.iter().take_while(|(q, _)| q.cod() == min_dim) {
                    if degenerate[min_dim][*y] {
                        c.violation(
                            Witness::new(format!(
                                "minimal-degree factorization of {id} through degenerate {}",
                                x.cells(min_dim)[*y]
                            ))
                            .with_maps([q]),
                        );
                    }
                }
                let ez: Vec<&(CubeMap, usize)> = all.iter().filter(|(q, y)| !degenerate[q.cod()][*y]).collect();
                let first = ez[0];
                for other in &ez[1..] {
                    let linking = if first.0.cod() != other.0.cod() {
                        0
                    } else {
                        x.site()
                            .isos(first.0.cod())?
                            .iter()
                            .filter(|phi| {
                                compose(phi, &first.0).expect("dims") == other.0
                                    && x.act(phi, other.1).ok() == Some(first.1)
                            })
                            .count()
                    };
                    if linking != 1 {
                        c.violation(
                            Witness::new(format!(
                                "EZ decompositions of {id} through {} and {} related by {linking} isomorphisms",
                                x.cells(first.0.cod())[first.1],
                                x.cells(other.0.cod())[other.1]
                            ))
                            .with_maps([&first.0, &other.0]),
                        );
                    }
                }
                Ok(c)
            })
            .collect::<Result<_>>()?;
        for p in parts {
            check.merge(p);
        }
    }
    // the degenerate predicate agrees with images of non-iso degeneracies
    for k in 0..=x.trunc() {
        for (cell, &deg) in degenerate[k].iter().enumerate() {
            let decomposed = x.ez_decompose(k, cell)?;
            if deg == classify_map(&decomposed.q).iso {
                check.violation(Witness::new(format!(
                    "cell {} of X{k}: degenerate = {deg} but its decomposition has q = {}",
                    x.cells(k)[cell],
                    decomposed.q
                )));
            }
        }
    }
    let summary = format!(
        "{} cells of dimension ≤ {} checked, {} violations",
        check.examined,
        x.trunc(),
        check.violations
    );
    Ok(check.finish(true, summary))
}

/// Quotient fixtures: `y□¹` with its two vertices identified, and `y□²`
/// with its two faces in the first direction identified.
pub fn quotient_fixtures(cfg: SiteConfig, trunc: usize) -> Result<Vec<(String, TruncatedCubicalSet)>> {
    let line = TruncatedCubicalSet::representable(cfg, 1, trunc)?;
    let circle = line.quotient(&[(0, "0->1:[0]", "0->1:[1]")])?;
    let square = TruncatedCubicalSet::representable(cfg, 2, trunc)?;
    let d0 = CubeMap::from_fn(1, 2, |v| v << 1);
    let d1 = CubeMap::from_fn(1, 2, |v| (v << 1) | 1);
    let cylinder = square.quotient(&[(1, &d0.to_string(), &d1.to_string())])?;
    Ok(vec![("circle".into(), circle), ("cylinder".into(), cylinder)])
}

/// The EZ uniqueness check on `y□ⁿ` for `n ≤ max_rep` and on the quotient
/// fixtures, all truncated at `trunc`.
pub fn ez_lemma_suite(cfg: SiteConfig, trunc: usize, max_rep: usize) -> Result<Check> {
    let mut c = Check::new("ez-lemma").for_site(cfg);
    let mut names = Vec::new();
    for n in 0..=max_rep.min(trunc) {
        c.merge(ez_uniqueness_check(&TruncatedCubicalSet::representable(cfg, n, trunc)?)?);
        names.push(format!("y□{n}"));
    }
    for (name, x) in quotient_fixtures(cfg, trunc)? {
        c.merge(ez_uniqueness_check(&x)?);
        names.push(name);
    }
    let summary = format!("{} cells in {} truncated at {trunc}, {} violations", c.examined, names.join(", "), c.violations);
    Ok(c.finish(true, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{evaluate, parse};

    fn cfg(s: &str) -> SiteConfig {
        s.parse().unwrap()
    }

    fn eval(text: &str, dom: usize) -> CubeMap {
        evaluate(&parse(text, dom).unwrap()).unwrap()
    }

    #[test]
    fn representables_validate() {
        let x = TruncatedCubicalSet::representable(cfg("plain"), 1, 2).unwrap();
        assert_eq!(x.cells(0).len(), 2);
        assert_eq!(x.cells(2).len(), x.site().homs(2, 1).unwrap().all.len());
        let e = TruncatedCubicalSet::empty(cfg("csr"), 3).unwrap();
        assert!(e.cells(2).is_empty());
        assert!(ez_uniqueness_check(&e).unwrap().status.is_pass());
    }

    #[test]
    fn decomposition_examples() {
        let x = TruncatedCubicalSet::representable(cfg("cs"), 1, 2).unwrap();
        let m = eval("m1", 2);
        let d = x.ez_decompose(2, x.cell_index(2, &m.to_string()).unwrap()).unwrap();
        assert_eq!((d.q, d.y), (m, CubeMap::identity(1).to_string()));

        let x = TruncatedCubicalSet::representable(cfg("plain"), 0, 2).unwrap();
        let d = x.ez_decompose(2, 0).unwrap();
        assert_eq!(d.q, CubeMap::constant(2, 0, 0));
        assert_eq!(d.y, CubeMap::identity(0).to_string());

        let id = CubeMap::identity(1);
        let x = TruncatedCubicalSet::representable(cfg("plain"), 1, 2).unwrap();
        let d = x.ez_decompose(1, x.cell_index(1, &id.to_string()).unwrap()).unwrap();
        assert_eq!(d.q, id);
    }

    #[test]
    fn file_round_trip() {
        let x = TruncatedCubicalSet::representable(cfg("cw"), 1, 2).unwrap();
        let file = x.to_file();
        let text = serde_json::to_string(&file).unwrap();
        let back: CubicalSetFile = serde_json::from_str(&text).unwrap();
        let y = TruncatedCubicalSet::from_file(&back).unwrap();
        assert_eq!(y.to_file(), file);
        assert!(file.actions.contains_key("p1@2"));
    }

    #[test]
    fn swapped_faces_break_functoriality() {
        let x = TruncatedCubicalSet::representable(cfg("plain"), 1, 2).unwrap();
        let mut file = x.to_file();
        let lo = file.actions.remove("d1-@0").unwrap();
        let hi = file.actions.remove("d1+@0").unwrap();
        file.actions.insert("d1-@0".into(), hi);
        file.actions.insert("d1+@0".into(), lo);
        assert!(matches!(TruncatedCubicalSet::from_file(&file), Err(Error::Functoriality { .. })));
    }

    #[test]
    fn quotients_satisfy_ez() {
        for site in ["plain", "cs", "csr"] {
            for (name, x) in quotient_fixtures(cfg(site), 2).unwrap() {
                let c = ez_uniqueness_check(&x).unwrap();
                assert!(c.status.is_pass(), "{site} {name}: {:?}", c.witnesses);
            }
        }
        let (_, circle) = &quotient_fixtures(cfg("plain"), 2).unwrap()[0];
        assert_eq!(circle.cells(0).len(), 1);
    }
}
