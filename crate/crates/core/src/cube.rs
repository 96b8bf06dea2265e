//! Cubes `{0,1}^n` and the maps between them, stored as explicit vertex tables.
//!
//! A vertex of the `n`-cube is an integer whose bit `j - 1` holds coordinate
//! `j`. A map `f: □ⁿ → □ᵐ` is the table `v ↦ f(v)` over all `2ⁿ` vertices.
//! Every morphism of every cubical site compiles to this form, so equality of
//! morphisms is equality of tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest domain dimension a table may have (`2^MAX_DIM` entries).
pub const MAX_DIM: usize = 20;

/// Largest codomain dimension; vertices are stored in a `u32`.
pub const MAX_COD: usize = 31;

/// The object `□ⁿ`. Its degree is `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cube(pub usize);

impl Cube {
    pub fn dim(self) -> usize {
        self.0
    }

    pub fn vertex_count(self) -> usize {
        1 << self.0
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "□{}", self.0)
    }
}

/// A map `□^dom → □^cod` given by its vertex table.
///
/// Ordering is lexicographic on `(dom, cod, table)`, which is the search order
/// used wherever a deterministic "first" map is required.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CubeMap {
    dom: usize,
    cod: usize,
    table: Vec<u32>,
}

/// Set-theoretic shape of a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapShape {
    pub injective: bool,
    pub surjective: bool,
    pub iso: bool,
}

impl CubeMap {
    pub fn new(dom: usize, cod: usize, table: Vec<u32>) -> Result<Self> {
        if dom > MAX_DIM || cod > MAX_COD {
            return Err(Error::DimensionTooLarge { dom, cod });
        }
        if table.len() != 1 << dom {
            return Err(Error::BadTable(format!(
                "table for a map out of □{dom} needs {} entries, got {}",
                1usize << dom,
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&w| (w as u64) >> cod != 0) {
            return Err(Error::BadTable(format!("entry {bad} is not a vertex of □{cod}")));
        }
        Ok(CubeMap { dom, cod, table })
    }

    /// Builds a map from its coordinate functions `f_i: {0,1}^dom → {0,1}`.
    pub fn from_fn(dom: usize, cod: usize, f: impl Fn(u32) -> u32) -> Self {
        let table = (0..1u32 << dom).map(f).collect();
        CubeMap::new(dom, cod, table).expect("from_fn produced an invalid table")
    }

    pub fn identity(n: usize) -> Self {
        CubeMap::from_fn(n, n, |v| v)
    }

    /// The constant map `□ⁿ → □ᵐ` at vertex `w`.
    pub fn constant(n: usize, m: usize, w: u32) -> Self {
        CubeMap::from_fn(n, m, |_| w)
    }

    pub fn dom(&self) -> usize {
        self.dom
    }

    pub fn cod(&self) -> usize {
        self.cod
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn apply(&self, v: u32) -> u32 {
        self.table[v as usize]
    }

    /// Output coordinate `i` (1-based) at input vertex `v`.
    pub fn coord(&self, i: usize, v: u32) -> bool {
        (self.table[v as usize] >> (i - 1)) & 1 == 1
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &CubeMap) -> Result<CubeMap> {
        compose(self, f)
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && self.table.iter().enumerate().all(|(v, &w)| v as u32 == w)
    }

    pub fn shape(&self) -> MapShape {
        classify_map(self)
    }

    /// The coordinate function `i` (1-based) as a truth table over `2^dom` bits.
    ///
    /// Only available for `dom ≤ 6`.
    pub fn column(&self, i: usize) -> u64 {
        debug_assert!(self.dom <= 6);
        self.table
            .iter()
            .enumerate()
            .fold(0u64, |acc, (v, &w)| acc | ((((w >> (i - 1)) & 1) as u64) << v))
    }

    /// Whether output coordinate `i` takes a single value on every vertex.
    pub fn coord_is_constant(&self, i: usize) -> bool {
        let first = self.coord(i, 0);
        (0..self.table.len() as u32).all(|v| self.coord(i, v) == first)
    }

    /// Inverse of a bijection.
    pub fn inverse(&self) -> Option<CubeMap> {
        if !self.shape().iso {
            return None;
        }
        let mut table = vec![0u32; self.table.len()];
        for (v, &w) in self.table.iter().enumerate() {
            table[w as usize] = v as u32;
        }
        Some(CubeMap { dom: self.cod, cod: self.dom, table })
    }
}

impl fmt::Debug for CubeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Text form `dom->cod:[t0,t1,...]`.
impl fmt::Display for CubeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}:[", self.dom, self.cod)?;
        for (k, w) in self.table.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for CubeMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadTable(format!("expected `dom->cod:[t0,...]`, got `{s}`"));
        let (dims, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let (dom, cod) = dims.split_once("->").ok_or_else(bad)?;
        let dom: usize = dom.trim().parse().map_err(|_| bad())?;
        let cod: usize = cod.trim().parse().map_err(|_| bad())?;
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let table = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        CubeMap::new(dom, cod, table)
    }
}

/// `g ∘ f`.
pub fn compose(g: &CubeMap, f: &CubeMap) -> Result<CubeMap> {
    if f.cod != g.dom {
        return Err(Error::DimensionMismatch { left: g.dom, right: f.cod });
    }
    let table = f.table.iter().map(|&w| g.table[w as usize]).collect();
    Ok(CubeMap { dom: f.dom, cod: g.cod, table })
}

/// `f ⊗ f'`: `f` on the low coordinates, `f'` on the high ones.
pub fn tensor(f: &CubeMap, g: &CubeMap) -> CubeMap {
    let dom = f.dom + g.dom;
    let cod = f.cod + g.cod;
    let low = (1u32 << f.dom) - 1;
    CubeMap::from_fn(dom, cod, |v| {
        f.table[(v & low) as usize] | (g.table[(v >> f.dom) as usize] << f.cod)
    })
}

pub fn classify_map(f: &CubeMap) -> MapShape {
    let mut seen = vec![false; 1usize << f.cod];
    let mut injective = true;
    for &w in &f.table {
        if std::mem::replace(&mut seen[w as usize], true) {
            injective = false;
        }
    }
    let surjective = seen.iter().all(|&s| s);
    MapShape { injective, surjective, iso: injective && surjective && f.dom == f.cod }
}

/// For each output variable `i`, the set `D_i` of input variables it depends on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencySets {
    pub dom: usize,
    /// `sets[i - 1]` holds `D_i` as sorted 1-based input indices.
    pub sets: Vec<Vec<usize>>,
}

impl DependencySets {
    pub fn of(&self, output: usize) -> &[usize] {
        &self.sets[output - 1]
    }

    pub fn depends(&self, output: usize, input: usize) -> bool {
        self.sets[output - 1].binary_search(&input).is_ok()
    }

    /// Inputs that no output depends on.
    pub fn trivial(&self) -> Vec<usize> {
        (1..=self.dom).filter(|j| self.sets.iter().all(|d| d.binary_search(j).is_err())).collect()
    }

    /// `X_j`: the outputs depending on input `j`.
    pub fn dependents(&self, input: usize) -> Vec<usize> {
        (1..=self.sets.len()).filter(|&i| self.depends(i, input)).collect()
    }

    pub fn pairwise_disjoint(&self) -> bool {
        let mut used = vec![false; self.dom + 1];
        for d in &self.sets {
            for &j in d {
                if std::mem::replace(&mut used[j], true) {
                    return false;
                }
            }
        }
        true
    }
}

/// Brute-force dependency: output `i` depends on input `j` iff flipping bit
/// `j` changes output bit `i` in some context.
pub fn dependency(f: &CubeMap) -> DependencySets {
    let mut sets = vec![Vec::new(); f.cod];
    for j in 1..=f.dom {
        let bit = 1u32 << (j - 1);
        let mut changed = 0u32;
        for v in 0..(1u32 << f.dom) {
            if v & bit == 0 {
                changed |= f.table[v as usize] ^ f.table[(v | bit) as usize];
            }
        }
        for (i, set) in sets.iter_mut().enumerate() {
            if (changed >> i) & 1 == 1 {
                set.push(j);
            }
        }
    }
    DependencySets { dom: f.dom, sets }
}
