//! Finite posets and lattices.
//!
//! Elements are `0..len`. Boolean lattices `2ⁿ` index elements by vertex
//! bitmask, so that maps between them are exactly cube vertex tables.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinPoset {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
}

/// JSON fixture form: `{ "elements": [...], "leq": [[a, b], ...] }`; the
/// relation is closed reflexively and transitively on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetFile {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
}

impl FinPoset {
    /// Validates the partial-order axioms on an explicit relation matrix.
    pub fn new(names: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = names.len();
        if leq.len() != n || leq.iter().any(|r| r.len() != n) {
            return Err(Error::Order("relation matrix has the wrong shape".into()));
        }
        for a in 0..n {
            if !leq[a][a] {
                return Err(Error::Order(format!("not reflexive at {}", names[a])));
            }
            for b in 0..n {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(Error::Order(format!("{} and {} are distinct but equivalent", names[a], names[b])));
                }
                for c in 0..n {
                    if leq[a][b] && leq[b][c] && !leq[a][c] {
                        return Err(Error::Order(format!("not transitive at {}, {}, {}", names[a], names[b], names[c])));
                    }
                }
            }
        }
        Ok(FinPoset { names, leq })
    }

    /// Reflexive-transitive closure of the given pairs.
    pub fn from_relation(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        let mut leq = vec![vec![false; n]; n];
        for (a, row) in leq.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::Order(format!("pair ({a}, {b}) out of range")));
            }
            leq[a][b] = true;
        }
        close(&mut leq);
        FinPoset::new(names, leq)
    }

    pub fn from_file(file: &PosetFile) -> Result<Self> {
        let index = |s: &str| {
            file.elements.iter().position(|e| e == s).ok_or_else(|| Error::Order(format!("unknown element {s:?}")))
        };
        let pairs = file.leq.iter().map(|(a, b)| Ok((index(a)?, index(b)?))).collect::<Result<Vec<_>>>()?;
        FinPoset::from_relation(file.elements.clone(), &pairs)
    }

    pub fn to_file(&self) -> PosetFile {
        let mut leq = Vec::new();
        for a in 0..self.len() {
            for b in 0..self.len() {
                if a != b && self.leq[a][b] {
                    leq.push((self.names[a].clone(), self.names[b].clone()));
                }
            }
        }
        PosetFile { elements: self.names.clone(), leq }
    }

    pub fn antichain(n: usize) -> Self {
        FinPoset::from_relation((0..n).map(|i| i.to_string()).collect(), &[]).expect("antichain")
    }

    pub fn chain(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        FinPoset::from_relation((0..n).map(|i| i.to_string()).collect(), &pairs).expect("chain")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    /// Least upper bound, if it exists.
    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        let ups: Vec<usize> = (0..self.len()).filter(|&c| self.leq[a][c] && self.leq[b][c]).collect();
        ups.iter().copied().find(|&c| ups.iter().all(|&d| self.leq[c][d]))
    }

    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let downs: Vec<usize> = (0..self.len()).filter(|&c| self.leq[c][a] && self.leq[c][b]).collect();
        downs.iter().copied().find(|&c| downs.iter().all(|&d| self.leq[d][c]))
    }

    /// First pair without a join or a meet.
    pub fn lattice_violation(&self) -> Option<(usize, usize)> {
        (0..self.len())
            .flat_map(|a| (a + 1..self.len()).map(move |b| (a, b)))
            .find(|&(a, b)| self.join(a, b).is_none() || self.meet(a, b).is_none())
    }

    /// Induced order on a subset, listed in the given order.
    pub fn restrict(&self, elems: &[usize]) -> FinPoset {
        let names = elems.iter().map(|&e| self.names[e].clone()).collect();
        let leq = elems.iter().map(|&a| elems.iter().map(|&b| self.leq[a][b]).collect()).collect();
        FinPoset { names, leq }
    }

    /// Down-closed subsets as bitmasks, sorted by value.
    pub fn downsets(&self) -> Result<Vec<u64>> {
        let n = self.len();
        if n > 24 {
            return Err(Error::ResourceBound(format!("down-sets of a {n}-element poset")));
        }
        let below: Vec<u64> =
            (0..n).map(|a| (0..n).filter(|&b| self.leq[b][a]).fold(0u64, |m, b| m | 1 << b)).collect();
        Ok((0..1u64 << n).filter(|&s| (0..n).all(|a| s & (1 << a) == 0 || s & below[a] == below[a])).collect())
    }

    /// Principal down-set of each element as a bitmask.
    pub fn principal_downsets(&self) -> Vec<u64> {
        let n = self.len();
        (0..n).map(|a| (0..n).filter(|&b| self.leq[b][a]).fold(0u64, |m, b| m | 1 << b)).collect()
    }

    /// Quotient by the smallest order-compatible equivalence identifying the
    /// given pairs: the preorder generated by `≤` and the pairs, with its
    /// equivalence classes collapsed. Returns the quotient and the projection.
    pub fn quotient(&self, identify: &[(usize, usize)]) -> Result<(FinPoset, Vec<usize>)> {
        let n = self.len();
        let mut pre = self.leq.clone();
        for &(a, b) in identify {
            pre[a][b] = true;
            pre[b][a] = true;
        }
        close(&mut pre);
        let mut class = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for a in 0..n {
            if class[a] == usize::MAX {
                let c = reps.len();
                reps.push(a);
                for b in a..n {
                    if pre[a][b] && pre[b][a] {
                        class[b] = c;
                    }
                }
            }
        }
        let names = reps
            .iter()
            .map(|&r| {
                let members: Vec<&str> = (0..n).filter(|&b| class[b] == class[r]).map(|b| self.names[b].as_str()).collect();
                members.join("~")
            })
            .collect();
        let leq = reps.iter().map(|&a| reps.iter().map(|&b| pre[a][b]).collect()).collect();
        Ok((FinPoset::new(names, leq)?, class))
    }

    /// Canonical code: the least relation code over all relabellings that
    /// respect (down-set size, up-set size). The code lists, for each position
    /// `k`, the relations between element `k` and the earlier ones, so a
    /// partial relabelling fixes a prefix and the search can prune on it.
    pub fn canonical_form(&self) -> Vec<bool> {
        let n = self.len();
        let inv: Vec<(usize, usize)> = (0..n)
            .map(|a| ((0..n).filter(|&b| self.leq[b][a]).count(), (0..n).filter(|&b| self.leq[a][b]).count()))
            .collect();
        let mut slots = inv.clone();
        slots.sort();
        let mut best: Option<Vec<bool>> = None;
        let mut perm = Vec::with_capacity(n);
        let mut code = Vec::with_capacity(n * n);
        let mut used = vec![false; n];
        self.canon_search(&slots, &inv, &mut perm, &mut code, &mut used, &mut best);
        best.unwrap_or_default()
    }

    fn canon_search(
        &self,
        slots: &[(usize, usize)],
        inv: &[(usize, usize)],
        perm: &mut Vec<usize>,
        code: &mut Vec<bool>,
        used: &mut [bool],
        best: &mut Option<Vec<bool>>,
    ) {
        if let Some(b) = best.as_ref() {
            if code.as_slice() > &b[..code.len()] {
                return;
            }
        }
        let k = perm.len();
        if k == slots.len() {
            if best.as_ref().is_none_or(|b| **code < **b) {
                *best = Some(code.clone());
            }
            return;
        }
        for a in 0..slots.len() {
            if used[a] || inv[a] != slots[k] {
                continue;
            }
            let mark = code.len();
            for &b in perm.iter() {
                code.push(self.leq[a][b]);
                code.push(self.leq[b][a]);
            }
            used[a] = true;
            perm.push(a);
            self.canon_search(slots, inv, perm, code, used, best);
            perm.pop();
            used[a] = false;
            code.truncate(mark);
        }
    }

    pub fn is_isomorphic(&self, other: &FinPoset) -> bool {
        self.len() == other.len() && self.canonical_form() == other.canonical_form()
    }
}

fn close(rel: &mut [Vec<bool>]) {
    let n = rel.len();
    for k in 0..n {
        for a in 0..n {
            if rel[a][k] {
                for b in 0..n {
                    if rel[k][b] {
                        rel[a][b] = true;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinLattice {
    poset: FinPoset,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
}

impl FinLattice {
    pub fn from_poset(poset: FinPoset) -> Result<Self> {
        if poset.is_empty() {
            return Err(Error::Order("the empty poset is not a lattice".into()));
        }
        if let Some((a, b)) = poset.lattice_violation() {
            return Err(Error::Order(format!("{} and {} lack a join or a meet", poset.name(a), poset.name(b))));
        }
        let n = poset.len();
        let meet = (0..n).map(|a| (0..n).map(|b| poset.meet(a, b).expect("checked")).collect()).collect();
        let join = (0..n).map(|a| (0..n).map(|b| poset.join(a, b).expect("checked")).collect()).collect();
        Ok(FinLattice { poset, meet, join })
    }

    /// `2ⁿ`, element `v` being the subset with bitmask `v`.
    pub fn boolean(n: usize) -> Self {
        let size = 1usize << n;
        let names = (0..size).map(|v| format!("{v:0n$b}")).collect();
        let leq = (0..size).map(|a| (0..size).map(|b| a & b == a).collect()).collect();
        let poset = FinPoset { names, leq };
        let meet = (0..size).map(|a| (0..size).map(|b| a & b).collect()).collect();
        let join = (0..size).map(|a| (0..size).map(|b| a | b).collect()).collect();
        FinLattice { poset, meet, join }
    }

    pub fn poset(&self) -> &FinPoset {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.poset.leq(a, b)
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a][b]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    pub fn bottom(&self) -> usize {
        (0..self.len()).find(|&a| (0..self.len()).all(|b| self.leq(a, b))).expect("finite lattice")
    }

    pub fn top(&self) -> usize {
        (0..self.len()).find(|&a| (0..self.len()).all(|b| self.leq(b, a))).expect("finite lattice")
    }

    pub fn is_distributive(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| self.meet(a, self.join(b, c)) == self.join(self.meet(a, b), self.meet(a, c))))
        })
    }

    /// Elements with exactly one lower cover.
    pub fn join_irreducibles(&self) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&a| {
                let below: Vec<usize> = (0..n).filter(|&b| b != a && self.leq(b, a)).collect();
                let covers = below.iter().filter(|&&b| below.iter().all(|&c| c == b || !self.leq(b, c))).count();
                covers == 1
            })
            .collect()
    }

    pub fn is_isomorphic(&self, other: &FinLattice) -> bool {
        self.poset.is_isomorphic(&other.poset)
    }
}

/// The lattice of down-sets of `p` under inclusion, and the embedding
/// sending each element to its principal down-set.
pub fn downset_lattice(p: &FinPoset) -> Result<(FinLattice, Vec<usize>)> {
    let sets = p.downsets()?;
    let names = sets
        .iter()
        .map(|&s| {
            let members: Vec<&str> = (0..p.len()).filter(|&a| s & (1 << a) != 0).map(|a| p.name(a)).collect();
            format!("{{{}}}", members.join(","))
        })
        .collect();
    let leq = sets.iter().map(|&a| sets.iter().map(|&b| a & b == a).collect()).collect();
    let poset = FinPoset::new(names, leq)?;
    let at = |s: u64| sets.binary_search(&s).expect("closed under ∩ and ∪");
    let meet = sets.iter().map(|&a| sets.iter().map(|&b| at(a & b)).collect()).collect();
    let join = sets.iter().map(|&a| sets.iter().map(|&b| at(a | b)).collect()).collect();
    let embedding = p.principal_downsets().into_iter().map(at).collect();
    Ok((FinLattice { poset, meet, join }, embedding))
}

/// All posets with `n` elements up to isomorphism, each naturally labelled
/// (`a ≤ b` implies `a ≤ b` as integers).
pub fn posets_up_to_iso(n: usize) -> Result<Vec<FinPoset>> {
    if n > 7 {
        return Err(Error::ResourceBound(format!("enumerating posets of size {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    for mask in 0..1u64 << pairs.len() {
        let mut leq = vec![vec![false; n]; n];
        for (a, row) in leq.iter_mut().enumerate() {
            row[a] = true;
        }
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if mask & (1 << k) != 0 {
                leq[a][b] = true;
            }
        }
        let transitive = (0..n).all(|a| (0..n).all(|b| !leq[a][b] || (0..n).all(|c| !leq[b][c] || leq[a][c])));
        if !transitive {
            continue;
        }
        let p = FinPoset { names: names.clone(), leq };
        if seen.insert(p.canonical_form()) {
            out.push(p);
        }
    }
    Ok(out)
}

pub fn lattices_up_to_iso(n: usize) -> Result<Vec<FinLattice>> {
    Ok(posets_up_to_iso(n)?.into_iter().filter_map(|p| FinLattice::from_poset(p).ok()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poset_validation() {
        let names = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        assert!(FinPoset::from_relation(names(2), &[(0, 1), (1, 0)]).is_err());
        assert!(FinPoset::new(names(2), vec![vec![true, false], vec![false, false]]).is_err());
        let p = FinPoset::from_relation(names(3), &[(0, 1), (1, 2)]).unwrap();
        assert!(p.leq(0, 2));
        let back = FinPoset::from_file(&p.to_file()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn enumeration_counts() {
        let posets: Vec<usize> = (1..=5).map(|n| posets_up_to_iso(n).unwrap().len()).collect();
        assert_eq!(posets, vec![1, 2, 5, 16, 63]);
        let lattices: Vec<usize> = (1..=6).map(|n| lattices_up_to_iso(n).unwrap().len()).collect();
        assert_eq!(lattices, vec![1, 1, 1, 2, 5, 15]);
    }

    #[test]
    fn downset_examples() {
        let (l, _) = downset_lattice(&FinPoset::antichain(3)).unwrap();
        assert!(l.is_isomorphic(&FinLattice::boolean(3)));
        let (l, e) = downset_lattice(&FinPoset::chain(2)).unwrap();
        assert!(l.poset().is_isomorphic(&FinPoset::chain(3)));
        assert_eq!(e.len(), 2);
        assert!(l.is_distributive());
    }

    #[test]
    fn iso_distinguishes_small_lattices() {
        let five = lattices_up_to_iso(5).unwrap();
        let distributive = five.iter().filter(|l| l.is_distributive()).count();
        // the chain and 2×2 with a top or a bottom added; M3 and N5 are not
        assert_eq!(distributive, 3);
        for (i, a) in five.iter().enumerate() {
            for (j, b) in five.iter().enumerate() {
                assert_eq!(a.is_isomorphic(b), i == j);
            }
        }
    }
}
