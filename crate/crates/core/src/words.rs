//! Elementary generators and words over them.
//!
//! Text grammar (ASCII):
//!
//! ```text
//! atom ::= "d" INT ("+" | "-")   face ι^{i,1} / ι^{i,0}
//!        | "p" INT               projection π^i
//!        | "m" INT               meet connection γ^i_∧
//!        | "j" INT               join connection γ^i_∨
//!        | "x" INT               adjacent symmetry σ_i
//!        | "r" INT               reversal ρ^i
//!        | "c" INT               diagonal (copy coordinate i to slot i+1)
//! word ::= atom ("." atom)* | "1"
//! ```
//!
//! `g . f` means `g ∘ f`, so the rightmost atom is applied first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cube::{compose, CubeMap};
use crate::error::{Error, Result};
use crate::sites::{Connections, SiteConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConnKind {
    Meet,
    Join,
}

/// One structural generator placed in a slot of the ambient cube. Slots are
/// 1-based, matching the `ι^{i,ε}`, `π^i`, `γ^i` convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeneratorAtom {
    /// Insert the constant `eps` as coordinate `slot`: `□ⁿ → □ⁿ⁺¹`.
    Face { slot: usize, eps: bool },
    /// Delete coordinate `slot`: `□ⁿ → □ⁿ⁻¹`.
    Proj { slot: usize },
    /// Merge coordinates `slot`, `slot + 1` by meet or join: `□ⁿ → □ⁿ⁻¹`.
    Conn { slot: usize, kind: ConnKind },
    /// Swap coordinates `slot`, `slot + 1`.
    Sym { slot: usize },
    /// Negate coordinate `slot`.
    Rev { slot: usize },
    /// Duplicate coordinate `slot` into slot `slot + 1`: `□ⁿ → □ⁿ⁺¹`.
    Diag { slot: usize },
}

impl GeneratorAtom {
    pub fn slot(self) -> usize {
        match self {
            GeneratorAtom::Face { slot, .. }
            | GeneratorAtom::Proj { slot }
            | GeneratorAtom::Conn { slot, .. }
            | GeneratorAtom::Sym { slot }
            | GeneratorAtom::Rev { slot }
            | GeneratorAtom::Diag { slot } => slot,
        }
    }

    /// Codomain dimension when acting on `□^dim`, or `None` if the slot does
    /// not fit.
    pub fn cod_dim(self, dim: usize) -> Option<usize> {
        let slot = self.slot();
        if slot == 0 {
            return None;
        }
        match self {
            GeneratorAtom::Face { .. } => (slot <= dim + 1).then_some(dim + 1),
            GeneratorAtom::Proj { .. } => (slot <= dim).then(|| dim - 1),
            GeneratorAtom::Conn { .. } => (slot < dim).then(|| dim - 1),
            GeneratorAtom::Sym { .. } => (slot < dim).then_some(dim),
            GeneratorAtom::Rev { .. } => (slot <= dim).then_some(dim),
            GeneratorAtom::Diag { .. } => (slot <= dim).then_some(dim + 1),
        }
    }

    /// Image of vertex `v`. The slot must fit the dimension of `v`'s cube.
    pub fn apply(self, v: u32) -> u32 {
        let at = (self.slot() - 1) as u32;
        match self {
            GeneratorAtom::Face { eps, .. } => insert_bit(v, at, eps as u32),
            GeneratorAtom::Proj { .. } => delete_bit(v, at),
            GeneratorAtom::Conn { kind, .. } => {
                let a = (v >> at) & 1;
                let b = (v >> (at + 1)) & 1;
                let c = match kind {
                    ConnKind::Meet => a & b,
                    ConnKind::Join => a | b,
                };
                (delete_bit(v, at + 1) & !(1 << at)) | (c << at)
            }
            GeneratorAtom::Sym { .. } => {
                let a = (v >> at) & 1;
                let b = (v >> (at + 1)) & 1;
                (v & !(0b11 << at)) | (b << at) | (a << (at + 1))
            }
            GeneratorAtom::Rev { .. } => v ^ (1 << at),
            GeneratorAtom::Diag { .. } => insert_bit(v, at + 1, (v >> at) & 1),
        }
    }

    /// The atom as a map out of `□^dim`.
    pub fn to_map(self, dim: usize) -> Result<CubeMap> {
        let cod = self
            .cod_dim(dim)
            .ok_or_else(|| Error::SlotOutOfRange { atom: self.to_string(), dim })?;
        Ok(CubeMap::from_fn(dim, cod, |v| self.apply(v)))
    }

    /// Whether the site admits this kind of generator at all.
    pub fn allowed_in(self, cfg: &SiteConfig) -> bool {
        match self {
            GeneratorAtom::Face { .. } | GeneratorAtom::Proj { .. } => true,
            GeneratorAtom::Conn { kind, .. } => match (cfg.connections, kind) {
                (Connections::Both, _) => true,
                (Connections::Meet, ConnKind::Meet) => true,
                (Connections::Join, ConnKind::Join) => true,
                _ => false,
            },
            GeneratorAtom::Sym { .. } => cfg.symmetries,
            GeneratorAtom::Rev { .. } => cfg.reversals,
            GeneratorAtom::Diag { .. } => cfg.diagonals,
        }
    }
}

fn insert_bit(v: u32, at: u32, bit: u32) -> u32 {
    let low = v & ((1 << at) - 1);
    let high = v >> at;
    low | (bit << at) | (high << (at + 1))
}

fn delete_bit(v: u32, at: u32) -> u32 {
    let low = v & ((1 << at) - 1);
    low | ((v >> (at + 1)) << at)
}

impl fmt::Display for GeneratorAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GeneratorAtom::Face { slot, eps } => write!(f, "d{slot}{}", if eps { '+' } else { '-' }),
            GeneratorAtom::Proj { slot } => write!(f, "p{slot}"),
            GeneratorAtom::Conn { slot, kind: ConnKind::Meet } => write!(f, "m{slot}"),
            GeneratorAtom::Conn { slot, kind: ConnKind::Join } => write!(f, "j{slot}"),
            GeneratorAtom::Sym { slot } => write!(f, "x{slot}"),
            GeneratorAtom::Rev { slot } => write!(f, "r{slot}"),
            GeneratorAtom::Diag { slot } => write!(f, "c{slot}"),
        }
    }
}

impl FromStr for GeneratorAtom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        p.skip_ws();
        let atom = p.atom()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("trailing input after atom"));
        }
        Ok(atom)
    }
}

/// A composite of atoms starting at `□^dom_dim`. `levels[0]` is applied first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorWord {
    pub dom_dim: usize,
    pub levels: Vec<GeneratorAtom>,
}

impl GeneratorWord {
    pub fn identity(dom_dim: usize) -> Self {
        GeneratorWord { dom_dim, levels: Vec::new() }
    }

    /// Checks every slot against the running dimension and returns the final one.
    pub fn cod_dim(&self) -> Result<usize> {
        self.levels.iter().try_fold(self.dom_dim, |dim, atom| {
            atom.cod_dim(dim)
                .ok_or_else(|| Error::SlotOutOfRange { atom: atom.to_string(), dim })
        })
    }

    /// `self` followed by `next`, i.e. `next ∘ self`.
    pub fn then(&self, next: &GeneratorWord) -> GeneratorWord {
        let mut levels = self.levels.clone();
        levels.extend_from_slice(&next.levels);
        GeneratorWord { dom_dim: self.dom_dim, levels }
    }

    pub fn push(&mut self, atom: GeneratorAtom) {
        self.levels.push(atom);
    }
}

impl fmt::Display for GeneratorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.levels.is_empty() {
            return f.write_str("1");
        }
        for (k, atom) in self.levels.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" . ")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn int(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a slot number"));
        }
        self.src[start..self.pos].parse().map_err(|_| Error::Syntax {
            pos: start,
            msg: "slot number out of range".to_string(),
        })
    }

    fn atom(&mut self) -> Result<GeneratorAtom> {
        let Some(head) = self.peek() else {
            return Err(self.error("expected an atom"));
        };
        self.pos += 1;
        let atom = match head {
            b'd' => {
                let slot = self.int()?;
                let eps = match self.peek() {
                    Some(b'+') => true,
                    Some(b'-') => false,
                    _ => return Err(self.error("face atom needs `+` or `-`")),
                };
                self.pos += 1;
                GeneratorAtom::Face { slot, eps }
            }
            b'p' => GeneratorAtom::Proj { slot: self.int()? },
            b'm' => GeneratorAtom::Conn { slot: self.int()?, kind: ConnKind::Meet },
            b'j' => GeneratorAtom::Conn { slot: self.int()?, kind: ConnKind::Join },
            b'x' => GeneratorAtom::Sym { slot: self.int()? },
            b'r' => GeneratorAtom::Rev { slot: self.int()? },
            b'c' => GeneratorAtom::Diag { slot: self.int()? },
            _ => {
                self.pos -= 1;
                return Err(self.error("unknown atom"));
            }
        };
        if atom.slot() == 0 {
            return Err(self.error("slots are 1-based"));
        }
        Ok(atom)
    }
}

/// Parses a word and checks its slots against `dom_dim`.
pub fn parse(text: &str, dom_dim: usize) -> Result<GeneratorWord> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    let mut atoms = Vec::new();
    if p.peek() == Some(b'1') {
        p.pos += 1;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.error("identity word `1` stands alone"));
        }
    } else {
        loop {
            atoms.push(p.atom()?);
            p.skip_ws();
            match p.peek() {
                None => break,
                Some(b'.') => {
                    p.pos += 1;
                    p.skip_ws();
                }
                Some(_) => return Err(p.error("expected `.` between atoms")),
            }
        }
    }
    atoms.reverse();
    let word = GeneratorWord { dom_dim, levels: atoms };
    word.cod_dim()?;
    Ok(word)
}

pub fn print(word: &GeneratorWord) -> String {
    word.to_string()
}

pub fn evaluate(word: &GeneratorWord) -> Result<CubeMap> {
    let mut acc = CubeMap::identity(word.dom_dim);
    let mut dim = word.dom_dim;
    for atom in &word.levels {
        let step = atom.to_map(dim)?;
        dim = step.cod();
        acc = compose(&step, &acc)?;
    }
    Ok(acc)
}

/// Every atom the site admits acting on `□^dim`, in a fixed order.
pub fn atoms_at(cfg: &SiteConfig, dim: usize) -> Vec<GeneratorAtom> {
    let mut out = Vec::new();
    for slot in 1..=dim + 1 {
        out.push(GeneratorAtom::Face { slot, eps: false });
        out.push(GeneratorAtom::Face { slot, eps: true });
    }
    for slot in 1..=dim {
        out.push(GeneratorAtom::Proj { slot });
        out.push(GeneratorAtom::Rev { slot });
        out.push(GeneratorAtom::Diag { slot });
        out.push(GeneratorAtom::Conn { slot, kind: ConnKind::Meet });
        out.push(GeneratorAtom::Conn { slot, kind: ConnKind::Join });
        out.push(GeneratorAtom::Sym { slot });
    }
    out.retain(|a| a.allowed_in(cfg) && a.cod_dim(dim).is_some());
    out
}

/// All single-atom maps `□ⁿ → □ᵐ` of the site, deduplicated and sorted.
pub fn generators_between(cfg: &SiteConfig, n: usize, m: usize) -> Vec<CubeMap> {
    let mut maps: Vec<CubeMap> = atoms_at(cfg, n)
        .into_iter()
        .filter(|a| a.cod_dim(n) == Some(m))
        .map(|a| a.to_map(n).expect("atom fits by construction"))
        .collect();
    maps.sort();
    maps.dedup();
    maps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::tensor;

    fn eval(text: &str, dom: usize) -> CubeMap {
        evaluate(&parse(text, dom).unwrap()).unwrap()
    }

    #[test]
    fn parse_examples() {
        let w = parse("d1+ . p1", 1).unwrap();
        assert_eq!(
            w.levels,
            vec![GeneratorAtom::Proj { slot: 1 }, GeneratorAtom::Face { slot: 1, eps: true }]
        );
        let w = parse("m1", 2).unwrap();
        assert_eq!(w.levels, vec![GeneratorAtom::Conn { slot: 1, kind: ConnKind::Meet }]);
        assert!(matches!(parse("x7", 2), Err(Error::SlotOutOfRange { .. })));
        assert!(matches!(parse("x2", 2), Err(Error::SlotOutOfRange { .. })));
        assert_eq!(parse("1", 3).unwrap(), GeneratorWord::identity(3));
        assert_eq!(parse("  d1+.p1  ", 1).unwrap(), parse("d1+ . p1", 1).unwrap());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse("p1 . q2", 2) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("d1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p0", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p1 p1", 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse("", 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1 . p1", 2), Err(Error::Syntax { .. })));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(eval("r1", 1).table(), &[1, 0]);
        assert_eq!(eval("c1", 1).table(), &[0b00, 0b11]);
        let join = eval("j1", 2);
        assert_eq!(join.apply(0b01), 1);
        assert_eq!(join.table(), &[0, 1, 1, 1]);
        assert_eq!(eval("m1", 2).table(), &[0, 0, 0, 1]);
        assert_eq!(eval("x1", 2).table(), &[0, 2, 1, 3]);
        // (x1, x2, x3) ↦ (x1, x3)
        assert_eq!(eval("p2", 3).table(), &[0, 1, 0, 1, 2, 3, 2, 3]);
        // x ↦ (0, x)
        assert_eq!(eval("d1-", 1).table(), &[0, 2]);
        // constant 1 = ι¹ ∘ π
        assert_eq!(eval("d1+ . p1", 1).table(), &[1, 1]);
    }

    #[test]
    fn slot_convention_matches_tensor_form() {
        let id = CubeMap::identity(1);
        let meet = eval("m1", 2);
        // γ^2_∧ on □³ is id ⊗ γ_∧
        assert_eq!(eval("m2", 3), tensor(&id, &meet));
        // π^1 on □² is π ⊗ id
        assert_eq!(eval("p1", 2), tensor(&eval("p1", 1), &id));
    }

    #[test]
    fn cubical_monoid_laws() {
        for kind in ["m", "j"] {
            let g = |s: usize| format!("{kind}{s}");
            // associativity: γ(γ ⊗ id) = γ(id ⊗ γ)
            assert_eq!(eval(&format!("{} . {}", g(1), g(1)), 3), eval(&format!("{} . {}", g(1), g(2)), 3));
        }
        // units: γ∧ ι^{1,1} = id, γ∨ ι^{1,0} = id; absorbing: γ∧ ι^{1,0} = ι⁰π, γ∨ ι^{1,1} = ι¹π
        assert!(eval("m1 . d1+", 1).is_identity());
        assert!(eval("j1 . d1-", 1).is_identity());
        assert_eq!(eval("m1 . d1-", 1), eval("d1- . p1", 1));
        assert_eq!(eval("j1 . d1+", 1), eval("d1+ . p1", 1));
        // involution laws
        assert_eq!(eval("r1 . d1-", 0), eval("d1+", 0));
        assert_eq!(eval("p1 . r1", 1), eval("p1", 1));
        assert_eq!(eval("r1 . m1 . r1 . r2", 2), eval("j1", 2));
        assert_eq!(eval("r1 . j1 . r1 . r2", 2), eval("m1", 2));
        // (ρ ⊗ id)σ = σ(id ⊗ ρ)
        assert_eq!(eval("r1 . x1", 2), eval("x1 . r2", 2));
        // γ±σ = γ±
        assert_eq!(eval("m1 . x1", 2), eval("m1", 2));
    }

    #[test]
    fn generator_inventory() {
        let plain: SiteConfig = "plain".parse().unwrap();
        assert_eq!(generators_between(&plain, 1, 0), vec![eval("p1", 1)]);
        let c: SiteConfig = "c".parse().unwrap();
        let mut expected = vec![eval("p1", 2), eval("p2", 2), eval("m1", 2), eval("j1", 2)];
        expected.sort();
        assert_eq!(generators_between(&c, 2, 1), expected);
        let s: SiteConfig = "s".parse().unwrap();
        assert_eq!(generators_between(&s, 2, 2), vec![eval("x1", 2)]);
    }
}
