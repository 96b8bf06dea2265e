use cubeforge_core::words::{atoms_at, print};
use cubeforge_core::*;
use proptest::prelude::*;

fn cube_map(max_dim: usize) -> impl Strategy<Value = CubeMap> {
    (0..=max_dim, 0..=max_dim).prop_flat_map(|(n, m)| {
        prop::collection::vec(0u32..(1 << m), 1usize << n).prop_map(move |t| CubeMap::new(n, m, t).unwrap())
    })
}

fn maps_of(n: usize, m: usize) -> impl Strategy<Value = CubeMap> {
    prop::collection::vec(0u32..(1 << m), 1usize << n).prop_map(move |t| CubeMap::new(n, m, t).unwrap())
}

/// A composable chain `f: □a → □b`, `g: □b → □c`, `h: □c → □d`.
fn chain() -> impl Strategy<Value = (CubeMap, CubeMap, CubeMap)> {
    (0..=3usize, 0..=3usize, 0..=3usize, 0..=3usize)
        .prop_flat_map(|(a, b, c, d)| (maps_of(a, b), maps_of(b, c), maps_of(c, d)))
}

/// A random word in the site's generators starting at `□^dom`, never
/// passing through cubes above `max_dim`.
fn word(cfg: SiteConfig, max_dim: usize, len: usize) -> impl Strategy<Value = GeneratorWord> {
    (0..=max_dim, prop::collection::vec(any::<prop::sample::Index>(), 0..=len)).prop_map(move |(dom, picks)| {
        let mut w = GeneratorWord::identity(dom);
        let mut dim = dom;
        for pick in picks {
            let atoms: Vec<GeneratorAtom> =
                atoms_at(&cfg, dim).into_iter().filter(|a| a.cod_dim(dim).is_some_and(|c| c <= max_dim)).collect();
            if atoms.is_empty() {
                break;
            }
            let atom = atoms[pick.index(atoms.len())];
            dim = atom.cod_dim(dim).unwrap();
            w.push(atom);
        }
        w
    })
}

fn every_atom() -> SiteConfig {
    "dcsr".parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_print_round_trip(w in word(every_atom(), 4, 8)) {
        let text = print(&w);
        prop_assert_eq!(parse(&text, w.dom_dim).unwrap(), w);
    }

    #[test]
    fn evaluate_is_a_homomorphism(w in word(every_atom(), 4, 6), tail in prop::collection::vec(any::<prop::sample::Index>(), 0..6)) {
        // extend w by a second word starting where it ends
        let mut v = GeneratorWord::identity(w.cod_dim().unwrap());
        let mut dim = v.dom_dim;
        for pick in tail {
            let atoms: Vec<GeneratorAtom> =
                atoms_at(&every_atom(), dim).into_iter().filter(|a| a.cod_dim(dim).is_some_and(|c| c <= 4)).collect();
            let atom = atoms[pick.index(atoms.len())];
            dim = atom.cod_dim(dim).unwrap();
            v.push(atom);
        }
        let whole = evaluate(&w.then(&v)).unwrap();
        prop_assert_eq!(whole, compose(&evaluate(&v).unwrap(), &evaluate(&w).unwrap()).unwrap());
    }

    #[test]
    fn composition_is_associative((f, g, h) in chain()) {
        let left = compose(&h, &compose(&g, &f).unwrap()).unwrap();
        let right = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(compose(&CubeMap::identity(f.cod()), &f).unwrap(), f.clone());
        prop_assert_eq!(compose(&f, &CubeMap::identity(f.dom())).unwrap(), f);
    }

    #[test]
    fn tensor_is_associative(f in cube_map(2), g in cube_map(2), h in cube_map(2)) {
        prop_assert_eq!(tensor(&tensor(&f, &g), &h), tensor(&f, &tensor(&g, &h)));
    }

    #[test]
    fn tensor_interchange((f, g, _) in chain(), (f2, g2, _) in chain()) {
        prop_assume!(f.dom() + f2.dom() <= 4 && g.cod() + g2.cod() <= 4 && f.cod() + f2.cod() <= 4);
        let left = compose(&tensor(&g, &g2), &tensor(&f, &f2)).unwrap();
        let right = tensor(&compose(&g, &f).unwrap(), &compose(&g2, &f2).unwrap());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn dependency_of_a_composite((f, g, _) in chain()) {
        // output i of g∘f reads only inputs that feed some input g's output i reads
        let (df, dg) = (dependency(&f), dependency(&g));
        let dgf = dependency(&compose(&g, &f).unwrap());
        for i in 1..=g.cod() {
            for &j in dgf.of(i) {
                prop_assert!(dg.of(i).iter().any(|&k| df.depends(k, j)));
            }
        }
    }

    #[test]
    fn site_words_are_members((site, w) in prop::sample::select(SiteConfig::all_valid()).prop_flat_map(|s| (Just(s), word(s, 3, 6)))) {
        prop_assert!(is_member(&site, &evaluate(&w).unwrap()), "{} in {}", print(&w), site);
    }

    #[test]
    fn dependency_sets_of_site_maps_are_disjoint(site in prop::sample::select(SiteConfig::non_diagonal()), w in word("csr".parse().unwrap(), 3, 6)) {
        let f = evaluate(&w).unwrap();
        if is_member(&site, &f) {
            prop_assert!(dependency(&f).pairwise_disjoint());
        }
    }
}
