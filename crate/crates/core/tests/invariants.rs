use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fraisse::category::Category;
use fraisse::concrete::Concrete;
use fraisse::normed::{minkowski, PolyNormedSpace};
use fraisse::retracts::{random_rp_arrow, rp_compose, Retractive};
use fraisse::structure::{FinStructure, Graph};
use fraisse::trees::{embed_initial, is_t2_arrow, random_tree};
use fraisse::Morphism;

type Q = BigRational;

fn set_map(n: usize, m: usize, images: &[usize]) -> Morphism {
    let map = images.iter().take(n).map(|&i| i % m).collect();
    Morphism::new(Arc::new(FinStructure::set(n)), Arc::new(FinStructure::set(m)), map).expect("map")
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Arc<FinStructure> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.5) {
                edges.push((i, j));
            }
        }
    }
    Arc::new(FinStructure::graph(Graph::from_edges(n, &edges).expect("graph")))
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn random_space(rng: &mut ChaCha8Rng, d: usize) -> PolyNormedSpace {
    let mut pts: Vec<Vec<Q>> = (0..d)
        .map(|i| (0..d).map(|j| Q::from_integer(((i == j) as i64 * rng.random_range(1..=3)).into())).collect())
        .collect();
    for _ in 0..3 {
        pts.push((0..d).map(|_| Q::new(rng.random_range(-3..=3).into(), rng.random_range(1..=2).into())).collect());
    }
    PolyNormedSpace::from_generators(d, pts).expect("space")
}

proptest! {
    #[test]
    fn composition_is_pointwise(a in 1usize..5, b in 1usize..5, c in 1usize..5, d in 1usize..5,
                                 f in prop::collection::vec(0usize..8, 5),
                                 g in prop::collection::vec(0usize..8, 5),
                                 h in prop::collection::vec(0usize..8, 5)) {
        let cat = Concrete::finset_maps();
        let (f, g, h) = (set_map(a, b, &f), set_map(b, c, &g), set_map(c, d, &h));
        let gf = cat.compose(&g, &f).unwrap();
        for i in 0..a {
            prop_assert_eq!(gf.apply(i), g.apply(f.apply(i)));
        }
        let left = cat.compose(&h, &gf).unwrap();
        let right = cat.compose(&cat.compose(&h, &g).unwrap(), &f).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(cat.compose(&cat.identity(f.target()), &f).unwrap(), f.clone());
        prop_assert_eq!(cat.compose(&f, &cat.identity(f.source())).unwrap(), f);
    }

    #[test]
    fn chain_embeddings_are_counted_by_binomials(n in 0usize..5, m in 0usize..7) {
        let cat = Concrete::finlinord();
        let (x, y) = (Arc::new(FinStructure::chain(n)), Arc::new(FinStructure::chain(m)));
        let expect = if n <= m { binom(m, n) } else { 0 };
        prop_assert_eq!(cat.hom(&x, &y).unwrap().len(), expect);
    }

    #[test]
    fn graph_amalgams_commute(seed in any::<u64>(), n in 1usize..5, m in 1usize..5) {
        let cat = Concrete::fingraph();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_graph(&mut rng, n), random_graph(&mut rng, m));
        let z = Arc::new(FinStructure::graph(Graph::from_edges(1, &[]).unwrap()));
        let f = cat.first_arrow(&z, &x).unwrap();
        let g = cat.first_arrow(&z, &y).unwrap();
        let (h, k) = cat.amalgamate(&f, &g).expect("fingraph amalgamates");
        prop_assert!(cat.is_arrow(&h) && cat.is_arrow(&k));
        prop_assert_eq!(h.after(&f).unwrap(), k.after(&g).unwrap());
    }

    #[test]
    fn minkowski_is_a_norm(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_space(&mut rng, d);
        let mut v = || -> Vec<Q> { (0..d).map(|_| Q::new(rng.random_range(-4..=4).into(), rng.random_range(1..=3).into())).collect() };
        let (x, y) = (v(), v());
        let t = Q::new((-5).into(), 3.into());
        let nx = minkowski(&s, &x).unwrap();
        let ny = minkowski(&s, &y).unwrap();
        let sum: Vec<Q> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let scaled: Vec<Q> = x.iter().map(|a| a * &t).collect();
        prop_assert!(minkowski(&s, &sum).unwrap() <= &nx + &ny);
        prop_assert_eq!(minkowski(&s, &scaled).unwrap(), t.abs() * &nx);
        prop_assert_eq!(nx.is_positive(), x.iter().any(|c| !num_traits::Zero::is_zero(c)));
    }

    #[test]
    fn retractive_pairs_compose(seed in any::<u64>()) {
        let rk = Retractive::over_sets();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = Arc::new(FinStructure::set(rng.random_range(1..=2)));
        let f = random_rp_arrow(&rk, &z, &mut rng).unwrap();
        let g = random_rp_arrow(&rk, f.cod(), &mut rng).unwrap();
        let h = random_rp_arrow(&rk, g.cod(), &mut rng).unwrap();
        let gf = rp_compose(&g, &f).unwrap();
        prop_assert!(rk.is_arrow(&gf));
        prop_assert_eq!(gf.r().after(gf.e()).unwrap(), Morphism::identity(&z));
        prop_assert_eq!(rp_compose(&h, &gf).unwrap(), rp_compose(&rp_compose(&h, &g).unwrap(), &f).unwrap());
    }

    #[test]
    fn initial_embeddings_are_t2(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(4, 20, &mut rng);
        let v = Arc::new(FinStructure::tree(fraisse::trees::build_standard_healthy(t.height() + 1, 1 << 12).unwrap()));
        let t = Arc::new(FinStructure::tree(t));
        let f = embed_initial(&t, &v).unwrap();
        prop_assert!(f.is_injective());
        prop_assert!(is_t2_arrow(&f));
    }
}
