//! Property tests over randomized quivers, representations and profiles.

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

use qrep::dirac::{
    dirac, spectral_action, trace_power_matrix, trace_power_paths, wilson_loop,
    ActionPolynomial,
};
use qrep::lattice::{closed_walk_count, coordination, WalkKind};
use qrep::nct::{enumerate_bratteli, sym_elements, sym_order, PrespectralProfile};
use qrep::quiver::{Path, Quiver, DEFAULT_LOOP_LIMIT};
use qrep::repcat::{
    full_matrix_network, gauge_transform, random_full_representation, to_module,
    to_representation, GaugeElement, Representation,
};

/// Arbitrary small quiver: 1..=3 vertices, 1..=4 edges (self-loops and
/// multi-edges allowed).
fn small_quiver() -> impl Strategy<Value = Quiver> {
    (1usize..=3).prop_flat_map(|v| {
        prop::collection::vec((0..v, 0..v), 1..=4)
            .prop_map(move |edges| Quiver::new(v, edges).unwrap())
    })
}

/// Deterministic walk of length `len` from `start`, following out-edges in
/// seed-dependent order; None when a dead end is hit.
fn seeded_walk(q: &Quiver, start: usize, len: usize, seed: u64) -> Option<Path> {
    let mut v = start % q.vertex_count();
    let mut edges = Vec::with_capacity(len);
    let mut state = seed;
    for _ in 0..len {
        let out = q.out_edges(v);
        if out.is_empty() {
            return None;
        }
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let e = out[(state >> 33) as usize % out.len()];
        edges.push(e);
        v = q.target(e);
    }
    Some(Path::new(q, edges).unwrap())
}

fn frob(m: &qrep::linalg::CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Haar edge weights are unitary, so every holonomy is unitary.
    #[test]
    fn holonomy_is_unitary(q in small_quiver(), n in 1usize..=2, seed in 0u64..1000, wseed in 0u64..1000) {
        let rep = random_full_representation(&q, n, seed).unwrap();
        if let Some(p) = seeded_walk(&q, 0, 4, wseed) {
            let h = qrep::dirac::holonomy(&rep, &p).unwrap();
            let dim = h.nrows();
            let res = &h * h.adjoint() - qrep::linalg::CMat::identity(dim, dim);
            prop_assert!(frob(&res) <= 1e-9);
        }
    }

    // Wilson traces are invariant under cyclic rotation of the loop.
    #[test]
    fn wilson_trace_is_cyclic(q in small_quiver(), seed in 0u64..1000, wseed in 0u64..1000, r in 0usize..6) {
        let rep = random_full_representation(&q, 2, seed).unwrap();
        if let Some(p) = seeded_walk(&q, 0, 6, wseed) {
            if p.is_loop(&q) {
                let w = wilson_loop(&rep, &p).unwrap();
                let rotated = p.rotate(&q, r % p.len().max(1)).unwrap();
                let wr = wilson_loop(&rep, &rotated).unwrap();
                prop_assert!((w - wr).norm() <= 1e-9 * (1.0 + w.norm()));
            }
        }
    }

    // D is self-adjoint and both trace routes agree for k <= 3.
    #[test]
    fn dirac_routes_agree(q in small_quiver(), n in 1usize..=2, seed in 0u64..1000) {
        let rep = random_full_representation(&q, n, seed).unwrap();
        let d = dirac(&rep).unwrap();
        prop_assert!(d.hermiticity_residual() <= 1e-10);
        for k in [0usize, 2, 3] {
            let dense = trace_power_matrix(&d, k);
            let paths = trace_power_paths(&rep, k, DEFAULT_LOOP_LIMIT).unwrap();
            prop_assert!((dense - paths).abs() <= 1e-8 * (1.0 + dense.abs()));
        }
    }

    // The module functor is an equivalence: G(F(R)) = R.
    #[test]
    fn module_roundtrip(q in small_quiver(), n in 1usize..=3, seed in 0u64..1000) {
        let rep = random_full_representation(&q, n, seed).unwrap();
        let back = to_representation(&to_module(&rep).unwrap(), &q).unwrap();
        prop_assert!(rep.approx_eq(&back, 1e-10));
    }

    // JSON serialization round-trips representations exactly enough.
    #[test]
    fn representation_json_roundtrip(q in small_quiver(), seed in 0u64..1000) {
        let rep = random_full_representation(&q, 2, seed).unwrap();
        let back = Representation::from_json(&rep.to_json()).unwrap();
        prop_assert!(rep.approx_eq(&back, 1e-12));
        let qback = Quiver::from_json(&q.to_json()).unwrap();
        prop_assert_eq!(qback.edges(), q.edges());
    }

    // Gauge transformations preserve the spectral action; composition obeys
    // the semidirect law and the identity element acts trivially.
    #[test]
    fn gauge_orbit_preserves_action(q in small_quiver(), seed in 0u64..1000, g1 in 0u64..1000, g2 in 0u64..1000) {
        let net = full_matrix_network(&q, 2).unwrap();
        let rep = random_full_representation(&q, 2, seed).unwrap();
        let f = ActionPolynomial::new(vec![0.0, 0.0, 1.0, 0.0, 0.3], 1.0).unwrap();
        let s0 = spectral_action(&rep, &f).unwrap();

        let el1 = GaugeElement::random(&net, g1, true);
        let el2 = GaugeElement::random(&net, g2, true);
        let moved = gauge_transform(&rep, &el1).unwrap();
        prop_assert!((spectral_action(&moved, &f).unwrap() - s0).abs() <= 1e-9 * (1.0 + s0.abs()));

        let seq = gauge_transform(&moved, &el2).unwrap();
        let comp = gauge_transform(&rep, &el2.compose(&el1, &net).unwrap()).unwrap();
        prop_assert!(seq.approx_eq(&comp, 1e-10));

        let id = GaugeElement::identity(&net);
        prop_assert!(gauge_transform(&rep, &id).unwrap().approx_eq(&rep, 1e-12));
    }

    // Every enumerated Bratteli diagram satisfies the compatibility
    // constraints, and the hom-set is empty across unequal Hilbert dimensions.
    #[test]
    fn bratteli_enumeration_is_sound(
        src_pairs in prop::collection::vec((1usize..=3, 1usize..=3), 1..=2),
        dst_pairs in prop::collection::vec((1usize..=3, 1usize..=3), 1..=2),
    ) {
        let src = PrespectralProfile::new(
            src_pairs.iter().map(|p| p.0).collect(),
            src_pairs.iter().map(|p| p.1).collect(),
        ).unwrap();
        let dst = PrespectralProfile::new(
            dst_pairs.iter().map(|p| p.0).collect(),
            dst_pairs.iter().map(|p| p.1).collect(),
        ).unwrap();
        let diags = enumerate_bratteli(&src, &dst);
        for d in &diags {
            prop_assert!(d.is_compatible(&src, &dst));
        }
        if src.hilbert_dim() != dst.hilbert_dim() {
            prop_assert!(diags.is_empty());
        }
    }

    // |Sym(n, r)| equals the number of explicitly enumerated elements.
    #[test]
    fn sym_order_matches_enumeration(pairs in prop::collection::vec((1usize..=3, 1usize..=2), 1..=4)) {
        let x = PrespectralProfile::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        ).unwrap();
        prop_assert_eq!(sym_order(&x), sym_elements(&x).len() as u64);
    }

    // t_{K_n}(l) = (n-1)^l + (n-1)(-1)^l, exactly.
    #[test]
    fn complete_graph_walks_closed_form(n in 2i64..=6, l in 1u32..=10) {
        let expect = BigInt::from(n - 1).pow(l)
            + BigInt::from(n - 1) * BigInt::from(-1i64).pow(l);
        prop_assert_eq!(closed_walk_count(&WalkKind::Complete(n as usize), l).unwrap(), expect);
    }

    // coordination(d, k) counts integer points at L1 distance k, by brute force.
    #[test]
    fn coordination_counts_l1_sphere(d in 1usize..=3, k in 0usize..=5) {
        let mut count = 0u64;
        let side = 2 * k as i64 + 1;
        let total = side.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut dist = 0i64;
            for _ in 0..d {
                dist += (rem % side - k as i64).abs();
                rem /= side;
            }
            if dist == k as i64 {
                count += 1;
            }
        }
        prop_assert_eq!(coordination(d, k).unwrap(), BigUint::from(count));
    }
}
