use std::collections::BTreeSet;

use proptest::prelude::*;
use qflow::canon::{eval_canonical, unravel, unravel_component, VMode};
use qflow::diagram::{
    adjoint, find_path, pad_component, stage, strip_trivial, ComponentClass, Direction, End, HalfKind,
    PadSide, PathEnd, PathStep, Topology,
};
use qflow::eval::{eval_path, simulate_direct};
use qflow::flow::{compose, f_map, g_map, ket_transfer, map_distance, FlowMap, Orientation};
use qflow::random::{random_diagram, GenOptions};
use qflow::tensor::{
    apply_rank_one, contract, inner, random_state_with, rel_err, rel_err_amps, rng_from_seed, tensor_product, State,
    WireDecl, WireId,
};
use qflow::verify::{diagram_deviation, reduction_deviation};
use qflow::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn unit(wires: Vec<WireDecl>, rng: &mut ChaCha8Rng) -> State {
    random_state_with(wires, rng).unwrap().normalized()
}

fn scalar(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn wires(rng: &mut ChaCha8Rng, n: usize, first: u32) -> Vec<WireDecl> {
    (0..n).map(|i| WireDecl::new(first + i as u32, rng.random_range(2..=3))).collect()
}

fn ids(v: &[u32]) -> Vec<WireId> {
    v.iter().map(|&i| WireId(i)).collect()
}

fn abs_err(a: &State, b: &State) -> f64 {
    let b = b.permute(&a.wire_ids()).unwrap();
    a.amps().iter().zip(b.amps()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(std::env::var("PROPTEST_CASES").ok().and_then(|v| v.parse().ok()).unwrap_or(64)))]

    #[test]
    fn contraction_is_antilinear_in_omega_and_linear_in_phi(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let all = wires(&mut rng, 3, 1);
        let sub = all[..2].to_vec();
        let (o1, o2) = (unit(sub.clone(), &mut rng), unit(sub, &mut rng));
        let (p1, p2) = (unit(all.clone(), &mut rng), unit(all, &mut rng));
        let (a, b) = (scalar(&mut rng), scalar(&mut rng));
        let mix_o = o1.scale(a).add(&o2.scale(b)).unwrap();
        let lhs = contract(&mix_o, &p1).unwrap();
        let rhs = contract(&o1, &p1).unwrap().scale(a.conj()).add(&contract(&o2, &p1).unwrap().scale(b.conj())).unwrap();
        prop_assert!(abs_err(&lhs, &rhs) < 1e-12);
        let mix_p = p1.scale(a).add(&p2.scale(b)).unwrap();
        let lhs = contract(&o1, &mix_p).unwrap();
        let rhs = contract(&o1, &p1).unwrap().scale(a).add(&contract(&o1, &p2).unwrap().scale(b)).unwrap();
        prop_assert!(abs_err(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn scalars_move_between_factors(seed in any::<u64>(), k in -4i32..4) {
        let mut rng = rng_from_seed(seed);
        let a = unit(wires(&mut rng, 1, 1), &mut rng);
        let b = unit(wires(&mut rng, 2, 2), &mut rng);
        let c = C64::new(2f64.powi(k), 0.0);
        prop_assert_eq!(tensor_product(&a.scale(c), &b).unwrap(), tensor_product(&a, &b.scale(c)).unwrap());
        let z = scalar(&mut rng);
        let (x, y) = (tensor_product(&a.scale(z), &b).unwrap(), tensor_product(&a, &b.scale(z)).unwrap());
        prop_assert!(abs_err(&x, &y) < 1e-12);
    }

    #[test]
    fn dagger_and_inner_symmetry(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let w = wires(&mut rng, 2, 1);
        let (a, b) = (unit(w.clone(), &mut rng), unit(w, &mut rng));
        prop_assert_eq!(a.dagger().dagger(), a.clone());
        prop_assert!((inner(&a, &b).unwrap() - inner(&b, &a).unwrap().conj()).norm() < 1e-15);
        let full = contract(&a, &b).unwrap();
        prop_assert!((full.as_scalar().unwrap() - inner(&a, &b).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn rank_one_matches_dense_operator(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let n = rng.random_range(2..=3);
        let all = wires(&mut rng, n, 1);
        let k = rng.random_range(1..=n);
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, n, k).into_vec();
        picked.sort_unstable();
        let sub: Vec<WireDecl> = picked.iter().map(|&i| all[i]).collect();
        let (lambda, omega) = (unit(sub.clone(), &mut rng), unit(sub, &mut rng));
        let phi = unit(all.clone(), &mut rng);
        let dims: Vec<usize> = all.iter().map(|w| w.dim).collect();
        let total: usize = dims.iter().product();
        let digits = |mut i: usize| {
            let mut d = vec![0; n];
            for j in (0..n).rev() {
                d[j] = i % dims[j];
                i /= dims[j];
            }
            d
        };
        let sub_index = |d: &[usize]| picked.iter().fold(0, |acc, &j| acc * dims[j] + d[j]);
        let mut expect = vec![C64::new(0.0, 0.0); total];
        for (r, slot) in expect.iter_mut().enumerate() {
            let dr = digits(r);
            for c in 0..total {
                let dc = digits(c);
                if (0..n).any(|j| !picked.contains(&j) && dr[j] != dc[j]) {
                    continue;
                }
                *slot += lambda.amps()[sub_index(&dr)] * omega.amps()[sub_index(&dc)].conj() * phi.amps()[c];
            }
        }
        let got = apply_rank_one(&lambda, &omega, &phi).unwrap();
        prop_assert!(rel_err_amps(got.amps(), &expect) < 1e-10);
    }

    #[test]
    fn g_antilinear_f_linear_in_state(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let w = wires(&mut rng, 2, 1);
        let s = unit(w.clone(), &mut rng);
        let phi = unit(w[..1].to_vec(), &mut rng);
        let a = scalar(&mut rng);
        let g = |o: &State| g_map(o, &ids(&[1]), &ids(&[2])).unwrap().apply_state(&phi).unwrap();
        prop_assert!(abs_err(&g(&s.scale(a)), &g(&s).scale(a.conj())) < 1e-12);
        let f = |l: &State| f_map(l, &ids(&[1]), &ids(&[2])).unwrap();
        let scaled = f(&s.scale(a));
        let expect = FlowMap::new(scaled.inputs().to_vec(), scaled.outputs().to_vec(), f(&s).matrix() * a, false).unwrap();
        prop_assert!(map_distance(&scaled, &expect) < 1e-12);
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let w = wires(&mut rng, 4, 1);
        let s = |a: usize, b: usize, rng: &mut ChaCha8Rng| unit(vec![w[a], w[b]], rng);
        let (x, y, z) = (s(0, 1, &mut rng), s(1, 2, &mut rng), s(2, 3, &mut rng));
        let g1 = g_map(&x, &ids(&[1]), &ids(&[2])).unwrap();
        let f2 = f_map(&y, &ids(&[2]), &ids(&[3])).unwrap();
        let g3 = g_map(&z, &ids(&[3]), &ids(&[4])).unwrap();
        let left = compose(&compose(&g3, &f2).unwrap(), &g1).unwrap();
        let right = compose(&g3, &compose(&f2, &g1).unwrap()).unwrap();
        prop_assert!(map_distance(&left, &right) < 1e-12);
        let t = |st: &State| ket_transfer(st, Orientation::Declared).unwrap();
        let left = compose(&compose(&t(&z), &t(&y)).unwrap(), &t(&x)).unwrap();
        let right = compose(&t(&z), &compose(&t(&y), &t(&x)).unwrap()).unwrap();
        prop_assert!(left.is_antilinear());
        prop_assert!(map_distance(&left, &right) < 1e-12);
    }

    #[test]
    fn paths_are_deterministic_and_alternate(seed in 0u64..10_000) {
        let d = random_diagram(seed, &GenOptions::bipartite().with_gates(2));
        let topo = Topology::build(&d);
        for w in d.input_wires() {
            let Ok(p) = find_path(&topo, w.id, PathEnd::Bottom) else { continue };
            prop_assert_eq!(&p, &find_path(&topo, w.id, PathEnd::Bottom).unwrap());
            let legs: Vec<Direction> = p.steps.iter().filter_map(|s| match s {
                PathStep::Leg { direction, .. } => Some(*direction),
                _ => None,
            }).collect();
            prop_assert!(legs.windows(2).all(|x| x[0] != x[1]));
        }
    }

    #[test]
    fn staging_covers_every_half_once(seed in 0u64..10_000) {
        let d = random_diagram(seed, &GenOptions::multipartite());
        let topo = Topology::build(&d);
        for c in topo.components() {
            let Ok(plan) = stage(&topo, c.index) else { continue };
            let total: usize = plan.waves.iter().map(|w| w.halves.len()).sum();
            prop_assert_eq!(total, c.halves.len());
            let staged: BTreeSet<_> = plan.waves.iter().flat_map(|w| w.halves.iter().copied()).collect();
            prop_assert_eq!(staged.len(), c.halves.len());
            let oriented: BTreeSet<_> = plan.orientation.keys().copied().collect();
            prop_assert_eq!(oriented, c.segments.iter().copied().collect::<BTreeSet<_>>());
            prop_assert!(plan.waves.windows(2).all(|w| w[0].kind != w[1].kind));
            for w in &plan.waves {
                prop_assert!(w.halves.iter().all(|&h| topo.half(h).kind == w.kind));
            }
        }
    }

    #[test]
    fn commuting_swaps_keep_structure(seed in 0u64..10_000) {
        let d = random_diagram(seed, &GenOptions::bipartite());
        let topo = Topology::build(&d);
        let n = d.elements().len();
        for i in 0..n.saturating_sub(1) {
            let (a, b) = (&d.elements()[i], &d.elements()[i + 1]);
            if a.wires().iter().any(|w| b.wires().contains(w)) {
                continue;
            }
            let swapped = d.with_time(i, b.time()).unwrap().with_time(i + 1, a.time()).unwrap();
            let st = Topology::build(&swapped);
            prop_assert_eq!(structure(&topo), structure(&st));
            prop_assert_eq!(staging(&topo), staging(&st));
            for w in d.input_wires() {
                let p = find_path(&topo, w.id, PathEnd::Bottom).map(|p| p.box_order());
                let q = find_path(&st, w.id, PathEnd::Bottom).map(|p| p.box_order());
                prop_assert_eq!(p.ok(), q.ok());
            }
        }
    }

    #[test]
    fn adjoint_is_an_involution(seed in 0u64..10_000) {
        let d = random_diagram(seed, &GenOptions::multipartite().with_gates(3));
        prop_assert_eq!(adjoint(&adjoint(&d)), d);
    }

    #[test]
    fn eval_diagram_matches_direct(seed in 0u64..10_000) {
        let d = random_diagram(seed, &GenOptions::multipartite().with_gates(2));
        let mut rng = rng_from_seed(seed);
        prop_assert!(diagram_deviation(&d, &mut rng).unwrap() < 1e-9);
    }

    #[test]
    fn reductions_survive_substitution(seed in 0u64..10_000) {
        let d = random_diagram(seed, &GenOptions::multipartite());
        let mut rng = rng_from_seed(seed);
        if let Some(dev) = reduction_deviation(&d, &mut rng).unwrap() {
            prop_assert!(dev < 1e-9);
        }
    }

    #[test]
    fn lifted_pairings_are_v_invariant(seed in any::<u64>()) {
        // a closed component: Λ on all lines, a box on some, Ω on all
        let mut rng = rng_from_seed(seed);
        let n = rng.random_range(2..=3);
        let w = wires(&mut rng, n, 1);
        let names: Vec<String> = (0..n).map(|i| format!("w{}", i + 1)).collect();
        let all = names.join(",");
        let mid = names[..n - 1].join(",");
        let decl: Vec<String> = w.iter().zip(&names).map(|(w, s)| format!("{s}:{}", w.dim)).collect();
        let r = |rng: &mut ChaCha8Rng| rng.random::<u32>();
        let src = format!(
            "wires {}\nL t=1 on ({all}) lambda=rand {}\nQ t=2 on ({mid}) omega=rand {} lambda=rand {}\nO t=3 on ({all}) omega=rand {}",
            decl.join(" "), r(&mut rng), r(&mut rng), r(&mut rng), r(&mut rng)
        );
        let d = qflow::diagram::parse(&src).unwrap();
        let topo = Topology::build(&d);
        let c = topo.components().iter().find(|c| c.class == ComponentClass::Scalar).unwrap().index;
        let oracle = simulate_direct(&d, &State::scalar(C64::new(1.0, 0.0))).unwrap().as_scalar().unwrap();
        for vmode in [VMode::Identity, VMode::Random(seed)] {
            let cf = unravel_component(&topo, c, vmode).unwrap();
            let got = inner(&cf.omega_hat().unwrap(), &cf.lambda_hat().unwrap()).unwrap();
            prop_assert!((got - oracle).norm() <= 1e-10 * oracle.norm().max(1.0));
        }
    }

    #[test]
    fn padding_is_neutral(seed in 0u64..10_000, output_side in any::<bool>()) {
        let d = random_diagram(seed, &GenOptions::multipartite());
        let topo = Topology::build(&d);
        let c = topo.components().iter().find(|c| c.class == ComponentClass::Processor).unwrap().index;
        let Ok(plan) = stage(&topo, c) else { return Ok(()) };
        let base = unravel(&topo, &plan, VMode::Identity).unwrap();
        let side = if output_side { PadSide::Output } else { PadSide::Input };
        let padded = pad_component(&d, c, side).unwrap();
        let pt = Topology::build(&padded);
        let pad_wire = padded.wires().iter().map(|w| w.id).max().unwrap();
        let pc = pt.components().iter().find(|k| k.class == ComponentClass::Processor && k.segments.iter().any(|&s| pt.segment(s).wire == pad_wire)).unwrap().index;
        let pf = unravel(&pt, &stage(&pt, pc).unwrap(), VMode::Identity).unwrap();
        prop_assert!(rel_err_amps(strip_trivial(&pf.omega_hat().unwrap()).amps(), base.omega_hat().unwrap().amps()) < 1e-12);
        prop_assert!(rel_err_amps(strip_trivial(&pf.lambda_hat().unwrap()).amps(), base.lambda_hat().unwrap().amps()) < 1e-12);
        let mut rng = rng_from_seed(seed);
        let phi = random_state_with(topo.input_decls(c), &mut rng).unwrap();
        let one = |w: Vec<WireDecl>| State::ket(w, vec![C64::new(1.0, 0.0)]).unwrap();
        let trivial: Vec<WireDecl> = pt.input_decls(pc).into_iter().filter(|w| w.dim == 1).collect();
        let padded_in = if trivial.is_empty() { phi.clone() } else { tensor_product(&phi, &one(trivial)).unwrap().sorted() };
        let out = strip_trivial(&eval_canonical(&pf, &padded_in).unwrap());
        prop_assert!(rel_err(&out, &eval_canonical(&base, &phi).unwrap()) < 1e-12);
    }
}

type SegmentShape = (WireId, usize, Option<(usize, HalfKind)>, Option<(usize, HalfKind)>);

/// Segments keyed by wire and position, with their ends named by element.
fn structure(t: &Topology) -> Vec<SegmentShape> {
    let end = |e: End| match e {
        End::Half(h) => Some((t.half(h).element, t.half(h).kind)),
        _ => None,
    };
    let mut v: Vec<SegmentShape> = t.segments().iter().map(|s| (s.wire, s.position, end(s.lower), end(s.upper))).collect();
    v.sort_by_key(|s| (s.0, s.1));
    v
}

fn staging(t: &Topology) -> Vec<Option<Vec<BTreeSet<(usize, HalfKind)>>>> {
    t.components()
        .iter()
        .map(|c| {
            stage(t, c.index).ok().map(|p| {
                p.waves.iter().map(|w| w.halves.iter().map(|&h| (t.half(h).element, t.half(h).kind)).collect()).collect()
            })
        })
        .collect()
}

#[test]
fn path_evaluation_is_a_pure_function() {
    let d = qflow::diagram::parse(include_str!("../fixtures/fourbox.qd")).unwrap();
    let topo = Topology::build(&d);
    let p = find_path(&topo, WireId(1), PathEnd::Bottom).unwrap();
    let phi = State::basis(vec![WireDecl::new(1, 2)], 1).unwrap();
    assert_eq!(eval_path(&topo, &p, &phi).unwrap(), eval_path(&topo, &p, &phi).unwrap());
}
