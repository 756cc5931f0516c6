mod common;

use common::*;
use fj_median::graph::{equilibrium, median, quantile, Instance, Network};
use fj_median::instances::{
    apply_cover, from_json, gen_quantile_gadget, gen_set_cover_gadget, generate, quantile_padding, save_instance,
    load_instance, to_json, GeneratorSpec, InstanceFormat, OpinionDist, SetCoverSpec, Topology,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gadget_median_detects_covers() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..50 {
        let spec = random_set_cover(&mut rng);
        let (inst, layout) = gen_set_cover_gadget(&spec).unwrap();
        let m = spec.sets.len();
        assert_eq!(inst.node_count(), 2 * (spec.universe + m + spec.k));
        assert_eq!(median(&equilibrium(&inst).unwrap().x_star).unwrap(), 0.0);

        let flips = k_subsets(m, spec.k).into_iter().any(|chosen| {
            let x = equilibrium(&apply_cover(&inst, &layout, &chosen).unwrap()).unwrap().x_star;
            median(&x).unwrap() > 1e-9
        });
        let cover = has_cover(&spec);
        assert_eq!(flips, cover, "{spec:?}");
        if cover {
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(yes > 5 && no > 5, "yes {yes} no {no}");
}

#[test]
fn quantile_gadget_detects_covers() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for q in [0.25, 1.0 / 3.0] {
        for _ in 0..30 {
            let spec = random_set_cover(&mut rng);
            let (inst, layout) = gen_quantile_gadget(&spec, q).unwrap();
            let flips = k_subsets(spec.sets.len(), spec.k).into_iter().any(|chosen| {
                let x = equilibrium(&apply_cover(&inst, &layout, &chosen).unwrap()).unwrap().x_star;
                quantile(&x, 1.0 - q).unwrap() > 1e-9
            });
            assert_eq!(flips, has_cover(&spec), "q={q} {spec:?}");
        }
    }
}

#[test]
fn gadget_sizes() {
    let spec = SetCoverSpec {
        universe: 3,
        sets: vec![vec![0, 1], vec![2]],
        k: 1,
    };
    assert_eq!(gen_set_cover_gadget(&spec).unwrap().0.node_count(), 12);
    let half = gen_quantile_gadget(&spec, 0.5).unwrap().0;
    assert_eq!(half.node_count(), 12);

    let quarter = SetCoverSpec {
        universe: 4,
        sets: vec![vec![0, 1], vec![2, 3]],
        k: 1,
    };
    assert_eq!(quantile_padding(&quarter, 0.25).unwrap(), 20);
    let big_k = SetCoverSpec { k: 3, ..quarter };
    assert!(gen_set_cover_gadget(&big_k).is_err());
}

#[test]
fn canonical_round_trip_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dir = tempfile::tempdir().unwrap();
    for i in 0..50u64 {
        let topology = match i % 5 {
            0 => Topology::Grid { rows: 3, cols: 4 },
            1 => Topology::Gnp { n: 15, p: 0.3 },
            2 => Topology::RandomTree { n: 12, directed: true },
            3 => Topology::Ba { n: 20, attach: 2 },
            _ => Topology::Star { n: 9 },
        };
        let opinions = [OpinionDist::Normal, OpinionDist::Lognormal, OpinionDist::Bimodal][i as usize % 3].clone();
        let base = generate(&GeneratorSpec { topology, opinions, seed: i }).unwrap();
        let n = base.node_count();
        let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let edges: Vec<_> = base
            .network()
            .edges()
            .iter()
            .map(|&(u, v, _)| (u, v, rng.random_range(0.1..3.0)))
            .collect();
        let net = Network::new(n, edges, base.network().is_directed()).unwrap();
        let inst = Instance::new(net, alpha, base.s().to_vec()).unwrap();

        assert_eq!(from_json(&to_json(&inst).unwrap()).unwrap(), inst);
        let path = dir.path().join(format!("{i}.json"));
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path, &InstanceFormat::Canonical).unwrap(), inst);
    }
}

#[test]
fn generated_opinions_stay_in_unit_interval() {
    for seed in 0..5 {
        for opinions in [OpinionDist::Normal, OpinionDist::Lognormal, OpinionDist::Bimodal] {
            let inst = generate(&GeneratorSpec {
                topology: Topology::Star { n: 500 },
                opinions,
                seed,
            })
            .unwrap();
            assert!(inst.s().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
