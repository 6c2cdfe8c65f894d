//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::One;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spreadgraph::attack::{densify, find_dense_subset, AttackConfig, DensifyMode};
use spreadgraph::exact::{int, ratio, Rational};
use spreadgraph::extractor::{adversary_partial, family_from_graph, graph_from_family, BitString, PartialExtractorFamily};
use spreadgraph::game::{forced_inputs, play, GameConfig, Strategy};
use spreadgraph::hypergraph::subset_count;
use spreadgraph::rates::{advice_bound, alpha_from_beta, threshold_beta};
use spreadgraph::sampler::{
    construct_certified, sample_spread, sample_tuple_spread, trim_to, tuple_probability_exponent, verify_spread,
    SpreadParams, VerifyMode,
};
use spreadgraph::{EdgeKind, Hypergraph, Vertex, VertexSet};

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn random_unit(rng: &mut ChaCha8Rng) -> Rational {
    let q: i64 = rng.random_range(2..1000);
    ratio(rng.random_range(1..q), q)
}

fn threshold_formulas() -> Outcome {
    check!(threshold_beta(&ratio(1, 2), 2) == ratio(2, 3), "threshold_beta(1/2, 2) != 2/3");
    let mut rng = common::rng(1);
    for _ in 0..50 {
        let a = random_unit(&mut rng);
        check!(threshold_beta(&a, 1) == a, "threshold_beta({a}, 1) != {a}");
    }
    for _ in 0..200 {
        let b = random_unit(&mut rng);
        let k = rng.random_range(1..8);
        check!(threshold_beta(&alpha_from_beta(&b, k), k) == b, "round trip fails at beta = {b}, k = {k}");
    }
    let adv = advice_bound(&ratio(1, 2), 3).map_err(|e| e.to_string())?;
    check!(adv == ratio(8, 9), "advice_bound(1/2, 3) = {adv}");
    Ok("exact equality on 251 rationals".into())
}

fn slope_identity() -> Outcome {
    let mut rng = common::rng(2);
    for _ in 0..100 {
        let a = random_unit(&mut rng);
        let k = rng.random_range(2..=6u32);
        let b = threshold_beta(&a, k);
        let one = Rational::one();
        let lhs = &b / &a;
        let rhs = int(k) * (&one - &b) / (&one - &a);
        check!(lhs == rhs, "slopes differ at alpha = {a}, k = {k}");
    }
    Ok("100 rationals".into())
}

fn e_u_oracle() -> Outcome {
    let mut rng = common::rng(3);
    for _ in 0..500 {
        let nv = rng.random_range(4..=32);
        let k = rng.random_range(1..=4);
        let kind = if rng.random_bool(0.5) { EdgeKind::DistinctSet } else { EdgeKind::OrderedTuple };
        let m = rng.random_range(0..120);
        let g = common::random_graph(&mut rng, nv, k, kind, m);
        for _ in 0..5 {
            let set: Vec<Vertex> = (0..nv as Vertex).filter(|_| rng.random_bool(0.6)).collect();
            let fast = g.edge_count_within(&VertexSet::new(set.iter().copied())).unwrap();
            check!(fast == common::naive_count(&g, &set), "recount mismatch on a {nv}-vertex graph");
        }
    }
    let mut checked = 0;
    for _ in 0..40 {
        let nv = rng.random_range(4..=16);
        let k = rng.random_range(1..=3);
        let m = rng.random_range(1..40);
        let g = common::random_graph(&mut rng, nv, k, EdgeKind::DistinctSet, m);
        let u = rng.random_range(0..=nv);
        let subsets = common::subsets_of_size(nv, u);
        let total: u64 = subsets.iter().map(|s| common::naive_count(&g, s)).sum();
        let mean = Rational::new(BigInt::from(total), BigInt::from(subsets.len()));
        check!(g.induced_expectation(u).unwrap() == mean, "expectation mismatch at n = {nv}, u = {u}");
        checked += subsets.len();
    }
    Ok(format!("2500 recounts, {checked} subsets averaged"))
}

fn densify_guarantee() -> Outcome {
    let mut rng = common::rng(4);
    let mut strict = 0;
    for t in 0..100 {
        let (nv, k) = if t < 40 {
            (399 + t % 2, 2)
        } else {
            (rng.random_range(20..=400), rng.random_range(2..=3))
        };
        let m = rng.random_range(1..3000);
        let g = common::random_graph(&mut rng, nv, k, EdgeKind::DistinctSet, m);
        let mut sizes = vec![rng.random_range(1..nv), rng.random_range(1..nv)];
        if nv as u64 >= spreadgraph::attack::c_k(k) {
            sizes.push(nv);
        }
        for u in sizes {
            let applies = u as u64 >= spreadgraph::attack::c_k(k);
            let mode = if applies { DensifyMode::Strict } else { DensifyMode::BestEffort };
            let d = densify(&g, u, mode).map_err(|e| e.to_string())?;
            check!(d.set.len() == u, "wrong size");
            let e = Rational::from_integer(d.edges.into());
            if applies {
                strict += 1;
                let p = Rational::new(BigInt::from(m), num_traits::pow(BigInt::from(nv), k));
                let bound = ratio(99, 100) * p * Rational::from_integer(num_traits::pow(BigInt::from(u), k));
                check!(e >= bound, "bound fails at n = {nv}, u = {u}");
            } else {
                check!(e >= g.induced_expectation(u).unwrap(), "below the mean at n = {nv}, u = {u}");
            }
        }
    }
    Ok(format!("{strict} guaranteed runs, the rest at least the subset mean"))
}

fn spread_construction() -> Outcome {
    let half = ratio(1, 2);
    check!(subset_count(16, 4) == 2517, "subset count");
    for s in 0..1000 {
        let p = SpreadParams::builder(4, 2, half.clone()).seed(s).build().map_err(|e| e.to_string())?;
        let (_, cert) = construct_certified(&p, 1000).map_err(|e| format!("seed {s}: {e}"))?;
        check!(cert.pass && cert.mode == "exhaustive", "seed {s}: not an exhaustive pass");
        check!(cert.subsets_checked == 2517, "seed {s}: {} subsets", cert.subsets_checked);
    }
    let counts: Vec<i64> = (0..200)
        .map(|s| {
            let p = SpreadParams::builder(4, 2, half.clone()).seed(s).build().unwrap();
            sample_spread(&p).unwrap().edge_count() as i64
        })
        .collect();
    // mean 30, variance 120 * 1/4 * 3/4 per graph
    let sum: i64 = counts.iter().sum();
    let dev = Rational::new(BigInt::from(sum), BigInt::from(200)) - int(30);
    let var = ratio(90, 4 * 200);
    check!(&dev * &dev <= int(9) * var, "mean edge count {sum}/200 is more than 3 standard errors from 30");
    Ok(format!("1000 certified seeds, mean edges {:.3}", sum as f64 / 200.0))
}

fn attack_suites() -> Outcome {
    let mut rng = common::rng(6);
    let config = AttackConfig::default();
    let betas = [ratio(1, 4), ratio(1, 2), ratio(3, 4)];
    for _ in 0..150 {
        let nv = [4usize, 8, 16][rng.random_range(0..3)];
        let k = rng.random_range(2..=3.min(nv - 1));
        let beta = &betas[rng.random_range(0..3)];
        let d = rng.random_range(-1..=1);
        let m = rng.random_range(0..60);
        let g = common::random_graph(&mut rng, nv, k, EdgeKind::DistinctSet, m);
        let r = find_dense_subset(&g, beta, d, &config).map_err(|e| e.to_string())?;
        let best = g.max_dense_subset_bruteforce(r.size_cap as usize, u64::MAX).unwrap().edges;
        check!(r.set.len() as u64 <= r.size_cap, "size cap exceeded");
        check!(r.e_u == g.edge_count_within(&r.set).unwrap(), "e_U recount");
        check!(r.e_u <= best, "attack beats brute force ({} > {best})", r.e_u);
    }

    let half = ratio(1, 2);
    let mut planted = Vec::new();
    // two disjoint heavy pairs of multiplicity 2^{D+3} plus noise
    let mut rows: Vec<Vec<Vertex>> = [[0, 1], [2, 3]].iter().flat_map(|p| std::iter::repeat_n(p.to_vec(), 8)).collect();
    rows.extend(common::random_graph(&mut rng, 16, 2, EdgeKind::DistinctSet, 10).edges().map(<[Vertex]>::to_vec));
    planted.push(("heavy_pair", Hypergraph::new(16, 2, EdgeKind::DistinctSet, rows).unwrap()));
    for k in [2, 3] {
        let mut rows = common::planted_clique(&[5, 17, 40, 61], k, 10);
        rows.extend(common::random_graph(&mut rng, 64, k, EdgeKind::DistinctSet, 6).edges().map(<[Vertex]>::to_vec));
        planted.push(("clique", Hypergraph::new(64, k, EdgeKind::DistinctSet, rows).unwrap()));
    }
    let bip: Vec<[Vertex; 2]> = (0..8).flat_map(|x| (8..16).map(move |y| [x, y])).collect();
    planted.push(("bipartite_complete", Hypergraph::new(16, 2, EdgeKind::DistinctSet, bip).unwrap()));
    for (name, g) in &planted {
        let r = find_dense_subset(g, &half, 0, &config).map_err(|e| e.to_string())?;
        let best = common::brute_force_on_support(g, r.size_cap as usize);
        check!(r.achieved, "{name}: not achieved (e_U = {}, target {})", r.e_u, r.target);
        check!(2 * r.e_u >= best, "{name}: e_U = {} below half of {best}", r.e_u);
    }
    Ok("150 random instances, 4 planted suites".into())
}

fn random_partial(rng: &mut ChaCha8Rng) -> (PartialExtractorFamily, Vec<BitString>, u32) {
    let n = rng.random_range(1..=6);
    let k = rng.random_range(1..=3);
    let f_n = rng.random_range(0..=10);
    let density = [0.0, 0.3, 0.7, 1.0][rng.random_range(0..4)];
    let tables = (0..k)
        .map(|_| {
            (0..1usize << f_n)
                .map(|_| rng.random_bool(density).then(|| rng.random_range(0..1u32 << n)))
                .collect()
        })
        .collect();
    let keep = [0.2, 0.5, 1.0][rng.random_range(0..3)];
    let d: Vec<BitString> = (0..1u64 << f_n)
        .filter(|_| rng.random_bool(keep))
        .map(|s| BitString::from_index(s, f_n))
        .collect();
    let phi = rng.random_range(0..=n);
    (PartialExtractorFamily::new(n, f_n, tables).unwrap(), d, phi)
}

fn adversary_bounds() -> Outcome {
    let mut rng = common::rng(7);
    for t in 0..1000 {
        let (fam, d, phi) = random_partial(&mut rng);
        let (n, k) = (fam.n(), fam.k());
        let out = adversary_partial(&d, &fam, phi).map_err(|e| e.to_string())?;
        // |E| >= |D| 2^{(phi - n - 1) k}, cleared of powers of two
        let lhs = BigInt::from(out.e_n.len()) << ((n + 1 - phi) as usize * k);
        check!(lhs >= BigInt::from(d.len()), "case {t}: |E| = {} for |D| = {}", out.e_n.len(), d.len());
        for x in &out.e_n {
            let s = x.to_index() as usize;
            for i in 0..k {
                if let Some(y) = fam.get(i, s) {
                    check!(out.b.contains(&BitString::from_index(y.into(), n)), "case {t}: output outside B");
                }
            }
        }
        check!((out.b.len() as u64) <= (k as u64) << phi, "case {t}: |B| = {}", out.b.len());
    }
    Ok("1000 random partial families".into())
}

fn correspondence_and_game() -> Outcome {
    let half = ratio(1, 2);
    for s in 0..50u64 {
        let n = 3 + (s % 2) as u32;
        let p = SpreadParams::builder(n, 2, half.clone()).seed(1000 + s).build().map_err(|e| e.to_string())?;
        let (g, cert) = construct_certified(&p, 1000).map_err(|e| e.to_string())?;
        let game = GameConfig {
            adversary_budget: cert.params.subset_cap,
            responder_budget: cert.params.edge_bound,
            strategy: Strategy::exhaustive(),
        };
        let out = play(&g, &game).map_err(|e| e.to_string())?;
        check!(out.forced_count == cert.max_e, "seed {s}: forced {} vs certificate {}", out.forced_count, cert.max_e);
        check!(out.responder_within_budget, "seed {s}: responder over budget");

        let f_n = (g.edge_count() as u64).ilog2();
        let trimmed = trim_to(&g, 1 << f_n);
        let fam = family_from_graph(&trimmed, f_n).map_err(|e| e.to_string())?;
        check!(graph_from_family(&fam).map_err(|e| e.to_string())? == trimmed, "seed {s}: round trip");
        check!(family_from_graph(&graph_from_family(&fam).unwrap(), f_n).unwrap() == fam, "seed {s}: family round trip");
        let star = play(&trimmed, &game).map_err(|e| e.to_string())?;
        let inside = trimmed.edges_within(&star.set).unwrap();
        check!(forced_inputs(&fam, &star.set) == inside, "seed {s}: forced inputs differ from E(U*)");
        for sigma in (0..fam.inputs()).filter(|x| !inside.contains(x)) {
            check!((0..fam.k()).any(|i| !star.set.contains(fam.get(i, sigma))), "seed {s}: input {sigma} fully inside U*");
        }
    }
    Ok("50 certified graphs".into())
}

fn tuple_sampler() -> Outcome {
    for (f_n, e) in [(2u64, 1i64), (3, 2), (5, 4), (8, 7)] {
        check!(tuple_probability_exponent(2, f_n, 1) == e, "exponent at f = {f_n}");
        let g = sample_tuple_spread(2, f_n, 1, f_n).map_err(|e| e.to_string())?;
        check!(g.edge_count() == 16, "clipped sampler kept {} of 16 tuples", g.edge_count());
    }
    check!(tuple_probability_exponent(3, 5, 2) == -4, "exponent at n = 3, h = 2, f = 5");
    let sum: usize = (0..200).map(|s| sample_tuple_spread(3, 5, 2, s).unwrap().edge_count()).sum();
    // 4096 tuples at probability 1/16: mean 2^8, variance 240
    let dev = Rational::new(BigInt::from(sum), BigInt::from(200)) - int(256);
    check!(&dev * &dev <= int(9) * ratio(240, 200), "mean {sum}/200 is more than 3 standard errors from 256");
    Ok(format!("mean tuples {:.2} against 256", sum as f64 / 200.0))
}

fn outputs() -> Vec<String> {
    let half = ratio(1, 2);
    let p = SpreadParams::builder(4, 2, half.clone()).seed(7).build().unwrap();
    let (g, cert) = construct_certified(&p, 100).unwrap();
    let mut rng = common::rng(9);
    let g3 = common::random_graph(&mut rng, 16, 3, EdgeKind::DistinctSet, 80);
    let attack = find_dense_subset(&g3, &half, 0, &AttackConfig::default()).unwrap();
    let big = common::random_graph(&mut rng, 64, 2, EdgeKind::DistinctSet, 300);
    let randomized = VerifyMode::Randomized {
        samples_per_stratum: 2000,
        seed: 3,
    };
    let rcert = verify_spread(&big, 8, 12, &randomized).unwrap();
    vec![
        g.to_json(),
        cert.to_json(),
        serde_json::to_string(&attack).unwrap(),
        rcert.to_json(),
        sample_spread(&p.with_seed(11)).unwrap().to_json(),
    ]
}

fn determinism() -> Outcome {
    let run = |workers: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap()
            .install(outputs)
    };
    let one = run(1);
    check!(one == run(1), "two single-worker runs differ");
    check!(one == run(4), "outputs depend on the worker count");
    Ok(format!("{} artifacts byte-identical", one.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("threshold formulas", threshold_formulas),
        ("slope coincidence", slope_identity),
        ("e(U) oracle equivalence", e_u_oracle),
        ("densify guarantee", densify_guarantee),
        ("spread construction", spread_construction),
        ("attack validity and strength", attack_suites),
        ("adversary postconditions", adversary_bounds),
        ("correspondence and game", correspondence_and_game),
        ("tuple sampler", tuple_sampler),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
