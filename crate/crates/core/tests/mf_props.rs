use conjoint_core::mf::{
    decile_tags, gradient, loss, train_sgd, FactorModel, Hyperparams, RatingMatrix, Tag,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    data: RatingMatrix,
    u: Vec<Vec<f64>>,
    model: FactorModel,
}

fn instance(seed: u64, k: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = rng.random_range(3..=5);
    let ni = rng.random_range(3..=5);
    let mut entries = Vec::new();
    for i in 0..nu {
        for j in 0..ni {
            if rng.random_bool(0.6) || entries.is_empty() {
                entries.push((i, j, rng.random_range(1..=5) as f64));
            }
        }
    }
    let u = (0..nu).map(|_| (0..ni).map(|_| rng.random_range(0.0..=1.0)).collect()).collect();
    let mut mat = |n: usize| -> Vec<Vec<f64>> { (0..n).map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect() };
    let p = mat(nu);
    let q = mat(ni);
    Instance {
        data: RatingMatrix::new(nu, ni, entries).unwrap(),
        u,
        model: FactorModel::new(p, q).unwrap(),
    }
}

/// Plain squared error plus L2 per observed rating, written independently.
fn baseline_loss(model: &FactorModel, data: &RatingMatrix, phi: f64) -> f64 {
    data.entries()
        .iter()
        .map(|&(i, j, r)| {
            let p = &model.p[i];
            let q = &model.q[j];
            let pred: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
            let np: f64 = p.iter().map(|v| v * v).sum();
            let nq: f64 = q.iter().map(|v| v * v).sum();
            (r - pred).powi(2) + phi / 2.0 * (np + nq)
        })
        .sum()
}

fn hp(phi: f64, delta: f64) -> Hyperparams {
    Hyperparams {
        phi,
        delta,
        ..Hyperparams::default()
    }
}

fn fd_check(inst: &Instance, h: &Hyperparams) -> f64 {
    let (gp, gq) = gradient(&inst.model, &inst.data, &inst.u, h);
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for which in 0..2 {
        let n = if which == 0 { inst.model.p.len() } else { inst.model.q.len() };
        for r in 0..n {
            for d in 0..inst.model.k {
                let mut up = inst.model.clone();
                let mut dn = inst.model.clone();
                let (a, b, g) = if which == 0 {
                    (&mut up.p[r][d], &mut dn.p[r][d], gp[r][d])
                } else {
                    (&mut up.q[r][d], &mut dn.q[r][d], gq[r][d])
                };
                *a += step;
                *b -= step;
                let fd = (loss(&up, &inst.data, &inst.u, h) - loss(&dn, &inst.data, &inst.u, h)) / (2.0 * step);
                let rel = (fd - g).abs() / fd.abs().max(g.abs()).max(1e-3);
                worst = worst.max(rel);
            }
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gradients_match_finite_differences(seed in any::<u64>(), k in 1usize..4, phi in 0.0f64..0.5, d in 0usize..3) {
        let delta = [0.0, 0.1, 1.0][d];
        let inst = instance(seed, k);
        prop_assert!(fd_check(&inst, &hp(phi, delta)) < 1e-4);
    }

    #[test]
    fn zero_delta_is_baseline(seed in any::<u64>(), phi in 0.0f64..0.5) {
        let inst = instance(seed, 2);
        let a = loss(&inst.model, &inst.data, &inst.u, &hp(phi, 0.0));
        let b = baseline_loss(&inst.model, &inst.data, phi);
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn coupling_is_bounded(seed in any::<u64>(), delta in 0.0f64..2.0) {
        let inst = instance(seed, 2);
        let with = loss(&inst.model, &inst.data, &inst.u, &hp(0.1, delta));
        let without = loss(&inst.model, &inst.data, &inst.u, &hp(0.1, 0.0));
        let bound: f64 = inst.data.entries().iter().map(|&(i, j, _)| delta / 2.0 * inst.model.distance(i, j).powi(2)).sum();
        prop_assert!(with - without >= -1e-12);
        prop_assert!(with - without <= bound + 1e-9);
    }

    #[test]
    fn training_is_reproducible(seed in 0u64..500) {
        let inst = instance(seed, 2);
        let h = Hyperparams { epochs: 20, seed, ..hp(0.1, 0.5) };
        prop_assert_eq!(train_sgd(&inst.data, &inst.u, &h).unwrap(), train_sgd(&inst.data, &inst.u, &h).unwrap());
    }

    #[test]
    fn toy_loss_trace_is_non_increasing(seed in 0u64..500) {
        let inst = instance(seed, 2);
        let h = Hyperparams { learning_rate: 0.002, epochs: 200, seed, ..hp(0.1, 0.5) };
        let t = train_sgd(&inst.data, &inst.u, &h).unwrap();
        prop_assert!(t.loss_trace.windows(2).all(|w| w[1] <= w[0]), "{:?}", t.loss_trace);
    }

    #[test]
    fn decile_tags_match_sort_oracle(u in prop::collection::vec(0.0f64..1.0, 1..200)) {
        let tags = decile_tags(&u);
        let n = u.len();
        let size = n.div_ceil(10);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| u[b].partial_cmp(&u[a]).unwrap().then(a.cmp(&b)));
        for (rank, &j) in order.iter().enumerate() {
            let want = if rank < size {
                Tag::High
            } else if rank >= n - size.min(n - size) {
                Tag::Low
            } else {
                Tag::Mid
            };
            prop_assert_eq!(tags[j], want);
        }
    }
}
