use degsched::milp::{encode_network, encode_relu, Interval, LinExpr, MilpModel, NeuronStatus, Sense, VarId};
use degsched::net::{prune_mask, SparseNet};
use degsched::oracle::{Normalization, Span, FEATURE_COUNT};
use degsched::solve::{run, SolveStatus, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_norm() -> Normalization {
    Normalization::new([Span::new(0.0, 1.0); FEATURE_COUNT], Span::new(0.0, 1.0)).unwrap()
}

fn exact() -> SolverOptions {
    SolverOptions::default().with_gap(0.0)
}

fn pruned_net(seed: u64, eps: f64) -> SparseNet {
    let mut net = SparseNet::random(seed, unit_norm());
    net.set_masks(prune_mask(&net, eps).unwrap(), eps);
    net
}

fn input_vars(m: &mut MilpModel, lo: [f64; 5], hi: [f64; 5]) -> [VarId; 5] {
    std::array::from_fn(|i| m.continuous(format!("in{i}"), lo[i], hi[i]).unwrap())
}

/// Solves the relu encoding with `x` pinned, returning the value of `a`.
fn solve_scalar(x_value: f64, interval: Interval, sense: f64) -> f64 {
    let mut m = MilpModel::new("relu");
    let x = m.continuous("x", interval.lo, interval.hi).unwrap();
    m.add_constraint("fix", &LinExpr::var(x), Sense::Eq, x_value).unwrap();
    let enc = encode_relu(&mut m, x, interval, "n").unwrap();
    m.add_objective_term(enc.post, sense);
    let r = run(&m, &exact()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    r.values[enc.post.0]
}

#[test]
fn scalar_neuron_is_exact_on_both_sides() {
    let iv = Interval::new(-1.0, 3.0);
    for sense in [1.0, -1.0] {
        assert!(solve_scalar(-0.5, iv, sense).abs() < 1e-9);
        assert!((solve_scalar(2.0, iv, sense) - 2.0).abs() < 1e-9);
    }
}

#[test]
fn stable_neurons_need_no_binary() {
    let mut m = MilpModel::new("stable");
    let x = m.continuous("x", -2.0, 5.0).unwrap();
    let dead = encode_relu(&mut m, x, Interval::new(-2.0, -0.1), "dead").unwrap();
    let on = encode_relu(&mut m, x, Interval::new(0.5, 5.0), "on").unwrap();
    let mixed = encode_relu(&mut m, x, Interval::new(-2.0, 5.0), "mixed").unwrap();
    assert_eq!(dead.status, NeuronStatus::Dead);
    assert_eq!(on.status, NeuronStatus::AlwaysOn);
    assert_eq!(mixed.status, NeuronStatus::Unstable);
    assert_eq!((mixed.m_minus(), mixed.m_plus()), (2.0, 5.0));
    assert_eq!(m.binary_count(), 1);
    assert!(encode_relu(&mut m, x, Interval::new(1.0, -1.0), "bad").is_err());
}

#[test]
fn network_output_matches_forward_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for eps in [0.0, 0.3, 0.5, 0.7] {
        for k in 0..25u64 {
            let net = pruned_net(k * 7 + (eps * 10.0) as u64, eps);
            let x: [f64; 5] = std::array::from_fn(|_| rng.gen());
            let mut m = MilpModel::new("fwd");
            let ins = input_vars(&mut m, x, x);
            let emb = encode_network(&mut m, &net, &ins, "nn").unwrap();
            // Alternate objective direction so both slack directions get exercised.
            m.add_objective_term(emb.output, if k % 2 == 0 { 1.0 } else { -1.0 });
            let r = run(&m, &exact()).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            let want = net.forward_normalized(&x);
            let got = r.values[emb.output.0];
            assert!((got - want).abs() <= 1e-6, "eps {eps} k {k}: {got} vs {want}");
            assert!(m.max_violation(&r.values) <= 1e-6);
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn binary_count_follows_sparsity() {
    let full = [0.0; 5];
    let ones = [1.0; 5];
    for seed in 0..10 {
        for (eps, cap) in [(0.0, 30), (0.5, 15)] {
            let net = pruned_net(seed, eps);
            let mut m = MilpModel::new("count");
            let ins = input_vars(&mut m, full, ones);
            let emb = encode_network(&mut m, &net, &ins, "nn").unwrap();
            assert!(emb.binaries() <= cap);
            assert_eq!(m.binary_count(), emb.binaries());
            let unstable = emb.neurons.iter().filter(|(_, e)| e.status == NeuronStatus::Unstable).count();
            assert_eq!(emb.binaries(), unstable);
            assert_eq!(emb.neurons.len(), 30 - degsched::net::pruned_count(eps));
        }
    }
}

#[test]
fn relaxation_bounds_the_true_minimum() {
    let net = pruned_net(3, 0.3);
    let mut m = MilpModel::new("relax");
    let ins = input_vars(&mut m, [0.0; 5], [1.0; 5]);
    let emb = encode_network(&mut m, &net, &ins, "nn").unwrap();
    m.add_objective_term(emb.output, 1.0);
    let mip = run(&m, &exact()).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let sampled = (0..5000)
        .map(|_| net.forward_normalized(&std::array::from_fn(|_| rng.gen())))
        .fold(f64::INFINITY, f64::min);
    let mip_min = mip.objective.unwrap();
    assert!(mip_min <= sampled + 1e-9);

    let mut lp = MilpModel::new("lp");
    for v in m.vars() {
        lp.continuous(v.name.clone(), v.lb, v.ub).unwrap();
    }
    for c in m.constraints() {
        let mut e = LinExpr::new();
        for &(v, k) in &c.terms {
            e.add(v, k);
        }
        lp.add_constraint(c.name.clone(), &e, c.sense, c.rhs).unwrap();
    }
    lp.set_objective(m.objective());
    assert!(m.is_mip() && !lp.is_mip());
    let bound = run(&lp, &exact()).unwrap().objective.unwrap();
    assert!(bound <= mip_min + 1e-9);
}

#[test]
fn inputs_outside_unit_box_are_rejected() {
    let net = pruned_net(0, 0.0);
    let mut m = MilpModel::new("bad");
    let ins = input_vars(&mut m, [0.0; 5], [1.0, 1.0, 1.5, 1.0, 1.0]);
    assert!(encode_network(&mut m, &net, &ins, "nn").is_err());
    let mut m = MilpModel::new("free");
    let ins = input_vars(&mut m, [0.0; 5], [1.0, 1.0, f64::INFINITY, 1.0, 1.0]);
    assert!(encode_network(&mut m, &net, &ins, "nn").is_err());
}
