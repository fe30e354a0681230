use degsched::milp::{LinExpr, MilpModel};
use degsched::net::{train_cold, SparseNet, TrainConfig};
use degsched::oracle::{generate_dataset, SamplingPlan};
use degsched::sched::*;
use degsched::solve::{compute_lmp, run, SolveStatus, SolverOptions};

fn exact() -> SolverOptions {
    SolverOptions::default().with_gap(0.0)
}

fn gen(name: &str, p_max: f64, cost: f64) -> GeneratorSpec {
    GeneratorSpec {
        name: name.into(),
        bus: 1,
        p_min: 0.0,
        p_max,
        ramp: p_max,
        cost,
        no_load_cost: 0.0,
        startup_cost: 0.0,
        initial_on: false,
    }
}

fn battery() -> BessSpec {
    BessSpec {
        name: "b".into(),
        bus: 1,
        energy_max: 40.0,
        energy_min: 0.0,
        energy_initial: 20.0,
        p_max: 10.0,
        p_min: 0.0,
        eta_charge: 0.9,
        eta_discharge: 0.9,
        capital_cost: 8_000.0,
        salvage_value: 800.0,
        soh_eol: 0.8,
        soh_now: 1.0,
    }
}

fn one_bus(demand: Vec<f64>) -> NetworkCase {
    let hours = demand.len();
    NetworkCase {
        name: "one".into(),
        units: Units::Mw,
        base_mva: 100.0,
        buses: vec![1],
        reference_bus: 1,
        generators: vec![GeneratorSpec {
            no_load_cost: 5.0,
            startup_cost: 100.0,
            ..gen("g", 100.0, 10.0)
        }],
        lines: vec![],
        bess: vec![],
        renewables: vec![],
        loads: vec![LoadSpec { bus: 1, demand }],
        temperature: vec![25.0; hours],
    }
}

/// Cheap base unit plus an expensive peaker, with a load that swings across
/// the base unit's capacity so storage has something to arbitrage.
fn arbitrage_case() -> NetworkCase {
    let demand: Vec<f64> = (0..24).map(|t| if (8..20).contains(&t) { 70.0 } else { 40.0 }).collect();
    NetworkCase {
        generators: vec![
            GeneratorSpec {
                ramp: 30.0,
                ..gen("base", 60.0, 10.0)
            },
            GeneratorSpec {
                ramp: 30.0,
                ..gen("peak", 60.0, 50.0)
            },
        ],
        bess: vec![battery()],
        ..one_bus(demand)
    }
}

fn small_net() -> SparseNet {
    let data = generate_dataset(&SamplingPlan::with_samples(1000), 5).unwrap();
    let cfg = TrainConfig {
        epochs: 20,
        ..Default::default()
    };
    train_cold(&data, &cfg).unwrap()
}

fn microgrid(sell: f64, reserve_ratio: f64) -> MicrogridCase {
    MicrogridCase {
        name: "mg".into(),
        units: Units::Mw,
        generators: vec![GeneratorSpec {
            ramp: 0.18,
            ..gen("diesel", 0.18, 120.0)
        }],
        bess: vec![],
        renewables: vec![RenewableSpec {
            name: "pv".into(),
            bus: 1,
            kind: RenewableKind::Solar,
            output: (0..24).map(|t| if (8..17).contains(&t) { 0.6 } else { 0.0 }).collect(),
        }],
        load: vec![0.4; 24],
        temperature: vec![20.0; 24],
        buy_price: vec![sell + 10.0; 24],
        sell_price: vec![sell; 24],
        grid_limit: 100.0,
        reserve_ratio,
    }
}

/// The same program with the rows whose names start with `prefix` removed.
fn without_rows(m: &MilpModel, prefix: &str) -> MilpModel {
    let mut out = MilpModel::new("trimmed");
    for v in m.vars() {
        out.add_var(v.name.clone(), v.kind, v.lb, v.ub).unwrap();
    }
    for c in m.constraints().iter().filter(|c| !c.name.starts_with(prefix)) {
        let mut e = LinExpr::new();
        for &(v, k) in &c.terms {
            e.add(v, k);
        }
        out.add_constraint(c.name.clone(), &e, c.sense, c.rhs).unwrap();
    }
    out.set_objective(m.objective());
    out
}

#[test]
fn one_bus_objective_is_the_single_dispatch() {
    let case = Case::Network(one_bus(vec![50.0; 24]));
    let s = schedule(&case, None, &exact()).unwrap();
    assert_eq!(s.result.status, SolveStatus::Optimal);
    let want = 24.0 * 50.0 * 10.0 + 24.0 * 5.0 + 100.0;
    assert!((s.result.objective.unwrap() - want).abs() < 1e-6);
    assert!(validate_solution(&case, &s.solution).is_empty());
}

#[test]
fn one_bus_lmp_is_the_marginal_cost() {
    let c = one_bus(vec![50.0; 24]);
    let s = schedule(&Case::Network(c.clone()), None, &exact()).unwrap();
    let l = compute_lmp(&c, &s.solution, None, &exact()).unwrap();
    for t in 0..24 {
        assert!((l.price(1, t).unwrap() - 10.0).abs() < 1e-6);
        assert!(!l.is_congested(t));
    }
    assert_eq!(l.csv().lines().next().unwrap(), "t,bus,lmp,congested");
}

#[test]
fn corrupted_solutions_are_flagged() {
    let case = Case::Network(arbitrage_case());
    let s = schedule(&case, None, &exact()).unwrap();
    assert!(validate_solution(&case, &s.solution).is_empty());

    let mut bad = s.solution.clone();
    bad.generators[0].power[5] += 45.0;
    let r = validate_solution(&case, &bad);
    assert!(r.has("power_balance"));
    assert!(r.has("ramp"));

    let mut bad = s.solution.clone();
    *bad.bess[0].energy.last_mut().unwrap() -= 1.0;
    assert!(validate_solution(&case, &bad).has("terminal_soc"));
}

#[test]
fn export_dominates_when_selling_pays() {
    let mg = microgrid(200.0, 0.1);
    let case = Case::Microgrid(mg.clone());
    let s = schedule(&case, None, &exact()).unwrap();
    assert!(validate_solution(&case, &s.solution).is_empty());
    let grid = s.solution.grid.as_ref().unwrap();
    for t in 0..24 {
        assert!((s.solution.generators[0].power[t] - 0.18).abs() < 1e-9, "t {t}");
        let surplus = 0.18 + mg.renewable_output(t) - mg.load[t];
        assert!((grid.sell[t] - surplus.max(0.0)).abs() < 1e-9, "t {t}");
        assert!((grid.buy[t] - (-surplus).max(0.0)).abs() < 1e-9, "t {t}");
    }
}

#[test]
fn zero_reserve_ratio_is_vacuous() {
    let case = Case::Microgrid(microgrid(20.0, 0.0));
    let m = build_model(&case, None).unwrap();
    let with = run(&m, &exact()).unwrap().objective.unwrap();
    let without = run(&without_rows(&m, "res_"), &exact()).unwrap().objective.unwrap();
    assert!((with - without).abs() <= 1e-9 * (1.0 + with.abs()));
}

#[test]
fn idle_battery_keeps_soc_and_constant_degradation() {
    let mut c = one_bus(vec![50.0; 24]);
    c.bess = vec![battery()];
    let case = Case::Network(c);
    let net = small_net();
    let s = schedule(&case, Some(&net), &exact()).unwrap();
    let b = &s.solution.bess[0];
    assert!(b.discharged_energy() < 1e-9);
    for t in 0..24 {
        assert!((b.soc[t] - 0.5).abs() < 1e-9);
        assert!(b.dod[t].abs() < 1e-9 && b.c_rate[t].abs() < 1e-9);
    }
    let idle = degsched::oracle::CycleFeatures {
        soc_start: 0.5,
        dod: 0.0,
        temp_c: 25.0,
        c_rate: 0.0,
        soh: 1.0,
    };
    let want = 24.0 * net.predict(&idle).unwrap();
    let replay = recompute_degradation(&net, &case, &s.solution).unwrap();
    assert!((replay[0].bd - want).abs() < 1e-9);
    assert!((b.bd.unwrap() - want).abs() < 1e-5);
}

#[test]
fn model_degradation_matches_replay() {
    let case = Case::Network(arbitrage_case());
    let net = small_net();
    let s = schedule(&case, Some(&net), &exact()).unwrap();
    assert!(validate_solution(&case, &s.solution).is_empty());
    assert!(s.solution.total_discharged() > 1.0, "fixture should cycle the battery");
    let replay = recompute_degradation(&net, &case, &s.solution).unwrap();
    for (b, r) in s.solution.bess.iter().zip(&replay) {
        assert!((b.bd.unwrap() - r.bd).abs() <= 1e-5);
    }
}

#[test]
fn cost_breakdown_sums_to_objective() {
    let case = Case::Network(arbitrage_case());
    let net = small_net();
    let s = schedule(&case, Some(&net), &exact()).unwrap();
    let c = s.solution.costs;
    let obj = s.result.objective.unwrap();
    assert!((c.operation + c.degradation - obj).abs() <= 1e-6 * (1.0 + obj.abs()));
    assert!((c.pseudo_total - (c.operation + c.degradation)).abs() <= 1e-9 * (1.0 + obj.abs()));
    let csv = costs_csv(&s.solution, None);
    assert_eq!(csv.lines().next().unwrap(), COSTS_HEADER);
}

#[test]
fn degradation_never_lowers_operation_cost() {
    let case = Case::Network(arbitrage_case());
    let net = small_net();
    let with = schedule(&case, Some(&net), &exact()).unwrap().solution;
    let without = schedule(&case, None, &exact()).unwrap().solution;
    assert!(without.costs.operation <= with.costs.operation + 1e-6);
    assert!(with.total_discharged() <= without.total_discharged() + 1e-6);
}

#[test]
fn extraction_is_deterministic() {
    let case = Case::Network(arbitrage_case());
    let s = schedule(&case, None, &exact()).unwrap();
    let a = extract_solution(&s.model, &s.result, &case).unwrap();
    let b = extract_solution(&s.model, &s.result, &case).unwrap();
    assert_eq!(a, b);
    assert_eq!(dispatch_csv(&a), dispatch_csv(&b));
}

#[test]
fn nn_binaries_follow_the_fleet_size() {
    let case = Case::Network(arbitrage_case());
    assert_eq!(build_model(&case, None).unwrap().binary_count_with_prefix("nn_"), 0);
    let net = small_net();
    let m = build_model(&case, Some(&net)).unwrap();
    assert!(m.binary_count_with_prefix("nn_") <= 24 * 30);
}
