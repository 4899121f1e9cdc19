//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use deepmemetic::analyze::mean_grid;
use deepmemetic::config::{emax_for, ExperimentConfig};
use deepmemetic::experiment::{run_experiment_with_threads, RunRecord};
use deepmemetic::solver::cooperation::{parse_architecture, print_architecture, run, Cooperation, Macros};
use deepmemetic::solver::evaluator::{exact_min_switches, fitness, ktns, Ktns};
use deepmemetic::solver::instance::generate_dataset;
use deepmemetic::solver::operators::{apply_block_move, apx_crossover, mutate, sample_block_move};
use deepmemetic::solver::rng::{rng_from_seed, SearchRng};
use deepmemetic::solver::stats::{holm_steps, quade_test, rank_rows, rank_values, ResultMatrix};
use deepmemetic::solver::{
    AgentKind, ArchitectureSpec, EvalBudget, Instance, InstanceFamily, JobSequence, Topology,
};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn is_permutation(s: &[usize]) -> bool {
    let mut seen = vec![false; s.len()];
    s.iter().all(|&j| j < s.len() && !std::mem::replace(&mut seen[j], true))
}

fn random_instance(rng: &mut SearchRng, n: usize, m: usize, c: usize) -> Instance {
    let jobs: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=c);
            let mut t = rand::seq::index::sample(rng, m, k).into_vec();
            t.sort_unstable();
            t
        })
        .collect();
    Instance::from_job_tools(m, c, &jobs, None).expect("valid instance")
}

fn for_each_permutation(k: usize, items: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(k + 1, items, f);
        items.swap(k, i);
    }
}

fn ktns_optimality() -> Outcome {
    let mut rng = rng_from_seed(0x6b74_6e73);
    let mut sequences = 0u64;
    let mut mismatches = Vec::new();
    for case in 0..200 {
        let n = rng.gen_range(3..=6);
        let m = rng.gen_range(5..=10);
        let c = rng.gen_range(2..=4);
        let inst = random_instance(&mut rng, n, m, c);
        let mut ktns = Ktns::new();
        let mut order: Vec<usize> = (0..n).collect();
        for_each_permutation(0, &mut order, &mut |p| {
            let seq = JobSequence::new(p.to_vec()).unwrap();
            let fast = ktns.switches(&inst, &seq);
            let exact = exact_min_switches(&inst, &seq).unwrap();
            sequences += 1;
            if fast != exact && mismatches.len() < 3 {
                mismatches.push(format!("case {case} seq {p:?}: ktns {fast} exact {exact}"));
            }
        });
    }
    check(
        mismatches.is_empty(),
        format!("200 instances, {sequences} sequences, mismatches: {mismatches:?}"),
    )
}

fn ktns_fixtures() -> Outcome {
    let chain = Instance::from_job_tools(4, 2, &[vec![0, 1], vec![1, 2], vec![2, 3]], None).unwrap();
    let seq = JobSequence::identity(3);
    let a = ktns(&chain, &seq).switches;
    let sooner = Instance::from_job_tools(3, 2, &[vec![0, 1], vec![2], vec![0]], None).unwrap();
    let plan = ktns(&sooner, &seq);
    // tool 2 (index 1) leaves at step 2, tool 1 (index 0) stays
    let evicted_tool_2 = plan.configs[1] == vec![0, 2];
    let mut budget = EvalBudget::new(10);
    let f = fitness(&chain, &seq, &mut budget);
    check(
        a == 2 && plan.switches == 1 && evicted_tool_2 && f == Ok(2) && budget.used() == 1,
        format!(
            "chain switches {a}, sooner switches {} with T2 = {:?}, fitness {f:?} used {}",
            plan.switches,
            plan.configs[1],
            budget.used()
        ),
    )
}

const KINDS: [AgentKind; 6] = AgentKind::ALL;

fn random_tree(rng: &mut SearchRng, levels: u32, arity: usize, cycles: u32) -> ArchitectureSpec {
    if levels == 0 || rng.gen_bool(0.35) {
        return ArchitectureSpec::Leaf(KINDS[rng.gen_range(0..KINDS.len())]);
    }
    let topology = [Topology::Ring, Topology::Broadcast, Topology::Random][rng.gen_range(0..3)];
    let n = rng.gen_range(2..=arity);
    let children = (0..n).map(|_| random_tree(rng, levels - 1, arity, cycles)).collect();
    ArchitectureSpec::node(rng.gen_range(1..=cycles), topology, children)
}

/// A tree whose depth is exactly `depth`.
fn tree_of_depth(rng: &mut SearchRng, depth: usize) -> ArchitectureSpec {
    let topology = [Topology::Ring, Topology::Broadcast, Topology::Random][rng.gen_range(0..3)];
    let n = rng.gen_range(2..=3);
    let deep = rng.gen_range(0..n);
    let children = (0..n)
        .map(|i| {
            if depth > 0 && i == deep {
                tree_of_depth(rng, depth - 1)
            } else {
                ArchitectureSpec::Leaf(KINDS[rng.gen_range(0..KINDS.len())])
            }
        })
        .collect();
    ArchitectureSpec::node(rng.gen_range(1..=3), topology, children)
}

fn budget_conservation() -> Outcome {
    let mut rng = rng_from_seed(0x6275_6467);
    let mut failures = Vec::new();
    let mut depths = [0usize; 3];
    for t in 0..50 {
        let depth = t % 3;
        let spec = loop {
            let s = tree_of_depth(&mut rng, depth);
            if s.min_budget() <= 4000 {
                break s;
            }
        };
        depths[spec.depth().unwrap()] += 1;
        let n = rng.gen_range(6..=12);
        let m = rng.gen_range(6..=12);
        let c = rng.gen_range(2..m.min(5));
        let family = InstanceFamily::new(c, n, m, 1, c);
        let inst = match generate_dataset(&family, t as u64) {
            Ok(i) => i,
            Err(_) => generate_dataset(&InstanceFamily::new(4, 10, 9, 2, 4), t as u64).unwrap(),
        };
        let budget = spec.min_budget() + rng.gen_range(0..6000);
        let seed = rng.gen();
        let a = run(&spec, &inst, budget, seed).map_err(|e| e.to_string())?;
        let b = run(&spec, &inst, budget, seed).map_err(|e| e.to_string())?;
        if a.evaluations > budget || a.evaluations != b.evaluations || a.best != b.best {
            failures.push(format!(
                "{} budget {budget}: {} vs {} evaluations",
                print_architecture(&spec),
                a.evaluations,
                b.evaluations
            ));
        }
    }
    check(
        failures.is_empty(),
        format!("50 triples (depth 0/1/2: {depths:?}), failures: {failures:?}"),
    )
}

fn broadcast_sync() -> Outcome {
    let inst = generate_dataset(&InstanceFamily::benchmark("10z20x20").unwrap(), 5).unwrap();
    let budget = emax_for(&InstanceFamily::benchmark("10z20x20").unwrap(), 100).unwrap();
    let mut syncs = 0;
    let mut violations = 0;
    for text in ["Ca", "Ox", "3Br(HC,TS,CE,CEM,MAHC,MATS)", "4Br(3Ri(HC,TS),2Ra(CE,MAHC),MATS)"] {
        let spec = parse_architecture(text).unwrap();
        for seed in 0..3 {
            let mut coop = Cooperation::new(&spec, &inst, seed).unwrap();
            coop.run_observed(&inst, budget, &mut |e| {
                if e.topology != Topology::Broadcast {
                    return;
                }
                syncs += 1;
                let min = e.before.iter().flatten().min().copied();
                if e.after.iter().any(|&a| a != min) {
                    violations += 1;
                }
            })
            .map_err(|e| e.to_string())?;
        }
    }
    check(
        violations == 0 && syncs > 0,
        format!("{syncs} broadcast synchronizations, {violations} with unequal bests"),
    )
}

fn parser_round_trip() -> Outcome {
    let mut rng = rng_from_seed(0x7061_7273);
    let mut failures = 0;
    let mut deepest = 0;
    for _ in 0..1000 {
        let spec = random_tree(&mut rng, 4, 5, 20);
        if let Ok(d) = spec.depth() {
            deepest = deepest.max(d);
        }
        let text = print_architecture(&spec);
        if Macros::empty().parse(&text).as_ref() != Ok(&spec) || text.contains(char::is_whitespace) {
            failures += 1;
        }
    }
    let depths: Vec<_> = ["Hu", "Ca", "Ox"]
        .iter()
        .map(|m| parse_architecture(m).unwrap().depth().unwrap())
        .collect();
    check(
        failures == 0 && depths == [0, 1, 2] && deepest == 3,
        format!("1000 trees (max depth {deepest}), {failures} failures; Hu/Ca/Ox depths {depths:?}"),
    )
}

fn stats_fixtures() -> Outcome {
    let fixture = ResultMatrix::new(&[
        vec![5.0, 4.0, 7.0, 10.0, 12.0],
        vec![1.0, 3.0, 1.0, 0.0, 2.0],
        vec![16.0, 12.0, 22.0, 22.0, 35.0],
        vec![5.0, 4.0, 3.0, 5.0, 4.0],
        vec![10.0, 9.0, 7.0, 13.0, 10.0],
        vec![19.0, 18.0, 28.0, 37.0, 58.0],
        vec![10.0, 7.0, 6.0, 8.0, 7.0],
    ])
    .unwrap();
    let q = quade_test(&fixture).map_err(|e| e.to_string())?;
    let quade_ok = (q.statistic - 3.8292515841753727).abs() < 1e-6 && (q.p_value - 0.015189020073274634).abs() < 1e-6;

    let steps = holm_steps(&[0.001, 0.02, 0.04], 0.05);
    let holm_ok = steps == [(0, 0.05 / 3.0, true), (1, 0.05 / 2.0, true), (2, 0.05 / 1.0, true)];

    let mut rng = rng_from_seed(0x7374_6174);
    let mut bad_rows = 0;
    for _ in 0..100_000 {
        let k = rng.gen_range(2..=12);
        let row: Vec<f64> = (0..k).map(|_| f64::from(rng.gen_range(0..5u8))).collect();
        let sum: f64 = rank_values(&row).iter().sum();
        if sum != (k * (k + 1)) as f64 / 2.0 {
            bad_rows += 1;
        }
    }
    let rt = rank_rows(&fixture);
    let means_ok = (rt.mean_ranks().iter().sum::<f64>() - 15.0).abs() < 1e-9;
    check(
        quade_ok && holm_ok && bad_rows == 0 && means_ok,
        format!(
            "quade F {:.10} p {:.10}; holm steps {steps:?}; {bad_rows} of 1e5 rank rows off",
            q.statistic, q.p_value
        ),
    )
}

fn operator_validity() -> Outcome {
    let mut rng = rng_from_seed(0x6f70_7321);
    let mut violations = 0;
    let mut range_violations = 0;
    for i in 0..1_000_000u32 {
        let n = rng.gen_range(3..=50);
        let a = JobSequence::random(n, &mut rng);
        let b = JobSequence::random(n, &mut rng);
        let mv = sample_block_move(n, &mut rng).unwrap();
        let (bl, bs, bi) = (mv.len, mv.start, mv.insert);
        if !(bl >= 1 && 2 * bl <= n && bs >= 1 && bs + 2 * bl <= n && bi >= bs + bl && bi + bl <= n) {
            range_violations += 1;
        }
        let moved = apply_block_move(&a, mv).unwrap();
        let child = apx_crossover(&a, &b, &mut rng);
        let mutated = mutate(&a, if i % 2 == 0 { 1.0 } else { 1.0 / n as f64 }, &mut rng);
        for s in [&moved, &child, &mutated] {
            if !is_permutation(s.as_slice()) {
                violations += 1;
            }
        }
        if apply_block_move(&moved, mv).unwrap() != a {
            violations += 1;
        }
    }
    check(
        violations == 0 && range_violations == 0,
        format!("1e6 rounds of block move, APX and mutation: {violations} invalid outputs, {range_violations} out-of-range moves"),
    )
}

fn corridor_small() -> Outcome {
    let family = InstanceFamily::benchmark("4z10x9").unwrap();
    let budget = emax_for(&family, 100).unwrap();
    let datasets: Vec<Instance> = (0..5)
        .map(|d| generate_dataset(&family, 0xc0_0000 + d).unwrap())
        .collect();
    let mut parts = Vec::new();
    let mut all_in = true;
    for kind in AgentKind::ALL {
        let mut total = 0u64;
        for (d, inst) in datasets.iter().enumerate() {
            for r in 0..10 {
                let out = run(&ArchitectureSpec::Leaf(kind), inst, budget, (d * 10 + r) as u64).map_err(|e| e.to_string())?;
                total += u64::from(out.best.fitness);
            }
        }
        let mean = total as f64 / 50.0;
        all_in &= (7.0..=10.0).contains(&mean);
        parts.push(format!("{kind} {mean:.2}"));
    }
    check(all_in, format!("E_max {budget}, mean switches over 5x10 runs: {}", parts.join(", ")))
}

const CORRIDOR_FAMILIES: [&str; 6] = ["8z20x16", "10z20x20", "10z30x25", "15z30x40", "15z40x30", "25z50x40"];

fn corridor_records() -> Result<Vec<RunRecord>, String> {
    let cfg = ExperimentConfig {
        families: CORRIDOR_FAMILIES
            .iter()
            .map(|l| InstanceFamily::benchmark(l).unwrap())
            .collect(),
        datasets_per_family: 5,
        runs_per_dataset: 2,
        phi: 100,
        architectures: [
            ("Hu", "Hu"),
            ("Ca", "Ca"),
            ("Ox", "Ox"),
            ("5Br(Ox,MAHC,CEM)", "5Br(Ox,MAHC,CEM)"),
        ]
        .iter()
        .map(|(n, e)| (n.to_string(), parse_architecture(e).unwrap()))
        .collect(),
        master_seed: 0x00c0_ffee,
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let threads = deepmemetic::experiment::threads_from_env();
    Ok(run_experiment_with_threads(&cfg, dir.path(), threads)
        .map_err(|e| e.to_string())?
        .records)
}

fn mean_ranks(records: &[RunRecord], archs: &[&str]) -> Result<(Vec<String>, Vec<f64>), String> {
    let subset: Vec<RunRecord> = records
        .iter()
        .filter(|r| archs.contains(&r.architecture.as_str()))
        .cloned()
        .collect();
    let (algorithms, instances, grid) = mean_grid(&subset).map_err(|e| e.to_string())?;
    let rt = rank_rows(&ResultMatrix::new(&grid).map_err(|e| e.to_string())?);
    let ranks = archs
        .iter()
        .map(|a| rt.mean_ranks()[algorithms.iter().position(|x| x == a).unwrap()])
        .collect();
    Ok((instances, ranks))
}

fn corridor_ordering(records: &[RunRecord]) -> Outcome {
    let (instances, r) = mean_ranks(records, &["Hu", "Ca", "Ox"])?;
    check(
        r[2] <= r[1] && r[1] <= r[0],
        format!(
            "{} families, 5 datasets x 2 runs, phi 100; mean ranks Ox {:.3}, Ca {:.3}, Hu {:.3}",
            instances.len(),
            r[2],
            r[1],
            r[0]
        ),
    )
}

fn depth_degradation(records: &[RunRecord]) -> Outcome {
    let deep = "5Br(Ox,MAHC,CEM)";
    let feasible: Vec<&str> = CORRIDOR_FAMILIES
        .iter()
        .copied()
        .filter(|l| records.iter().any(|r| r.architecture == deep && r.instance == *l && r.is_ok()))
        .collect();
    let infeasible: Vec<&str> = CORRIDOR_FAMILIES.iter().copied().filter(|l| !feasible.contains(l)).collect();
    let on_feasible: Vec<RunRecord> = records
        .iter()
        .filter(|r| feasible.contains(&r.instance.as_str()))
        .cloned()
        .collect();
    let (_, r) = mean_ranks(&on_feasible, &["Hu", "Ca", "Ox", deep])?;
    check(
        r[3] >= r[2],
        format!(
            "executable on {feasible:?} (budget too small on {infeasible:?}); mean ranks {deep} {:.3}, Ox {:.3} (Hu {:.3}, Ca {:.3})",
            r[3], r[2], r[0], r[1]
        ),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS  {name} [{secs:.1}s]: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.1}s]: {d}");
            }
        }
    };
    report("ktns optimality vs exact DP", &mut ktns_optimality);
    report("ktns worked fixtures", &mut ktns_fixtures);
    report("budget conservation and repeatability", &mut budget_conservation);
    report("broadcast synchronization", &mut broadcast_sync);
    report("architecture parser round trip and depths", &mut parser_round_trip);
    report("statistics fixtures", &mut stats_fixtures);
    report("corridor 1: basic algorithms on 4z10x9", &mut corridor_small);
    let mut records = None;
    let sweep_start = Instant::now();
    let sweep = corridor_records();
    println!("      corridor sweep took {:.1}s", sweep_start.elapsed().as_secs_f64());
    match sweep {
        Ok(r) => records = Some(r),
        Err(e) => println!("      corridor sweep failed: {e}"),
    }
    let recs = records.unwrap_or_default();
    report("corridor 2: ordering Ox <= Ca <= Hu", &mut || corridor_ordering(&recs));
    report("depth degradation: 5Br(Ox,MAHC,CEM) not better than Ox", &mut || depth_degradation(&recs));
    report("operator validity", &mut operator_validity);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
