use rcpsp_relax::format::to_json;
use rcpsp_relax::generate::{apply_modifications, generate_benchmark, to_inforest, BenchmarkConfig, Modifications, ShiftPattern};
use rcpsp_relax::model::{objective, ProblemInstance, Time};
use rcpsp_relax::par::Parallelism;
use rcpsp_relax::psplib::RawNetwork;
use rcpsp_relax::solver::{solve_heuristic, SolveLimits};

/// Longest duration path ending at `root`, by brute recursion over predecessors.
fn critical_path(inst: &ProblemInstance, j: usize) -> Time {
    inst.job(j).duration + inst.predecessors(j).iter().map(|&i| critical_path(inst, i)).max().unwrap_or(0)
}

#[test]
fn benchmark_properties() {
    let config = BenchmarkConfig::default();
    let a = generate_benchmark(&config, Parallelism::Rayon).unwrap();
    let b = generate_benchmark(&config, Parallelism::Sequential).unwrap();
    assert_eq!(a.len(), 40);
    assert_eq!(a.iter().map(|g| to_json(&g.instance)).collect::<Vec<_>>(), b.iter().map(|g| to_json(&g.instance)).collect::<Vec<_>>());
    let sources = config.source_networks();
    let limits = SolveLimits::default().with_restarts(16);
    for g in &a {
        let inst = &g.instance;
        let source = &sources.iter().find(|(name, _)| *name == g.source).unwrap().1;
        assert!(inst.precedences().len() <= source.edge_count(), "{}", g.name);
        assert_eq!(inst.horizon() % 24, 0);
        for p in inst.projects() {
            let due = inst.job(p).due_date.unwrap();
            if g.group.contains("a10") {
                assert!(due >= critical_path(inst, p), "{}: project {p}", g.name);
            }
        }
        let sol = solve_heuristic(inst, &limits, None).unwrap();
        if g.group.contains("a08") {
            assert!(objective(inst, &sol.schedule) > 0, "{} has no tardy project", g.name);
        }
    }
}

#[test]
fn disjoint_chains_become_two_projects() {
    let net = RawNetwork {
        durations: vec![1, 2, 3, 1],
        requests: vec![vec![1]; 4],
        successors: vec![vec![1], vec![], vec![3], vec![]],
        capacities: vec![2],
    };
    assert_eq!(to_inforest(&net).unwrap(), vec![(0, 1), (2, 3)]);
    let mods = Modifications { alpha: 1e6, shifts: vec![ShiftPattern::Sixteen], weights: vec![1, 2] };
    let inst = apply_modifications(&net, &mods, &SolveLimits::default()).unwrap();
    assert_eq!(inst.projects().collect::<Vec<_>>(), vec![1, 3]);
    assert_eq!(inst.job(3).weight, 2);
    // Due dates far beyond the horizon leave nothing tardy.
    let sol = solve_heuristic(&inst, &SolveLimits::default(), None).unwrap();
    assert_eq!(sol.objective, 0);
}
