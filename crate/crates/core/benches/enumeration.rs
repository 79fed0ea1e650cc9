use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use landalloc::analysis::{FtChecker, ParetoChecker, WelfareEstimator};
use landalloc::generators::{fixtures, random_instance, RandomSpec, Topology, ValuationMode};
use landalloc::mechanisms::truthful_reports;
use landalloc::optimize::BruteForce;
use landalloc::{Allocation, Execution, MechanismId};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn brute_force(c: &mut Criterion) {
    let spec = RandomSpec {
        topology: Topology::Grid,
        n: 9,
        pairs: 3,
        valuation: ValuationMode::UniformRational,
        ..RandomSpec::default()
    };
    let inst = random_instance(&spec, 3).unwrap();
    let mut g = c.benchmark_group("brute_force_opt_n9");
    g.sample_size(10);
    for (name, exec) in MODES {
        let solver = BruteForce {
            exec,
            ..BruteForce::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solver.solve(&inst).unwrap())
        });
    }
    g.finish();
}

fn expected_welfare(c: &mut Criterion) {
    let inst = fixtures::hub(8);
    let reports = truthful_reports(&inst);
    let mut g = c.benchmark_group("exact_expected_sw_hub8");
    g.sample_size(10);
    for (name, exec) in MODES {
        let est = WelfareEstimator {
            exec,
            ..WelfareEstimator::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| est.exact(&inst, MechanismId::OnCtRsd, &reports).unwrap())
        });
    }
    g.finish();
}

fn checkers(c: &mut Criterion) {
    let spec = RandomSpec {
        n: 5,
        pairs: 2,
        valuation: ValuationMode::Generic,
        ..RandomSpec::default()
    };
    let inst = random_instance(&spec, 11).unwrap();
    let big = fixtures::hub(9);
    let mut g = c.benchmark_group("checkers");
    g.sample_size(10);
    for (name, exec) in MODES {
        let ft = FtChecker {
            exec,
            ..FtChecker::default()
        };
        g.bench_function(BenchmarkId::new("universal_ft_n5", name), |b| {
            b.iter(|| ft.check(&inst, MechanismId::OnCaRsd).unwrap())
        });
        let po = ParetoChecker {
            exec,
            ..ParetoChecker::default()
        };
        g.bench_function(BenchmarkId::new("pareto_scan_n9", name), |b| {
            b.iter(|| po.check(&big, &Allocation::identity(9)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, brute_force, expected_welfare, checkers);
criterion_main!(benches);
