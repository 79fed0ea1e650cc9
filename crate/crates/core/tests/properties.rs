use landalloc::analysis::{monte_carlo_sw, WelfareEstimator};
use landalloc::generators::{random_instance, RandomSpec, Topology, ValuationMode};
use landalloc::io::{export_mip, parse_instance, parse_lp, parse_reports, render_instance, render_reports};
use landalloc::mechanisms::{mutual_pairs, run, truthful_reports};
use landalloc::optimize::{brute_force_opt, exact_opt, two_approx};
use landalloc::rational::rat;
use landalloc::{social_welfare, Instance, MechanismId, RandomBits, Rational};
use proptest::prelude::*;

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 0..4usize, 0..3usize, any::<bool>(), any::<u64>()).prop_map(|(n, topo, val, uniform, seed)| {
        let spec = RandomSpec {
            topology: [Topology::Path, Topology::Grid, Topology::Star, Topology::Random][topo],
            n,
            pairs: (seed as usize) % (n / 2 + 1),
            phi_min: rat("0"),
            phi_max: rat("3"),
            uniform_phi: uniform,
            valuation: [
                ValuationMode::Binary,
                ValuationMode::UniformRational,
                ValuationMode::Generic,
            ][val],
        };
        random_instance(&spec, seed).unwrap()
    })
}

const CLOSED_FORM: [MechanismId; 5] = [
    MechanismId::OnCtRsd,
    MechanismId::OnCaRsd,
    MechanismId::RsdStar,
    MechanismId::FfCtRsdStar,
    MechanismId::OnCaRsdStar,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_documents_round_trip(inst in instance(7)) {
        prop_assert_eq!(parse_instance(&render_instance(&inst)).unwrap(), inst.clone());
        let reports = truthful_reports(&inst);
        prop_assert_eq!(parse_reports(&render_reports(&reports), &inst).unwrap(), reports);
    }

    #[test]
    fn pair_placement_matches_brute_force(inst in instance(7)) {
        prop_assert_eq!(exact_opt(&inst).unwrap().welfare, brute_force_opt(&inst).unwrap().welfare);
    }

    #[test]
    fn two_approx_is_within_half(inst in instance(7)) {
        let approx = two_approx(&inst).unwrap();
        let opt = brute_force_opt(&inst).unwrap().welfare;
        prop_assert_eq!(social_welfare(&inst, &approx.allocation).unwrap(), approx.welfare.clone());
        prop_assert!(&approx.welfare + &approx.welfare >= opt);
        prop_assert!(approx.welfare <= opt);
    }

    #[test]
    fn every_run_is_a_bijection_below_opt(inst in instance(6), mech in 0..5usize, index in any::<u64>()) {
        let mech = CLOSED_FORM[mech];
        let n = inst.agent_count();
        let truth = truthful_reports(&inst);
        let pairs = mutual_pairs(&truth);
        let bits = RandomBits::nth(n, &pairs, index % RandomBits::space_size(n, pairs.len()));
        let out = run(&inst, mech, &bits, &truth).unwrap();
        prop_assert_eq!(out.replay().unwrap(), out.allocation.clone());
        prop_assert_eq!(out.transcript.len(), n);
        prop_assert!(out.welfare() <= brute_force_opt(&inst).unwrap().welfare);
    }

    #[test]
    fn distribution_is_a_probability_measure(inst in instance(5), mech in 0..5usize) {
        let mech = CLOSED_FORM[mech];
        let truth = truthful_reports(&inst);
        let dist = WelfareEstimator::default().distribution(&inst, mech, &truth).unwrap();
        let total: Rational = dist.iter().map(|(_, p)| p.clone()).sum();
        prop_assert_eq!(total, Rational::one());
        let mean: Rational = dist.iter().map(|(a, p)| social_welfare(&inst, a).unwrap() * p).sum();
        prop_assert_eq!(mean, WelfareEstimator::default().exact(&inst, mech, &truth).unwrap().expected_sw);
    }

    #[test]
    fn sampling_is_deterministic(inst in instance(5), seed in any::<u64>()) {
        let truth = truthful_reports(&inst);
        let a = monte_carlo_sw(&inst, MechanismId::OnCaRsd, &truth, 300, seed).unwrap();
        let b = monte_carlo_sw(&inst, MechanismId::OnCaRsd, &truth, 300, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn exported_models_parse(inst in instance(5)) {
        let model = parse_lp(&export_mip(&inst)).unwrap();
        prop_assert!(model.maximize);
        prop_assert_eq!(model.binaries.len(), model.variables().len());
    }
}
