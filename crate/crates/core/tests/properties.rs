use bribery::cli::{parse_instance, serialize_instance, InstanceFile};
use bribery::cost::{Cost, ShiftCostProfile};
use bribery::election::*;
use bribery::flow::build_bucklin_network;
use bribery::instances::*;
use bribery::shift::{brute_force_shift, ShiftInstance};
use bribery::support::*;
use proptest::prelude::*;

fn election(m: usize, n: usize, seed: u64) -> Election {
    gen_random(m, n, seed, ApprovalLaw::Uniform).unwrap()
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, m - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn classic_bucklin_winners_are_simplified_winners(m in 1usize..=6, n in 1usize..=8, seed: u64) {
        let e = election(m, n, seed);
        let classic = winners(&e, RuleId::BucklinClassic).unwrap();
        let simplified = winners(&e, RuleId::BucklinSimplified).unwrap();
        prop_assert_eq!(classic.winning_round, simplified.winning_round);
        prop_assert!(classic.winners.iter().all(|c| simplified.contains(*c)));
    }

    #[test]
    fn k_approval_ignores_approval_counts(m in 1usize..=6, n in 1usize..=8, seed: u64, other: u64) {
        let e = election(m, n, seed);
        let mut f = e.clone();
        let fresh = election(m, n, other);
        for (v, w) in f.voters.iter_mut().zip(&fresh.voters) {
            v.approval_count = w.approval_count;
        }
        for k in 1..=m {
            prop_assert_eq!(k_approval_scores(&e, k).unwrap(), k_approval_scores(&f, k).unwrap());
        }
    }

    #[test]
    fn full_approval_makes_fallback_bucklin(m in 1usize..=6, n in 1usize..=8, seed: u64) {
        let e = gen_random(m, n, seed, ApprovalLaw::Fixed(m)).unwrap();
        prop_assert_eq!(winners(&e, RuleId::FallbackClassic).unwrap().winners, winners(&e, RuleId::BucklinClassic).unwrap().winners);
        prop_assert_eq!(winners(&e, RuleId::FallbackSimplified).unwrap().winners, winners(&e, RuleId::BucklinSimplified).unwrap().winners);
    }

    #[test]
    fn shifting_moves_only_p_up(m in 1usize..=6, n in 1usize..=6, seed: u64, shifts in proptest::collection::vec(0usize..8, 6)) {
        let e = election(m, n, seed);
        let t: Vec<usize> = shifts[..n].iter().map(|&s| s.min(m)).collect();
        let after = apply_shift(&e, &ShiftAction { shifts: t.clone() }).unwrap();
        let p = e.designated;
        for (i, (a, b)) in e.voters.iter().zip(&after.voters).enumerate() {
            prop_assert_eq!(b.rank_of(p), a.rank_of(p).saturating_sub(t[i]).max(1));
            for c in (0..m).filter(|&c| c != p) {
                prop_assert!(b.rank_of(c).abs_diff(a.rank_of(c)) <= 1);
            }
            prop_assert_eq!(a.approval_count, b.approval_count);
        }
    }

    #[test]
    fn single_peaked_detection_matches_axis_enumeration(m in 1usize..=5, n in 1usize..=4, seed: u64, sp: bool) {
        let e = if sp { gen_single_peaked(m, n, seed).unwrap().0 } else { election(m, n, seed) };
        let exists = permutations(m).into_iter().any(|order| verify_axis(&e, &Axis { order }));
        match is_single_peaked(&e) {
            Some(axis) => {
                prop_assert!(exists);
                prop_assert!(verify_axis(&e, &axis));
            }
            None => prop_assert!(!exists),
        }
        if sp {
            prop_assert!(exists);
        }
    }

    #[test]
    fn cheaper_prices_never_raise_the_optimum(m in 1usize..=4, n in 1usize..=4, seed: u64, rule in 0usize..4) {
        let rule = [RuleId::BucklinClassic, RuleId::BucklinSimplified, RuleId::FallbackClassic, RuleId::FallbackSimplified][rule];
        let e = election(m, n, seed);
        let costs = random_shift_costs(n, m, seed ^ 1, 3, 0.2);
        let cheaper = ShiftCostProfile {
            rows: costs
                .rows
                .iter()
                .map(|r| {
                    let mut prev = Cost::ZERO;
                    r.iter()
                        .map(|&c| {
                            let halved = match c {
                                Cost::Finite(x) => Cost::Finite(x / 2),
                                Cost::Infinite => Cost::Finite(9),
                            };
                            prev = prev.max(halved);
                            prev
                        })
                        .collect()
                })
                .collect(),
        };
        // Halving is monotone, and capping infinities keeps rows monotone and
        // pointwise no more expensive.
        prop_assert!(cheaper.rows.iter().flatten().zip(costs.rows.iter().flatten()).all(|(a, b)| a <= b));
        let a = brute_force_shift(&ShiftInstance::new(e.clone(), costs, rule).unwrap()).unwrap().cost;
        let b = brute_force_shift(&ShiftInstance::new(e, cheaper, rule).unwrap()).unwrap().cost;
        prop_assert!(b <= a);
    }

    #[test]
    fn bucklin_network_flows_are_feasible(m in 2usize..=5, n in 1usize..=5, seed: u64, k in 1usize..5, i in 0usize..5) {
        let e = election(m, n, seed);
        let costs = random_shift_costs(n, m, seed ^ 7, 3, 0.0);
        if let Ok(net) = build_bucklin_network(&e, &costs, k.min(m - 1), i.min(n)) {
            if let Some(flow) = bribery::flow::min_cost_circulation(&net.network).unwrap() {
                prop_assert!(flow.is_feasible_for(&net.network));
            }
        }
    }

    #[test]
    fn instance_files_round_trip(m in 1usize..=5, n in 1usize..=5, seed: u64, rule in 0usize..6, budget in proptest::option::of(0u64..20), costs in 0usize..3) {
        let e = election(m, n, seed);
        let approvals: Vec<usize> = e.voters.iter().map(|v| v.approval_count).collect();
        let rule = [RuleId::BucklinClassic, RuleId::BucklinSimplified, RuleId::SPAV, RuleId::FallbackClassic, RuleId::FallbackSimplified, RuleId::KApproval(1)][rule];
        let f = InstanceFile {
            election: e,
            rule,
            shift_costs: (costs > 0).then(|| random_shift_costs(n, m, seed, 3, 0.2)),
            support_costs: (costs > 1).then(|| random_support_costs(&approvals, m, seed, PriceSign::Mixed, 3, 0.2)),
            budget: budget.map(Cost::Finite),
        };
        let text = serialize_instance(&f);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn generators_are_deterministic(m in 1usize..=6, n in 1usize..=6, seed: u64) {
        prop_assert_eq!(election(m, n, seed), election(m, n, seed));
        prop_assert_eq!(gen_single_peaked(m, n, seed).unwrap(), gen_single_peaked(m, n, seed).unwrap());
        let (e, axis) = gen_single_peaked(m, n, seed).unwrap();
        prop_assert!(verify_axis(&e, &axis));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn parameter_invariants(m in 1usize..=3, n in 1usize..=4, seed: u64, rule in 0usize..3) {
        let rule = [RuleId::SPAV, RuleId::FallbackClassic, RuleId::FallbackSimplified][rule];
        let e = election(m, n, seed);
        let approvals: Vec<usize> = e.voters.iter().map(|v| v.approval_count).collect();
        let costs = random_support_costs(&approvals, m, seed ^ 3, PriceSign::Mixed, 3, 0.1);
        let inst = SupportInstance::new(e, costs, rule, None).unwrap();
        if let Ok(st) = compute_parameters(&inst) {
            prop_assert!(st.beta >= st.beta_prime);
            prop_assert!(st.beta >= st.alpha);
        }
    }

    #[test]
    fn positive_minimal_briberies_push_to_rank_of_p(m in 1usize..=4, n in 1usize..=5, seed: u64, rule in 0usize..3) {
        let rule = [RuleId::SPAV, RuleId::FallbackClassic, RuleId::FallbackSimplified][rule];
        let e = election(m, n, seed);
        let approvals: Vec<usize> = e.voters.iter().map(|v| v.approval_count).collect();
        let costs = random_support_costs(&approvals, m, seed ^ 5, PriceSign::Positive, 3, 0.1);
        let inst = SupportInstance::new(e, costs, rule, None).unwrap();
        let s = solve_support_fpt(&inst, 6, &PositiveOptions::default()).unwrap();
        if let Some(a) = s.action.as_push().filter(|_| s.is_finite()) {
            let min = minimalize_push(&inst, a).unwrap();
            prop_assert!(is_minimal_push(&inst, &min).unwrap());
            for (v, &d) in inst.election.voters.iter().zip(&min.deltas) {
                if d != 0 {
                    prop_assert_eq!(v.approval_count as i64 + d, v.rank_of(inst.election.designated) as i64);
                }
            }
        }
    }

    #[test]
    fn every_finite_support_answer_replays(m in 1usize..=4, n in 1usize..=5, seed: u64, rule in 0usize..3, sign in 0usize..2) {
        let rule = [RuleId::SPAV, RuleId::FallbackClassic, RuleId::FallbackSimplified][rule];
        let sign = [PriceSign::Negative, PriceSign::Positive][sign];
        let e = election(m, n, seed);
        let approvals: Vec<usize> = e.voters.iter().map(|v| v.approval_count).collect();
        let costs = random_support_costs(&approvals, m, seed ^ 9, sign, 3, 0.1);
        let inst = SupportInstance::new(e, costs, rule, None).unwrap();
        let p = inst.election.designated;
        let reg = support_registry();
        let cfg = SolveConfig::default();
        for name in ["brute-force", "fpt", "exact-ilp"] {
            let s = reg.get(name).unwrap().solve(&inst, &cfg).unwrap();
            if s.is_finite() {
                let a = s.action.as_push().unwrap();
                prop_assert_eq!(support_cost(&inst.costs, a).unwrap(), s.cost);
                prop_assert!(winners(&apply_push(&inst.election, a).unwrap(), rule).unwrap().contains(p));
            }
        }
        let d = solve_destructive_support(&inst.election, &inst.costs, rule).unwrap();
        if d.is_finite() {
            let a = d.action.as_push().unwrap();
            prop_assert_eq!(support_cost(&inst.costs, a).unwrap(), d.cost);
            prop_assert!(!winners(&apply_push(&inst.election, a).unwrap(), rule).unwrap().contains(p));
        }
    }
}
