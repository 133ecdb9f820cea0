use bribery::cost::{Cost, SupportCostProfile};
use bribery::election::{apply_push, winners, Election, PushAction, RuleId, Voter};
use bribery::support::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq)]
enum Sign {
    Mixed,
    Positive,
    Negative,
}

fn random_election(rng: &mut ChaCha8Rng) -> Election {
    let m = rng.gen_range(2..=4);
    let n = rng.gen_range(1..=5);
    let voters = (0..n)
        .map(|_| {
            let mut pref: Vec<usize> = (0..m).collect();
            pref.shuffle(rng);
            Voter::new(pref, rng.gen_range(0..=m))
        })
        .collect();
    Election::new(m, 0, voters).unwrap()
}

fn random_costs(rng: &mut ChaCha8Rng, e: &Election, sign: Sign) -> SupportCostProfile {
    let m = e.m();
    let approvals: Vec<usize> = e.voters.iter().map(|v| v.approval_count).collect();
    let rows = approvals
        .iter()
        .map(|&l| {
            let mut row = vec![Cost::ZERO; m + 1];
            let mut walk = |row: &mut Vec<Cost>, idx: &mut dyn Iterator<Item = usize>, allowed: bool| {
                let mut last = Cost::ZERO;
                for j in idx {
                    last = if !allowed || last == Cost::Infinite || rng.gen_bool(0.1) {
                        Cost::Infinite
                    } else {
                        last + Cost::Finite(rng.gen_range(0..=3))
                    };
                    row[j] = last;
                }
            };
            walk(&mut row, &mut (l + 1..=m), sign != Sign::Negative);
            walk(&mut row, &mut (0..l).rev(), sign != Sign::Positive);
            row
        })
        .collect();
    SupportCostProfile::new(rows, approvals, m).unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng, rule: RuleId, sign: Sign) -> SupportInstance {
    let e = random_election(rng);
    let costs = random_costs(rng, &e, sign);
    SupportInstance::new(e, costs, rule, None).unwrap()
}

/// Plain enumeration over every finite approval-count vector.
fn plain_optimum(inst: &SupportInstance, constructive: bool) -> Cost {
    let e = &inst.election;
    let opts: Vec<Vec<i64>> = (0..e.n())
        .map(|i| {
            let l = e.voters[i].approval_count as i64;
            (0..=e.m() as i64)
                .map(|x| x - l)
                .filter(|&d| inst.costs.price(i, d).is_finite())
                .collect()
        })
        .collect();
    let mut best = Cost::Infinite;
    let mut idx = vec![0usize; e.n()];
    loop {
        let deltas: Vec<i64> = idx.iter().enumerate().map(|(i, &o)| opts[i][o]).collect();
        let cost = support_cost(&inst.costs, &PushAction { deltas: deltas.clone() }).unwrap();
        if cost < best {
            let after = apply_push(e, &PushAction { deltas }).unwrap();
            if winners(&after, inst.rule).unwrap().contains(e.p()) == constructive {
                best = cost;
            }
        }
        let mut i = e.n();
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] + 1 < opts[i].len() {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
        }
    }
}

const RULES: [RuleId; 3] = [RuleId::SPAV, RuleId::FallbackSimplified, RuleId::FallbackClassic];

fn check_verified(inst: &SupportInstance, s: &bribery::BriberySolution) {
    if s.is_finite() {
        assert!(s.certificate.contains(inst.election.p()));
        let a = s.action.as_push().unwrap();
        assert_eq!(support_cost(&inst.costs, a).unwrap(), s.cost);
    }
}

#[test]
fn reduced_search_matches_plain_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for rule in RULES {
        for sign in [Sign::Mixed, Sign::Positive, Sign::Negative] {
            for case in 0..300 {
                let inst = random_instance(&mut rng, rule, sign);
                let got = brute_force_support(&inst).unwrap();
                assert_eq!(got.cost, plain_optimum(&inst, true), "{rule} case {case}: {inst:?}");
                check_verified(&inst, &got);
            }
        }
    }
}

#[test]
fn negative_fpt_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for rule in RULES {
        for case in 0..300 {
            let inst = random_instance(&mut rng, rule, Sign::Negative);
            let want = brute_force_support(&inst).unwrap();
            let got = solve_support_fpt(&inst, 4, &PositiveOptions::default()).unwrap();
            check_verified(&inst, &got);
            if want.is_finite() && compute_parameters(&inst).unwrap().beta_prime > 4 {
                continue;
            }
            assert_eq!(got.cost, want.cost, "{rule} case {case}: {inst:?}");
        }
    }
}

#[test]
fn positive_fpt_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for rule in RULES {
        for case in 0..300 {
            let inst = random_instance(&mut rng, rule, Sign::Positive);
            let want = brute_force_support(&inst).unwrap();
            let got = solve_support_fpt(&inst, 4, &PositiveOptions::default()).unwrap();
            check_verified(&inst, &got);
            if want.is_finite() && compute_parameters(&inst).unwrap().beta_prime > 4 {
                continue;
            }
            assert_eq!(got.cost, want.cost, "{rule} case {case}: {inst:?}");
        }
    }
}

#[test]
fn exact_program_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for rule in RULES {
        for case in 0..100 {
            let inst = random_instance(&mut rng, rule, Sign::Mixed);
            let want = brute_force_support(&inst).unwrap();
            let got = solve_support_exact(&inst, None).unwrap();
            check_verified(&inst, &got);
            assert_eq!(got.cost, want.cost, "{rule} case {case}: {inst:?}");
        }
    }
}

#[test]
fn destructive_dp_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for rule in RULES {
        for case in 0..300 {
            let inst = random_instance(&mut rng, rule, Sign::Mixed);
            let want = brute_force_destructive(&inst.election, &inst.costs, rule).unwrap();
            let got = solve_destructive_support(&inst.election, &inst.costs, rule).unwrap();
            assert_eq!(got.cost, want.cost, "{rule} case {case}: {inst:?}");
            assert_eq!(want.cost, plain_optimum(&inst, false));
            if got.is_finite() {
                assert!(!got.certificate.contains(inst.election.p()));
            }
        }
    }
}

#[test]
fn sampled_colorings_rarely_miss() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut total, mut hits) = (0, 0);
    for rule in RULES {
        for seed in 0..100 {
            let inst = random_instance(&mut rng, rule, Sign::Positive);
            let want = brute_force_support(&inst).unwrap();
            if want.is_finite() && compute_parameters(&inst).unwrap().beta_prime > 4 {
                continue;
            }
            let opts = PositiveOptions {
                seed,
                trials: Some(200),
                exhaustive: false,
            };
            let got = solve_support_fpt(&inst, 4, &opts).unwrap();
            check_verified(&inst, &got);
            assert!(got.cost >= want.cost);
            total += 1;
            hits += (got.cost == want.cost) as usize;
        }
    }
    assert!(hits * 100 >= total * 99, "{hits}/{total}");
}

fn single_peaked(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Election {
    let mut axis: Vec<usize> = (0..m).collect();
    axis.shuffle(rng);
    let voters = (0..n)
        .map(|_| {
            let peak = rng.gen_range(0..m);
            let (mut lo, mut hi) = (peak, peak);
            let mut pref = vec![axis[peak]];
            while pref.len() < m {
                let left = lo > 0 && (hi + 1 == m || rng.gen_bool(0.5));
                if left {
                    lo -= 1;
                    pref.push(axis[lo]);
                } else {
                    hi += 1;
                    pref.push(axis[hi]);
                }
            }
            Voter::new(pref, rng.gen_range(0..=m))
        })
        .collect();
    Election::new(m, 0, voters).unwrap()
}

#[test]
fn approximation_stays_within_factor() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut total, mut found) = (0, 0);
    for case in 0..100u64 {
        let m = rng.gen_range(2..=5);
        let n = rng.gen_range(1..=6);
        let e = single_peaked(&mut rng, m, n);
        let approvals: Vec<usize> = e.voters.iter().map(|v| v.approval_count).collect();
        let costs = SupportCostProfile::unit(&approvals, m);
        let inst = SupportInstance::new(e, costs, RuleId::SPAV, None).unwrap();
        let opt = brute_force_support(&inst).unwrap().cost;
        for epsilon in [0.25, 0.5] {
            let opts = ApproxOptions {
                epsilon,
                budget: Some(opt),
                seed: case,
                ..Default::default()
            };
            let got = approx_spav_single_peaked(&inst, &opts).unwrap();
            check_verified(&inst, &got);
            total += 1;
            if let Cost::Finite(c) = got.cost {
                found += 1;
                assert!(c as f64 <= (1.0 + epsilon) * opt.finite().unwrap() as f64 + 1e-9);
            }
        }
    }
    assert!(found * 100 >= total * 95, "{found}/{total}");
}
