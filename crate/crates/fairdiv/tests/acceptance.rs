//! Acceptance gate: one test per criterion, each printing a pass/fail
//! line. Criteria 1-3 go through the command-line binary; the rest drive
//! the library directly.

use std::process::Command;
use std::time::Instant;

use fairdiv::{
    audit_chain, best_manipulation, build_stage_mappings, check_class,
    envy_graph_hard_instances, is_alpha_ef1, is_ef1, lift_mechanism, max_envy, phi, rational,
    rational_int, run_mechanism, submodular_hard_instance, thm4_chain,
    verify_factor_two_bound, xos_hard_instance, AuditFinding, Mechanism, MisreportFamily,
    Ratio, TableValuation, Valuation, ValuationClass,
};

fn verdict(criterion: &str, pass: bool, detail: &str) -> bool {
    let flag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {flag} — {detail}");
    pass
}

fn cli(args: &[&str]) -> (serde_json::Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_fairdiv"))
        .args(args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("utf-8 report");
    let json = serde_json::from_str(&stdout).expect("json report");
    (json, out.status.code().unwrap_or(-1))
}

#[test]
fn criterion_01_submodular_hard_instance_reproduction() {
    let start = Instant::now();
    let (report, code) =
        cli(&["reproduce", "thm5", "--n", "3", "--w", "10", "--T", "90"]);
    let elapsed = start.elapsed();
    let results = &report["results"];
    let pass = code == 0
        && results["truthful_utility"] == "10/1"
        && results["manipulated_utility"] == "28/1"
        && results["ratio"] == "14/5"
        && elapsed.as_secs_f64() < 5.0;
    assert!(
        verdict(
            "1 (submodular reproduction)",
            pass,
            &format!(
                "utilities {} -> {}, ratio {}, {:.2}s",
                results["truthful_utility"],
                results["manipulated_utility"],
                results["ratio"],
                elapsed.as_secs_f64()
            ),
        ),
        "{report}"
    );
}

#[test]
fn criterion_02_xos_hard_instance_reproduction() {
    let start = Instant::now();
    let (a, code_a) = cli(&["reproduce", "xos", "--n", "2", "--m", "5"]);
    let (b, code_b) = cli(&["reproduce", "xos", "--n", "3", "--m", "7"]);
    let elapsed = start.elapsed();
    let pass = code_a == 0
        && code_b == 0
        && a["results"]["ratio"] == "3/1"
        && b["results"]["ratio"] == "3/1"
        && elapsed.as_secs_f64() < 1.0;
    assert!(
        verdict(
            "2 (xos reproduction)",
            pass,
            &format!(
                "ratios {} and {}, {:.2}s",
                a["results"]["ratio"],
                b["results"]["ratio"],
                elapsed.as_secs_f64()
            ),
        ),
        "{a}\n{b}"
    );
}

#[test]
fn criterion_03_envy_graph_reproductions_and_scaling() {
    let (report, code) = cli(&["reproduce", "envy-graph", "--eps", "1/100"]);
    let rows = report["results"]["reproductions"].as_array().expect("two rows");
    let mut pass = code == 0
        && rows[0]["ratio"] == "101/1"
        && rows[1]["ratio"] == "100/1";
    for (p, q) in [(1i64, 2i64), (1, 10), (1, 1000)] {
        let eps = rational(p, q);
        let [fixed, favorite] = envy_graph_hard_instances(&eps).unwrap();
        let fixed_ratio = fixed.replay().unwrap().ratio;
        let favorite_ratio = favorite.replay().unwrap().ratio;
        let one_plus = (rational_int(1) + &eps) / &eps;
        let inverse = rational_int(1) / &eps;
        pass &= fixed_ratio == Ratio::Finite(one_plus)
            && favorite_ratio == Ratio::Finite(inverse);
    }
    assert!(
        verdict(
            "3 (envy-graph reproduction)",
            pass,
            &format!("ratios {} and {}; scaling checked at 1/2, 1/10, 1/1000",
                rows[0]["ratio"], rows[1]["ratio"]),
        ),
        "{report}"
    );
}

/// Exhaustive all-orders manipulation of the singleton-picking mechanism
/// by agent 1 on one profile: returns the worst ratio and whether the
/// mapping construction and the factor-2 bound held on every run.
fn sweep_all_orders(profile: &[Valuation]) -> (Ratio, bool, Option<String>) {
    let m = profile[0].m();
    let truthful = run_mechanism(Mechanism::RoundRobin, profile).unwrap();
    let truthful_utility = profile[0].value(truthful.allocation.bundle(0));
    let mut worst = Ratio::one();
    let mut machinery_ok = true;
    let mut first_failure = None;
    let mut reported = profile.to_vec();
    for misreport in MisreportFamily::AllOrders.members(m) {
        reported[0] = misreport.as_valuation(m);
        let run = run_mechanism(Mechanism::RoundRobin, &reported).unwrap();
        let utility = profile[0].value(run.allocation.bundle(0));
        let ratio = Ratio::of(&utility, &truthful_utility);
        if ratio > worst {
            worst = ratio.clone();
        }
        let bound_holds = build_stage_mappings(&profile[0], &truthful, &run)
            .and_then(|maps| verify_factor_two_bound(&profile[0], &maps, &run))
            .map(|check| check.bound_holds);
        let ok = matches!(bound_holds, Ok(true));
        if !ok && first_failure.is_none() {
            first_failure = Some(format!(
                "misreport {misreport:?}: ratio {ratio}, factor-2 {bound_holds:?}"
            ));
        }
        machinery_ok &= ok;
    }
    (worst, machinery_ok, first_failure)
}

fn sampled_additive() -> Vec<Vec<Valuation>> {
    let mut rng = fairdiv::sampling::rng(42);
    (0..1000)
        .map(|_| {
            let n = rand::Rng::gen_range(&mut rng, 2..=3);
            let m = rand::Rng::gen_range(&mut rng, 1..=7);
            fairdiv::sampling::sample_additive_profile(&mut rng, n, m, 20)
        })
        .collect()
}

fn sampled_multiplicative() -> Vec<Vec<Valuation>> {
    let mut rng = fairdiv::sampling::rng(43);
    (0..1000)
        .map(|_| {
            let n = rand::Rng::gen_range(&mut rng, 2..=3);
            let m = rand::Rng::gen_range(&mut rng, 1..=7);
            fairdiv::sampling::sample_multiplicative_profile(&mut rng, n, m, 4)
        })
        .collect()
}

#[test]
fn criterion_04_factor_two_bound_additive() {
    let start = Instant::now();
    let two = Ratio::Finite(rational_int(2));
    let mut pass = true;
    let mut worst_seen = Ratio::one();
    let mut failure = None;
    for profile in sampled_additive() {
        let (worst, machinery_ok, first) = sweep_all_orders(&profile);
        if worst > worst_seen {
            worst_seen = worst.clone();
        }
        if (worst > two || !machinery_ok) && failure.is_none() {
            failure = Some(format!("profile {profile:?}: {}", first.unwrap_or_default()));
        }
        pass &= worst <= two && machinery_ok;
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 120.0;
    assert!(
        verdict(
            "4a (factor-2, additive)",
            pass,
            &format!(
                "worst ratio {worst_seen} over 1000 profiles, {:.1}s",
                elapsed.as_secs_f64()
            ),
        ),
        "first failure: {failure:?}"
    );
}

#[test]
fn criterion_04_factor_two_bound_multiplicative() {
    let start = Instant::now();
    let two = Ratio::Finite(rational_int(2));
    let mut pass = true;
    let mut worst_seen = Ratio::one();
    let mut failure = None;
    for profile in sampled_multiplicative() {
        let (worst, machinery_ok, first) = sweep_all_orders(&profile);
        if worst > worst_seen {
            worst_seen = worst.clone();
        }
        if (worst > two || !machinery_ok) && failure.is_none() {
            failure = Some(format!("profile {profile:?}: {}", first.unwrap_or_default()));
        }
        pass &= worst <= two && machinery_ok;
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 120.0;
    assert!(
        verdict(
            "4b (factor-2, multiplicative)",
            pass,
            &format!(
                "worst ratio {worst_seen} over 1000 profiles, {:.1}s",
                elapsed.as_secs_f64()
            ),
        ),
        "first failure: {failure:?}"
    );
}

#[test]
fn criterion_05_known_profitable_manipulation() {
    let profile = vec![
        Valuation::additive_ints(&[10, 9, 8, 0]),
        Valuation::additive_ints(&[0, 10, 0, 9]),
    ];
    let witness =
        best_manipulation(Mechanism::RoundRobin, &profile, 0, &MisreportFamily::AllOrders)
            .unwrap();
    let pass = witness.ratio == Ratio::Finite(rational(19, 18));
    assert!(verdict(
        "5 (known manipulation)",
        pass,
        &format!("best all-orders ratio {}", witness.ratio),
    ));
}

#[test]
fn criterion_06_fairness_guarantees() {
    let mut ef1_ok = true;
    for profile in sampled_additive().into_iter().chain(sampled_multiplicative()) {
        let run = run_mechanism(Mechanism::RoundRobin, &profile).unwrap();
        ef1_ok &= is_ef1(&profile, &run.allocation);
    }
    let mut coverage_ok = true;
    let mut share_ok = true;
    let half = rational(1, 2);
    let mut rng = fairdiv::sampling::rng(44);
    for _ in 0..1000 {
        let n = rand::Rng::gen_range(&mut rng, 1..=4);
        let m = rand::Rng::gen_range(&mut rng, 1..=10);
        let universe = rand::Rng::gen_range(&mut rng, 1..=12);
        let profile = fairdiv::sampling::sample_coverage_profile(&mut rng, n, m, universe);
        let run = run_mechanism(Mechanism::RoundRobinMarginal, &profile).unwrap();
        coverage_ok &= is_alpha_ef1(&profile, &run.allocation, &half);
        // First picker's guarantee: at least a 1/n share of the whole.
        let whole = profile[0].value(&fairdiv::Bundle::universe(m));
        let own = profile[0].value(run.allocation.bundle(0));
        share_ok &= own.scale(&rational_int(n as i64)) >= whole;
    }
    let pass = ef1_ok && coverage_ok && share_ok;
    assert!(verdict(
        "6 (fairness guarantees)",
        pass,
        &format!("ef1 {ef1_ok}, half-ef1 on coverage {coverage_ok}, 1/n share {share_ok}"),
    ));
}

fn sampled_lifted_inputs() -> Vec<Vec<fairdiv::AdditiveValuation>> {
    let mut rng = fairdiv::sampling::rng(45);
    (0..500)
        .map(|_| {
            let n = rand::Rng::gen_range(&mut rng, 2..=3);
            let m = rand::Rng::gen_range(&mut rng, 1..=5);
            fairdiv::sampling::sample_additive_profile(&mut rng, n, m, 10)
                .into_iter()
                .map(|v| match v {
                    Valuation::Additive(a) => a,
                    _ => unreachable!("sampler emits additive"),
                })
                .collect()
        })
        .collect()
}

#[test]
fn criterion_07_lifted_mechanism_fairness() {
    let start = Instant::now();
    let epsilon = rational_int(1);
    let alpha_bound = rational_int(2);
    let nine_tenths = rational(9, 10);
    let mut pass = true;
    for additive in sampled_lifted_inputs() {
        let lifted = lift_mechanism(Mechanism::RoundRobin, &epsilon, &alpha_bound, &additive)
            .unwrap();
        let profile: Vec<Valuation> =
            additive.into_iter().map(Valuation::Additive).collect();
        pass &= is_alpha_ef1(&profile, &lifted.run.allocation, &nine_tenths);
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 120.0;
    assert!(verdict(
        "7a (lifted mechanism, 9/10-EF1)",
        pass,
        &format!("500 profiles, {:.1}s", elapsed.as_secs_f64()),
    ));
}

#[test]
fn criterion_07_lifted_mechanism_incentive_ratio() {
    let start = Instant::now();
    let epsilon = rational_int(1);
    let alpha_bound = rational_int(2);
    let threshold =
        Ratio::Finite(rational(11, 10) + rational(1, 1_000_000_000));
    let mut worst = Ratio::one();
    let mut witness = None;
    for additive in sampled_lifted_inputs() {
        let m = additive[0].m();
        let truth = Valuation::Additive(additive[0].clone());
        let truthful =
            lift_mechanism(Mechanism::RoundRobin, &epsilon, &alpha_bound, &additive).unwrap();
        let truthful_utility = truth.value(truthful.run.allocation.bundle(0));
        let mut reported = additive.clone();
        for misreport in MisreportFamily::AllOrders.members(m) {
            let Valuation::Additive(as_additive) = misreport.as_valuation(m) else {
                unreachable!("order misreports are additive")
            };
            reported[0] = as_additive;
            let run =
                lift_mechanism(Mechanism::RoundRobin, &epsilon, &alpha_bound, &reported)
                    .unwrap();
            let utility = truth.value(run.run.allocation.bundle(0));
            let ratio = Ratio::of(&utility, &truthful_utility);
            if ratio > worst {
                worst = ratio.clone();
                witness = Some((additive.clone(), misreport));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= threshold && elapsed.as_secs_f64() < 120.0;
    assert!(
        verdict(
            "7b (lifted mechanism, ratio <= 1.1)",
            pass,
            &format!("worst ratio {worst} over 500 profiles, {:.1}s", elapsed.as_secs_f64()),
        ),
        "worst witness: {witness:?}"
    );
}

#[test]
fn criterion_08_chain_audits_find_witnesses() {
    let thm1 = fairdiv::thm1_chain(&rational_int(5)).unwrap();
    let finding_1 =
        audit_chain(Mechanism::RoundRobin, &thm1, &rational(3, 5), &rational(3, 2)).unwrap();
    let pass_1 = match &finding_1 {
        AuditFinding::Deviation(w) => {
            w.ratio >= Ratio::Finite(rational(3, 2))
        }
        AuditFinding::Unfair { .. } => false,
    };

    let thm4 = thm4_chain(&rational_int(5), &rational(1, 100)).unwrap();
    let alpha = phi() - rational_int(1);
    let threshold = phi() - rational(1, 1_000_000_000);
    let finding_4 =
        audit_chain(Mechanism::RoundRobin, &thm4, &alpha, &threshold).unwrap();
    let pass_4 = match &finding_4 {
        AuditFinding::Deviation(w) => w.ratio >= Ratio::Finite(threshold.clone()),
        AuditFinding::Unfair { .. } => false,
    };

    assert!(verdict(
        "8 (deviation-chain audits)",
        pass_1 && pass_4,
        &format!("first chain witness {pass_1}, golden-ratio chain witness {pass_4}"),
    ));
}

#[test]
fn criterion_09_envy_scaling() {
    let mut pass = true;
    let mut envies = Vec::new();
    for m in [4u32, 8, 16, 32] {
        let inst = xos_hard_instance(2, m).unwrap();
        let run = run_mechanism(inst.mechanism, &inst.profile).unwrap();
        let envy = max_envy(&inst.profile, &run.allocation).expect("exact profile");
        let s2 = rational_int(((m - 1).div_ceil(2)) as i64);
        pass &= envy == s2 - rational_int(1);
        envies.push(envy);
    }
    for pair in envies.windows(2) {
        let doubled = &pair[0] * rational_int(2);
        let diff = &pair[1] - &doubled;
        pass &= diff <= rational_int(1) && diff >= rational_int(-1);
    }
    assert!(verdict(
        "9 (max-envy scaling)",
        pass,
        &format!("max envies {:?}", envies.iter().map(|e| e.to_string()).collect::<Vec<_>>()),
    ));
}

#[test]
fn criterion_10_class_checkers() {
    let thm4 = thm4_chain(&rational_int(5), &rational(1, 100)).unwrap();
    let v2 = &thm4.profiles[0].profile[1];
    let subadditive = check_class(v2, ValuationClass::Subadditive).unwrap().holds;
    let cancelable = check_class(v2, ValuationClass::Cancelable).unwrap().holds;
    let additive = check_class(v2, ValuationClass::Additive).unwrap().holds;

    let thm5 = submodular_hard_instance(2, 2, 8).unwrap();
    let u2 = &thm5.profile[1];
    let submodular = check_class(u2, ValuationClass::Submodular).unwrap().holds;
    let u2_additive = check_class(u2, ValuationClass::Additive).unwrap().holds;

    let table = Valuation::Table(
        TableValuation::new(
            3,
            [1, 2, 3].into(),
            [
                ([1].into(), rational_int(1)),
                ([2].into(), rational_int(1)),
                ([3].into(), rational_int(1)),
                ([1, 2].into(), rational_int(1)),
                ([1, 3].into(), rational_int(3)),
                ([2, 3].into(), rational_int(2)),
                ([1, 2, 3].into(), rational_int(3)),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap(),
    );
    let check = check_class(&table, ValuationClass::Cancelable).unwrap();
    let rejected = !check.holds && check.counterexample.is_some();
    let counterexample = check
        .counterexample
        .map(|c| format!("s={} t={:?} good={:?}", c.s, c.t.map(|t| t.to_string()), c.good));

    let pass =
        subadditive && cancelable && !additive && submodular && !u2_additive && rejected;
    assert!(verdict(
        "10 (class checkers)",
        pass,
        &format!(
            "golden-ratio table: subadditive {subadditive}, cancelable {cancelable}, \
             additive {additive}; discounted: submodular {submodular}, additive \
             {u2_additive}; non-cancelable rejected with {counterexample:?}"
        ),
    ));
}
