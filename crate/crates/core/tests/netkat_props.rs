use krn_core::netkat::{
    build_chain_from, evaluate, parse_program, prob_member, prob_member_hitting, prob_superset, step_distribution,
    History, PacketSet, Program, StarBudgets,
};
use krn_core::random;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_programs_reparse(seed: u64) {
        let mut rng = random::rng(seed);
        let p = Program::seq(random::program(&mut rng, 3), Program::star(random::program(&mut rng, 3)));
        prop_assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn steps_are_distributions_within_the_level(seed: u64, level in 1usize..=4) {
        let mut rng = random::rng(seed);
        let p = random::program(&mut rng, 3);
        let s = random::packet_set(&mut rng, level);
        let d = step_distribution(&p, &s, level).unwrap();
        prop_assert!((d.values().sum::<f64>() - 1.0).abs() <= 1e-12);
        for t in d.keys() {
            prop_assert!(t.max_len() <= level);
            // direct images never grow a set
            prop_assert!(t.len() <= s.len());
        }
    }

    #[test]
    fn star_unions_are_normalized_and_match_hitting(seed: u64, level in 1usize..=3) {
        let mut rng = random::rng(seed);
        let prog = Program::seq(random::program(&mut rng, 2), Program::star(random::program(&mut rng, 3)));
        let input = random::packet_set(&mut rng, level);
        let r = evaluate(&prog, &input, level, StarBudgets::default()).unwrap();
        prop_assert!((r.total_probability() - 1.0).abs() <= 1e-9);
        for len in 1..=level {
            for h in History::all_of_length(len) {
                let a = prob_member(&r, &h);
                let b = prob_member_hitting(&r, &h).unwrap();
                prop_assert!((a - b).abs() <= 1e-9, "{} {}: {} vs {}", prog, h, a, b);
            }
        }
        prop_assert!((prob_superset(&r, &PacketSet::empty()) - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn cantor_ergodic_class_is_a_random_shift_register() {
    for level in 3..=5 {
        let body = parse_program("dup ; (p0! +[0.5] p1!)").unwrap();
        let starts = [
            PacketSet::singleton("(0)".parse().unwrap()),
            PacketSet::singleton("(1)".parse().unwrap()),
        ];
        let chain = build_chain_from(&body, &starts, level, 10_000).unwrap();
        let classes = chain.bottom_classes();
        assert_eq!(classes.len(), 1);
        let class = &classes[0];
        assert_eq!(class.len(), 1 << level);
        for &i in class {
            let s = chain.state(i);
            assert_eq!((s.len(), s.max_len()), (1, level));
            let h = *s.iter().next().unwrap();
            for &(j, p) in chain.transitions(i) {
                let t = *chain.state(j).iter().next().unwrap();
                assert_eq!(p, 0.5);
                assert_eq!(&t.entries()[1..], &h.entries()[..level - 1]);
            }
            // uniform is stationary: every column of the class sums to one
            let inflow: f64 = class.iter().map(|&k| chain.probability(k, i)).sum();
            assert!((inflow - 1.0).abs() <= 1e-12);
        }
    }
}
