//! Randomised invariants over generated games.

use proptest::prelude::*;
use ssg::bvi::{solve_bvi, BviConfig};
use ssg::generators::{gen_random, RandomGameParams};
use ssg::mathprog::{emit_native, encode_hop, parse_native, verify_solution};
use ssg::oracle::{exact_solve, is_bellman_fixpoint};
use ssg::si::{solve_si, SiConfig};
use ssg::topological::{topo_solve, SubSolver, TopoConfig};
use ssg::{parse_game, serialize_game, StochasticGame};

fn game() -> impl Strategy<Value = StochasticGame> {
    (any::<u64>(), 2usize..=5, 1usize..=3, 1usize..=3, 0.0f64..=1.0).prop_map(|(seed, n, acts, branching, min_frac)| {
        let params = RandomGameParams {
            n_states: n,
            max_actions: acts,
            max_branching: branching,
            minimizer_fraction: min_frac,
            ..RandomGameParams::default()
        };
        gen_random(seed, &params)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_format_round_trips(g in game()) {
        let text = serialize_game(&g);
        let back = parse_game(&text).unwrap();
        prop_assert_eq!(serialize_game(&back), text);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn bvi_brackets_oracle(g in game()) {
        let exact = exact_solve(&g).unwrap();
        prop_assert!(exact.bellman_consistent);
        prop_assert_eq!(&exact.values, &exact.min_max_values);
        let r = solve_bvi(&g, &BviConfig::default().with_eps(1e-8));
        let upper = r.upper.unwrap();
        for (s, v) in exact.values_f64().into_iter().enumerate() {
            prop_assert!(r.values[s] <= v + 1e-12 && v <= upper[s] + 1e-12, "state {}", s);
        }
    }

    #[test]
    fn exact_solvers_agree(g in game()) {
        let exact = exact_solve(&g).unwrap().values;
        prop_assert!(is_bellman_fixpoint(&g, &exact));
        let si = solve_si(&g, &SiConfig { exact_rational: true, ..SiConfig::default() }).unwrap();
        prop_assert_eq!(si.exact_values.as_ref(), Some(&exact));
        let topo = topo_solve(&g, &TopoConfig::new(SubSolver::Si)).unwrap();
        prop_assert_eq!(topo.exact_values.as_ref(), Some(&exact));
    }

    #[test]
    fn program_round_trips_and_accepts_values(g in game()) {
        let prog = encode_hop(&g).unwrap();
        let text = emit_native(&prog);
        prop_assert_eq!(emit_native(&parse_native(&text).unwrap()), text);
        let values = exact_solve(&g).unwrap().values_f64();
        let report = verify_solution(&prog, &values, 1e-9);
        prop_assert!(report.pass, "{}", report);
    }

    #[test]
    fn same_seed_same_game(seed in any::<u64>()) {
        let params = RandomGameParams::default();
        prop_assert_eq!(gen_random(seed, &params), gen_random(seed, &params));
    }
}
