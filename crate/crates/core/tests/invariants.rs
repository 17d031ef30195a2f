//! Property tests of the process invariants across graph families.

use lsalloc::allocator::{allocate_ball, draw_birthplace, is_local_minimum};
use lsalloc::analysis::{local_upper_bound, lower_bound_certificate};
use lsalloc::coupling::{birth_sequence, coupled_lipschitz, coupled_majorization, coupled_removal};
use lsalloc::graphs::*;
use lsalloc::{LoadVector, RandomSource, TieRule, Vertex};
use proptest::prelude::*;

fn graph(kind: u8, size: usize, seed: u64) -> Graph {
    match kind % 7 {
        0 => build_cycle(3 + size).unwrap(),
        1 => build_grid(3 + size % 5, 2).unwrap(),
        2 => build_hypercube(1 + size % 7).unwrap(),
        3 => build_random_regular(8 + 2 * size, 3, seed).unwrap(),
        4 => build_clique_cycle(4 * (3 + size % 6), 5).unwrap(),
        5 => build_regular_tree_graph(3, 1 + size % 4).unwrap().0,
        _ => build_erdos_renyi(10 + size, 0.4, seed).unwrap(),
    }
}

fn tie_rule(which: u8, g: &Graph, rs: &RandomSource) -> TieRule {
    match which % 3 {
        0 => TieRule::UniformRandom,
        1 => TieRule::random_fixed(g, rs),
        _ => TieRule::toward_target(g, 0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_placement_is_a_smooth_local_minimum(
        kind: u8, size in 0usize..40, seed: u64, tie: u8, extra in 0u64..3,
    ) {
        let g = graph(kind, size, seed);
        let rs = RandomSource::new(seed);
        let tr = tie_rule(tie, &g, &rs);
        let mut lv = LoadVector::zeros(g.n());
        let m = g.n() as u64 * (1 + extra);
        for ball in 1..=m {
            let birth = draw_birthplace(&rs, ball, g.n());
            let before = lv.clone();
            let t = allocate_ball(&g, &mut lv, birth, &tr, &rs, ball);
            prop_assert!(is_local_minimum(&g, &before, t.final_vertex));
            prop_assert!(t.path.windows(2).all(|w| before.get(w[1]) < before.get(w[0]) && g.has_edge(w[0], w[1])));
            prop_assert!(t.probes <= g.max_degree() * t.path.len());
            prop_assert!(lv.local_smoothness(&g, t.final_vertex) <= 1);
        }
        prop_assert_eq!(lv.total(), m);
        prop_assert!(lv.smoothness(&g) <= 1);
    }

    #[test]
    fn couplings_hold(kind: u8, size in 0usize..30, seed: u64, fixed: bool, pick: u64, u: u32) {
        let g = graph(kind, size, seed);
        let n = g.n();
        let rs = RandomSource::new(seed ^ 0x5eed);
        let tr = if fixed { TieRule::random_fixed(&g, &rs) } else { TieRule::UniformRandom };
        let births = birth_sequence(&rs, n, n);
        let i = 1 + (pick % n as u64) as usize;
        let lip = coupled_lipschitz(&g, &births, i, u % n as Vertex, &tr, &rs).unwrap();
        prop_assert!(lip.l1_distance == 0 || lip.l1_distance == 2);
        prop_assert!(lip.all_steps_ok());
        let rem = coupled_removal(&g, &births, i, &tr, &rs).unwrap();
        prop_assert_eq!(rem.l1_distance, 1);
        prop_assert!(rem.second_below_first() && rem.all_steps_ok());
        prop_assert!(coupled_majorization(&g, n as u64, &tr, &rs).holds);
    }

    #[test]
    fn certificates_hold(kind: u8, size in 0usize..30, seed: u64, v: u32, r in 1usize..6) {
        let g = graph(kind, size, seed);
        let rs = RandomSource::new(seed);
        let run = lsalloc::allocator::run_local_search(&g, g.n() as u64, &TieRule::UniformRandom, &rs, false);
        let top = (0..g.n()).max_by_key(|&x| run.stats.birth_counts[x]).unwrap() as Vertex;
        let low = lower_bound_certificate(&g, &run.stats.birth_counts, &run.loads, &VertexSet::singleton(top)).unwrap();
        prop_assert!(low.inequality_holds && low.recheck());
        let up = local_upper_bound(&g, &run.loads, v % g.n() as Vertex, r).unwrap();
        prop_assert!(up.inequality_holds && up.recheck());
    }

    #[test]
    fn edge_lists_round_trip(kind: u8, size in 0usize..30, seed: u64) {
        let g = graph(kind, size, seed);
        let back = parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
        prop_assert_eq!(back.tag(), g.tag());
    }
}
