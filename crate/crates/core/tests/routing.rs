use qarch_core::circuit::{Circuit, Instruction};
use qarch_core::gate::GateKind;
use qarch_core::sim::outcome_distribution;
use qarch_core::topology::{hub_placement, route, QubitMapping, TopologyGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_circuit(rng: &mut ChaCha8Rng, n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for q in 0..n {
        if rng.random_bool(0.3) {
            c.prepare_one(q);
        }
    }
    for _ in 0..rng.random_range(1..=15) {
        if rng.random_bool(0.5) {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let kind = [GateKind::CNOT, GateKind::CZ, GateKind::SWAP][rng.random_range(0..3)];
            c.push(Instruction::two(kind, a, b));
        } else {
            let kind = [GateKind::H, GateKind::T, GateKind::X][rng.random_range(0..3)];
            c.push(Instruction::single(kind, rng.random_range(0..n)));
        }
    }
    let mut measured: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.7)).collect();
    if measured.is_empty() {
        measured.push(0);
    }
    c.measure(&measured);
    c
}

fn random_placement(rng: &mut ChaCha8Rng, n: usize, g: &TopologyGraph) -> QubitMapping {
    let picked = rand::seq::index::sample(rng, g.n(), n).into_vec();
    QubitMapping::new(picked, g.n()).unwrap()
}

#[test]
fn hundred_vigo_routings_keep_semantics_and_adjacency() {
    let g = TopologyGraph::preset("ibm-vigo-5").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..100 {
        let n = rng.random_range(2..=5);
        let c = random_circuit(&mut rng, n);
        let placement = if case % 2 == 0 {
            hub_placement(&g, n).unwrap()
        } else {
            random_placement(&mut rng, n, &g)
        };
        let (routed, _) = route(&c, &g, &placement).unwrap();
        let layout = routed.layout.clone().unwrap();
        for inst in routed.instructions.iter().filter(|i| i.operands.len() == 2) {
            let (a, b) = (layout[inst.operands[0]], layout[inst.operands[1]]);
            assert!(g.is_adjacent(a, b).unwrap(), "case {case}: {inst} on {a}-{b}");
        }
        let want = outcome_distribution(&c).unwrap();
        let got = outcome_distribution(&routed).unwrap();
        let tv: f64 = 0.5 * want.iter().zip(&got).map(|(x, y)| (x - y).abs()).sum::<f64>();
        assert!(tv < 1e-9, "case {case}: tv {tv}\n{}", c.to_text());
    }
}

#[test]
fn complete_graph_never_needs_swaps() {
    let g = TopologyGraph::preset("ionq-11").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.random_range(2..=6);
        let c = random_circuit(&mut rng, n);
        let (routed, _) = route(&c, &g, &hub_placement(&g, n).unwrap()).unwrap();
        assert_eq!(qarch_core::topology::inserted_swaps(&c, &routed), 0);
    }
}

#[test]
fn shortest_paths_are_shortest() {
    for name in TopologyGraph::PRESET_NAMES {
        let g = TopologyGraph::preset(name).unwrap();
        for a in 0..g.n() {
            // Plain BFS distances as the reference.
            let mut dist = vec![usize::MAX; g.n()];
            dist[a] = 0;
            let mut queue = std::collections::VecDeque::from([a]);
            while let Some(v) = queue.pop_front() {
                for &w in g.neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            for (b, &want) in dist.iter().enumerate() {
                let p = g.shortest_path(a, b).unwrap();
                assert_eq!(p.len() - 1, want, "{name} {a}->{b}");
                assert_eq!(p, g.shortest_path(a, b).unwrap());
                assert!(p.windows(2).all(|w| g.is_adjacent(w[0], w[1]).unwrap()));
            }
        }
    }
}
