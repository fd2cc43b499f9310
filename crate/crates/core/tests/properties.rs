mod common;

use std::collections::HashMap;

use common::{assignment, eval_pos, eval_signal, independent_check, mffc_by_trial_deletion, random_network};
use gatefuzz::io::{read_network, write_network};
use gatefuzz::{FileFormat, Network, NetworkKind, NodeId, Signal};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn network() -> impl Strategy<Value = Network> {
    (0usize..3, 1usize..=6, 1usize..=30, any::<u64>()).prop_map(|(k, pis, gates, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_network(NetworkKind::ALL[k], pis, gates, &mut rng)
    })
}

fn tables(net: &Network) -> Vec<Vec<bool>> {
    (0..1usize << net.num_pis()).map(|p| eval_pos(net, p, &HashMap::new())).collect()
}

/// Tables of `net` with `node` replaced by `signal`, evaluated per pattern.
fn forced_tables(net: &Network, node: NodeId, signal: Signal) -> Vec<Vec<bool>> {
    (0..1usize << net.num_pis())
        .map(|p| {
            let v = eval_signal(net, signal, &assignment(net, p), &HashMap::new());
            eval_pos(net, p, &HashMap::from([(node, v)]))
        })
        .collect()
}

fn pick(net: &Network, i: usize) -> Option<NodeId> {
    let gates: Vec<NodeId> = net.gates().collect();
    (!gates.is_empty()).then(|| gates[i % gates.len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn verilog_round_trip_keeps_function(net in network()) {
        let bytes = write_network(&net, FileFormat::Verilog).unwrap();
        let back = read_network(&bytes, FileFormat::Verilog).unwrap();
        prop_assert_eq!(tables(&back), tables(&net));
        prop_assert_eq!(write_network(&back, FileFormat::Verilog).unwrap(), bytes);
    }

    #[test]
    fn aiger_round_trip_keeps_function(net in network(), binary in any::<bool>()) {
        let format = if binary { FileFormat::AigerBinary } else { FileFormat::AigerAscii };
        let aig = net.lower_to_aig();
        prop_assert_eq!(tables(&aig), tables(&net));
        let back = read_network(&write_network(&aig, format).unwrap(), format).unwrap();
        prop_assert_eq!(tables(&back), tables(&net));
    }

    #[test]
    fn constant_substitution_matches_forcing(net in network(), i in any::<usize>()) {
        let Some(g) = pick(&net, i) else { return Ok(()) };
        let mut reduced = net.clone();
        reduced.substitute_constant_zero(g).unwrap();
        reduced.validate().unwrap();
        prop_assert_eq!(tables(&reduced), forced_tables(&net, g, Signal::FALSE));
    }

    #[test]
    fn signal_substitution_matches_forcing(net in network(), i in any::<usize>(), j in any::<usize>(), c in any::<bool>()) {
        let Some(g) = pick(&net, i) else { return Ok(()) };
        let tfo = net.compute_tfo(g);
        let candidates: Vec<NodeId> = net.pis().iter().copied().chain(net.gates()).filter(|&n| n != g && !tfo.contains(&n)).collect();
        let s = Signal::new(candidates[j % candidates.len()], c);
        let mut reduced = net.clone();
        reduced.substitute_with_signal(g, s).unwrap();
        reduced.validate().unwrap();
        prop_assert_eq!(tables(&reduced), forced_tables(&net, g, s));
    }

    #[test]
    fn mffc_matches_trial_deletion(net in network(), i in any::<usize>()) {
        let Some(g) = pick(&net, i) else { return Ok(()) };
        prop_assert_eq!(net.compute_mffc(g).unwrap(), mffc_by_trial_deletion(&net, g));
    }

    #[test]
    fn cleanup_leaves_a_well_formed_network(net in network()) {
        let clean = net.cleanup_dangling();
        prop_assert!(independent_check(&clean).is_ok(), "{:?}", independent_check(&clean));
        prop_assert_eq!(tables(&clean), tables(&net));
    }
}
