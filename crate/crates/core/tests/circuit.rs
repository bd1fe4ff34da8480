mod common;

use common::*;
use ibsat::circuit::{parse_netlist, CircuitError, CircuitNetlist, Gate, GateKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn shipped_ciphers_match_direct_simulators() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in SHIPPED_CIPHERS {
        let (spec, circuit, _) = load_cipher(name);
        assert_eq!(circuit.num_inputs(), spec.key_bits(), "{name}");
        for _ in 0..1000 {
            let key: Vec<bool> = (0..circuit.num_inputs()).map(|_| rng.gen()).collect();
            assert_eq!(circuit.evaluate(&key).unwrap(), simulate(&spec, &key), "{name} key {key:?}");
        }
    }
}

#[test]
fn shipped_cipher_dimensions() {
    let dims: Vec<(usize, usize)> = SHIPPED_CIPHERS
        .iter()
        .map(|name| {
            let (_, c, _) = load_cipher(name);
            (c.num_inputs(), c.num_outputs())
        })
        .collect();
    assert_eq!(dims, vec![(12, 16), (24, 48), (21, 20), (8, 8), (16, 16), (12, 12)]);
}

#[test]
fn geffe_streams_have_full_period() {
    // each register alone: a key with only that register set repeats with period 2^L - 1
    let (spec, _, _) = load_cipher("geffe_7_8_9");
    let ibsat::circuit::CipherSpec::Geffe(g) = spec else { unreachable!() };
    for r in &g.registers {
        let mut state: Vec<bool> = vec![false; r.length];
        state[0] = true;
        let start = state.clone();
        let mut period = 0;
        loop {
            let bit = r.taps.iter().fold(false, |a, &p| a ^ state[p]);
            state.remove(0);
            state.push(bit);
            period += 1;
            if state == start {
                break;
            }
        }
        assert_eq!(period, (1 << r.length) - 1, "register of length {}", r.length);
    }
}

#[test]
fn corpus_netlists_compute_their_functions() {
    for (name, c) in netlist_corpus() {
        let n = c.num_inputs();
        for v in 0..1u64 << n {
            let x = bits_of(v, n);
            let got = c.evaluate(&x).unwrap();
            let want: Vec<bool> = match name.as_str() {
                "full_adder" => {
                    let s = x.iter().filter(|&&b| b).count();
                    vec![s & 1 == 1, s >= 2]
                }
                "adder4" => bits_of((v & 15) + (v >> 4), 5),
                "mux4" => vec![x[2 + (v & 3) as usize]],
                "majority5" => {
                    let s = x.iter().filter(|&&b| b).count();
                    vec![s >= 3, s & 1 == 1]
                }
                "keyed_mix" => {
                    let k = &x;
                    let a0 = k[0] & k[5];
                    let a1 = k[1] & k[6];
                    let a2 = k[2] | k[7];
                    let a3 = k[3] & k[8];
                    let a4 = k[4] | k[9];
                    let y0 = a0 ^ a1;
                    let y1 = a2 ^ k[0] ^ !k[9];
                    let y2 = (a3 & a4) ^ k[1];
                    let y3 = !(y0 ^ y2);
                    let y4 = (a1 | a3) ^ k[4];
                    let y5 = (y1 & y4) ^ k[5];
                    vec![y0, y1, y2, y3, y4, y5]
                }
                other => panic!("no reference for {other}"),
            };
            assert_eq!(got, want, "{name} at {v:#b}");
        }
    }
}

#[test]
fn parse_error_positions() {
    match parse_netlist("INPUT(a)\nOUTPUT(y)\ny = NAND(a, a)\n") {
        Err(CircuitError::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 5)),
        other => panic!("{other:?}"),
    }
    match parse_netlist("INPUT(a)\nOUTPUT(y)\ny = AND(a, b)\n") {
        Err(CircuitError::UndefinedWire { name, line }) => assert_eq!((name.as_str(), line), ("b", Some(3))),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_netlist("INPUT(a)\nOUTPUT(y)\ny = AND(a, z)\nz = AND(y, a)\n"),
        Err(CircuitError::Cycle { .. })
    ));
}

fn random_circuit(seed: u64, n: usize, gates: usize, m: usize) -> CircuitNetlist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut wires = inputs.clone();
    let mut list = Vec::new();
    for g in 0..gates {
        let kind = [GateKind::And, GateKind::Or, GateKind::Xor, GateKind::Not][rng.gen_range(0..4)];
        let pick = |rng: &mut ChaCha8Rng| wires[rng.gen_range(0..wires.len())].clone();
        let operands = if kind == GateKind::Not { vec![pick(&mut rng)] } else { vec![pick(&mut rng), pick(&mut rng)] };
        let name = format!("g{g}");
        list.push(Gate { output: name.clone(), kind, operands });
        wires.push(name);
    }
    let outputs = (0..m).map(|_| wires[rng.gen_range(n..wires.len())].clone()).collect();
    CircuitNetlist::new(inputs, outputs, list).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printer_round_trips(seed in any::<u64>(), n in 1usize..6, gates in 1usize..20, m in 1usize..4) {
        let c = random_circuit(seed, n, gates, m);
        let back = parse_netlist(&c.to_text()).unwrap();
        for v in 0..1u64 << n {
            let x = bits_of(v, n);
            prop_assert_eq!(back.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
        }
    }
}
