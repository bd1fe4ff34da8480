//! Build a circuit in code, print it as a netlist, parse it back and check
//! that both versions compute the same truth table.
//!
//!     cargo run --example netlist

use ibsat::circuit::{parse_netlist, NetlistBuilder};
use ibsat::cnf::tseitin_encode;

fn main() {
    // 2-bit adder: (a1 a0) + (b1 b0)
    let mut b = NetlistBuilder::new();
    let (a0, a1) = (b.input("a0"), b.input("a1"));
    let (b0, b1) = (b.input("b0"), b.input("b1"));
    let s0 = b.xor(a0, b0);
    let c0 = b.and(a0, b0);
    let t = b.xor(a1, b1);
    let s1 = b.xor(t, c0);
    let g = b.and(a1, b1);
    let p = b.and(t, c0);
    let c1 = b.or(g, p);
    for s in [s0, s1, c1] {
        b.output(s);
    }
    let adder = b.finish().expect("well-formed circuit");

    let text = adder.to_text();
    print!("{text}");
    let parsed = parse_netlist(&text).expect("printer output parses");

    for x in 0..16u32 {
        let bits: Vec<bool> = (0..4).map(|i| x >> i & 1 == 1).collect();
        let out = adder.evaluate(&bits).unwrap();
        assert_eq!(out, parsed.evaluate(&bits).unwrap());
        let sum = out.iter().enumerate().map(|(i, &v)| (v as u32) << i).sum::<u32>();
        assert_eq!(sum, (x & 3) + (x >> 2));
    }
    println!("# truth table checked for all 16 inputs");

    let f = tseitin_encode(&adder);
    println!("# {} variables, {} clauses after encoding", f.num_vars(), f.num_clauses());

    // a malformed netlist reports where it went wrong
    let err = parse_netlist("INPUT(a)\nOUTPUT(y)\ny = AND(a)\n").unwrap_err();
    println!("# parse error: {err}");
}
