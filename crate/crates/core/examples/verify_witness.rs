// dev probe: verify specific machines with the plain simulator
use bblab::machine::decode_name;
use bblab::sim::run;

fn main() {
    for name in [
        "(7, 0, 11, 1, 15, 2, 18, 3, 20, 5, 0, 6, 21, 7, 3)", // claimed ones=10 max: 83 steps
        "(7, 0, 11, 1, 14, 2, 21, 3, 5, 4, 3, 6, 12, 7, 21)", // claimed ones=10 min: 29 steps
        "(6, 0, 11, 1, 15, 2, 17, 4, 21, 6, 6, 7, 3)",        // claimed ones=7 min: 11 steps
        "(7, 0, 11, 1, 14, 2, 15, 3, 5, 5, 18, 6, 10, 7, 3)", // claimed ones=7 max: 82 steps
        "(7, 0, 11, 1, 15, 2, 21, 3, 8, 5, 18, 6, 5, 7, 3)",  // claimed ones=8 max: 96 steps
        "(3, 0, 11, 2, 6, 3, 3)",                              // claimed ones=2 max: 5 steps
        "(3, 0, 11, 1, 3, 2, 3)",                              // claimed ones=3 min: 4 steps
        "(5, 0, 11, 1, 12, 2, 3, 4, 17, 5, 1)",               // claimed ones=5 max: 21 steps
    ] {
        let m = decode_name(name).unwrap();
        let out = run(&m, 100000);
        println!("{name} -> {out:?} (n_states {})", m.n_states());
    }
}
