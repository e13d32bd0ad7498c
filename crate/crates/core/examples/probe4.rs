// dev probe: sharded n=4 sweep timing
use bblab::catalog::{sweep, SweepConfig};
use bblab::enumerate::Shard;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let index: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let total: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let cap: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10000);
    let t = Instant::now();
    let partial = sweep(&SweepConfig {
        n: 4,
        cap,
        canonical: true,
        shard: Shard::new(index, total).unwrap(),
        progress_every: None,
    });
    let dt = t.elapsed();
    eprintln!(
        "shard {index}/{total} cap={cap}: {:?} sim={} halt={} capx={} proofs={} unproven={}",
        dt,
        partial.stats.simulated,
        partial.stats.halted,
        partial.stats.cap_exceeded,
        partial.stats.nonhalt_proofs,
        partial.stats.cap_exceeded - partial.stats.nonhalt_proofs,
    );
    println!("{}", partial.to_json());
}
