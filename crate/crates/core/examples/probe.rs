// dev probe: sweep timings (removed before release if unused)
use bblab::catalog::{build_summary, sweep, SweepConfig};
use bblab::enumerate::Shard;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let cap: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let canonical = args.get(3).map(|s| s == "canon").unwrap_or(false);
    let t = Instant::now();
    let partial = sweep(&SweepConfig {
        n,
        cap,
        canonical,
        shard: Shard::whole(),
        progress_every: Some(200_000_000),
    });
    let dt = t.elapsed();
    eprintln!(
        "n={n} cap={cap} canonical={canonical}: {:?}  sim={} halt={} capx={} proofs={} lambda={} fullk={}",
        dt,
        partial.stats.simulated,
        partial.stats.halted,
        partial.stats.cap_exceeded,
        partial.stats.nonhalt_proofs,
        partial.stats.lambda_skipped,
        partial.stats.total_rule_skipped
    );
    let summary = build_summary(&partial, n).unwrap();
    println!("{}", summary.to_text());
}
