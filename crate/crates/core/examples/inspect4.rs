// dev probe: derive summary + pp from a stored n=4 partial
use bblab::catalog::{build_pp_table, build_summary, verify_bracket, write_catalog, PartialSummary, PpResult};

fn main() {
    let path = std::env::args().nth(1).unwrap();
    let partial = PartialSummary::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    let summary = build_summary(&partial, 4).unwrap();
    println!("{}", summary.to_text());
    let mut steps: Vec<u64> = summary.records.iter().map(|r| r.outcome.steps()).collect();
    steps.sort();
    println!("step multiset: {steps:?}");
    let entries = build_pp_table(&partial, 12);
    verify_bracket(&partial, &entries).unwrap();
    for e in &entries {
        match &e.result {
            PpResult::Found { pp, min_steps, min_name, max_steps, max_name } => {
                println!("ones={} pp={} min={} ({}) max={} ({})", e.ones, pp, min_steps, min_name, max_steps, max_name)
            }
            PpResult::Unknown => println!("ones={} unknown", e.ones),
        }
    }
    println!("--- catalog tsv ---");
    print!("{}", write_catalog(&summary.records));
}
