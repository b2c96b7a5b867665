use isolab::acceptance::{run_all, CRITERIA};

fn main() {
    // libtest flags such as --nocapture or filters are accepted and ignored
    let results = run_all();
    assert_eq!(results.len(), CRITERIA);
    for r in &results {
        println!("{}", r.line());
        for (k, v) in &r.metrics {
            println!("    {k} = {v:.6e}");
        }
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.ok()).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: {CRITERIA}/{CRITERIA} criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
