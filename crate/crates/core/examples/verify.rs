//! Run the acceptance battery and print one line per criterion.

use fibsnake::verify::{run_suite, Suite, VerifyOptions};

fn main() -> fibsnake::Result<()> {
    let suite: Suite = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "all".into())
        .parse()?;
    let opts = VerifyOptions::default();
    for report in run_suite(suite, &opts) {
        println!("{}", report.line());
        for c in report.checks.iter().filter(|c| !c.passed) {
            println!(
                "    failed: {} ({:.3e} > {:.1e})",
                c.name, c.measured, c.tolerance
            );
        }
    }
    Ok(())
}
