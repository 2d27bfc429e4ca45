//! Runs one verification suite and prints its JSON report.
//!
//! `cargo run --release --example verification_report -- bundle 42`

use slicebundle::io::to_json;
use slicebundle::verify::{run_suite, Fixtures, Suite};

fn main() -> slicebundle::Result<()> {
    let mut args = std::env::args().skip(1);
    let suite: Suite = args.next().as_deref().unwrap_or("core").parse()?;
    let seed = args.next().map_or(Ok(42), |s| s.parse()).map_err(|e| slicebundle::Error::Schema(format!("seed: {e}")))?;
    let checks = run_suite(suite, seed, &Fixtures::builtin())?;
    println!("{}", to_json(&checks));
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(())
}
