//! Times DMV against PECMV on random 3-D instances.
//!
//! cargo run --release --example bench_updates -- 200

use cooploc::bench::run_bench;
use cooploc::fusion::FusionConfig;
use cooploc::FusionMethod;

fn main() -> cooploc::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let report = run_bench(n, 7, &FusionConfig::default())?;
    print!("{report}");
    if let (Some(d), Some(p)) = (report.get(FusionMethod::Dmv), report.get(FusionMethod::Pecmv)) {
        println!("pecmv / dmv: {:.1}x", p.mean_ms / d.mean_ms);
    }
    Ok(())
}
