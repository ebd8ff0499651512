//! One replication of the reference scenario, summarized on stdout.

use hexflow::config::{KtMode, ScenarioConfig};
use hexflow::sim::run;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::reference();
    if let Some(mode) = std::env::args().nth(1) {
        cfg.kt_mode = mode.parse::<KtMode>()?;
    }
    let started = std::time::Instant::now();
    let result = run(&cfg, 0)?;
    let holds: u32 = result.aircraft.iter().map(|a| a.hold_count).sum();
    let last = result.series.last().expect("series has a final row");
    println!("kt_mode        {}", cfg.kt_mode);
    println!("aircraft       {}", result.aircraft.len());
    println!("mean travel    {:.1} s", result.mean_travel_time().unwrap_or(0.0));
    println!("holds          {holds}");
    println!("events         {}", result.events.len());
    println!("end time       {} s", result.end_time);
    println!("final entropy  {:.3}", last.total_entropy);
    println!("wall clock     {:.2?}", started.elapsed());
    Ok(())
}
