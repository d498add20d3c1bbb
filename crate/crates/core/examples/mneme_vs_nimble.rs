//! Compare intensity-aware page placement against random placement with
//! promotion on a four-tier hybrid memory.

use pcmkit::device::DeviceConfig;
use pcmkit::mneme::{simulate_hybrid, MnemeConfig, PagePolicy, PredictorKind, TierFrames};
use pcmkit::trace::{generate_page_trace, PageTraceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (trace, _) = generate_page_trace(&PageTraceSpec { seed: 11, ..PageTraceSpec::default() })?;
    let dev = DeviceConfig::default();
    let frames = TierFrames { dram_near: 16, dram_far: 16, pcm_near: 32, pcm_far: 128 };
    for predictor in [PredictorKind::Site, PredictorKind::Clairvoyant] {
        for policy in [PagePolicy::Mneme, PagePolicy::Nimble] {
            let cfg = MnemeConfig { frames: Some(frames), predictor, policy, ..MnemeConfig::default() };
            let r = simulate_hybrid(&trace, &cfg, &dev, 11)?;
            println!(
                "{predictor:?}/{:<6} latency {:>7} migrations {:>3} energy {:>10.0} max aging {:.3e}",
                r.policy, r.total_latency, r.migrations, r.total_energy, r.aging.max
            );
            for (tier, n) in &r.access_histogram {
                print!("  {tier}={n}");
            }
            println!();
        }
    }
    Ok(())
}
