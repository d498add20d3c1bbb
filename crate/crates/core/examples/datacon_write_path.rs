//! Walk a few writes through a small DATACON bank and watch the precursor
//! pools, redirections and re-initialization pulses.

use pcmkit::bits::BitLine;
use pcmkit::datacon::{DataconConfig, PcmEngine, Precursor};
use pcmkit::device::DeviceConfig;
use pcmkit::trace::MemoryRequest;

fn pools(e: &PcmEngine) -> String {
    format!("zeros pool {:>2}, ones pool {:>2}, pending {}", e.pool_len(Precursor::AllZeros), e.pool_len(Precursor::AllOnes), e.pending_len())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = DataconConfig { n_lines: 128, n_partitions: 2, check_invariants: true, ..DataconConfig::default() };
    let mut engine = PcmEngine::new(cfg, DeviceConfig::default())?;
    println!("start: {}", pools(&engine));

    let sparse = BitLine::from_fn(512, |i| i % 8 == 0);
    let dense = BitLine::from_fn(512, |i| i % 8 != 0);
    let mut cycle = 0;
    for (logical, payload) in [(0u64, &sparse), (1, &dense), (0, &dense), (2, &sparse)] {
        let w = engine.handle_write(&MemoryRequest::write(cycle, logical * 64, payload.clone()))?;
        println!(
            "cycle {cycle:>3}: write line {logical} ({} ones) latency {} stall {} energy {:>6.1} -> physical {:?}; {}",
            payload.count_ones(),
            w.latency,
            w.stall,
            w.demand_energy,
            engine.translate(logical as usize),
            pools(&engine)
        );
        cycle += 20;
    }

    for p in engine.schedule_reinit(cycle) {
        println!("re-init pulse on partition {} from {} to {}", p.partition, p.start, p.end);
    }
    let r = engine.handle_read(&MemoryRequest::read(cycle, 0))?;
    println!("read line 0 at {cycle}: stall {} latency {}, data matches: {}", r.stall, r.latency, r.data == dense);
    engine.check_invariants()?;
    Ok(())
}
