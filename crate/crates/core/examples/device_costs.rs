//! Price single-line writes in the PCM model and compare DRAM segments.

use pcmkit::bits::BitLine;
use pcmkit::device::{access_latency, write_cost, DeviceConfig, Segment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceConfig::default();
    let zeros = BitLine::zeros(512);
    let ones = BitLine::ones(512);
    let half = BitLine::from_fn(512, |i| i % 2 == 0);

    for (name, old, new) in [
        ("zeros -> half", &zeros, &half),
        ("ones -> half", &ones, &half),
        ("half -> half", &half, &half),
        ("ones -> zeros", &ones, &zeros),
    ] {
        let c = write_cost(old, new, &dev.pcm)?;
        println!("{name:<14} latency {:>2}  energy {:>6.1}  set {:>3}  reset {:>3}", c.latency, c.energy, c.n_set, c.n_reset);
    }

    let base = dev.dram.t_access_near;
    for seg in [Segment::Near, Segment::Far] {
        let v = dev.segment.voltage(seg);
        let stress = dev.aging.k * v.powf(dev.aging.gamma) * base as f64;
        println!("dram {seg:?}: latency {} cycles, aging per access {stress:.3e}", access_latency(seg, base, &dev.segment));
    }
    Ok(())
}
