//! Drives the default scanning layout with simulated time and two presses.

use easyvoice::scankb::{load_layout, press, tick, ScanConfig, ScanState, DEFAULT_LAYOUT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layout = load_layout(DEFAULT_LAYOUT)?;
    let config = ScanConfig::new(500, 2)?;
    let mut state = ScanState::new();

    println!("layout has {} keys", layout.leaf_count());
    let show = |s: &ScanState| {
        let label = s.focused(&layout).map(|n| n.label().to_string()).unwrap_or_default();
        println!("  path {:?} cursor {} -> {label}", s.path, s.cursor);
    };

    show(&state);
    for step in 0..3 {
        state = tick(&layout, &state, &config, config.scan_period_ms());
        print!("after {} ms:", (step + 1) * config.scan_period_ms());
        show(&state);
    }

    let (entered, action) = press(&layout, &state);
    println!("press enters a group: action {action:?}");
    show(&entered);

    let (back, action) = press(&layout, &entered);
    println!("second press selects: action {action:?}");
    show(&back);

    let group_len = back.level(&layout).len() as u64;
    let idle = group_len * config.max_cycles() as u64 * config.scan_period_ms();
    let popped = tick(&layout, &back, &config, idle);
    println!("left alone for {idle} ms, scanning returns to the parent:");
    show(&popped);
    Ok(())
}
