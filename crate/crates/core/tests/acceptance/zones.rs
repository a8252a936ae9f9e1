use navmine::action::{compute_zones, zones_containing};

use crate::{ensure, Outcome};

const EXPECTED: [(f64, f64); 5] = [(0.0, 0.45), (0.125, 0.575), (0.25, 0.70), (0.375, 0.825), (0.55, 1.0)];

pub fn check() -> Outcome {
    let zones = compute_zones();
    let got: Vec<(u8, f64, f64)> = zones.iter().map(|z| (z.index, z.lo, z.hi)).collect();
    let want: Vec<(u8, f64, f64)> = EXPECTED.iter().enumerate().map(|(i, &(lo, hi))| (i as u8 + 1, lo, hi)).collect();
    ensure!(got == want, "zones {got:?}, expected {want:?}");

    const N: usize = 10_000;
    for i in 0..=N {
        let y = i as f64 / N as f64;
        let oracle: Vec<u8> = (1u8..)
            .zip(EXPECTED)
            .filter(|&(_, (lo, hi))| lo <= y && y <= hi)
            .map(|(k, _)| k)
            .collect();
        ensure!(!oracle.is_empty(), "y={y} is covered by no zone");
        let got: Vec<u8> = zones_containing(y).iter().map(|z| z.index).collect();
        ensure!(got == oracle, "y={y}: zones {got:?}, oracle {oracle:?}");
    }
    let mid: Vec<u8> = zones_containing(0.5).iter().map(|z| z.index).collect();
    ensure!(mid == vec![2, 3, 4], "y=0.5 falls in {mid:?}");
    Ok(format!("constants exact, {} sweep points covered, y=0.5 -> {mid:?}", N + 1))
}
