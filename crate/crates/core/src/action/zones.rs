//! Fixed, overlapping vertical zones used for zoomed refinement views.

use serde::{Deserialize, Serialize};

use crate::geometry::BBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    /// 1-based, top to bottom.
    pub index: u8,
    pub lo: f64,
    pub hi: f64,
}

const BOUNDS: [(f64, f64); 5] = [(0.0, 0.45), (0.125, 0.575), (0.25, 0.70), (0.375, 0.825), (0.55, 1.0)];

pub fn compute_zones() -> Vec<Zone> {
    BOUNDS
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| Zone { index: i as u8 + 1, lo, hi })
        .collect()
}

impl Zone {
    pub fn contains(&self, y: f64) -> bool {
        y >= self.lo && y <= self.hi
    }

    /// Full-width band of the screen covered by this zone.
    pub fn bbox(&self) -> BBox {
        BBox::new(0.0, self.lo, 1.0, self.hi).expect("zone bounds are valid")
    }
}

/// Zones whose closed interval contains `y`.
pub fn zones_containing(y: f64) -> Vec<Zone> {
    compute_zones().into_iter().filter(|z| z.contains(y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zone_table() {
        let z = compute_zones();
        assert_eq!(z.len(), 5);
        assert_eq!((z[0].lo, z[0].hi), (0.0, 0.45));
        assert_eq!((z[4].lo, z[4].hi), (0.55, 1.0));
        assert_eq!(zones_containing(0.0).iter().map(|z| z.index).collect::<Vec<_>>(), vec![1]);
        assert_eq!(zones_containing(0.5).iter().map(|z| z.index).collect::<Vec<_>>(), vec![2, 3, 4]);
        assert_eq!(zones_containing(1.0).iter().map(|z| z.index).collect::<Vec<_>>(), vec![5]);
    }

    #[test]
    fn zones_cover_and_overlap() {
        for k in 0..=10_000 {
            let y = k as f64 / 10_000.0;
            assert!(!zones_containing(y).is_empty(), "y={y} uncovered");
        }
        let z = compute_zones();
        for w in z.windows(2) {
            assert!(w[1].lo < w[0].hi);
        }
    }
}
