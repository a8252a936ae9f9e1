//! sRGB to CIELAB conversion and CIE76 color difference.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

// D65 reference white, 2 degree observer.
const WHITE_X: f64 = 0.95047;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.08883;

fn srgb_to_linear(c: u8) -> f64 {
    let v = c as f64 / 255.0;
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

pub fn rgb_to_lab(r: u8, g: u8, b: u8) -> LabColor {
    let (r, g, b) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

    let fx = lab_f(x / WHITE_X);
    let fy = lab_f(y / WHITE_Y);
    let fz = lab_f(z / WHITE_Z);
    LabColor {
        l: (116.0 * fy - 16.0).clamp(0.0, 100.0),
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// CIE76: Euclidean distance in Lab.
pub fn delta_e(c1: LabColor, c2: LabColor) -> f64 {
    ((c1.l - c2.l).powi(2) + (c1.a - c2.a).powi(2) + (c1.b - c2.b).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn white_and_black() {
        let w = rgb_to_lab(255, 255, 255);
        assert!((w.l - 100.0).abs() < 1e-3, "{w:?}");
        assert!(w.a.abs() < 1e-2 && w.b.abs() < 1e-2, "{w:?}");
        let k = rgb_to_lab(0, 0, 0);
        assert_eq!(k.l, 0.0);
        assert!(k.a.abs() < 1e-9 && k.b.abs() < 1e-9);
        assert!((delta_e(w, k) - 100.0).abs() < 1e-2);
    }

    #[test]
    fn reference_red() {
        // Published sRGB red: L 53.24, a 80.09, b 67.20.
        let red = rgb_to_lab(255, 0, 0);
        assert!((red.l - 53.24).abs() < 0.05);
        assert!((red.a - 80.09).abs() < 0.1);
        assert!((red.b - 67.20).abs() < 0.1);
    }

    fn arb_lab() -> impl Strategy<Value = LabColor> {
        (0.0..100.0f64, -128.0..128.0f64, -128.0..128.0f64).prop_map(|(l, a, b)| LabColor { l, a, b })
    }

    proptest! {
        #[test]
        fn delta_e_is_metric(x in arb_lab(), y in arb_lab(), z in arb_lab()) {
            prop_assert_eq!(delta_e(x, x), 0.0);
            prop_assert!(delta_e(x, y) >= 0.0);
            prop_assert!((delta_e(x, y) - delta_e(y, x)).abs() < 1e-12);
            prop_assert!(delta_e(x, z) <= delta_e(x, y) + delta_e(y, z) + 1e-9);
        }

        #[test]
        fn conversion_is_pure(r: u8, g: u8, b: u8) {
            let lab = rgb_to_lab(r, g, b);
            prop_assert_eq!(lab, rgb_to_lab(r, g, b));
            prop_assert!((0.0..=100.0).contains(&lab.l));
        }
    }
}
