use navmine::geometry::BBox;
use navmine::text::levenshtein;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Outcome};

const ALPHABET: &[char] = &['a', 'b', 'c', 'd', 'é', 'ß', '字', ' '];

/// Full-matrix edit distance over chars.
fn dp_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn random_string(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(0..=12);
    (0..len).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())]).collect()
}

/// Corners as plain numbers so the oracle never touches the library type.
fn random_corners(rng: &mut ChaCha8Rng) -> [f64; 4] {
    loop {
        // Coarse grid values make touching and identical boxes common.
        let mut v = || if rng.random_bool(0.3) { rng.random_range(0..=8) as f64 / 8.0 } else { rng.random::<f64>() };
        let (a, b, c, d) = (v(), v(), v(), v());
        let (x0, x1) = (a.min(b), a.max(b));
        let (y0, y1) = (c.min(d), c.max(d));
        if x0 < x1 && y0 < y1 {
            return [x0, y0, x1, y1];
        }
    }
}

fn area_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let w = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let h = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = w * h;
    let area = |r: [f64; 4]| (r[2] - r[0]) * (r[3] - r[1]);
    inter / (area(a) + area(b) - inter)
}

pub fn check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let (a, b) = (random_string(&mut rng), random_string(&mut rng));
        let (got, want) = (levenshtein(&a, &b), dp_levenshtein(&a, &b));
        ensure!(got == want, "levenshtein({a:?}, {b:?}) = {got}, oracle {want}");
    }
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a, b) = (random_corners(&mut rng), random_corners(&mut rng));
        let ba = BBox::new(a[0], a[1], a[2], a[3]).map_err(|e| e.to_string())?;
        let bb = BBox::new(b[0], b[1], b[2], b[3]).map_err(|e| e.to_string())?;
        let diff = (ba.iou(&bb) - area_iou(a, b)).abs();
        worst = worst.max(diff);
        ensure!(diff <= 1e-9, "iou({a:?}, {b:?}) differs from oracle by {diff}");
    }
    Ok(format!("1000 edit-distance pairs exact, 1000 IoU pairs max error {worst:.1e}"))
}
