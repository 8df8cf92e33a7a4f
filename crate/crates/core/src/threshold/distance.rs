//! Exact Euclidean distance transform of a letter mask.
//!
//! Distances are measured from each foreground pixel to the nearest background
//! pixel, where the image is surrounded by one ring of virtual background. The
//! transform works on integer squared distances (a column scan followed by a
//! lower envelope of parabolas per row), so equal distances compare exactly.

use super::BinaryMask;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMap {
    width: u32,
    height: u32,
    squared: Vec<u64>,
}

impl DistanceMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Squared distances, row-major. Integers, so ties are exact.
    pub fn squared(&self) -> &[u64] {
        &self.squared
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        (self.squared[y as usize * self.width as usize + x as usize] as f64).sqrt()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.squared.iter().map(|&d| (d as f64).sqrt()).collect()
    }

    pub fn max_squared(&self) -> u64 {
        self.squared.iter().copied().max().unwrap_or(0)
    }
}

/// A rational number with positive denominator.
#[derive(Clone, Copy)]
struct Ratio {
    num: i64,
    den: i64,
}

impl Ratio {
    fn le(self, other: Ratio) -> bool {
        self.num * other.den <= other.num * self.den
    }

    fn lt_int(self, q: i64) -> bool {
        self.num < q * self.den
    }
}

/// 1-D squared distance transform of sampled function `f` (all finite):
/// `out[q] = min_p (q - p)^2 + f[p]`.
fn envelope_1d(f: &[i64], out: &mut [i64], sites: &mut Vec<usize>, bounds: &mut Vec<Ratio>) {
    let n = f.len();
    sites.clear();
    bounds.clear();
    sites.push(0);
    // bounds[k] is where parabola sites[k] starts to win; bounds[0] is unused (-inf)
    bounds.push(Ratio { num: 0, den: 1 });

    let meet = |p: usize, q: usize| {
        let (p, q) = (p as i64, q as i64);
        Ratio {
            num: (f[q as usize] + q * q) - (f[p as usize] + p * p),
            den: 2 * (q - p),
        }
    };

    for q in 1..n {
        let mut s = meet(sites[sites.len() - 1], q);
        while sites.len() > 1 && s.le(bounds[bounds.len() - 1]) {
            sites.pop();
            bounds.pop();
            s = meet(sites[sites.len() - 1], q);
        }
        sites.push(q);
        bounds.push(s);
    }

    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < sites.len() && bounds[k + 1].lt_int(q as i64) {
            k += 1;
        }
        let d = q as i64 - sites[k] as i64;
        *o = d * d + f[sites[k]];
    }
}

pub fn distance_map(mask: &BinaryMask) -> DistanceMap {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let (pw, ph) = (w + 2, h + 2);
    let fg = |x: usize, y: usize| -> bool {
        // padded coordinates; the outer ring is background
        x >= 1 && y >= 1 && x <= w && y <= h && mask.get(x as u32 - 1, y as u32 - 1)
    };

    // Column pass: squared vertical distance to nearest background in the column.
    let mut cols = vec![0i64; pw * ph];
    for x in 0..pw {
        let mut last_bg: Option<usize> = None;
        for y in 0..ph {
            if !fg(x, y) {
                last_bg = Some(y);
                cols[y * pw + x] = 0;
            } else {
                // ring guarantees a background above
                cols[y * pw + x] = (y - last_bg.expect("ring row")) as i64;
            }
        }
        let mut next_bg: Option<usize> = None;
        for y in (0..ph).rev() {
            if !fg(x, y) {
                next_bg = Some(y);
            } else {
                let below = (next_bg.expect("ring row") - y) as i64;
                let v = &mut cols[y * pw + x];
                *v = (*v).min(below);
            }
        }
    }
    for v in cols.iter_mut() {
        *v *= *v;
    }

    // Row pass.
    let mut squared = vec![0u64; w * h];
    let mut row_out = vec![0i64; pw];
    let mut sites = Vec::with_capacity(pw);
    let mut bounds = Vec::with_capacity(pw);
    for y in 1..=h {
        envelope_1d(
            &cols[y * pw..(y + 1) * pw],
            &mut row_out,
            &mut sites,
            &mut bounds,
        );
        for x in 1..=w {
            squared[(y - 1) * w + (x - 1)] = row_out[x] as u64;
        }
    }

    DistanceMap {
        width: mask.width(),
        height: mask.height(),
        squared,
    }
}
