//! Implementations checked against slow, independent reference computations.

use std::collections::{HashSet, VecDeque};

use proptest::prelude::*;
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use textthresh::components::label_components;
use textthresh::letterloc::detect_letters_cc;
use textthresh::ocr::edit_distance;
use textthresh::raster::{BoundingBox, GrayImage};
use textthresh::threshold::{distance_map, trace_contour, BinaryMask};

fn random_mask(rng: &mut Xoshiro256PlusPlus, max_side: u64) -> BinaryMask {
    let w = 1 + (rng.next_u64() % max_side) as u32;
    let h = 1 + (rng.next_u64() % max_side) as u32;
    // vary density so both sparse and nearly-full masks occur
    let density = rng.next_u64() % 100;
    BinaryMask::from_fn(w, h, |_, _| rng.next_u64() % 100 < density)
}

/// Minimum over every background pixel, with a one-pixel ring of background
/// around the image.
fn brute_force_distance(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut background = Vec::new();
    for y in -1..=h {
        for x in -1..=w {
            let inside = x >= 0 && y >= 0 && x < w && y < h;
            if !inside || !mask.get(x as u32, y as u32) {
                background.push((x, y));
            }
        }
    }
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x as u32, y as u32) {
                out.push(0.0);
                continue;
            }
            let best = background
                .iter()
                .map(|&(bx, by)| (((bx - x).pow(2) + (by - y).pow(2)) as f64).sqrt())
                .fold(f64::INFINITY, f64::min);
            out.push(best);
        }
    }
    out
}

#[test]
fn distance_map_matches_brute_force() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0xD15_7A9CE);
    for _ in 0..200 {
        let mask = random_mask(&mut rng, 32);
        let fast = distance_map(&mask).to_vec();
        let slow = brute_force_distance(&mask);
        for (i, (a, b)) in fast.iter().zip(&slow).enumerate() {
            assert!((a - b).abs() <= 1e-9, "pixel {i}: {a} vs {b}");
        }
    }
}

#[test]
fn distance_map_is_one_lipschitz() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    for _ in 0..100 {
        let mask = random_mask(&mut rng, 24);
        let d = distance_map(&mask);
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                assert_eq!(d.get(x, y) == 0.0, !mask.get(x, y));
                for (dx, dy) in [(1u32, 0u32), (0, 1), (1, 1)] {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < mask.width() && ny < mask.height() {
                        let step = ((dx * dx + dy * dy) as f64).sqrt();
                        assert!((d.get(x, y) - d.get(nx, ny)).abs() <= step + 1e-12);
                    }
                }
            }
        }
    }
}

/// 8-connected flood fill labeling: (area, bbox) per component.
fn flood_components(mask: &BinaryMask) -> Vec<(u64, BoundingBox)> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut seen = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x as u32, y as u32) || seen[(y * w + x) as usize] {
                continue;
            }
            let (mut l, mut t, mut r, mut b) = (x, y, x, y);
            let mut area = 0;
            let mut queue = VecDeque::from([(x, y)]);
            seen[(y * w + x) as usize] = true;
            while let Some((cx, cy)) = queue.pop_front() {
                area += 1;
                l = l.min(cx);
                t = t.min(cy);
                r = r.max(cx);
                b = b.max(cy);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (cx + dx, cy + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let i = (ny * w + nx) as usize;
                        if !seen[i] && mask.get(nx as u32, ny as u32) {
                            seen[i] = true;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
            out.push((
                area,
                BoundingBox::new(l as u32, t as u32, (r - l + 1) as u32, (b - t + 1) as u32),
            ));
        }
    }
    out
}

#[test]
fn labeling_matches_flood_fill() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    for _ in 0..300 {
        let mask = random_mask(&mut rng, 32);
        let labeling = label_components(mask.width(), mask.height(), mask.pixels());
        let mut got: Vec<(u64, BoundingBox)> = labeling
            .components
            .iter()
            .map(|c| (c.area, c.bbox))
            .collect();
        let mut want = flood_components(&mask);
        got.sort_by_key(|&(a, b)| (b, a));
        want.sort_by_key(|&(a, b)| (b, a));
        assert_eq!(got, want);
    }
}

#[test]
fn detector_matches_flood_fill_on_binary_images() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(17);
    let mut checked = 0;
    while checked < 200 {
        let mask = random_mask(&mut rng, 32);
        let ink = mask.count();
        let blank = mask.pixels().len() - ink;
        // the detector labels the minority class (dark on ties)
        if ink == 0 || blank == 0 || ink > blank {
            continue;
        }
        let img = mask.map(|&m| if m { 20u8 } else { 230u8 });
        let got: Vec<BoundingBox> = detect_letters_cc(&img, 1, u64::MAX)
            .unwrap()
            .iter()
            .map(|b| b.bbox)
            .collect();
        let mut want: Vec<BoundingBox> = flood_components(&mask).iter().map(|c| c.1).collect();
        want.sort_by_key(|b| (b.top, b.left, b.width, b.height));
        assert_eq!(got, want);
        checked += 1;
    }
}

#[test]
fn detector_area_filter() {
    // a 50-pixel blob and a 3-pixel blob
    let img = GrayImage::from_fn(30, 20, |x, y| {
        let big = (2..12).contains(&x) && (2..7).contains(&y);
        let small = y == 15 && (20..23).contains(&x);
        if big || small {
            0
        } else {
            255
        }
    });
    let mask = img.map(|&p| p == 0);
    let oracle: Vec<_> = flood_components(&mask)
        .into_iter()
        .filter(|(a, _)| *a >= 10)
        .collect();
    assert_eq!(oracle.len(), 1);
    let got = detect_letters_cc(&img, 10, 10_000).unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].bbox, oracle[0].1);
}

/// Pixels of the largest component that touch (4-adjacency) background
/// reachable from outside the image.
fn exterior_boundary(mask: &BinaryMask) -> HashSet<(u32, u32)> {
    let labeling = label_components(mask.width(), mask.height(), mask.pixels());
    let label = labeling.largest().unwrap().label;
    let (w, h) = (mask.width() as i64 + 2, mask.height() as i64 + 2);
    let fg = |x: i64, y: i64| {
        x >= 1 && y >= 1 && x < w - 1 && y < h - 1 && mask.get(x as u32 - 1, y as u32 - 1)
    };
    let mut outside = vec![false; (w * h) as usize];
    let mut queue = VecDeque::from([(0i64, 0i64)]);
    outside[0] = true;
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h || fg(nx, ny) {
                continue;
            }
            let i = (ny * w + nx) as usize;
            if !outside[i] {
                outside[i] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    let mut set = HashSet::new();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if labeling.label_at(x, y) != label {
                continue;
            }
            let (px, py) = (x as i64 + 1, y as i64 + 1);
            let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|(dx, dy)| outside[((py + dy) * w + px + dx) as usize]);
            if touches {
                set.insert((x, y));
            }
        }
    }
    set
}

#[test]
fn contour_matches_exterior_boundary_oracle() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(23);
    let mut traced = 0;
    while traced < 500 {
        let mask = random_mask(&mut rng, 16);
        if mask.count() == 0 {
            continue;
        }
        let contour = trace_contour(&mask).unwrap();
        let got: HashSet<(u32, u32)> = contour.points.iter().copied().collect();
        assert_eq!(got, exterior_boundary(&mask), "mask {mask:?}");

        let n = contour.points.len();
        for i in 0..n {
            let (a, b) = (contour.points[i], contour.points[(i + 1) % n]);
            let (dx, dy) = (a.0.abs_diff(b.0), a.1.abs_diff(b.1));
            assert!(n == 1 || (dx <= 1 && dy <= 1 && dx + dy > 0));
        }
        traced += 1;
    }
}

#[test]
fn contour_equals_four_boundary_without_holes() {
    // solid shapes: every 4-boundary pixel is on the outer contour
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(29);
    for _ in 0..100 {
        let w = 3 + (rng.next_u64() % 14) as u32;
        let h = 3 + (rng.next_u64() % 14) as u32;
        let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
        let (rx, ry) = (w as f64 / 2.0, h as f64 / 2.0);
        let mask = BinaryMask::from_fn(w, h, |x, y| {
            let (u, v) = ((x as f64 + 0.5 - cx) / rx, (y as f64 + 0.5 - cy) / ry);
            u * u + v * v <= 1.0
        });
        let boundary: HashSet<(u32, u32)> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| mask.get(x, y))
            .filter(|&(x, y)| {
                x == 0
                    || y == 0
                    || x == w - 1
                    || y == h - 1
                    || !mask.get(x - 1, y)
                    || !mask.get(x + 1, y)
                    || !mask.get(x, y - 1)
                    || !mask.get(x, y + 1)
            })
            .collect();
        let got: HashSet<(u32, u32)> = trace_contour(&mask).unwrap().points.into_iter().collect();
        assert_eq!(got, boundary);
    }
}

/// Plain recursive definition with memoization.
fn reference_distance(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if let Some(v) = memo[i][j] {
            return v;
        }
        let v = if i == a.len() {
            b.len() - j
        } else if j == b.len() {
            a.len() - i
        } else if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo[i][j] = Some(v);
        v
    }
    let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
    go(a, b, 0, 0, &mut memo)
}

fn small_string() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[abcé ]{0,10}").unwrap()
}

proptest! {
    #[test]
    fn edit_distance_matches_reference(a in small_string(), b in small_string()) {
        let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        prop_assert_eq!(edit_distance(&a, &b), reference_distance(&a, &b));
    }

    #[test]
    fn edit_distance_is_a_metric(a in small_string(), b in small_string(), c in small_string()) {
        let (a, b, c): (Vec<char>, Vec<char>, Vec<char>) =
            (a.chars().collect(), b.chars().collect(), c.chars().collect());
        prop_assert_eq!(edit_distance(&a, &b), edit_distance(&b, &a));
        prop_assert_eq!(edit_distance(&a, &a), 0);
        prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
    }
}
