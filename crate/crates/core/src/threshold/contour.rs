//! Moore-neighbor tracing of the outer boundary of the largest foreground component.

use crate::components::label_components;

use super::{BinaryMask, ThresholdError};

/// Closed outer boundary, counterclockwise as displayed (y grows downward).
/// Pixels on one-pixel-wide parts may appear more than once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<(u32, u32)>,
}

// Counterclockwise on screen: E, NE, N, NW, W, SW, S, SE.
const DIRS: [(i32, i32); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

fn dir_index(dx: i32, dy: i32) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("neighbors are 8-adjacent")
}

/// Traces the largest 8-connected component, starting from its top-most then
/// left-most pixel. Tracing stops when the first move out of the start pixel
/// is about to be repeated (Jacob's criterion).
pub fn trace_contour(mask: &BinaryMask) -> Result<Contour, ThresholdError> {
    let (w, h) = (mask.width() as i32, mask.height() as i32);
    let labeling = label_components(mask.width(), mask.height(), mask.pixels());
    let target = labeling.largest().ok_or(ThresholdError::EmptyMask)?;
    let label = target.label;
    let inside = |x: i32, y: i32| {
        x >= 0 && y >= 0 && x < w && y < h && labeling.label_at(x as u32, y as u32) == label
    };

    let top = target.bbox.top as i32;
    let start_x = (0..w)
        .find(|&x| inside(x, top))
        .expect("component touches its top row");
    let start = (start_x, top);

    // Finds the next boundary pixel from `cur`, scanning from just past the
    // backtrack direction. Returns the pixel and the new backtrack direction.
    let step = |cur: (i32, i32), back: usize| -> Option<((i32, i32), usize)> {
        for i in 1..=8 {
            let d = (back + i) % 8;
            let n = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
            if inside(n.0, n.1) {
                let prev = (back + i - 1) % 8;
                let p = (cur.0 + DIRS[prev].0, cur.1 + DIRS[prev].1);
                return Some((n, dir_index(p.0 - n.0, p.1 - n.1)));
            }
        }
        None
    };

    let mut points = vec![(start.0 as u32, start.1 as u32)];
    // west of the start pixel is outside the component by construction
    let Some((first, mut back)) = step(start, 4) else {
        return Ok(Contour { points });
    };
    let mut cur = first;
    loop {
        if cur == start {
            let (next, _) = step(cur, back).expect("start has a neighbor");
            if next == first {
                break;
            }
        }
        points.push((cur.0 as u32, cur.1 as u32));
        let (next, b) = step(cur, back).expect("boundary pixel has a neighbor");
        cur = next;
        back = b;
    }
    Ok(Contour { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> BinaryMask {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        BinaryMask::from_pixels(
            w,
            h,
            rows.iter()
                .flat_map(|r| r.bytes().map(|b| b == b'#'))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_pixel() {
        let c = trace_contour(&mask(&["...", ".#.", "..."])).unwrap();
        assert_eq!(c.points, vec![(1, 1)]);
    }

    #[test]
    fn block_three_by_three() {
        let m = mask(&[".....", ".###.", ".###.", ".###.", "....."]);
        let c = trace_contour(&m).unwrap();
        assert_eq!(
            c.points,
            vec![
                (1, 1),
                (1, 2),
                (1, 3),
                (2, 3),
                (3, 3),
                (3, 2),
                (3, 1),
                (2, 1)
            ]
        );
        assert!(!c.points.contains(&(2, 2)));
    }

    #[test]
    fn two_pixel_line_revisits() {
        let c = trace_contour(&mask(&["##"])).unwrap();
        assert_eq!(c.points, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn empty_mask() {
        assert!(matches!(
            trace_contour(&mask(&["..", ".."])),
            Err(ThresholdError::EmptyMask)
        ));
    }

    #[test]
    fn largest_component_only() {
        let m = mask(&["#....", ".....", "..##.", "..##."]);
        let c = trace_contour(&m).unwrap();
        assert_eq!(c.points.len(), 4);
        assert!(!c.points.contains(&(0, 0)));
    }

    #[test]
    fn consecutive_points_adjacent() {
        let m = mask(&[".#...#", "###.##", ".#####", "#...#.", "##..##"]);
        let c = trace_contour(&m).unwrap();
        let n = c.points.len();
        for i in 0..n {
            let (a, b) = (c.points[i], c.points[(i + 1) % n]);
            let dx = (a.0 as i32 - b.0 as i32).abs();
            let dy = (a.1 as i32 - b.1 as i32).abs();
            assert!(dx <= 1 && dy <= 1 && (dx, dy) != (0, 0), "{a:?} -> {b:?}");
        }
    }
}
