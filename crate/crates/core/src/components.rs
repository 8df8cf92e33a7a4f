//! Two-pass 8-connected component labeling with a union-find equivalence table.

use crate::raster::BoundingBox;

/// One connected component of a boolean raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Label value in the label image (1-based, in raster-scan order of first pixel).
    pub label: u32,
    pub area: u64,
    pub bbox: BoundingBox,
}

/// Labels produced by [`label_components`]: 0 is background.
#[derive(Clone, Debug)]
pub struct Labeling {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
}

impl Labeling {
    pub fn label_at(&self, x: u32, y: u32) -> u32 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    /// Largest component by pixel count; ties go to the smallest (top, left) of its box.
    pub fn largest(&self) -> Option<&Component> {
        self.components
            .iter()
            .min_by_key(|c| (std::cmp::Reverse(c.area), c.bbox.top, c.bbox.left))
    }

    pub fn mask_of(&self, label: u32) -> Vec<bool> {
        self.labels.iter().map(|&l| l == label).collect()
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        // slot 0 is the background label
        UnionFind { parent: vec![0] }
    }

    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Labels 8-connected regions of `true` pixels in a row-major `width` x `height` grid.
pub fn label_components(width: u32, height: u32, fg: &[bool]) -> Labeling {
    assert_eq!(fg.len(), width as usize * height as usize);
    let (w, h) = (width as usize, height as usize);
    let mut labels = vec![0u32; w * h];
    let mut uf = UnionFind::new();

    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if !fg[idx] {
                continue;
            }
            // previously visited neighbors: W, NW, N, NE
            let mut current = 0u32;
            let mut consider = |l: u32, uf: &mut UnionFind| {
                if l == 0 {
                    return;
                }
                current = if current == 0 {
                    l
                } else {
                    uf.union(current, l)
                };
            };
            if x > 0 {
                consider(labels[idx - 1], &mut uf);
            }
            if y > 0 {
                let up = idx - w;
                if x > 0 {
                    consider(labels[up - 1], &mut uf);
                }
                consider(labels[up], &mut uf);
                if x + 1 < w {
                    consider(labels[up + 1], &mut uf);
                }
            }
            labels[idx] = if current == 0 { uf.make_set() } else { current };
        }
    }

    // Resolve to dense labels in order of first appearance.
    let mut dense = vec![0u32; uf.parent.len()];
    let mut components: Vec<Component> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if labels[idx] == 0 {
                continue;
            }
            let root = uf.find(labels[idx]) as usize;
            if dense[root] == 0 {
                components.push(Component {
                    label: components.len() as u32 + 1,
                    area: 0,
                    bbox: BoundingBox::new(x as u32, y as u32, 1, 1),
                });
                dense[root] = components.len() as u32;
            }
            let label = dense[root];
            labels[idx] = label;
            let c = &mut components[label as usize - 1];
            c.area += 1;
            let b = &mut c.bbox;
            let (x, y) = (x as u32, y as u32);
            if x < b.left {
                b.width += b.left - x;
                b.left = x;
            } else if x >= b.left + b.width {
                b.width = x - b.left + 1;
            }
            if y >= b.top + b.height {
                b.height = y - b.top + 1;
            }
        }
    }

    Labeling {
        width,
        height,
        labels,
        components,
    }
}
