use crate::geometry::{dist2, BoxRegion, MAX_DIM};

const MAX_CELLS: usize = 1 << 22;

/// Dense uniform bucket grid over a bounding box. Query cost is proportional
/// to the number of cells overlapped by the query ball, so the cell side is
/// kept near the typical query radius.
#[derive(Clone, Debug)]
pub struct GridIndex {
    lo: Vec<f64>,
    cell: f64,
    shape: Vec<usize>,
    strides: Vec<usize>,
    buckets: Vec<Vec<u32>>,
}

impl GridIndex {
    pub fn new(bounds: &BoxRegion, cell: f64) -> Self {
        let dim = bounds.dim();
        let mut cell = cell.max(1e-12);
        let shape = loop {
            let shape: Vec<usize> = (0..dim).map(|i| ((bounds.extent(i) / cell).ceil() as usize).max(1)).collect();
            let total = shape.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
            match total {
                Some(t) if t <= MAX_CELLS => break shape,
                _ => cell *= 1.5,
            }
        };
        let mut strides = vec![1; dim];
        for i in 1..dim {
            strides[i] = strides[i - 1] * shape[i - 1];
        }
        let total = shape.iter().product();
        Self { lo: bounds.lo().to_vec(), cell, shape, strides, buckets: vec![Vec::new(); total] }
    }

    pub fn cell_side(&self) -> f64 {
        self.cell
    }

    #[inline]
    fn axis_cell(&self, axis: usize, v: f64) -> isize {
        ((v - self.lo[axis]) / self.cell).floor() as isize
    }

    pub fn insert(&mut self, id: usize, p: &[f64]) {
        let mut flat = 0;
        for (axis, &v) in p.iter().enumerate() {
            let c = self.axis_cell(axis, v).clamp(0, self.shape[axis] as isize - 1) as usize;
            flat += c * self.strides[axis];
        }
        self.buckets[flat].push(id as u32);
    }

    pub fn clear(&mut self) {
        self.buckets.iter_mut().for_each(Vec::clear);
    }

    /// Visits ids within `radius` of `center`; `coords` is the flat point
    /// storage the ids index into, with stride `dim`.
    pub fn query<F: FnMut(usize)>(&self, coords: &[f64], center: &[f64], radius: f64, mut visit: F) {
        let dim = self.shape.len();
        let r2 = radius * radius;
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        for axis in 0..dim {
            let a = self.axis_cell(axis, center[axis] - radius);
            let b = self.axis_cell(axis, center[axis] + radius);
            let last = self.shape[axis] as isize - 1;
            if b < 0 || a > last {
                return;
            }
            lo[axis] = a.max(0) as usize;
            hi[axis] = b.min(last) as usize;
        }
        let mut cur = lo;
        loop {
            let flat: usize = (0..dim).map(|a| cur[a] * self.strides[a]).sum();
            for &id in &self.buckets[flat] {
                let id = id as usize;
                if dist2(&coords[id * dim..(id + 1) * dim], center) <= r2 {
                    visit(id);
                }
            }
            let mut axis = 0;
            loop {
                if axis == dim {
                    return;
                }
                if cur[axis] < hi[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = lo[axis];
                axis += 1;
            }
        }
    }
}
