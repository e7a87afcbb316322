//! Centered boxes `{-h, …, h}^d` in `Z^d` with row-major indexing, axis 0 slowest.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CenteredBox {
    pub dim: usize,
    /// Odd side length `2h + 1`.
    pub side: u64,
}

impl CenteredBox {
    pub fn new(dim: usize, side: u64) -> Self {
        debug_assert!(side % 2 == 1);
        CenteredBox { dim, side }
    }

    pub fn half(&self) -> i64 {
        (self.side as i64 - 1) / 2
    }

    /// Number of cells, or `None` on overflow.
    pub fn checked_len(&self) -> Option<usize> {
        let side = usize::try_from(self.side).ok()?;
        (0..self.dim).try_fold(1usize, |acc, _| acc.checked_mul(side))
    }

    pub fn len(&self) -> usize {
        self.checked_len().expect("box size overflows usize")
    }

    pub fn is_empty(&self) -> bool {
        self.side == 0
    }

    pub fn contains(&self, cell: &[i64]) -> bool {
        let h = self.half();
        cell.iter().all(|c| c.abs() <= h)
    }

    pub fn index(&self, cell: &[i64]) -> Option<usize> {
        let h = self.half();
        let mut idx = 0usize;
        for &c in cell {
            if c.abs() > h {
                return None;
            }
            idx = idx * self.side as usize + (c + h) as usize;
        }
        Some(idx)
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        let h = self.half();
        let side = self.side as usize;
        for slot in out.iter_mut().rev() {
            *slot = (idx % side) as i64 - h;
            idx /= side;
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        self.coords_into(idx, &mut out);
        out
    }

    /// L1 distance from `cell` to the nearest point outside the box.
    pub fn distance_to_outside(&self, cell: &[i64]) -> i64 {
        let h = self.half();
        cell.iter().map(|c| h - c.abs()).min().unwrap_or(0) + 1
    }
}

/// Representative of `value mod modulus` in `{-(m-1)/2, …, (m-1)/2}` for odd `m`.
pub fn centered_residue(value: i64, modulus: u64) -> i64 {
    let m = modulus as i64;
    let h = (m - 1) / 2;
    (value + h).rem_euclid(m) - h
}

pub fn l1(cell: &[i64]) -> i64 {
    cell.iter().map(|c| c.abs()).sum()
}
