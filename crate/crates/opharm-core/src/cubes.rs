//! Dyadic cube families on the torus, aligned with the lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::OperatorField;
use crate::grid::GridSpec;
use crate::matrix;
use crate::MatrixValue;
use crate::C64;

/// Which translates of the dyadic tiling belong to the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftPolicy {
    /// Plain dyadic cubes.
    None,
    /// The 3^d - 1 half-cell shifts of every level.
    HalfCell,
    /// Every lattice translate of every level; closed under lattice
    /// translation by construction.
    AllLattice,
}

/// One cube: a level, a tiling shift in lattice units, and the per-axis
/// cube index inside the shifted tiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cube {
    pub level: u32,
    pub shift: [i64; 3],
    pub index: [usize; 3],
}

/// Dyadic depths 0..=max_level with a shift policy; level 0 is the whole
/// torus.
#[derive(Debug, Clone)]
pub struct CubeFamily {
    grid: GridSpec,
    max_level: u32,
    policy: ShiftPolicy,
}

impl CubeFamily {
    pub fn new(grid: GridSpec, max_level: u32, policy: ShiftPolicy) -> Result<Self> {
        if 2usize.pow(max_level) > grid.n_axis() {
            return Err(Error::Domain(format!(
                "level {max_level} cubes are finer than the lattice"
            )));
        }
        Ok(CubeFamily {
            grid,
            max_level,
            policy,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn side(&self, level: u32) -> f64 {
        0.5f64.powi(level as i32)
    }

    /// Cells per axis of a cube at this level.
    pub fn cells(&self, level: u32) -> usize {
        self.grid.n_axis() >> level
    }

    /// Cube volume (2^{-level})^d.
    pub fn volume(&self, level: u32) -> f64 {
        self.side(level).powi(self.grid.d() as i32)
    }

    /// Tent height: half the side length.
    pub fn tent_height(&self, level: u32) -> f64 {
        self.side(level) / 2.0
    }

    fn shifts_at(&self, level: u32) -> Vec<[i64; 3]> {
        let d = self.grid.d();
        if level == 0 {
            // the whole torus is shift-invariant
            return vec![[0; 3]];
        }
        match self.policy {
            ShiftPolicy::None => vec![[0; 3]],
            ShiftPolicy::HalfCell => {
                let half = (self.cells(level) / 2) as i64;
                let options = [-half, 0, half];
                let mut out = Vec::new();
                let axes = |i: usize| -> i64 { options[i] };
                match d {
                    1 => {
                        for a in 0..3 {
                            out.push([axes(a), 0, 0]);
                        }
                    }
                    2 => {
                        for a in 0..3 {
                            for b in 0..3 {
                                out.push([axes(a), axes(b), 0]);
                            }
                        }
                    }
                    _ => {
                        for a in 0..3 {
                            for b in 0..3 {
                                for c in 0..3 {
                                    out.push([axes(a), axes(b), axes(c)]);
                                }
                            }
                        }
                    }
                }
                out.retain(|s| s.iter().any(|&x| x != 0));
                let mut all = vec![[0i64; 3]];
                all.extend(out);
                all
            }
            ShiftPolicy::AllLattice => {
                let c = self.cells(level) as i64;
                let mut out = Vec::new();
                match d {
                    1 => {
                        for a in 0..c {
                            out.push([a, 0, 0]);
                        }
                    }
                    2 => {
                        for a in 0..c {
                            for b in 0..c {
                                out.push([a, b, 0]);
                            }
                        }
                    }
                    _ => {
                        for a in 0..c {
                            for b in 0..c {
                                for e in 0..c {
                                    out.push([a, b, e]);
                                }
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// All cubes in deterministic (level, shift, index) order.
    pub fn cubes(&self) -> Vec<Cube> {
        let d = self.grid.d();
        let mut out = Vec::new();
        for level in 0..=self.max_level {
            let per_axis = 2usize.pow(level);
            for shift in self.shifts_at(level) {
                let mut index = [0usize; 3];
                loop {
                    out.push(Cube {
                        level,
                        shift,
                        index,
                    });
                    // odometer increment over d axes
                    let mut axis = d;
                    loop {
                        if axis == 0 {
                            break;
                        }
                        axis -= 1;
                        index[axis] += 1;
                        if index[axis] < per_axis {
                            break;
                        }
                        index[axis] = 0;
                        if axis == 0 {
                            break;
                        }
                    }
                    if index == [0usize; 3] {
                        break;
                    }
                }
            }
        }
        out
    }

    /// Lattice indices covered by a cube.
    pub fn points(&self, cube: &Cube) -> Vec<usize> {
        let d = self.grid.d();
        let cells = self.cells(cube.level);
        let n = self.grid.n_axis();
        let mut starts = [0usize; 3];
        for a in 0..d {
            let raw = cube.index[a] * cells;
            starts[a] = (raw as i64 + cube.shift[a]).rem_euclid(n as i64) as usize;
        }
        let mut out = Vec::with_capacity(cells.pow(d as u32));
        let mut offs = [0usize; 3];
        loop {
            let mut mi = [0usize; 3];
            for a in 0..d {
                mi[a] = (starts[a] + offs[a]) % n;
            }
            out.push(self.grid.flat_index(&mi[..d]));
            let mut axis = d;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                offs[axis] += 1;
                if offs[axis] < cells {
                    break;
                }
                offs[axis] = 0;
                if axis == 0 {
                    break;
                }
            }
            if offs == [0usize; 3] {
                break;
            }
        }
        out
    }
}

/// Mean of a field over a cube: |Q|^{-1} h^d Σ_{s in Q} f(s).
pub fn cube_mean(f: &OperatorField, family: &CubeFamily, cube: &Cube) -> Result<MatrixValue> {
    let pts = family.points(cube);
    if pts.is_empty() {
        return Err(Error::Domain("empty cube".into()));
    }
    let mut acc = matrix::zero(f.n());
    for &s in &pts {
        acc += f.value(s);
    }
    Ok(acc * C64::new(1.0 / pts.len() as f64, 0.0))
}
