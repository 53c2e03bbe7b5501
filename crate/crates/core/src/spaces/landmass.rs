//! Land/water grid with 4-neighbour geodesic distances.
//!
//! Map text is one row per line, `#` for land and `.` for water. Each land
//! cell is a carrier point. The geodesic between two cells is `cell_size`
//! times the length of a shortest 4-neighbour path over land, and infinity
//! between cells in different connected components.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::SpaceError;
use crate::extreal::ExtReal;

const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Optional `<map>.json` sidecar next to a map file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    cell_size: f64,
}

pub struct LandmassGrid {
    rows: usize,
    cols: usize,
    land: Vec<bool>,
    cell_size: f64,
    land_cells: Vec<Cell>,
    // dense land index per grid cell, usize::MAX for water
    land_index: Vec<usize>,
    component: Vec<usize>,
    n_components: usize,
    // per-source BFS hop counts over land cells, filled on first query
    hops: Vec<OnceLock<Vec<u32>>>,
}

impl fmt::Debug for LandmassGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LandmassGrid")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("cell_size", &self.cell_size)
            .field("land_cells", &self.land_cells.len())
            .field("components", &self.n_components)
            .finish()
    }
}

impl LandmassGrid {
    pub fn parse(map_text: &str) -> Result<Self, SpaceError> {
        let mut lines: Vec<&str> = map_text
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        while lines.last().is_some_and(|l| l.is_empty()) {
            lines.pop();
        }
        let rows = lines.len();
        let cols = lines.first().map_or(0, |l| l.chars().count());
        let mut land = Vec::with_capacity(rows * cols);
        for (row, line) in lines.iter().enumerate() {
            let len = line.chars().count();
            if len != cols {
                return Err(SpaceError::RaggedRows {
                    row,
                    len,
                    expected: cols,
                });
            }
            for (col, ch) in line.chars().enumerate() {
                match ch {
                    '#' => land.push(true),
                    '.' => land.push(false),
                    _ => return Err(SpaceError::IllegalChar { ch, row, col }),
                }
            }
        }
        Self::from_mask(rows, cols, land, 1.0)
    }

    /// Reads a map file and, when present, its `<path>.json` sidecar holding
    /// `{"cell_size": ...}`.
    pub fn from_path(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.display().to_string(), e))?;
        let mut grid = Self::parse(&text)?;
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".json");
        let sidecar = Path::new(&sidecar);
        if sidecar.exists() {
            let raw = std::fs::read_to_string(sidecar)
                .map_err(|e| LoadError::Io(sidecar.display().to_string(), e))?;
            let meta: Sidecar = serde_json::from_str(&raw)
                .map_err(|e| LoadError::Sidecar(sidecar.display().to_string(), e))?;
            grid = grid.with_cell_size(meta.cell_size)?;
        }
        Ok(grid)
    }

    pub fn from_mask(rows: usize, cols: usize, land: Vec<bool>, cell_size: f64) -> Result<Self, SpaceError> {
        assert_eq!(land.len(), rows * cols, "mask size must be rows * cols");
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(SpaceError::BadCellSize(cell_size));
        }
        let mut land_cells = Vec::new();
        let mut land_index = vec![usize::MAX; rows * cols];
        for row in 0..rows {
            for col in 0..cols {
                if land[row * cols + col] {
                    land_index[row * cols + col] = land_cells.len();
                    land_cells.push(Cell::new(row, col));
                }
            }
        }
        if land_cells.is_empty() {
            return Err(SpaceError::NoLand);
        }
        let mut grid = Self {
            rows,
            cols,
            land,
            cell_size,
            hops: (0..land_cells.len()).map(|_| OnceLock::new()).collect(),
            component: vec![usize::MAX; land_cells.len()],
            land_cells,
            land_index,
            n_components: 0,
        };
        grid.label_components();
        Ok(grid)
    }

    pub fn with_cell_size(mut self, cell_size: f64) -> Result<Self, SpaceError> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(SpaceError::BadCellSize(cell_size));
        }
        self.cell_size = cell_size;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn land_cells(&self) -> &[Cell] {
        &self.land_cells
    }

    pub fn component_count(&self) -> usize {
        self.n_components
    }

    pub fn is_land(&self, c: Cell) -> bool {
        c.row < self.rows && c.col < self.cols && self.land[c.row * self.cols + c.col]
    }

    /// Component id of a land cell.
    pub fn component_of(&self, c: Cell) -> Result<usize, SpaceError> {
        Ok(self.component[self.index_of(c)?])
    }

    pub fn geodesic(&self, a: Cell, b: Cell) -> Result<ExtReal, SpaceError> {
        let (ia, ib) = (self.index_of(a)?, self.index_of(b)?);
        if ia == ib {
            return Ok(ExtReal::ZERO);
        }
        if self.component[ia] != self.component[ib] {
            return Ok(ExtReal::INFINITY);
        }
        let hops = self.hops[ia].get_or_init(|| self.bfs(ia))[ib];
        debug_assert_ne!(hops, UNREACHABLE);
        Ok(ExtReal::of(hops as f64 * self.cell_size))
    }

    fn index_of(&self, c: Cell) -> Result<usize, SpaceError> {
        if c.row >= self.rows || c.col >= self.cols {
            return Err(SpaceError::OutOfBounds { row: c.row, col: c.col });
        }
        match self.land_index[c.row * self.cols + c.col] {
            usize::MAX => Err(SpaceError::Water { row: c.row, col: c.col }),
            i => Ok(i),
        }
    }

    fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let Cell { row, col } = self.land_cells[i];
        let up = row.checked_sub(1).map(|r| (r, col));
        let left = col.checked_sub(1).map(|c| (row, c));
        let down = (row + 1 < self.rows).then_some((row + 1, col));
        let right = (col + 1 < self.cols).then_some((row, col + 1));
        [up, down, left, right]
            .into_iter()
            .flatten()
            .map(|(r, c)| self.land_index[r * self.cols + c])
            .filter(|&j| j != usize::MAX)
    }

    fn bfs(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.land_cells.len()];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(i) = queue.pop_front() {
            for j in self.neighbours(i) {
                if dist[j] == UNREACHABLE {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        dist
    }

    fn label_components(&mut self) {
        let mut next = 0;
        for start in 0..self.land_cells.len() {
            if self.component[start] != usize::MAX {
                continue;
            }
            let mut queue = VecDeque::from([start]);
            self.component[start] = next;
            while let Some(i) = queue.pop_front() {
                let ns: Vec<usize> = self.neighbours(i).collect();
                for j in ns {
                    if self.component[j] == usize::MAX {
                        self.component[j] = next;
                        queue.push_back(j);
                    }
                }
            }
            next += 1;
        }
        self.n_components = next;
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("bad sidecar {0}: {1}")]
    Sidecar(String, #[source] serde_json::Error),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_islands() {
        let g = LandmassGrid::parse("##.##").unwrap();
        assert_eq!(g.component_count(), 2);
        assert_eq!(g.land_cells().len(), 4);
        assert_eq!(g.geodesic(Cell::new(0, 0), Cell::new(0, 4)).unwrap(), ExtReal::INFINITY);
        assert_eq!(g.geodesic(Cell::new(0, 3), Cell::new(0, 4)).unwrap(), ExtReal::of(1.0));
    }

    #[test]
    fn single_cell() {
        let g = LandmassGrid::parse("#").unwrap();
        assert_eq!(g.component_count(), 1);
        assert_eq!(g.geodesic(Cell::new(0, 0), Cell::new(0, 0)).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(LandmassGrid::parse("...").unwrap_err(), SpaceError::NoLand);
        assert_eq!(LandmassGrid::parse("").unwrap_err(), SpaceError::NoLand);
        assert_eq!(
            LandmassGrid::parse("##\n#").unwrap_err(),
            SpaceError::RaggedRows {
                row: 1,
                len: 1,
                expected: 2
            }
        );
        assert_eq!(
            LandmassGrid::parse("#x").unwrap_err(),
            SpaceError::IllegalChar {
                ch: 'x',
                row: 0,
                col: 1
            }
        );
    }

    #[test]
    fn trailing_newline_and_crlf() {
        let g = LandmassGrid::parse("#.\r\n##\r\n").unwrap();
        assert_eq!((g.rows(), g.cols()), (2, 2));
    }

    #[test]
    fn geodesic_goes_around_water() {
        // U-shaped island: (0,0) to (0,2) must go down and around
        let g = LandmassGrid::parse("#.#\n#.#\n###").unwrap();
        assert_eq!(g.geodesic(Cell::new(0, 0), Cell::new(0, 2)).unwrap(), ExtReal::of(6.0));
        let g = g.with_cell_size(0.5).unwrap();
        assert_eq!(g.geodesic(Cell::new(0, 0), Cell::new(0, 2)).unwrap(), ExtReal::of(3.0));
    }

    #[test]
    fn geodesic_rejects_water_and_out_of_bounds() {
        let g = LandmassGrid::parse("#.").unwrap();
        assert_eq!(
            g.geodesic(Cell::new(0, 0), Cell::new(0, 1)).unwrap_err(),
            SpaceError::Water { row: 0, col: 1 }
        );
        assert_eq!(
            g.geodesic(Cell::new(3, 0), Cell::new(0, 0)).unwrap_err(),
            SpaceError::OutOfBounds { row: 3, col: 0 }
        );
    }

    #[test]
    fn bad_cell_size() {
        let g = LandmassGrid::parse("#").unwrap();
        assert!(g.with_cell_size(0.0).is_err());
    }
}
