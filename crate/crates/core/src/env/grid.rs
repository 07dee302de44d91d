//! Grid world with diagonal actions and wall deflection.
//!
//! Cells are `(col, row)`; `up` increases the row and `right` the column.
//! State index is `row * width + col`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::mdp::{Choice, LabeledMdp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Region {
    A,
    B,
    C,
}

impl Region {
    pub fn atom(self) -> &'static str {
        match self {
            Region::A => "a",
            Region::B => "b",
            Region::C => "c",
        }
    }
}

pub const GRID_ATOMS: [&str; 3] = ["a", "b", "c"];
pub const GRID_ACTIONS: [&str; 4] = ["UR", "UL", "DR", "DL"];

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub regions: BTreeMap<(usize, usize), Region>,
    pub initial: (usize, usize),
    pub p_move: f64,
    pub p_stay: f64,
    pub p_wall: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            width: 5,
            height: 5,
            regions: BTreeMap::from([
                ((4, 4), Region::A),
                ((4, 0), Region::B),
                ((2, 2), Region::C),
            ]),
            initial: (0, 3),
            p_move: 0.4,
            p_stay: 0.2,
            p_wall: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid must have at least one cell")]
    Empty,
    #[error("cell ({0}, {1}) is outside the grid")]
    OutOfBounds(usize, usize),
    #[error("probabilities do not form distributions")]
    Probabilities,
}

#[derive(Clone, Copy)]
enum Dir {
    Up,
    Down,
    Left,
    Right,
}

impl GridConfig {
    pub fn index(&self, (col, row): (usize, usize)) -> usize {
        row * self.width + col
    }

    pub fn cell(&self, s: usize) -> (usize, usize) {
        (s % self.width, s / self.width)
    }

    fn neighbor(&self, (col, row): (usize, usize), d: Dir) -> Option<(usize, usize)> {
        match d {
            Dir::Up => (row + 1 < self.height).then(|| (col, row + 1)),
            Dir::Down => row.checked_sub(1).map(|r| (col, r)),
            Dir::Left => col.checked_sub(1).map(|c| (c, row)),
            Dir::Right => (col + 1 < self.width).then(|| (col + 1, row)),
        }
    }

    fn validate(&self) -> Result<(), GridError> {
        if self.width == 0 || self.height == 0 {
            return Err(GridError::Empty);
        }
        let inside = |&(c, r): &(usize, usize)| c < self.width && r < self.height;
        if let Some(&(c, r)) = self.regions.keys().find(|k| !inside(k)) {
            return Err(GridError::OutOfBounds(c, r));
        }
        if !inside(&self.initial) {
            return Err(GridError::OutOfBounds(self.initial.0, self.initial.1));
        }
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !ok(self.p_move)
            || !ok(self.p_stay)
            || !ok(self.p_wall)
            || (2.0 * self.p_move + self.p_stay - 1.0).abs() > 1e-12
        {
            return Err(GridError::Probabilities);
        }
        Ok(())
    }
}

/// Builds the grid MDP. Action `UR` moves right or up; the other actions
/// are rotations of the same rule.
pub fn build_grid_world(cfg: &GridConfig) -> Result<LabeledMdp, GridError> {
    cfg.validate()?;
    let dirs = [
        (Dir::Right, Dir::Up),
        (Dir::Up, Dir::Left),
        (Dir::Down, Dir::Right),
        (Dir::Left, Dir::Down),
    ];
    let n = cfg.width * cfg.height;
    let mut labels = vec![0u64; n];
    for (&cell, region) in &cfg.regions {
        let bit = GRID_ATOMS.iter().position(|a| *a == region.atom()).unwrap();
        labels[cfg.index(cell)] |= 1 << bit;
    }
    let mut choices = Vec::with_capacity(n);
    for s in 0..n {
        let here = cfg.cell(s);
        let row = dirs
            .iter()
            .enumerate()
            .map(|(action, &(d1, d2))| {
                let mut succ: Vec<(usize, f64)> =
                    match (cfg.neighbor(here, d1), cfg.neighbor(here, d2)) {
                        (Some(a), Some(b)) => vec![
                            (cfg.index(a), cfg.p_move),
                            (cfg.index(b), cfg.p_move),
                            (s, cfg.p_stay),
                        ],
                        (Some(a), None) | (None, Some(a)) => {
                            vec![(cfg.index(a), cfg.p_wall), (s, 1.0 - cfg.p_wall)]
                        }
                        (None, None) => vec![(s, 1.0)],
                    };
                succ.retain(|&(_, p)| p > 0.0);
                succ.sort_by_key(|&(t, _)| t);
                Choice {
                    action,
                    successors: succ,
                }
            })
            .collect();
        choices.push(row);
    }
    Ok(LabeledMdp {
        atoms: GRID_ATOMS.iter().map(|s| s.to_string()).collect(),
        actions: GRID_ACTIONS.iter().map(|s| s.to_string()).collect(),
        labels,
        choices,
        initial: cfg.index(cfg.initial),
    })
}
