//! Portable storage of a corrector solution: a JSON header plus one CSV
//! file per radial profile.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridSpec};
use super::modes::ForcingMode;
use super::solve::{CorrectorSolution, ModeSolution};
use crate::error::{Error, Result};
use crate::geom::TangentPoly;
use crate::model::ProblemPoint;

pub const HEADER_FILE: &str = "corrector.json";

/// Columns of every profile CSV.
pub const PROFILE_COLUMNS: [&str; 4] = ["r", "x_n", "psi", "e"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub indices: Vec<usize>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeHeader {
    pub degree: u32,
    pub term: usize,
    pub power: u32,
    pub weight: Vec<Monomial>,
    pub deflated: f64,
    pub sigma_min: f64,
    pub norm_estimate: f64,
    pub profile: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionHeader {
    pub point: ProblemPoint,
    pub grid: GridSpec,
    pub modes: Vec<ModeHeader>,
    pub projection: f64,
    pub decomposition_error: f64,
    pub odd_norm: f64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

impl CorrectorSolution {
    pub fn header(&self) -> SolutionHeader {
        SolutionHeader {
            point: self.pt,
            grid: self.grid.spec,
            modes: self
                .modes
                .iter()
                .enumerate()
                .map(|(a, m)| ModeHeader {
                    degree: m.mode.d,
                    term: m.mode.term,
                    power: m.mode.q,
                    weight: m
                        .mode
                        .weight
                        .monomials()
                        .into_iter()
                        .map(|(indices, coef)| Monomial { indices, coef })
                        .collect(),
                    deflated: m.deflated,
                    sigma_min: m.sigma_min,
                    norm_estimate: m.norm_bound,
                    profile: format!("profile_{a}_d{}.csv", m.mode.d),
                })
                .collect(),
            projection: self.projection,
            decomposition_error: self.decomposition_error,
            odd_norm: self.odd_norm,
        }
    }

    /// CSV text of one profile, one row per node.
    pub fn profile_csv(&self, m: &ModeSolution) -> String {
        let g = &self.grid;
        let mut s = PROFILE_COLUMNS.join(",");
        s.push('\n');
        for i in 0..g.r.len() {
            for j in 0..g.z.len() {
                let k = g.idx(i, j);
                let _ = writeln!(s, "{},{},{},{}", g.r.x[i], g.z.x[j], m.psi[k], m.forcing[k]);
            }
        }
        s
    }

    /// Writes the header and the profiles into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let header = self.header();
        let json = serde_json::to_string_pretty(&header).map_err(|e| Error::Format(e.to_string()))?;
        let hp = dir.join(HEADER_FILE);
        fs::write(&hp, json + "\n").map_err(|e| io_err(&hp, e))?;
        for (m, h) in self.modes.iter().zip(&header.modes) {
            let p = dir.join(&h.profile);
            fs::write(&p, self.profile_csv(m)).map_err(|e| io_err(&p, e))?;
        }
        Ok(())
    }

    /// Reads a solution written by [`CorrectorSolution::write_to`].
    pub fn read_from(dir: &Path) -> Result<Self> {
        let hp = dir.join(HEADER_FILE);
        let text = fs::read_to_string(&hp).map_err(|e| io_err(&hp, e))?;
        let header: SolutionHeader = serde_json::from_str(&text).map_err(|e| io_err(&hp, e))?;
        let grid = Grid::new(header.grid)?;
        let m = header.point.n - 1;
        let mut modes = Vec::with_capacity(header.modes.len());
        for h in &header.modes {
            let p = dir.join(&h.profile);
            let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
            let mut lines = text.lines();
            if lines.next() != Some(PROFILE_COLUMNS.join(",").as_str()) {
                return Err(io_err(&p, "unexpected columns"));
            }
            let mut psi = Vec::with_capacity(grid.nodes());
            let mut forcing = Vec::with_capacity(grid.nodes());
            for line in lines {
                let cols: Vec<f64> = line
                    .split(',')
                    .map(|c| c.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| io_err(&p, e))?;
                if cols.len() != 4 {
                    return Err(io_err(&p, "expected four columns"));
                }
                psi.push(cols[2]);
                forcing.push(cols[3]);
            }
            if psi.len() != grid.nodes() {
                return Err(io_err(&p, format!("expected {} rows, found {}", grid.nodes(), psi.len())));
            }
            let mut weight = TangentPoly::zero(m);
            for mono in &h.weight {
                weight.add(&mono.indices, mono.coef);
            }
            modes.push(ModeSolution {
                mode: ForcingMode {
                    d: h.degree,
                    term: h.term,
                    q: h.power,
                    weight,
                },
                psi,
                forcing,
                deflated: h.deflated,
                sigma_min: h.sigma_min,
                norm_bound: h.norm_estimate,
            });
        }
        Ok(CorrectorSolution {
            pt: header.point,
            grid,
            modes,
            projection: header.projection,
            decomposition_error: header.decomposition_error,
            odd_norm: header.odd_norm,
        })
    }
}
