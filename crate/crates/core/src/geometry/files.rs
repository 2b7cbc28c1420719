use serde::{Deserialize, Serialize};

use super::mask::{CompactSetMask, MaskFile};
use super::whitney::{whitney, DyadicSquare, WhitneyDecomposition};
use crate::{Error, Result, SCHEMA};

/// One square as written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareRecord {
    pub level: u32,
    pub i: usize,
    pub j: usize,
    pub residual: bool,
    pub dist: f64,
    pub center_distance: f64,
}

/// On-disk Whitney decomposition. The mask travels with it, so a reader can
/// rebuild the full structure (adjacency, labels, distance field) and check
/// that it reproduces the stored squares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhitneyFile {
    pub schema: String,
    pub kind: String,
    pub mask: MaskFile,
    pub deepest_level: u32,
    pub residual_count: usize,
    pub adjacency_count: usize,
    pub squares: Vec<SquareRecord>,
}

impl WhitneyFile {
    pub fn new(mask: &CompactSetMask, w: &WhitneyDecomposition) -> Self {
        let squares = (0..w.len())
            .map(|k| {
                let q = w.squares[k];
                SquareRecord {
                    level: q.level,
                    i: q.i,
                    j: q.j,
                    residual: w.residual[k],
                    dist: w.dist_to_set[k],
                    center_distance: w.center_distance[k],
                }
            })
            .collect();
        WhitneyFile {
            schema: SCHEMA.to_string(),
            kind: "whitney".to_string(),
            mask: mask.to_file(),
            deepest_level: w.deepest_level,
            residual_count: w.residual.iter().filter(|&&r| r).count(),
            adjacency_count: w.adjacency.len(),
            squares,
        }
    }

    /// Rebuilds the mask and the decomposition, failing if the recomputed
    /// squares differ from the stored ones.
    pub fn load(&self) -> Result<(CompactSetMask, WhitneyDecomposition)> {
        if self.schema != SCHEMA || self.kind != "whitney" {
            return Err(Error::Format(format!(
                "expected a {SCHEMA} whitney file, found {} {}",
                self.schema, self.kind
            )));
        }
        let mask = CompactSetMask::from_file(&self.mask)?;
        let w = whitney(&mask, self.deepest_level)?;
        let same = w.len() == self.squares.len()
            && self.squares.iter().enumerate().all(|(k, r)| {
                w.squares[k]
                    == DyadicSquare {
                        level: r.level,
                        i: r.i,
                        j: r.j,
                    }
                    && w.residual[k] == r.residual
            });
        if !same {
            return Err(Error::Format(
                "stored squares do not match the embedded mask".into(),
            ));
        }
        Ok((mask, w))
    }
}
