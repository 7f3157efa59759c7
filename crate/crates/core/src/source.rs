//! Right-hand sides for the Poisson problems, as functions of position.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::Mesh;

/// Seed used when neither the source nor the caller provides one.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `values[k]` on `radii[k−1] ≤ r < radii[k]`, the last value beyond.
    RadialStep { radii: Vec<f64>, values: Vec<f64> },
    /// Independent uniform `[0, 1)` values on a `blocks × blocks` partition
    /// of the bounding box of the domain.
    RandomStep {
        #[serde(default = "default_blocks")]
        blocks: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// CSV with header `x,y,value`; each node takes the value of the nearest row.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

fn default_blocks() -> usize {
    4
}

impl Default for Source {
    fn default() -> Self {
        Source::Constant { value: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
struct FileRow {
    x: f64,
    y: f64,
    value: f64,
}

impl Source {
    /// Checks parameters and reads any referenced file.
    pub fn validate(&self) -> Result<()> {
        match self {
            Source::Constant { value } => nonnegative(*value),
            Source::RadialStep { radii, values } => {
                if values.len() != radii.len() + 1 {
                    return domain("radial_step needs one more value than radii");
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !(*r > 0.0)) {
                    return domain("radial_step radii must be positive and increasing");
                }
                values.iter().try_for_each(|v| nonnegative(*v))
            }
            Source::RandomStep { blocks, .. } => {
                if *blocks == 0 {
                    return domain("random_step needs at least one block");
                }
                Ok(())
            }
            Source::File { .. } => self.read_file().map(|_| ()),
        }
    }

    fn read_file(&self) -> Result<Vec<FileRow>> {
        let Source::File { path } = self else {
            return Ok(Vec::new());
        };
        let mut reader = csv::Reader::from_path(path).map_err(|e| {
            Error::Domain(format!("cannot read source file {}: {e}", path.display()))
        })?;
        let rows: Vec<FileRow> = reader
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Domain(format!("bad source file {}: {e}", path.display())))?;
        if rows.is_empty() {
            return domain(format!("source file {} has no rows", path.display()));
        }
        for r in &rows {
            nonnegative(r.value)?;
        }
        Ok(rows)
    }

    /// Values at every mesh node, boundary nodes included.
    pub fn sample(&self, mesh: &Mesh, default_seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let nodes = 0..mesh.node_count();
        Ok(match self {
            Source::Constant { value } => vec![*value; mesh.node_count()],
            Source::RadialStep { radii, values } => nodes
                .map(|k| {
                    let r = mesh.radius(k);
                    values[radii.partition_point(|&b| b <= r)]
                })
                .collect(),
            Source::RandomStep { blocks, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed));
                let table: Vec<f64> = (0..blocks * blocks).map(|_| rng.gen::<f64>()).collect();
                let pts: Vec<[f64; 2]> = nodes.map(|k| mesh.planar_point(k)).collect();
                let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
                for p in &pts {
                    for d in 0..2 {
                        lo[d] = lo[d].min(p[d]);
                        hi[d] = hi[d].max(p[d]);
                    }
                }
                let cell = |d: usize, v: f64| {
                    let w = (hi[d] - lo[d]).max(f64::MIN_POSITIVE);
                    (((v - lo[d]) / w * *blocks as f64) as usize).min(blocks - 1)
                };
                pts.iter()
                    .map(|p| table[cell(1, p[1]) * blocks + cell(0, p[0])])
                    .collect()
            }
            Source::File { .. } => {
                let rows = self.read_file()?;
                nodes
                    .map(|k| {
                        let [x, y] = mesh.planar_point(k);
                        let mut best = (f64::INFINITY, 0.0);
                        for r in &rows {
                            let d = (r.x - x).powi(2) + (r.y - y).powi(2);
                            if d < best.0 {
                                best = (d, r.value);
                            }
                        }
                        best.1
                    })
                    .collect()
            }
        })
    }
}

fn nonnegative(v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return domain(format!(
            "source values must be finite and nonnegative, got {v}"
        ));
    }
    Ok(())
}
