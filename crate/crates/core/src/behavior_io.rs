//! JSON file schema for behavior tables:
//! `{ "d": d, "joints": { "A1B1": [[...], ...], ... } }`
//! with each joint a d x d row-major array of probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hvt::{BehaviorTable, JointDistribution};
use crate::scalar::Tolerances;
use crate::sequences::SettingPair;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviorFile {
    pub d: usize,
    pub joints: BehaviorJoints,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct BehaviorJoints {
    pub A1B1: Vec<Vec<f64>>,
    pub A1B2: Vec<Vec<f64>>,
    pub A2B1: Vec<Vec<f64>>,
    pub A2B2: Vec<Vec<f64>>,
}

impl BehaviorFile {
    pub fn from_behavior(b: &BehaviorTable<f64>) -> Self {
        let table = |pair: SettingPair| -> Vec<Vec<f64>> {
            let j = b.joint(pair);
            (0..b.d())
                .map(|alpha| (0..b.d()).map(|beta| j.get(alpha, beta)).collect())
                .collect()
        };
        BehaviorFile {
            d: b.d(),
            joints: BehaviorJoints {
                A1B1: table(SettingPair::A1B1),
                A1B2: table(SettingPair::A1B2),
                A2B1: table(SettingPair::A2B1),
                A2B2: table(SettingPair::A2B2),
            },
        }
    }

    /// Validates shapes and probability constraints while converting.
    pub fn into_behavior(self, tol: &Tolerances<f64>) -> Result<BehaviorTable<f64>> {
        let d = self.d;
        let flatten = |name: &str, rows: &[Vec<f64>]| -> Result<Vec<f64>> {
            if rows.len() != d {
                return Err(Error::InvalidInput(format!(
                    "joints.{name}: expected {d} rows, found {}",
                    rows.len()
                )));
            }
            let mut out = Vec::with_capacity(d * d);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != d {
                    return Err(Error::InvalidInput(format!(
                        "joints.{name} row {i}: expected {d} entries, found {}",
                        row.len()
                    )));
                }
                out.extend_from_slice(row);
            }
            Ok(out)
        };
        let make = |name: &str, pair: SettingPair, rows: &[Vec<f64>]| -> Result<JointDistribution<f64>> {
            JointDistribution::new(d, pair, flatten(name, rows)?, tol).map_err(|e| {
                Error::InvalidInput(format!("joints.{name}: {e}"))
            })
        };
        BehaviorTable::new([
            make("A1B1", SettingPair::A1B1, &self.joints.A1B1)?,
            make("A1B2", SettingPair::A1B2, &self.joints.A1B2)?,
            make("A2B1", SettingPair::A2B1, &self.joints.A2B1)?,
            make("A2B2", SettingPair::A2B2, &self.joints.A2B2)?,
        ])
    }
}

/// Parses a behavior table from JSON text with field-level diagnostics.
pub fn parse_behavior(json: &str, tol: &Tolerances<f64>) -> Result<BehaviorTable<f64>> {
    let file: BehaviorFile = serde_json::from_str(json)
        .map_err(|e| Error::InvalidInput(format!("behavior JSON: {e}")))?;
    file.into_behavior(tol)
}
