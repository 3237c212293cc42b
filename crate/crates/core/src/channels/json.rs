//! Channel files: `{"in_dims":[..],"out_dims":[..],"kraus":[[[re,im],..],..],"label":".."}`.
//! Each Kraus operator is a flat row-major list of `out_dim × in_dim` complex entries.
//! A file holds one channel object or an array of them (a compound set).

use serde::{Deserialize, Serialize};

use super::compound::CompoundSet;
use super::kraus::KrausChannel;
use crate::error::{Error, Result};
use crate::qmatrix::subsystem::total_dim;
use crate::qmatrix::{ComplexMatrix, C64};

/// CPTP tolerance applied when loading.
pub const LOAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub kraus: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FileSpec {
    One(ChannelSpec),
    Many(Vec<ChannelSpec>),
}

impl ChannelSpec {
    pub fn from_channel(ch: &KrausChannel, label: Option<String>) -> Self {
        Self {
            in_dims: ch.in_dims().to_vec(),
            out_dims: ch.out_dims().to_vec(),
            kraus: ch.kraus().iter().map(|k| k.data().iter().map(|z| [z.re, z.im]).collect()).collect(),
            label,
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        if self.in_dims.is_empty() || self.out_dims.is_empty() || self.in_dims.contains(&0) || self.out_dims.contains(&0) {
            return Err(Error::Format("dimension lists must be nonempty and positive".into()));
        }
        if self.kraus.is_empty() {
            return Err(Error::Format("no Kraus operators".into()));
        }
        let (din, dout) = (total_dim(&self.in_dims), total_dim(&self.out_dims));
        let mut ops = Vec::with_capacity(self.kraus.len());
        for (i, flat) in self.kraus.iter().enumerate() {
            if flat.len() != din * dout {
                return Err(Error::Format(format!("Kraus operator {i} has {} entries, expected {}", flat.len(), din * dout)));
            }
            let data = flat.iter().map(|&[re, im]| C64::new(re, im)).collect();
            ops.push(ComplexMatrix::from_vec(dout, din, data).map_err(|e| Error::Format(e.to_string()))?);
        }
        KrausChannel::with_tolerance(ops, self.in_dims.clone(), self.out_dims.clone(), LOAD_TOL)
    }
}

/// Parse one channel or an array, returning a compound set.
pub fn parse_compound(text: &str) -> Result<CompoundSet> {
    let parsed: FileSpec = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let specs = match parsed {
        FileSpec::One(s) => vec![s],
        FileSpec::Many(v) => v,
    };
    if specs.is_empty() {
        return Err(Error::Format("empty channel list".into()));
    }
    let mut members = Vec::with_capacity(specs.len());
    let mut labels = Vec::with_capacity(specs.len());
    for (i, s) in specs.iter().enumerate() {
        members.push(s.to_channel()?);
        labels.push(s.label.clone().unwrap_or_else(|| format!("s{i}")));
    }
    CompoundSet::new(members, labels)
}

pub fn load_compound(path: &std::path::Path) -> Result<CompoundSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_compound(&text)
}

pub fn compound_to_json(set: &CompoundSet) -> Result<String> {
    let specs: Vec<ChannelSpec> =
        set.members().iter().zip(set.labels()).map(|(m, l)| ChannelSpec::from_channel(m, Some(l.clone()))).collect();
    Ok(serde_json::to_string_pretty(&specs)?)
}
