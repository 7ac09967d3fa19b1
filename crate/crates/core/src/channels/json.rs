//! JSON document form of a channel:
//! `{"n":int, "sigma":real, "peaks":[{"w":[re,im], "center":[[re,im],…]}]}`.
//! A peak may carry an optional `"width"` overriding `sigma`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChannelSpec, Peak};
use crate::error::{Error, Result};
use crate::numerics::ComplexVec;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeakDoc {
    w: [f64; 2],
    center: ComplexVec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    n: usize,
    sigma: f64,
    peaks: Vec<PeakDoc>,
}

impl Serialize for ChannelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelDoc {
            n: self.n,
            sigma: self.sigma,
            peaks: self
                .peaks
                .iter()
                .map(|p| PeakDoc { w: [p.weight.re, p.weight.im], center: p.center.clone(), width: p.width })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChannelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ChannelDoc::deserialize(d)?;
        let peaks = doc
            .peaks
            .into_iter()
            .map(|p| Peak { weight: Complex64::new(p.w[0], p.w[1]), center: p.center, width: p.width })
            .collect();
        ChannelSpec::new(doc.n, doc.sigma, peaks).map_err(serde::de::Error::custom)
    }
}

impl ChannelSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(Error::from)
    }

    /// Hex SHA-256 of the canonical JSON document.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}
