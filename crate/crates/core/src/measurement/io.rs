//! Outcome files: one JSON header line, then `N` rows of `2n`
//! little-endian `f64` values `(Re ζ₁, Im ζ₁, …, Re ζₙ, Im ζₙ)`.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{OutcomeModel, OutcomeSamples, SchemeConfig};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

pub const OUTCOME_FORMAT: &str = "displearn-outcomes";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    n: usize,
    #[serde(rename = "N")]
    count: usize,
    scheme: SchemeConfig,
    model: OutcomeModel,
    seed: RandomStream,
    chunk_size: usize,
    channel_digest: String,
}

pub fn write_outcomes<W: Write>(mut w: W, samples: &OutcomeSamples) -> Result<()> {
    let header = Header {
        format: OUTCOME_FORMAT.into(),
        version: VERSION,
        n: samples.n,
        count: samples.len(),
        scheme: samples.scheme,
        model: samples.model,
        seed: samples.stream,
        chunk_size: samples.chunk_size,
        channel_digest: samples.channel_digest.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(16 * samples.as_flat().len());
    for z in samples.as_flat() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_outcomes<R: BufRead>(mut r: R) -> Result<OutcomeSamples> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim_end())?;
    if header.format != OUTCOME_FORMAT || header.version != VERSION {
        return Err(Error::Format(format!("unsupported header {}/{}", header.format, header.version)));
    }
    let values = header
        .count
        .checked_mul(header.n)
        .ok_or_else(|| Error::Format("row count overflows".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * values {
        return Err(Error::Format(format!("expected {} payload bytes, found {}", 16 * values, bytes.len())));
    }
    let zeta = bytes
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    OutcomeSamples::from_raw(
        header.n,
        header.scheme,
        header.model,
        header.channel_digest,
        header.seed,
        header.chunk_size,
        zeta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelSpec;
    use crate::measurement::sample_outcomes;

    #[test]
    fn round_trip() {
        let ch = ChannelSpec::five_peak_example(0.3, Complex64::new(1.6, 0.0)).unwrap();
        let cfg = SchemeConfig::new(1.5, 0.95, 0.9, 3.0).unwrap();
        let s = sample_outcomes(&ch, &cfg, 321, RandomStream::new(4, 2)).unwrap();
        let mut buf = Vec::new();
        write_outcomes(&mut buf, &s).unwrap();
        let header_len = buf.iter().position(|&b| b == b'\n').unwrap() + 1;
        assert_eq!(buf.len() - header_len, 321 * 16);
        let back = read_outcomes(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn truncated_payload_rejected() {
        let ch = ChannelSpec::depolarizing(2, 0.3).unwrap();
        let s = sample_outcomes(&ch, &SchemeConfig::ideal(1.0).unwrap(), 10, RandomStream::root(0)).unwrap();
        let mut buf = Vec::new();
        write_outcomes(&mut buf, &s).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_outcomes(&buf[..]), Err(Error::Format(_))));
    }
}
