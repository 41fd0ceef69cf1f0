//! Binary policy format, little-endian throughout:
//!
//! ```text
//! magic "SHQN" | version u32 | flags u8 (bit 0 map, bit 1 normalized costs)
//! | 3 reserved bytes | layer-size count u32 | sizes u32… | parameters f64…
//! ```
//!
//! Parameters follow the network's layout: each layer's weight matrix in
//! row-major `out × in` order, then its biases.

use std::io::{Read, Write};

use super::network::QNetwork;
use super::observation::ObservationEncoding;
use super::DqnError;

pub const POLICY_MAGIC: [u8; 4] = *b"SHQN";
pub const POLICY_VERSION: u32 = 1;

const FLAG_MAP: u8 = 1;
const FLAG_NORMALIZED: u8 = 2;
const MAX_LAYERS: u32 = 64;
const MAX_WIDTH: u32 = 1 << 16;

pub fn write_policy<W: Write>(mut out: W, net: &QNetwork, encoding: ObservationEncoding) -> Result<(), DqnError> {
    out.write_all(&POLICY_MAGIC)?;
    out.write_all(&POLICY_VERSION.to_le_bytes())?;
    let mut flags = 0u8;
    if encoding.with_map {
        flags |= FLAG_MAP;
    }
    if encoding.normalize_costs {
        flags |= FLAG_NORMALIZED;
    }
    out.write_all(&[flags, 0, 0, 0])?;
    out.write_all(&(net.sizes().len() as u32).to_le_bytes())?;
    for &s in net.sizes() {
        out.write_all(&(s as u32).to_le_bytes())?;
    }
    for p in net.params() {
        out.write_all(&p.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, DqnError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_policy<R: Read>(mut input: R) -> Result<(QNetwork, ObservationEncoding), DqnError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if magic != POLICY_MAGIC {
        return Err(DqnError::PolicyFormat("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != POLICY_VERSION {
        return Err(DqnError::PolicyFormat(format!("unsupported version {version}")));
    }
    let mut flags = [0u8; 4];
    input.read_exact(&mut flags)?;
    let encoding =
        ObservationEncoding { with_map: flags[0] & FLAG_MAP != 0, normalize_costs: flags[0] & FLAG_NORMALIZED != 0 };

    let count = read_u32(&mut input)?;
    if !(2..=MAX_LAYERS).contains(&count) {
        return Err(DqnError::PolicyFormat(format!("implausible layer count {count}")));
    }
    let mut sizes = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let s = read_u32(&mut input)?;
        if s == 0 || s > MAX_WIDTH {
            return Err(DqnError::PolicyFormat(format!("implausible layer width {s}")));
        }
        sizes.push(s as usize);
    }
    let n: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    let mut params = Vec::with_capacity(n);
    let mut b = [0u8; 8];
    for _ in 0..n {
        input.read_exact(&mut b)?;
        params.push(f64::from_le_bytes(b));
    }
    if input.read(&mut b)? != 0 {
        return Err(DqnError::PolicyFormat("trailing bytes".into()));
    }
    let net = QNetwork::from_parts(sizes, params).ok_or_else(|| DqnError::PolicyFormat("bad layout".into()))?;
    Ok((net, encoding))
}
