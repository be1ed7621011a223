//! Binary network checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic            8 bytes  "SDQNNET\0"
//! version          u32      (1)
//! input, actions, atoms, fc_units, fc_layers, stream_units, stream_layers   u32 x 7
//! flags            u8       bit0 dueling, bit1 noisy, bit2 distributional
//! sigma0           f64
//! count_scale      f64
//! phase_scale      f64
//! layer_count      u32
//! per layer        u32 fan_in, u32 fan_out, u8 noisy
//! param_count      u64
//! params           f64 x param_count, in layer order (w, b, w_sigma, b_sigma)
//! ```

use std::io::{Read, Write};

use super::network::{NetworkShape, QNetwork};
use super::NetError;

pub const MAGIC: &[u8; 8] = b"SDQNNET\0";
pub const FORMAT_VERSION: u32 = 1;

/// How raw observation counts are mapped to network inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputScaling {
    pub count_scale: f64,
    pub phase_scale: f64,
}

fn put_u32<W: Write>(w: &mut W, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn get<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], NetError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| NetError::Checkpoint(format!("truncated checkpoint: {e}")))?;
    Ok(buf)
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32, NetError> {
    Ok(u32::from_le_bytes(get::<4, _>(r)?))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64, NetError> {
    Ok(f64::from_le_bytes(get::<8, _>(r)?))
}

/// Writes a raw little-endian f64 array prefixed by its u64 length.
pub fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<(), NetError> {
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        put_f64(w, *v)?;
    }
    Ok(())
}

pub fn read_f64s<R: Read>(r: &mut R) -> Result<Vec<f64>, NetError> {
    let n = u64::from_le_bytes(get::<8, _>(r)?) as usize;
    let mut bytes = vec![0u8; n.checked_mul(8).ok_or_else(|| NetError::Checkpoint("length overflow".into()))?];
    r.read_exact(&mut bytes).map_err(|e| NetError::Checkpoint(format!("truncated array: {e}")))?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
}

pub fn save_network<W: Write>(net: &QNetwork, scaling: InputScaling, w: &mut W) -> Result<(), NetError> {
    let s = net.shape();
    w.write_all(MAGIC)?;
    put_u32(w, FORMAT_VERSION)?;
    for v in [s.input, s.actions, s.atoms, s.fc_units, s.fc_layers, s.stream_units, s.stream_layers] {
        put_u32(w, v as u32)?;
    }
    let flags = (s.dueling as u8) | ((s.noisy as u8) << 1) | ((s.distributional as u8) << 2);
    w.write_all(&[flags])?;
    put_f64(w, s.sigma0)?;
    put_f64(w, scaling.count_scale)?;
    put_f64(w, scaling.phase_scale)?;
    put_u32(w, net.layers().len() as u32)?;
    for d in net.layers() {
        put_u32(w, d.fan_in as u32)?;
        put_u32(w, d.fan_out as u32)?;
        w.write_all(&[d.noisy as u8])?;
    }
    write_f64s(w, net.params())
}

/// Reads a checkpoint. When `expected` is given, any shape difference is an error.
pub fn load_network<R: Read>(
    r: &mut R,
    expected: Option<&NetworkShape>,
) -> Result<(QNetwork, InputScaling), NetError> {
    let magic = get::<8, _>(r)?;
    if &magic != MAGIC {
        return Err(NetError::Checkpoint("not a network checkpoint (bad magic)".into()));
    }
    let version = get_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(NetError::Checkpoint(format!("unsupported format version {version}")));
    }
    let mut dims = [0usize; 7];
    for d in &mut dims {
        *d = get_u32(r)? as usize;
    }
    let flags = get::<1, _>(r)?[0];
    let sigma0 = get_f64(r)?;
    let shape = NetworkShape {
        input: dims[0],
        actions: dims[1],
        atoms: dims[2],
        fc_units: dims[3],
        fc_layers: dims[4],
        stream_units: dims[5],
        stream_layers: dims[6],
        dueling: flags & 1 != 0,
        noisy: flags & 2 != 0,
        distributional: flags & 4 != 0,
        sigma0,
    };
    let scaling = InputScaling { count_scale: get_f64(r)?, phase_scale: get_f64(r)? };
    if let Some(exp) = expected {
        let same = NetworkShape { sigma0: exp.sigma0, ..shape.clone() } == *exp;
        if !same {
            return Err(NetError::ShapeMismatch(format!("checkpoint has {shape:?}, expected {exp:?}")));
        }
    }
    let mut net = QNetwork::zeroed(shape)?;
    let layer_count = get_u32(r)? as usize;
    if layer_count != net.layers().len() {
        return Err(NetError::ShapeMismatch(format!(
            "checkpoint lists {layer_count} layers, shape implies {}",
            net.layers().len()
        )));
    }
    for (i, d) in net.layers().to_vec().iter().enumerate() {
        let fan_in = get_u32(r)? as usize;
        let fan_out = get_u32(r)? as usize;
        let noisy = get::<1, _>(r)?[0] != 0;
        if (fan_in, fan_out, noisy) != (d.fan_in, d.fan_out, d.noisy) {
            return Err(NetError::ShapeMismatch(format!(
                "layer {i}: checkpoint {fan_in}x{fan_out} noisy={noisy}, expected {}x{} noisy={}",
                d.fan_in, d.fan_out, d.noisy
            )));
        }
    }
    let params = read_f64s(r)?;
    if params.len() != net.param_count() {
        return Err(NetError::ShapeMismatch(format!(
            "checkpoint has {} parameters, expected {}",
            params.len(),
            net.param_count()
        )));
    }
    net.params_mut().copy_from_slice(&params);
    Ok((net, scaling))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape() -> NetworkShape {
        NetworkShape {
            input: 5,
            actions: 2,
            atoms: 5,
            distributional: true,
            fc_units: 8,
            fc_layers: 2,
            stream_units: 4,
            stream_layers: 2,
            dueling: true,
            noisy: true,
            sigma0: 0.4,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = QNetwork::new(shape(), &mut rng).unwrap();
        let scaling = InputScaling { count_scale: 20.0, phase_scale: 2.0 };
        let mut buf = Vec::new();
        save_network(&net, scaling, &mut buf).unwrap();
        let (loaded, s) = load_network(&mut buf.as_slice(), Some(&shape())).unwrap();
        assert_eq!(s, scaling);
        assert_eq!(loaded.params(), net.params());
        assert_eq!(loaded.shape(), net.shape());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = QNetwork::new(shape(), &mut rng).unwrap();
        let mut buf = Vec::new();
        save_network(&net, InputScaling { count_scale: 20.0, phase_scale: 2.0 }, &mut buf).unwrap();
        let other = NetworkShape { actions: 4, ..shape() };
        assert!(matches!(load_network(&mut buf.as_slice(), Some(&other)), Err(NetError::ShapeMismatch(_))));
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(load_network(&mut &b"not a checkpoint at all"[..], None).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = QNetwork::new(shape(), &mut rng).unwrap();
        let mut buf = Vec::new();
        save_network(&net, InputScaling { count_scale: 20.0, phase_scale: 2.0 }, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(load_network(&mut buf.as_slice(), None).is_err());
    }
}
