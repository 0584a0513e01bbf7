//! Weight file: little-endian, `RLQPNET1`, then the spec as u32 words
//! (input width, hidden count, hidden widths, output width, hidden activation,
//! output activation), then every parameter as f64 in layer order.

use std::io::{Read, Write};
use std::path::Path;

use crate::Real;

use super::{Activation, Mlp, MlpSpec, NnError};

pub const MAGIC: &[u8; 8] = b"RLQPNET1";

pub fn write_weights<T: Real, W: Write>(net: &Mlp<T>, mut w: W) -> Result<(), NnError> {
    let spec = net.spec();
    w.write_all(MAGIC)?;
    let mut words = vec![spec.input_width as u32, spec.hidden.len() as u32];
    words.extend(spec.hidden.iter().map(|&h| h as u32));
    words.push(spec.output_width as u32);
    words.push(spec.hidden_activation.code());
    words.push(spec.output_activation.code());
    for word in words {
        w.write_all(&word.to_le_bytes())?;
    }
    for &p in net.params() {
        w.write_all(&p.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|_| NnError::Format("truncated header".into()))?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_weights<T: Real, R: Read>(mut r: R) -> Result<Mlp<T>, NnError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| NnError::Format("truncated magic".into()))?;
    if &magic != MAGIC {
        return Err(NnError::Format("bad magic".into()));
    }
    let input_width = read_u32(&mut r)? as usize;
    let hidden_count = read_u32(&mut r)? as usize;
    if hidden_count > 16 {
        return Err(NnError::Format(format!("{hidden_count} hidden layers")));
    }
    let hidden = (0..hidden_count).map(|_| read_u32(&mut r).map(|h| h as usize)).collect::<Result<Vec<_>, _>>()?;
    let output_width = read_u32(&mut r)? as usize;
    let act = |code: u32| Activation::from_code(code).ok_or_else(|| NnError::Format(format!("activation code {code}")));
    let hidden_activation = act(read_u32(&mut r)?)?;
    let output_activation = act(read_u32(&mut r)?)?;
    let spec = MlpSpec { input_width, hidden, output_width, hidden_activation, output_activation };
    spec.validate().map_err(|e| NnError::Format(e.to_string()))?;

    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != spec.num_params() * 8 {
        return Err(NnError::Format(format!(
            "{} parameter bytes, spec needs {}",
            body.len(),
            spec.num_params() * 8
        )));
    }
    let params = body
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
        .collect();
    Mlp::from_params(spec, params)
}

pub fn save_weights<T: Real>(net: &Mlp<T>, path: impl AsRef<Path>) -> Result<(), NnError> {
    let mut buf = Vec::new();
    write_weights(net, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_weights<T: Real>(path: impl AsRef<Path>) -> Result<Mlp<T>, NnError> {
    let bytes = std::fs::read(path)?;
    read_weights(bytes.as_slice())
}
