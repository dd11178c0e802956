use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Signal;

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    channels: u16,
    bits: u16,
    float: bool,
}

fn check_format(b: &[u8], body: usize, size: usize) -> Result<Layout> {
    if size < 16 {
        return Err(Error::input(
            Some(body as u64 - 4),
            format!("fmt chunk of {size} bytes, need at least 16"),
        ));
    }
    let mut tag = u16_at(b, body);
    if tag == FORMAT_EXTENSIBLE {
        if size < 40 {
            return Err(Error::input(
                Some(body as u64 - 4),
                format!("extensible fmt chunk of {size} bytes, need 40"),
            ));
        }
        tag = u16_at(b, body + 24);
    }
    let channels = u16_at(b, body + 2);
    let rate = u32_at(b, body + 4);
    let bits = u16_at(b, body + 14);
    let float = match tag {
        FORMAT_PCM => false,
        FORMAT_FLOAT => true,
        other => {
            return Err(Error::input(
                Some(body as u64),
                format!("unsupported encoding tag {other:#06x}, expected PCM or IEEE float"),
            ))
        }
    };
    if !(1..=2).contains(&channels) {
        return Err(Error::input(
            Some(body as u64 + 2),
            format!("{channels} channels, expected 1 or 2"),
        ));
    }
    if rate == 0 {
        return Err(Error::input(Some(body as u64 + 4), "sample rate of 0 Hz"));
    }
    let supported = if float { bits == 32 } else { bits == 16 || bits == 32 };
    if !supported {
        let kind = if float { "float" } else { "integer" };
        return Err(Error::input(
            Some(body as u64 + 14),
            format!("unsupported {bits}-bit {kind} samples, expected 16/32-bit integer or 32-bit float"),
        ));
    }
    Ok(Layout { channels, bits, float })
}

/// Walks the RIFF chunks, checking everything the decoder would otherwise
/// report without a position.
fn prescan(b: &[u8]) -> Result<Layout> {
    if b.len() < 12 {
        return Err(Error::input(
            Some(0),
            format!("{} bytes, too short for a RIFF header", b.len()),
        ));
    }
    if &b[0..4] != b"RIFF" {
        return Err(Error::input(Some(0), "missing RIFF tag"));
    }
    if &b[8..12] != b"WAVE" {
        return Err(Error::input(Some(8), "missing WAVE tag"));
    }
    let mut pos = 12;
    let mut layout = None;
    loop {
        if pos + 8 > b.len() {
            return Err(Error::input(
                Some(pos as u64),
                if layout.is_none() { "no fmt chunk" } else { "no data chunk" },
            ));
        }
        let id = &b[pos..pos + 4];
        let size = u32_at(b, pos + 4) as usize;
        let body = pos + 8;
        if id == b"fmt " {
            if body + size.min(40) > b.len() || body + 16 > b.len() {
                return Err(Error::input(Some(pos as u64), "fmt chunk cut short"));
            }
            layout = Some(check_format(b, body, size)?);
        } else if id == b"data" {
            let Some(l) = layout else {
                return Err(Error::input(Some(pos as u64), "data chunk before fmt chunk"));
            };
            let actual = b.len() - body;
            if actual < size {
                return Err(Error::input(
                    Some(pos as u64 + 4),
                    format!("truncated data chunk: expected {size} bytes of sample data, found {actual}"),
                ));
            }
            let frame = l.channels as usize * l.bits as usize / 8;
            if size % frame != 0 {
                return Err(Error::input(
                    Some(pos as u64 + 4),
                    format!("data length {size} is not a whole number of {frame}-byte frames"),
                ));
            }
            return Ok(l);
        }
        pos = body + size + (size & 1);
    }
}

/// Decodes an in-memory WAV file into one signal per channel.
pub fn decode_wav(bytes: &[u8]) -> Result<Vec<Signal>> {
    let layout = prescan(bytes)?;
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(|e| Error::input(None, e.to_string()))?;
    let spec = reader.spec();
    let fs = spec.sample_rate as f64;
    let n_ch = layout.channels as usize;
    let decode_err = |e: hound::Error| Error::input(None, e.to_string());
    let interleaved: Vec<f64> = if layout.float {
        reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(decode_err)?
    } else {
        let scale = 2f64.powi(layout.bits as i32 - 1);
        reader
            .into_samples::<i32>()
            .map(|s| s.map(|v| v as f64 / scale))
            .collect::<std::result::Result<_, _>>()
            .map_err(decode_err)?
    };
    (0..n_ch)
        .map(|c| {
            Signal::new(interleaved.iter().skip(c).step_by(n_ch).copied().collect(), fs)
                .map_err(|e| Error::input(None, e.to_string()))
        })
        .collect()
}

/// Reads a 16/32-bit integer or 32-bit float WAV file with one or two channels.
pub fn read_wav(path: &Path) -> Result<Vec<Signal>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes).map_err(|e| match e {
        Error::Input { offset, message } => Error::Input {
            offset,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}
