//! PCM16 mono WAV and raw float32 ingestion.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Signal;

const PCM_SCALE: f64 = 32768.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub sample_rate: u32,
    pub signal: Signal,
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

/// Decodes a PCM16 mono little-endian WAV image. Samples map to `[-1, 1)`
/// by division by 32768.
pub fn parse_wav(bytes: &[u8]) -> Result<WavAudio> {
    if bytes.len() < 12 {
        return Err(Error::Parse("file shorter than a RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Parse("missing RIFF/WAVE signature".into()));
    }

    let mut pos = 12;
    let mut format: Option<(u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::Parse(format!("chunk {:?} runs past end of file", String::from_utf8_lossy(id))))?;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::Parse("fmt chunk shorter than 16 bytes".into()));
                }
                let audio_format = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let sample_rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                if audio_format != 1 {
                    return Err(Error::UnsupportedFormat(format!(
                        "audio format {audio_format}, only PCM (1) is supported"
                    )));
                }
                if channels != 1 {
                    return Err(Error::UnsupportedFormat(format!(
                        "{channels} channels, only mono is supported"
                    )));
                }
                if bits != 16 {
                    return Err(Error::UnsupportedFormat(format!(
                        "{bits}-bit samples, only 16-bit is supported"
                    )));
                }
                format = Some((sample_rate, bits));
            }
            b"data" => {
                let (sample_rate, _) = format
                    .ok_or_else(|| Error::Parse("data chunk before fmt chunk".into()))?;
                if size % 2 != 0 {
                    return Err(Error::Parse("odd-sized PCM16 data chunk".into()));
                }
                let samples: Vec<f64> = bytes[body..end]
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / PCM_SCALE)
                    .collect();
                let signal = Signal::from_samples(samples)
                    .map_err(|_| Error::Parse("empty data chunk".into()))?;
                return Ok(WavAudio {
                    sample_rate,
                    signal,
                });
            }
            _ => {}
        }
        // Chunks are word aligned.
        pos = end + (size & 1);
    }
    Err(Error::Parse("no data chunk".into()))
}

pub fn load_wav(path: impl AsRef<Path>) -> Result<WavAudio> {
    parse_wav(&fs::read(path)?)
}

/// Encodes samples as PCM16 mono, rounding `s * 32768` and saturating.
pub fn encode_wav(signal: &Signal, sample_rate: u32) -> Vec<u8> {
    let data_len = signal.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in signal.samples() {
        let q = (s * PCM_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

pub fn write_wav(path: impl AsRef<Path>, signal: &Signal, sample_rate: u32) -> Result<()> {
    fs::write(path, encode_wav(signal, sample_rate))?;
    Ok(())
}

/// Contiguous little-endian float32 samples.
pub fn parse_raw(bytes: &[u8]) -> Result<Signal> {
    if bytes.is_empty() || bytes.len() % 4 != 0 {
        return Err(Error::Parse(format!(
            "raw float32 file length {} is not a positive multiple of 4",
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let signal = Signal::from_samples(samples)?;
    signal.check_finite()?;
    Ok(signal)
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<Signal> {
    parse_raw(&fs::read(path)?)
}

pub fn write_raw(path: impl AsRef<Path>, signal: &Signal) -> Result<()> {
    let bytes: Vec<u8> = signal
        .samples()
        .iter()
        .flat_map(|&s| (s as f32).to_le_bytes())
        .collect();
    fs::write(path, bytes)?;
    Ok(())
}

/// Loads `.wav` files as PCM16 WAV and anything else as raw float32.
pub fn load_signal(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let is_wav = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    if is_wav {
        Ok(load_wav(path)?.signal)
    } else {
        load_raw(path)
    }
}
