//! Binary frame messages sent over the stream.
//!
//! Each websocket binary message is a 32-byte little-endian header followed
//! by the payload:
//!
//! | offset | type | field         |
//! |--------|------|---------------|
//! | 0      | u64  | generation    |
//! | 8      | u32  | channel       |
//! | 12     | u32  | width         |
//! | 16     | u32  | height        |
//! | 20     | u32  | encoding      |
//! | 24     | f64  | frame_time_ms |
//!
//! With encoding [`ENCODING_RAW`] the payload is `width * height` RGBA8
//! pixels, rows from the top of the image down.

use thiserror::Error;

pub const HEADER_BYTES: usize = 32;
pub const ENCODING_RAW: u32 = 0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameHeader {
    pub generation: u64,
    pub channel: u32,
    pub width: u32,
    pub height: u32,
    pub encoding: u32,
    pub frame_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub header: FrameHeader,
    pub payload: Vec<u8>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("message of {0} bytes is shorter than the frame header")]
    Short(usize),
    #[error("unknown encoding {0}")]
    Encoding(u32),
    #[error("payload of {got} bytes, expected {expected}")]
    PayloadSize { got: usize, expected: usize },
}

impl FrameHeader {
    pub fn encode(&self) -> [u8; HEADER_BYTES] {
        let mut out = [0u8; HEADER_BYTES];
        out[0..8].copy_from_slice(&self.generation.to_le_bytes());
        out[8..12].copy_from_slice(&self.channel.to_le_bytes());
        out[12..16].copy_from_slice(&self.width.to_le_bytes());
        out[16..20].copy_from_slice(&self.height.to_le_bytes());
        out[20..24].copy_from_slice(&self.encoding.to_le_bytes());
        out[24..32].copy_from_slice(&self.frame_time_ms.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() < HEADER_BYTES {
            return Err(DecodeError::Short(bytes.len()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        Ok(Self {
            generation: u64::from_le_bytes(bytes[0..8].try_into().unwrap()),
            channel: u32_at(8),
            width: u32_at(12),
            height: u32_at(16),
            encoding: u32_at(20),
            frame_time_ms: f64::from_le_bytes(bytes[24..32].try_into().unwrap()),
        })
    }
}

impl Frame {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + self.payload.len());
        out.extend_from_slice(&self.header.encode());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let header = FrameHeader::decode(bytes)?;
        if header.encoding != ENCODING_RAW {
            return Err(DecodeError::Encoding(header.encoding));
        }
        let payload = &bytes[HEADER_BYTES..];
        let expected = 4 * header.width as usize * header.height as usize;
        if payload.len() != expected {
            return Err(DecodeError::PayloadSize {
                got: payload.len(),
                expected,
            });
        }
        Ok(Self {
            header,
            payload: payload.to_vec(),
        })
    }
}
