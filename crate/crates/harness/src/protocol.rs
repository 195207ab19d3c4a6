//! Length-framed modulation service over byte streams.
//!
//! Every frame is a 4-byte big-endian payload length followed by the payload.
//!
//! Request payload (header fields big-endian):
//!
//! | size | content                               |
//! |------|---------------------------------------|
//! | 1    | command, `0x01` = MODULATE            |
//! | 4    | timestep t (u32)                      |
//! | 4    | horizon T (u32)                       |
//! | 4    | alpha (f32)                           |
//! | 4    | sigma (f32)                           |
//! | 1    | kind, 0 = gaussian, 1 = linear        |
//! | ...  | original latent, LatentFile encoding  |
//! | ...  | refined latent, LatentFile encoding   |
//!
//! Response payload: `0x00` plus the modulated latent as a LatentFile (same
//! dims as the refined input), or `0x01` plus a UTF-8 error message.

use std::io::{self, Read, Write};

use fmm_core::{modulate, WeightKind, WeightParams};

use crate::error::{HarnessError, Result};
use crate::latent_file::LatentFile;

pub const CMD_MODULATE: u8 = 0x01;
pub const STATUS_OK: u8 = 0x00;
pub const STATUS_ERROR: u8 = 0x01;
/// Frames above this size are drained and answered with an error.
pub const MAX_FRAME: u32 = 1 << 28;
const HEADER_LEN: usize = 18;

#[derive(Debug, Clone, PartialEq)]
pub struct ModulateRequest {
    pub t: u32,
    pub horizon: u32,
    pub alpha: f32,
    pub sigma: f32,
    pub kind: WeightKind,
    pub original: LatentFile,
    pub refined: LatentFile,
}

impl ModulateRequest {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![CMD_MODULATE];
        out.extend_from_slice(&self.t.to_be_bytes());
        out.extend_from_slice(&self.horizon.to_be_bytes());
        out.extend_from_slice(&self.alpha.to_be_bytes());
        out.extend_from_slice(&self.sigma.to_be_bytes());
        out.push(match self.kind {
            WeightKind::Gaussian => 0,
            WeightKind::Linear => 1,
        });
        out.extend(self.original.encode());
        out.extend(self.refined.encode());
        out
    }

    pub fn decode(payload: &[u8]) -> std::result::Result<Self, String> {
        let cmd = *payload.first().ok_or("empty frame")?;
        if cmd != CMD_MODULATE {
            return Err(format!("unknown command 0x{cmd:02x}"));
        }
        if payload.len() < HEADER_LEN {
            return Err(format!("header needs {HEADER_LEN} bytes, frame has {}", payload.len()));
        }
        let be = |o: usize| <[u8; 4]>::try_from(&payload[o..o + 4]).unwrap();
        let kind = match payload[17] {
            0 => WeightKind::Gaussian,
            1 => WeightKind::Linear,
            k => return Err(format!("unknown weight kind {k}")),
        };
        let rest = &payload[HEADER_LEN..];
        let (original, used) = LatentFile::decode_prefix(rest).map_err(|e| format!("original latent: {e}"))?;
        let refined = LatentFile::decode(&rest[used..]).map_err(|e| format!("refined latent: {e}"))?;
        Ok(Self {
            t: u32::from_be_bytes(be(1)),
            horizon: u32::from_be_bytes(be(5)),
            alpha: f32::from_be_bytes(be(9)),
            sigma: f32::from_be_bytes(be(13)),
            kind,
            original,
            refined,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Ok(LatentFile),
    Error(String),
}

impl Response {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            Response::Ok(latent) => {
                let mut out = vec![STATUS_OK];
                out.extend(latent.encode());
                out
            }
            Response::Error(msg) => {
                let mut out = vec![STATUS_ERROR];
                out.extend_from_slice(msg.as_bytes());
                out
            }
        }
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        match payload.split_first() {
            Some((&STATUS_OK, rest)) => Ok(Response::Ok(LatentFile::decode(rest)?)),
            Some((&STATUS_ERROR, rest)) => Ok(Response::Error(String::from_utf8_lossy(rest).into_owned())),
            Some((s, _)) => Err(HarnessError::Protocol(format!("unknown status byte 0x{s:02x}"))),
            None => Err(HarnessError::Protocol("empty response".into())),
        }
    }
}

/// Strips leading unit dims so `(1, C, H, W)` batches are accepted.
fn squeeze(latent: &LatentFile) -> LatentFile {
    let mut dims = latent.dims.as_slice();
    while dims.len() > 3 && dims[0] == 1 {
        dims = &dims[1..];
    }
    LatentFile { dims: dims.to_vec(), values: latent.values.clone() }
}

pub fn handle(req: &ModulateRequest) -> std::result::Result<LatentFile, String> {
    if req.original.dims != req.refined.dims {
        return Err(format!("dims differ: {:?} vs {:?}", req.original.dims, req.refined.dims));
    }
    let params = WeightParams::new(f64::from(req.alpha), f64::from(req.sigma), req.kind, req.horizon as usize)
        .map_err(|e| e.to_string())?;
    let ori = squeeze(&req.original).to_field().map_err(|e| e.to_string())?;
    let refd = squeeze(&req.refined).to_field().map_err(|e| e.to_string())?;
    let out = modulate(&ori, &refd, req.t as usize, &params).map_err(|e| e.to_string())?;
    Ok(LatentFile { dims: req.refined.dims.clone(), values: out.data().iter().map(|&x| x as f32).collect() })
}

pub fn write_frame(w: &mut impl Write, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()
}

/// Reads as many bytes as available up to `buf.len()`; returns the count.
fn read_full(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => break,
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(got)
}

pub enum Frame {
    Payload(Vec<u8>),
    Oversized(u32),
    End,
}

/// Reads one frame. End of stream before any byte is a clean [`Frame::End`];
/// end of stream inside a frame is an error.
pub fn read_frame(r: &mut impl Read) -> Result<Frame> {
    let mut len = [0u8; 4];
    match read_full(r, &mut len)? {
        0 => return Ok(Frame::End),
        4 => {}
        n => return Err(HarnessError::Protocol(format!("stream ended inside frame length ({n} of 4 bytes)"))),
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME {
        let drained = io::copy(&mut r.take(u64::from(len)), &mut io::sink())?;
        if drained < u64::from(len) {
            return Err(HarnessError::Protocol(format!("stream ended inside oversized frame ({drained} of {len} bytes)")));
        }
        return Ok(Frame::Oversized(len));
    }
    let mut payload = vec![0u8; len as usize];
    let got = read_full(r, &mut payload)?;
    if got < payload.len() {
        return Err(HarnessError::Protocol(format!("stream ended inside frame ({got} of {len} bytes)")));
    }
    Ok(Frame::Payload(payload))
}

/// Serves requests until end of stream. Returns the number of frames answered.
/// Malformed requests get an error response and the loop continues.
pub fn serve<R: Read, W: Write>(mut input: R, mut output: W) -> Result<u64> {
    let mut served = 0;
    loop {
        let response = match read_frame(&mut input)? {
            Frame::End => return Ok(served),
            Frame::Oversized(len) => Response::Error(format!("frame of {len} bytes exceeds limit {MAX_FRAME}")),
            Frame::Payload(p) => match ModulateRequest::decode(&p).and_then(|req| handle(&req)) {
                Ok(latent) => Response::Ok(latent),
                Err(msg) => Response::Error(msg),
            },
        };
        write_frame(&mut output, &response.encode())?;
        served += 1;
    }
}
