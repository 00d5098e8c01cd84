//! Binary checkpoints: full-precision (ω̂, ĵ) state plus the diagnostic
//! accumulators, so a restarted run reproduces the original series
//! bit-for-bit.
//!
//! Layout (all little-endian, fixed width):
//!
//! | offset | size     | field                                  |
//! |--------|----------|----------------------------------------|
//! | 0      | 7        | magic `"GMHD2D\0"`                     |
//! | 7      | 4        | version (u32) = 1                      |
//! | 11     | 4        | n (u32)                                |
//! | 15     | 8        | box_length (f64)                       |
//! | 23     | 8        | time (f64)                             |
//! | 31     | 32       | nu, alpha, kappa, beta (4 × f64)       |
//! | 63     | 4        | accumulator count (u32) = 12           |
//! | 67     | 96       | diagnostic accumulators (12 × f64)     |
//! | 163    | 2·n²·16  | payload: ω̂ then ĵ, row-major, (re, im) |

use gmhd2d_core::diagnostics::DiagAccumulators;
use gmhd2d_core::dynamics::PhysicsParams;
use gmhd2d_core::fields::FlowState;
use gmhd2d_core::grid::Grid2D;
use gmhd2d_core::spectral::SpectralField;
use gmhd2d_core::Complex64;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 7] = b"GMHD2D\0";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 7 + 4 + 4 + 8 + 8 + 32 + 4 + 96;

#[derive(Debug)]
pub enum CheckpointError {
    Io(std::io::Error),
    BadMagic {
        offset: usize,
    },
    BadVersion {
        got: u32,
    },
    /// File ended inside the named field.
    Truncated {
        field: &'static str,
        offset: usize,
    },
    /// Payload length disagrees with the header's n.
    PayloadSize {
        expected: usize,
        got: usize,
    },
    BadField {
        field: &'static str,
        detail: String,
    },
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::Io(e) => write!(f, "checkpoint io error: {e}"),
            CheckpointError::BadMagic { offset } => {
                write!(
                    f,
                    "checkpoint field 'magic' at offset {offset}: not a GMHD2D checkpoint"
                )
            }
            CheckpointError::BadVersion { got } => {
                write!(f, "checkpoint field 'version': unsupported version {got}")
            }
            CheckpointError::Truncated { field, offset } => {
                write!(
                    f,
                    "checkpoint truncated in field '{field}' at offset {offset}"
                )
            }
            CheckpointError::PayloadSize { expected, got } => {
                write!(
                    f,
                    "checkpoint field 'payload': expected {expected} bytes, found {got}"
                )
            }
            CheckpointError::BadField { field, detail } => {
                write!(f, "checkpoint field '{field}': {detail}")
            }
        }
    }
}

impl std::error::Error for CheckpointError {}

impl From<std::io::Error> for CheckpointError {
    fn from(e: std::io::Error) -> Self {
        CheckpointError::Io(e)
    }
}

/// Parsed checkpoint header (the `inspect` verb prints this).
#[derive(Debug, Clone)]
pub struct Header {
    pub version: u32,
    pub n: u32,
    pub box_length: f64,
    pub time: f64,
    pub params: PhysicsParams,
    pub accumulators: DiagAccumulators,
}

impl fmt::Display for Header {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "version          {}", self.version)?;
        writeln!(f, "n                {}", self.n)?;
        writeln!(f, "box_length       {}", self.box_length)?;
        writeln!(f, "time             {}", self.time)?;
        writeln!(f, "nu               {}", self.params.nu)?;
        writeln!(f, "alpha            {}", self.params.alpha)?;
        writeln!(f, "kappa            {}", self.params.kappa)?;
        writeln!(f, "beta             {}", self.params.beta)?;
        writeln!(f, "bkm_integral     {}", self.accumulators.bkm_integral)?;
        write!(
            f,
            "int_grad_j_sq    {}",
            self.accumulators.int_linf_grad_j_sq
        )
    }
}

pub fn write_checkpoint(
    path: &Path,
    state: &FlowState,
    params: &PhysicsParams,
    acc: &DiagAccumulators,
) -> Result<(), CheckpointError> {
    let grid = state.grid();
    let n = grid.n();
    let mut buf = Vec::with_capacity(HEADER_LEN + 2 * n * n * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&grid.box_length().to_le_bytes());
    buf.extend_from_slice(&state.time().to_le_bytes());
    for v in [params.nu, params.alpha, params.kappa, params.beta] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&(DiagAccumulators::COUNT as u32).to_le_bytes());
    for v in acc.to_array() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for field in [state.omega_hat(), state.j_hat()] {
        for c in field.coeffs() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    file.sync_all()?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, field: &'static str) -> Result<&'a [u8], CheckpointError> {
        if self.pos + len > self.bytes.len() {
            return Err(CheckpointError::Truncated {
                field,
                offset: self.pos,
            });
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u32(&mut self, field: &'static str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    fn f64(&mut self, field: &'static str) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }
}

pub fn read_header(bytes: &[u8]) -> Result<(Header, usize), CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(MAGIC.len(), "magic")?;
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic { offset: 0 });
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion { got: version });
    }
    let n = r.u32("n")?;
    if n < 8 || !n.is_power_of_two() {
        return Err(CheckpointError::BadField {
            field: "n",
            detail: format!("grid size {n} is not a power of two >= 8"),
        });
    }
    let box_length = r.f64("box_length")?;
    if !(box_length > 0.0 && box_length.is_finite()) {
        return Err(CheckpointError::BadField {
            field: "box_length",
            detail: format!("{box_length} is not a positive finite length"),
        });
    }
    let time = r.f64("time")?;
    if !time.is_finite() {
        return Err(CheckpointError::BadField {
            field: "time",
            detail: format!("{time} is not finite"),
        });
    }
    let nu = r.f64("nu")?;
    let alpha = r.f64("alpha")?;
    let kappa = r.f64("kappa")?;
    let beta = r.f64("beta")?;
    let params =
        PhysicsParams::new(nu, alpha, kappa, beta).map_err(|e| CheckpointError::BadField {
            field: "physics",
            detail: e.to_string(),
        })?;
    let count = r.u32("accumulator_count")?;
    if count as usize != DiagAccumulators::COUNT {
        return Err(CheckpointError::BadField {
            field: "accumulator_count",
            detail: format!("expected {}, got {count}", DiagAccumulators::COUNT),
        });
    }
    let mut acc = [0.0f64; DiagAccumulators::COUNT];
    for slot in acc.iter_mut() {
        *slot = r.f64("accumulators")?;
    }
    Ok((
        Header {
            version,
            n,
            box_length,
            time,
            params,
            accumulators: DiagAccumulators::from_array(acc),
        },
        r.pos,
    ))
}

/// Read a full checkpoint back into a state (plus params and accumulators).
pub fn read_checkpoint(path: &Path) -> Result<(FlowState, Header), CheckpointError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let (header, header_len) = read_header(&bytes)?;
    let n = header.n as usize;
    let expected = 2 * n * n * 16;
    let got = bytes.len() - header_len;
    if got != expected {
        return Err(CheckpointError::PayloadSize { expected, got });
    }
    let grid =
        Grid2D::with_box_length(n, header.box_length).map_err(|e| CheckpointError::BadField {
            field: "n",
            detail: e.to_string(),
        })?;
    let mut r = Reader {
        bytes: &bytes,
        pos: header_len,
    };
    let mut read_field = |field: &'static str| -> Result<SpectralField, CheckpointError> {
        let mut coeffs = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let re = r.f64(field)?;
            let im = r.f64(field)?;
            coeffs.push(Complex64::new(re, im));
        }
        Ok(SpectralField::from_coeffs(&grid, coeffs))
    };
    let omega = read_field("omega_payload")?;
    let j = read_field("j_payload")?;
    let state = FlowState::new(omega, j, header.time).map_err(|e| CheckpointError::BadField {
        field: "payload",
        detail: e.to_string(),
    })?;
    Ok((state, header))
}

pub fn inspect(path: &Path) -> Result<Header, CheckpointError> {
    let mut bytes = [0u8; HEADER_LEN];
    let mut file = std::fs::File::open(path)?;
    let mut filled = 0usize;
    while filled < bytes.len() {
        let k = file.read(&mut bytes[filled..])?;
        if k == 0 {
            break;
        }
        filled += k;
    }
    let (header, _) = read_header(&bytes[..filled])?;
    Ok(header)
}
