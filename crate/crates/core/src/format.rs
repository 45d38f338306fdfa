//! The `.rrt` tensor file format.
//!
//! ```text
//! "RRT1"                 4 bytes magic
//! dtype                  u8   (0 = f32, 1 = f64)
//! ndim                   u8
//! sizes                  ndim × u64 little-endian, dimension 0 (fastest) first
//! data                   element_count × element, little-endian, linearized
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::layout::{Element, Shape, Tensor};

pub const MAGIC: &[u8; 4] = b"RRT1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum DType {
    F32 = 0,
    F64 = 1,
}

impl DType {
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(DType::F32),
            1 => Ok(DType::F64),
            other => Err(Error::Format(format!("unknown dtype code {other}"))),
        }
    }

    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }
}

/// Element types that can be stored in an `.rrt` file.
pub trait FileElement: Element {
    const DTYPE: DType;
    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

impl FileElement for f32 {
    const DTYPE: DType = DType::F32;
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl FileElement for f64 {
    const DTYPE: DType = DType::F64;
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

/// A tensor read from disk, tagged with its element type.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTensor {
    F32(Tensor<f32>),
    F64(Tensor<f64>),
}

impl AnyTensor {
    pub fn shape(&self) -> &Shape {
        match self {
            AnyTensor::F32(t) => t.shape(),
            AnyTensor::F64(t) => t.shape(),
        }
    }

    pub fn dtype(&self) -> DType {
        match self {
            AnyTensor::F32(_) => DType::F32,
            AnyTensor::F64(_) => DType::F64,
        }
    }
}

impl From<Tensor<f32>> for AnyTensor {
    fn from(t: Tensor<f32>) -> Self {
        AnyTensor::F32(t)
    }
}

impl From<Tensor<f64>> for AnyTensor {
    fn from(t: Tensor<f64>) -> Self {
        AnyTensor::F64(t)
    }
}

pub fn encode<T: FileElement>(tensor: &Tensor<T>) -> Result<Vec<u8>> {
    let sizes = tensor.shape().sizes();
    let ndim = u8::try_from(sizes.len())
        .map_err(|_| Error::Format(format!("{} dimensions do not fit in a u8", sizes.len())))?;
    let mut out = Vec::with_capacity(6 + 8 * sizes.len() + tensor.data().len() * T::DTYPE.size());
    out.extend_from_slice(MAGIC);
    out.push(T::DTYPE as u8);
    out.push(ndim);
    for &s in sizes {
        out.extend_from_slice(&(s as u64).to_le_bytes());
    }
    for &v in tensor.data() {
        v.write_le(&mut out);
    }
    Ok(out)
}

fn decode_data<T: FileElement>(shape: Shape, bytes: &[u8]) -> Result<Tensor<T>> {
    let data = bytes.chunks_exact(T::DTYPE.size()).map(T::read_le).collect();
    Tensor::new(shape, data)
}

pub fn decode(bytes: &[u8]) -> Result<AnyTensor> {
    let short = || Error::Format("file truncated".into());
    if bytes.len() < 6 {
        return Err(short());
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected RRT1".into()));
    }
    let dtype = DType::from_code(bytes[4])?;
    let ndim = bytes[5] as usize;
    if ndim == 0 {
        return Err(Error::Format("ndim is 0".into()));
    }
    let header_end = 6 + 8 * ndim;
    let header = bytes.get(6..header_end).ok_or_else(short)?;
    let sizes = header
        .chunks_exact(8)
        .map(|c| {
            usize::try_from(u64::from_le_bytes(c.try_into().expect("8 bytes")))
                .map_err(|_| Error::Format("dimension size exceeds the address space".into()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let shape = Shape::new(sizes).map_err(|e| Error::Format(e.to_string()))?;
    let payload = &bytes[header_end..];
    let expected = shape
        .len()
        .checked_mul(dtype.size())
        .ok_or_else(|| Error::Format("payload size overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload holds {} bytes, shape {shape} needs {expected}",
            payload.len()
        )));
    }
    Ok(match dtype {
        DType::F32 => AnyTensor::F32(decode_data(shape, payload)?),
        DType::F64 => AnyTensor::F64(decode_data(shape, payload)?),
    })
}

pub fn write_tensor<T: FileElement>(mut w: impl Write, tensor: &Tensor<T>) -> Result<()> {
    w.write_all(&encode(tensor)?)?;
    w.flush()?;
    Ok(())
}

pub fn read_tensor(mut r: impl Read) -> Result<AnyTensor> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save<T: FileElement>(path: impl AsRef<Path>, tensor: &Tensor<T>) -> Result<()> {
    write_tensor(BufWriter::new(File::create(path)?), tensor)
}

pub fn load(path: impl AsRef<Path>) -> Result<AnyTensor> {
    read_tensor(BufReader::new(File::open(path)?))
}
