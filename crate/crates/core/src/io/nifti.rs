//! Minimal single-file NIfTI-1 (`.nii`, `.nii.gz`) support.
//!
//! Reads datatypes uint8, int16, int32, float32 and float64 in either byte
//! order and applies `scl_slope`/`scl_inter`. Volumes are written as float32
//! (code 16) and label masks as int16 (code 4). Only the voxel spacing of the
//! affine is consumed; a diagonal sform is written for completeness.

use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian, ReadBytesExt, WriteBytesExt};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Geometry, IntensityKind, LabelMask, Volume};

const HEADER_SIZE: i32 = 348;
const VOX_OFFSET: usize = 352;

pub const DT_UINT8: i16 = 2;
pub const DT_INT16: i16 = 4;
pub const DT_INT32: i16 = 8;
pub const DT_FLOAT32: i16 = 16;
pub const DT_FLOAT64: i16 = 64;

/// Marker stored in the `descrip` field so the intensity kind survives a round trip.
const DESCRIP_PREFIX: &str = "medsynth:";

#[derive(Debug, Clone, PartialEq)]
pub struct NiftiHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub datatype: i16,
    pub vox_offset: usize,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub descrip: String,
}

/// Raw decoded image: header plus voxel values in x-fastest order.
#[derive(Debug, Clone)]
pub struct NiftiImage {
    pub header: NiftiHeader,
    pub data: Vec<f64>,
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut raw)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

pub fn decode(bytes: &[u8]) -> Result<NiftiImage> {
    if bytes.len() < HEADER_SIZE as usize {
        return Err(Error::Format("file shorter than a NIfTI-1 header".into()));
    }
    if LittleEndian::read_i32(&bytes[0..4]) == HEADER_SIZE {
        decode_with::<LittleEndian>(bytes)
    } else if BigEndian::read_i32(&bytes[0..4]) == HEADER_SIZE {
        decode_with::<BigEndian>(bytes)
    } else {
        Err(Error::Format("sizeof_hdr is not 348".into()))
    }
}

fn decode_with<B: ByteOrder>(bytes: &[u8]) -> Result<NiftiImage> {
    let magic = &bytes[344..348];
    if magic != b"n+1\0" {
        return Err(Error::Format(format!(
            "unsupported magic {magic:?}; only single-file NIfTI-1 is handled"
        )));
    }
    let mut dim = [0i16; 8];
    for (i, d) in dim.iter_mut().enumerate() {
        *d = B::read_i16(&bytes[40 + 2 * i..42 + 2 * i]);
    }
    let ndim = dim[0];
    if !(1..=7).contains(&ndim) {
        return Err(Error::Format(format!("invalid dim[0] = {ndim}")));
    }
    if (4..=7).contains(&ndim) && dim[4..=ndim as usize].iter().any(|&d| d > 1) {
        return Err(Error::Format("only 3D images are supported".into()));
    }
    let dims = [1, 2, 3].map(|i| if i <= ndim as usize { dim[i].max(1) as usize } else { 1 });
    let datatype = B::read_i16(&bytes[70..72]);
    let mut pixdim = [0f32; 8];
    for (i, p) in pixdim.iter_mut().enumerate() {
        *p = B::read_f32(&bytes[76 + 4 * i..80 + 4 * i]);
    }
    let spacing = [1, 2, 3].map(|i| {
        let s = f64::from(pixdim[i]).abs();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    });
    let vox_offset = B::read_f32(&bytes[108..112]) as usize;
    let scl_slope = B::read_f32(&bytes[112..116]);
    let scl_inter = B::read_f32(&bytes[116..120]);
    let descrip = String::from_utf8_lossy(&bytes[148..228])
        .trim_end_matches('\0')
        .to_string();

    let n = dims.iter().product::<usize>();
    let width = match datatype {
        DT_UINT8 => 1,
        DT_INT16 => 2,
        DT_INT32 | DT_FLOAT32 => 4,
        DT_FLOAT64 => 8,
        other => return Err(Error::Format(format!("unsupported datatype code {other}"))),
    };
    let payload = bytes
        .get(vox_offset..vox_offset + n * width)
        .ok_or_else(|| Error::Format("voxel payload truncated".into()))?;
    let mut cur = Cursor::new(payload);
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let v = match datatype {
            DT_UINT8 => f64::from(cur.read_u8()?),
            DT_INT16 => f64::from(cur.read_i16::<B>()?),
            DT_INT32 => f64::from(cur.read_i32::<B>()?),
            DT_FLOAT32 => f64::from(cur.read_f32::<B>()?),
            _ => cur.read_f64::<B>()?,
        };
        data.push(v);
    }
    if scl_slope != 0.0 && !(scl_slope == 1.0 && scl_inter == 0.0) {
        let (m, b) = (f64::from(scl_slope), f64::from(scl_inter));
        data.iter_mut().for_each(|v| *v = *v * m + b);
    }
    Ok(NiftiImage {
        header: NiftiHeader {
            dims,
            spacing,
            datatype,
            vox_offset,
            scl_slope,
            scl_inter,
            descrip,
        },
        data,
    })
}

pub fn read_image(path: impl AsRef<Path>) -> Result<NiftiImage> {
    decode(&read_all(path.as_ref())?)
}

/// Reads a volume. The intensity kind comes from the `descrip` marker when
/// present, otherwise `default_kind`.
pub fn read_volume(path: impl AsRef<Path>, default_kind: IntensityKind) -> Result<Volume> {
    let img = read_image(path)?;
    let kind = img
        .header
        .descrip
        .strip_prefix(DESCRIP_PREFIX)
        .and_then(IntensityKind::parse)
        .unwrap_or(default_kind);
    let geometry = Geometry::new(img.header.dims, img.header.spacing)?;
    Volume::new(geometry, img.data, kind)
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<LabelMask> {
    let img = read_image(path)?;
    let geometry = Geometry::new(img.header.dims, img.header.spacing)?;
    let labels = img
        .data
        .iter()
        .map(|&v| {
            if v < 0.0 || v.fract() != 0.0 || v > f64::from(u32::MAX) {
                Err(Error::Format(format!("label value {v} is not a non-negative integer")))
            } else {
                Ok(v as u32)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    LabelMask::new(geometry, labels)
}

fn encode_header(
    out: &mut Vec<u8>,
    geometry: &Geometry,
    datatype: i16,
    bitpix: i16,
    descrip: &str,
) -> Result<()> {
    let mut h = vec![0u8; VOX_OFFSET];
    LittleEndian::write_i32(&mut h[0..4], HEADER_SIZE);
    let mut dim = [1i16; 8];
    dim[0] = 3;
    for (i, &d) in geometry.dims.iter().enumerate() {
        dim[i + 1] = i16::try_from(d)
            .map_err(|_| Error::InvalidArgument(format!("dimension {d} exceeds NIfTI-1 limit")))?;
    }
    for (i, d) in dim.iter().enumerate() {
        LittleEndian::write_i16(&mut h[40 + 2 * i..42 + 2 * i], *d);
    }
    LittleEndian::write_i16(&mut h[70..72], datatype);
    LittleEndian::write_i16(&mut h[72..74], bitpix);
    let mut pixdim = [1f32; 8];
    for (i, &s) in geometry.spacing.iter().enumerate() {
        pixdim[i + 1] = s as f32;
    }
    for (i, p) in pixdim.iter().enumerate() {
        LittleEndian::write_f32(&mut h[76 + 4 * i..80 + 4 * i], *p);
    }
    LittleEndian::write_f32(&mut h[108..112], VOX_OFFSET as f32);
    LittleEndian::write_f32(&mut h[112..116], 1.0);
    // xyzt_units: mm
    h[123] = 2;
    let d = descrip.as_bytes();
    let d = &d[..d.len().min(79)];
    h[148..148 + d.len()].copy_from_slice(d);
    // sform_code = 1 (scanner), diagonal affine
    LittleEndian::write_i16(&mut h[254..256], 1);
    for (row, off) in [280usize, 296, 312].iter().enumerate() {
        LittleEndian::write_f32(&mut h[off + 4 * row..off + 4 * row + 4], geometry.spacing[row] as f32);
    }
    h[344..348].copy_from_slice(b"n+1\0");
    out.extend_from_slice(&h);
    Ok(())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let gz = path
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.ends_with(".gz"));
    if gz {
        let mut enc = GzEncoder::new(file, Compression::default());
        enc.write_all(bytes)?;
        enc.finish()?.flush()?;
    } else {
        let mut file = file;
        file.write_all(bytes)?;
        file.flush()?;
    }
    Ok(())
}

/// On-disk voxel type for volumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Float32,
    Float64,
}

pub fn encode_volume(v: &Volume) -> Result<Vec<u8>> {
    encode_volume_as(v, Precision::Float32)
}

pub fn encode_volume_as(v: &Volume, precision: Precision) -> Result<Vec<u8>> {
    let descrip = format!("{DESCRIP_PREFIX}{}", v.kind().as_str());
    match precision {
        Precision::Float32 => {
            let mut out = Vec::with_capacity(VOX_OFFSET + 4 * v.len());
            encode_header(&mut out, v.geometry(), DT_FLOAT32, 32, &descrip)?;
            for &x in v.values() {
                out.write_f32::<LittleEndian>(x as f32)?;
            }
            Ok(out)
        }
        Precision::Float64 => {
            let mut out = Vec::with_capacity(VOX_OFFSET + 8 * v.len());
            encode_header(&mut out, v.geometry(), DT_FLOAT64, 64, &descrip)?;
            for &x in v.values() {
                out.write_f64::<LittleEndian>(x)?;
            }
            Ok(out)
        }
    }
}

pub fn encode_mask(m: &LabelMask) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(VOX_OFFSET + 2 * m.labels().len());
    encode_header(&mut out, &m.geometry(), DT_INT16, 16, "medsynth:labels")?;
    for &l in m.labels() {
        let l = i16::try_from(l)
            .map_err(|_| Error::InvalidArgument(format!("label {l} does not fit int16")))?;
        out.write_i16::<LittleEndian>(l)?;
    }
    Ok(out)
}

/// Writes float32; a `.gz` suffix enables gzip.
pub fn write_volume(path: impl AsRef<Path>, v: &Volume) -> Result<()> {
    write_bytes(path.as_ref(), &encode_volume(v)?)
}

pub fn write_volume_as(path: impl AsRef<Path>, v: &Volume, precision: Precision) -> Result<()> {
    write_bytes(path.as_ref(), &encode_volume_as(v, precision)?)
}

pub fn write_mask(path: impl AsRef<Path>, m: &LabelMask) -> Result<()> {
    write_bytes(path.as_ref(), &encode_mask(m)?)
}
