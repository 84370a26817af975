//! TrackVis `.trk` files.
//!
//! Layout (1000-byte header, then tracks):
//!
//! ```text
//!   0  id_string            6 bytes, "TRACK\0"
//!   6  dim                  3 x i16
//!  12  voxel_size           3 x f32
//!  24  origin               3 x f32
//!  36  n_scalars            i16
//!  38  scalar_name          10 x 20 bytes
//! 238  n_properties         i16
//! 240  property_name        10 x 20 bytes
//! 440  vox_to_ras           4 x 4 f32, row major
//! 504  reserved             444 bytes
//! 948  voxel_order          4 bytes
//! 952  pad2                 4 bytes
//! 956  image_orientation    6 x f32
//! 980  pad1                 2 bytes
//! 982  invert/swap flags    6 x u8
//! 988  n_count              i32, 0 = unknown
//! 992  version              i32
//! 996  hdr_size             i32, always 1000
//! ```
//!
//! Each track is an `i32` point count `k`, `k · (3 + n_scalars)` f32 values
//! and `n_properties` f32 values. The byte order is detected from `hdr_size`.
//! The writer always emits little-endian files without scalars or
//! properties.

use tractmap_core::{Point3, Streamline, Tractography};

use crate::error::{Error, Result};

pub const HEADER_SIZE: usize = 1000;
const MAGIC: &[u8; 5] = b"TRACK";

#[derive(Debug, Clone, PartialEq)]
pub struct TrkHeader {
    pub id_string: [u8; 6],
    pub dim: [i16; 3],
    pub voxel_size: [f32; 3],
    pub origin: [f32; 3],
    pub n_scalars: i16,
    pub scalar_names: [[u8; 20]; 10],
    pub n_properties: i16,
    pub property_names: [[u8; 20]; 10],
    pub vox_to_ras: [[f32; 4]; 4],
    pub reserved: Vec<u8>,
    pub voxel_order: [u8; 4],
    pub pad2: [u8; 4],
    pub image_orientation_patient: [f32; 6],
    pub pad1: [u8; 2],
    pub flags: [u8; 6],
    pub n_count: i32,
    pub version: i32,
    pub hdr_size: i32,
    /// True when the file was stored big-endian.
    pub big_endian: bool,
}

impl Default for TrkHeader {
    fn default() -> Self {
        TrkHeader {
            id_string: *b"TRACK\0",
            dim: [1, 1, 1],
            voxel_size: [1.0, 1.0, 1.0],
            origin: [0.0; 3],
            n_scalars: 0,
            scalar_names: [[0; 20]; 10],
            n_properties: 0,
            property_names: [[0; 20]; 10],
            vox_to_ras: [[0.0; 4]; 4],
            reserved: vec![0; 444],
            voxel_order: *b"RAS\0",
            pad2: [0; 4],
            image_orientation_patient: [0.0; 6],
            pad1: [0; 2],
            flags: [0; 6],
            n_count: 0,
            version: 2,
            hdr_size: HEADER_SIZE as i32,
            big_endian: false,
        }
    }
}

/// A parsed file: geometry plus the per-point scalars and per-track
/// properties, kept as opaque values.
#[derive(Debug, Clone, PartialEq)]
pub struct TrkFile {
    pub header: TrkHeader,
    pub tractography: Tractography,
    /// Per track, `k · n_scalars` values in point order.
    pub scalars: Vec<Vec<f32>>,
    pub properties: Vec<Vec<f32>>,
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    big_endian: bool,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::trk(self.pos, format!("truncated while reading {what}")))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice has length N"))
    }

    fn i16(&mut self, what: &str) -> Result<i16> {
        let b = self.take::<2>(what)?;
        Ok(if self.big_endian {
            i16::from_be_bytes(b)
        } else {
            i16::from_le_bytes(b)
        })
    }

    fn i32(&mut self, what: &str) -> Result<i32> {
        let b = self.take::<4>(what)?;
        Ok(if self.big_endian {
            i32::from_be_bytes(b)
        } else {
            i32::from_le_bytes(b)
        })
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        let b = self.take::<4>(what)?;
        Ok(if self.big_endian {
            f32::from_be_bytes(b)
        } else {
            f32::from_le_bytes(b)
        })
    }

    fn f32s<const N: usize>(&mut self, what: &str) -> Result<[f32; N]> {
        let mut out = [0.0; N];
        for v in &mut out {
            *v = self.f32(what)?;
        }
        Ok(out)
    }

    fn names(&mut self, what: &str) -> Result<[[u8; 20]; 10]> {
        let mut out = [[0; 20]; 10];
        for name in &mut out {
            *name = self.take::<20>(what)?;
        }
        Ok(out)
    }
}

fn parse_header(bytes: &[u8]) -> Result<TrkHeader> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::trk(
            bytes.len(),
            format!("file is {} bytes, header needs {HEADER_SIZE}", bytes.len()),
        ));
    }
    if &bytes[..5] != MAGIC {
        return Err(Error::trk(0, "bad magic, expected \"TRACK\""));
    }
    let raw: [u8; 4] = bytes[996..1000].try_into().expect("4 bytes");
    let big_endian = if i32::from_le_bytes(raw) == HEADER_SIZE as i32 {
        false
    } else if i32::from_be_bytes(raw) == HEADER_SIZE as i32 {
        true
    } else {
        return Err(Error::trk(996, "hdr_size is not 1000 in either byte order"));
    };

    let mut c = Cursor {
        buf: bytes,
        pos: 0,
        big_endian,
    };
    let id_string = c.take::<6>("id_string")?;
    let dim = [c.i16("dim")?, c.i16("dim")?, c.i16("dim")?];
    let voxel_size = c.f32s::<3>("voxel_size")?;
    let origin = c.f32s::<3>("origin")?;
    let n_scalars = c.i16("n_scalars")?;
    let scalar_names = c.names("scalar_name")?;
    let n_properties = c.i16("n_properties")?;
    let property_names = c.names("property_name")?;
    let mut vox_to_ras = [[0.0; 4]; 4];
    for row in &mut vox_to_ras {
        *row = c.f32s::<4>("vox_to_ras")?;
    }
    let reserved = c.take::<444>("reserved")?.to_vec();
    let voxel_order = c.take::<4>("voxel_order")?;
    let pad2 = c.take::<4>("pad2")?;
    let image_orientation_patient = c.f32s::<6>("image_orientation_patient")?;
    let pad1 = c.take::<2>("pad1")?;
    let flags = c.take::<6>("invert/swap flags")?;
    let n_count = c.i32("n_count")?;
    let version = c.i32("version")?;
    let hdr_size = c.i32("hdr_size")?;
    debug_assert_eq!(c.pos, HEADER_SIZE);

    if n_scalars < 0 {
        return Err(Error::trk(36, format!("negative n_scalars {n_scalars}")));
    }
    if n_properties < 0 {
        return Err(Error::trk(
            238,
            format!("negative n_properties {n_properties}"),
        ));
    }
    if n_count < 0 {
        return Err(Error::trk(988, format!("negative n_count {n_count}")));
    }
    Ok(TrkHeader {
        id_string,
        dim,
        voxel_size,
        origin,
        n_scalars,
        scalar_names,
        n_properties,
        property_names,
        vox_to_ras,
        reserved,
        voxel_order,
        pad2,
        image_orientation_patient,
        pad1,
        flags,
        n_count,
        version,
        hdr_size,
        big_endian,
    })
}

/// Parses a complete `.trk` buffer.
pub fn read_trk_file(bytes: &[u8]) -> Result<TrkFile> {
    let header = parse_header(bytes)?;
    let n_scalars = header.n_scalars as usize;
    let n_properties = header.n_properties as usize;
    let mut c = Cursor {
        buf: bytes,
        pos: HEADER_SIZE,
        big_endian: header.big_endian,
    };

    let mut streamlines = Vec::new();
    let mut scalars = Vec::new();
    let mut properties = Vec::new();
    let expected = (header.n_count > 0).then_some(header.n_count as usize);
    loop {
        match expected {
            Some(n) if streamlines.len() == n => break,
            None if c.pos == bytes.len() => break,
            _ => {}
        }
        let track_start = c.pos;
        if track_start == bytes.len() {
            return Err(Error::trk(
                track_start,
                format!(
                    "n_count is {} but the file ends after {} tracks",
                    header.n_count,
                    streamlines.len()
                ),
            ));
        }
        let k = c.i32("track point count")?;
        if k <= 0 {
            return Err(Error::trk(
                track_start,
                format!("track has point count {k}"),
            ));
        }
        let k = k as usize;
        let needed = k
            .checked_mul(3 + n_scalars)
            .and_then(|v| v.checked_add(n_properties))
            .and_then(|v| v.checked_mul(4));
        match needed {
            Some(n) if c.pos + n <= bytes.len() => {}
            _ => {
                return Err(Error::trk(
                    c.pos,
                    format!("truncated track {} ({k} points)", streamlines.len()),
                ))
            }
        }
        let mut points = Vec::with_capacity(k);
        let mut track_scalars = Vec::with_capacity(k * n_scalars);
        for _ in 0..k {
            let [x, y, z] = c.f32s::<3>("point")?;
            points.push(Point3::new(f64::from(x), f64::from(y), f64::from(z)));
            for _ in 0..n_scalars {
                track_scalars.push(c.f32("scalar")?);
            }
        }
        let track_properties = (0..n_properties)
            .map(|_| c.f32("property"))
            .collect::<Result<Vec<_>>>()?;
        let s = Streamline::new(points).map_err(|e| Error::trk(track_start, e.to_string()))?;
        streamlines.push(s);
        scalars.push(track_scalars);
        properties.push(track_properties);
    }
    if c.pos != bytes.len() {
        return Err(Error::trk(
            c.pos,
            format!(
                "{} trailing bytes after the {} tracks announced by n_count",
                bytes.len() - c.pos,
                header.n_count
            ),
        ));
    }
    if streamlines.is_empty() {
        return Err(Error::trk(HEADER_SIZE, "file contains no tracks"));
    }

    let mut tractography = Tractography::new(streamlines)?;
    let [vx, vy, vz] = header.voxel_size.map(f64::from);
    if [vx, vy, vz].iter().all(|v| v.is_finite() && *v > 0.0) {
        tractography = tractography.with_voxel_size(Point3::new(vx, vy, vz))?;
    }
    Ok(TrkFile {
        header,
        tractography,
        scalars,
        properties,
    })
}

/// Parses a `.trk` buffer and keeps only the geometry.
pub fn read_trk(bytes: &[u8]) -> Result<Tractography> {
    read_trk_file(bytes).map(|f| f.tractography)
}

/// Serializes a header, little-endian unless `big_endian` is set.
pub fn header_bytes(h: &TrkHeader) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_SIZE);
    let be = h.big_endian;
    let i16b = |v: i16| if be { v.to_be_bytes() } else { v.to_le_bytes() };
    let i32b = |v: i32| if be { v.to_be_bytes() } else { v.to_le_bytes() };
    let f32b = |v: f32| if be { v.to_be_bytes() } else { v.to_le_bytes() };
    out.extend_from_slice(&h.id_string);
    h.dim.iter().for_each(|&v| out.extend_from_slice(&i16b(v)));
    h.voxel_size
        .iter()
        .for_each(|&v| out.extend_from_slice(&f32b(v)));
    h.origin
        .iter()
        .for_each(|&v| out.extend_from_slice(&f32b(v)));
    out.extend_from_slice(&i16b(h.n_scalars));
    h.scalar_names.iter().for_each(|n| out.extend_from_slice(n));
    out.extend_from_slice(&i16b(h.n_properties));
    h.property_names
        .iter()
        .for_each(|n| out.extend_from_slice(n));
    h.vox_to_ras
        .iter()
        .flatten()
        .for_each(|&v| out.extend_from_slice(&f32b(v)));
    let mut reserved = h.reserved.clone();
    reserved.resize(444, 0);
    out.extend_from_slice(&reserved);
    out.extend_from_slice(&h.voxel_order);
    out.extend_from_slice(&h.pad2);
    h.image_orientation_patient
        .iter()
        .for_each(|&v| out.extend_from_slice(&f32b(v)));
    out.extend_from_slice(&h.pad1);
    out.extend_from_slice(&h.flags);
    out.extend_from_slice(&i32b(h.n_count));
    out.extend_from_slice(&i32b(h.version));
    out.extend_from_slice(&i32b(h.hdr_size));
    debug_assert_eq!(out.len(), HEADER_SIZE);
    out
}

fn to_f32(v: f64, track: usize) -> Result<f32> {
    let f = v as f32;
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::Input(format!(
            "track {track}: coordinate {v} is not representable as f32"
        )))
    }
}

/// Little-endian `.trk` v2 with `n_count` set and no scalars or properties.
pub fn write_trk(t: &Tractography) -> Result<Vec<u8>> {
    let n_count = i32::try_from(t.len())
        .map_err(|_| Error::Input(format!("{} tracks exceed the i32 track count", t.len())))?;
    let mut header = TrkHeader {
        n_count,
        ..TrkHeader::default()
    };
    if let Some(v) = t.voxel_size {
        header.voxel_size = [v.x as f32, v.y as f32, v.z as f32];
    }
    let body: usize = t.streamlines().iter().map(|s| 4 + 12 * s.len()).sum();
    let mut out = header_bytes(&header);
    out.reserve(body);
    for (index, s) in t.streamlines().iter().enumerate() {
        let k = i32::try_from(s.len())
            .map_err(|_| Error::Input(format!("track {index} has more than i32::MAX points")))?;
        out.extend_from_slice(&k.to_le_bytes());
        for p in s.points() {
            for v in [p.x, p.y, p.z] {
                out.extend_from_slice(&to_f32(v, index)?.to_le_bytes());
            }
        }
    }
    Ok(out)
}
