//! File formats: far-field text, basis cache, processed data, coefficient
//! fields and volumes.
//!
//! Binary formats are little-endian: a four-byte magic, a version byte, the
//! payload, and a CRC-32 of everything before it.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;

use crate::borndata::{Aabb, FarFieldRecord};
use crate::error::{Error, Result};
use crate::pipeline::{DataMeta, ProcessedData, Provenance};
use crate::pswf::{build_basis_with, BasisOptions, PswfBasis, RadialProfile, Truncation};
use crate::quadrature::ball_grid;
use crate::reconstruct::{CoefficientField, FieldKind, VolumeGrid, VolumeSpec};

pub const BASIS_MAGIC: &[u8; 4] = b"PSW3";
pub const DATA_MAGIC: &[u8; 4] = b"PSWD";
pub const FIELD_MAGIC: &[u8; 4] = b"PSWC";
pub const FORMAT_VERSION: u8 = 1;

const FARFIELD_COLUMNS: &str = "thx,thy,thz,xhx,xhy,xhz,re,im";
/// Directions further than this from unit norm are rejected when read.
const DIRECTION_TOLERANCE: f64 = 1e-6;

/// A far-field file: `N2` incident by `N1` observation directions at wave number `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FarFieldSet {
    pub k: f64,
    pub n1: usize,
    pub n2: usize,
    pub source: String,
    pub records: Vec<FarFieldRecord>,
}

/// Writes the header block and one CSV row per record.
pub fn write_farfield(path: &Path, set: &FarFieldSet) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "k={:e}", set.k).unwrap();
    writeln!(out, "N1={}", set.n1).unwrap();
    writeln!(out, "N2={}", set.n2).unwrap();
    writeln!(out, "source={}", set.source).unwrap();
    writeln!(out, "{FARFIELD_COLUMNS}").unwrap();
    for r in &set.records {
        let [a, b, c] = r.incident;
        let [d, e, f] = r.observation;
        writeln!(out, "{a:e},{b:e},{c:e},{d:e},{e:e},{f:e},{:e},{:e}", r.value.re, r.value.im).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

fn unit_direction(v: [f64; 3], line: usize) -> Result<[f64; 3]> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if (norm - 1.0).abs() > DIRECTION_TOLERANCE {
        return Err(Error::Validation(format!("line {line}: direction norm {norm} is not 1")));
    }
    if (norm - 1.0).abs() > 1e-12 {
        return Ok(v.map(|x| x / norm));
    }
    Ok(v)
}

/// Reads a far-field file; an empty data section is allowed.
pub fn read_farfield(path: &Path) -> Result<FarFieldSet> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut k = None;
    let mut n1 = None;
    let mut n2 = None;
    let mut source = String::from("unknown");
    let mut in_header = true;
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_header {
            if line == FARFIELD_COLUMNS {
                in_header = false;
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected key=value or the column header, got {line:?}"),
            })?;
            let parse_err = |what: &str| Error::Parse { line: line_no, msg: format!("invalid {what}: {value:?}") };
            match key.trim() {
                "k" => k = Some(value.trim().parse::<f64>().map_err(|_| parse_err("k"))?),
                "N1" => n1 = Some(value.trim().parse::<usize>().map_err(|_| parse_err("N1"))?),
                "N2" => n2 = Some(value.trim().parse::<usize>().map_err(|_| parse_err("N2"))?),
                "source" => source = value.trim().to_string(),
                other => {
                    return Err(Error::Parse { line: line_no, msg: format!("unknown header key {other:?}") })
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse { line: line_no, msg: format!("expected 8 columns, found {}", fields.len()) });
        }
        let mut v = [0.0; 8];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.trim().parse().map_err(|_| Error::Parse { line: line_no, msg: format!("invalid number {f:?}") })?;
        }
        records.push(FarFieldRecord {
            incident: unit_direction([v[0], v[1], v[2]], line_no)?,
            observation: unit_direction([v[3], v[4], v[5]], line_no)?,
            value: Complex64::new(v[6], v[7]),
        });
    }
    if in_header {
        return Err(Error::Parse { line: 0, msg: format!("missing column header {FARFIELD_COLUMNS:?}") });
    }
    let k = k.ok_or_else(|| Error::Validation("header lacks k".into()))?;
    if !(k > 0.0) {
        return Err(Error::Validation(format!("wave number must be positive, got {k}")));
    }
    let n1 = n1.ok_or_else(|| Error::Validation("header lacks N1".into()))?;
    let n2 = n2.ok_or_else(|| Error::Validation("header lacks N2".into()))?;
    if !records.is_empty() && records.len() != n1 * n2 {
        return Err(Error::Validation(format!(
            "header announces N1 x N2 = {} rows, file has {}",
            n1 * n2,
            records.len()
        )));
    }
    Ok(FarFieldSet { k, n1, n2, source, records })
}

struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    fn new(magic: &[u8; 4]) -> Self {
        let mut buf = magic.to_vec();
        buf.push(FORMAT_VERSION);
        Self { buf }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn i32(&mut self, v: i32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.buf.extend_from_slice(b);
    }

    fn finish(mut self, path: &Path) -> Result<()> {
        let crc = crc32fast::hash(&self.buf);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        let mut f = fs::File::create(path)?;
        f.write_all(&self.buf)?;
        Ok(())
    }
}

struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    /// Checks magic, version and checksum; the reader then covers the payload.
    fn open(bytes: &'a [u8], magic: &[u8; 4], what: &str) -> Result<Self> {
        if bytes.len() < 5 {
            return Err(Error::Integrity(format!("{what} file truncated ({} bytes)", bytes.len())));
        }
        if &bytes[..4] != magic {
            return Err(Error::Format(format!("not a {what} file (bad magic)")));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported {what} version {}", bytes[4])));
        }
        if bytes.len() < 9 {
            return Err(Error::Integrity(format!("{what} file truncated ({} bytes)", bytes.len())));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("four bytes"));
        if crc32fast::hash(body) != stored {
            return Err(Error::Integrity(format!("{what} checksum mismatch")));
        }
        Ok(Self { buf: body, pos: 5 })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Integrity("record extends past the end of the file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }

    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }

    fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Integrity(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

/// Writes `c`, the truncation, `sigma` and one record `(m, n, chi, alpha / i^m, beta)`
/// per retained `(m, n)`; the `2m + 1` orders are implied.
pub fn write_basis_cache(basis: &PswfBasis, path: &Path) -> Result<()> {
    let mut w = ByteWriter::new(BASIS_MAGIC);
    w.f64(basis.c());
    match basis.truncation() {
        Truncation::Fixed(k) => {
            w.u8(0);
            w.u64(k as u64);
        }
        Truncation::PerDegree(total) => {
            w.u8(1);
            w.u64(total as u64);
        }
    }
    w.f64(basis.sigma());
    let mut profiles = basis.profiles();
    profiles.sort_by_key(|p| (p.m, p.n));
    w.u64(profiles.len() as u64);
    for p in &profiles {
        w.u32(p.m as u32);
        w.u32(p.n as u32);
        w.f64(p.chi);
        w.f64(p.alpha_amplitude);
        w.u32(p.beta.len() as u32);
        for b in &p.beta {
            w.f64(*b);
        }
    }
    w.finish(path)
}

/// Reads a basis cache written by [`write_basis_cache`].
pub fn read_basis_cache(path: &Path) -> Result<PswfBasis> {
    let bytes = fs::read(path)?;
    let mut r = ByteReader::open(&bytes, BASIS_MAGIC, "basis cache")?;
    let c = r.f64()?;
    let truncation = match r.u8()? {
        0 => Truncation::Fixed(r.u64()? as usize),
        1 => Truncation::PerDegree(r.u64()? as usize),
        t => return Err(Error::Format(format!("unknown truncation tag {t}"))),
    };
    let sigma = r.f64()?;
    let count = r.u64()? as usize;
    let mut profiles = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let m = r.u32()? as usize;
        let n = r.u32()? as usize;
        let chi = r.f64()?;
        let amp = r.f64()?;
        let len = r.u32()? as usize;
        let mut beta = Vec::with_capacity(len.min(1 << 16));
        for _ in 0..len {
            beta.push(r.f64()?);
        }
        profiles.push(RadialProfile::new(m, n, chi, amp, beta));
    }
    r.finish()?;
    PswfBasis::from_profiles(c, truncation, sigma, profiles)
}

/// Reads a cache and checks that it was built for bandwidth `c`.
pub fn read_basis_cache_for(path: &Path, c: f64) -> Result<PswfBasis> {
    let basis = read_basis_cache(path)?;
    if (basis.c() - c).abs() > 1e-12 * c.abs().max(1.0) {
        return Err(Error::BandwidthMismatch { expected: c, found: basis.c() });
    }
    Ok(basis)
}

/// Cache file name keyed by bandwidth, truncation and format version.
pub fn basis_cache_name(c: f64, truncation: Truncation) -> String {
    let t = match truncation {
        Truncation::Fixed(k) => format!("K{k}"),
        Truncation::PerDegree(total) => format!("M{total}"),
    };
    format!("pswf_c{c}_{t}_v{FORMAT_VERSION}.psw3")
}

/// Loads the cached basis from `dir` when it covers `sigma`, otherwise builds and caches it.
pub fn load_or_build_basis(dir: &Path, c: f64, opts: &BasisOptions) -> Result<PswfBasis> {
    let path: PathBuf = dir.join(basis_cache_name(c, opts.truncation));
    if path.exists() {
        let cached = read_basis_cache_for(&path, c)?;
        if cached.sigma() <= opts.sigma {
            return if cached.sigma() == opts.sigma { Ok(cached) } else { cached.restrict(opts.sigma) };
        }
    }
    let basis = build_basis_with(c, opts)?;
    fs::create_dir_all(dir)?;
    write_basis_cache(&basis, &path)?;
    Ok(basis)
}

/// Writes processed data with its grid dimensions and per-node provenance.
pub fn write_processed(data: &ProcessedData, path: &Path) -> Result<()> {
    let mut w = ByteWriter::new(DATA_MAGIC);
    let (t, mt, mp) = data.grid.dims();
    w.u32(t as u32);
    w.u32(mt as u32);
    w.u32(mp as u32);
    w.f64(data.c);
    w.f64(data.meta.k);
    w.f64(data.meta.delta.unwrap_or(f64::NAN));
    w.bytes(data.meta.source.as_bytes());
    w.u64(data.values.len() as u64);
    for (v, p) in data.values.iter().zip(&data.provenance) {
        w.f64(v.re);
        w.f64(v.im);
        match p {
            Provenance::Exact => {
                w.u8(0);
                w.u64(0);
                w.f64(0.0);
            }
            Provenance::Matched { record, distance } => {
                w.u8(1);
                w.u64(*record as u64);
                w.f64(*distance);
            }
        }
    }
    w.finish(path)
}

/// Reads processed data, rebuilding its ball grid.
pub fn read_processed(path: &Path) -> Result<ProcessedData> {
    let bytes = fs::read(path)?;
    let mut r = ByteReader::open(&bytes, DATA_MAGIC, "processed data")?;
    let t = r.u32()? as usize;
    let mt = r.u32()? as usize;
    let mp = r.u32()? as usize;
    let c = r.f64()?;
    let k = r.f64()?;
    let delta = r.f64()?;
    let source = String::from_utf8(r.bytes()?.to_vec())
        .map_err(|_| Error::Format("source tag is not UTF-8".into()))?;
    let n = r.u64()? as usize;
    if n != t * mt * mp {
        return Err(Error::Validation(format!("{n} samples for a ({t}, {mt}, {mp}) grid")));
    }
    let mut values = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(Complex64::new(r.f64()?, r.f64()?));
        let kind = r.u8()?;
        let record = r.u64()? as usize;
        let distance = r.f64()?;
        provenance.push(match kind {
            0 => Provenance::Exact,
            1 => Provenance::Matched { record, distance },
            other => return Err(Error::Format(format!("unknown provenance tag {other}"))),
        });
    }
    r.finish()?;
    let grid = Arc::new(ball_grid(t, mt, mp)?);
    let meta = DataMeta { k, delta: (!delta.is_nan()).then_some(delta), source };
    ProcessedData::new(c, grid, values, provenance, meta)
}

/// Writes a coefficient field as `(m, n, l, re, im)` records.
pub fn write_coefficients(field: &CoefficientField, path: &Path) -> Result<()> {
    let mut w = ByteWriter::new(FIELD_MAGIC);
    w.f64(field.basis().c());
    w.u8(match field.kind() {
        FieldKind::DataProjection => 0,
        FieldKind::Reconstruction => 1,
    });
    w.u64(field.len() as u64);
    for (md, q) in field.iter() {
        w.u32(md.m() as u32);
        w.u32(md.n() as u32);
        w.i32(md.ell() as i32);
        w.f64(q.re);
        w.f64(q.im);
    }
    w.finish(path)
}

/// Reads a coefficient field over `basis`; every mode must be present in it.
pub fn read_coefficients(path: &Path, basis: Arc<PswfBasis>) -> Result<CoefficientField> {
    let bytes = fs::read(path)?;
    let mut r = ByteReader::open(&bytes, FIELD_MAGIC, "coefficient")?;
    let c = r.f64()?;
    if (basis.c() - c).abs() > 1e-12 * c.abs().max(1.0) {
        return Err(Error::BandwidthMismatch { expected: basis.c(), found: c });
    }
    let kind = match r.u8()? {
        0 => FieldKind::DataProjection,
        1 => FieldKind::Reconstruction,
        t => return Err(Error::Format(format!("unknown field kind {t}"))),
    };
    let n = r.u64()? as usize;
    let mut entries = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        let m = r.u32()? as usize;
        let nn = r.u32()? as usize;
        let ell = r.i32()? as i64;
        let q = Complex64::new(r.f64()?, r.f64()?);
        let pos = basis
            .position(m, nn, ell)
            .ok_or_else(|| Error::Validation(format!("mode ({m}, {nn}, {ell}) is not in the basis")))?;
        entries.push((pos, q));
    }
    r.finish()?;
    entries.sort_by_key(|e| e.0);
    let (indices, coeffs) = entries.into_iter().unzip();
    CoefficientField::new(basis, indices, coeffs, kind)
}

/// Volume file flavours.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeFormat {
    /// Little-endian f64, `x` fastest, all real parts then all imaginary parts,
    /// plus a text sidecar `<path>.txt`.
    Raw,
    /// Legacy VTK structured points, ASCII, scalars `real` and `imag`.
    Vtk,
}

/// Descriptive fields written next to a volume.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VolumeMeta {
    pub c: f64,
    pub cutoff: f64,
    pub provenance: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

/// Writes a volume; masked cells are written as zero.
pub fn write_volume(vol: &VolumeGrid, path: &Path, format: VolumeFormat, meta: &VolumeMeta) -> Result<()> {
    let value = |v: usize| if vol.masked[v] { Complex64::new(0.0, 0.0) } else { vol.values[v] };
    let n = vol.values.len();
    let spec = &vol.spec;
    match format {
        VolumeFormat::Raw => {
            let mut buf = Vec::with_capacity(16 * n);
            for v in 0..n {
                buf.extend_from_slice(&value(v).re.to_le_bytes());
            }
            for v in 0..n {
                buf.extend_from_slice(&value(v).im.to_le_bytes());
            }
            fs::write(path, buf)?;
            let any_masked = vol.masked.iter().any(|&m| m);
            let mut side = String::new();
            writeln!(side, "dims={} {} {}", spec.dims[0], spec.dims[1], spec.dims[2]).unwrap();
            let [a, b, c] = spec.extent.lower;
            writeln!(side, "lower={a:e} {b:e} {c:e}").unwrap();
            let [a, b, c] = spec.extent.upper;
            writeln!(side, "upper={a:e} {b:e} {c:e}").unwrap();
            writeln!(side, "layout=f64le x-fastest real-then-imag cell-centred").unwrap();
            writeln!(side, "mask={}", if any_masked { "outside-unit-ball" } else { "none" }).unwrap();
            writeln!(side, "c={:e}", meta.c).unwrap();
            writeln!(side, "cutoff={:e}", meta.cutoff).unwrap();
            writeln!(side, "provenance={}", meta.provenance).unwrap();
            fs::write(sidecar_path(path), side)?;
        }
        VolumeFormat::Vtk => {
            let h = [0, 1, 2].map(|a| (spec.extent.upper[a] - spec.extent.lower[a]) / spec.dims[a] as f64);
            let origin = spec.center(0, 0, 0);
            let mut out = String::new();
            writeln!(out, "# vtk DataFile Version 3.0").unwrap();
            writeln!(out, "pswf3d volume c={} cutoff={:e} {}", meta.c, meta.cutoff, meta.provenance).unwrap();
            writeln!(out, "ASCII").unwrap();
            writeln!(out, "DATASET STRUCTURED_POINTS").unwrap();
            writeln!(out, "DIMENSIONS {} {} {}", spec.dims[0], spec.dims[1], spec.dims[2]).unwrap();
            writeln!(out, "ORIGIN {:e} {:e} {:e}", origin[0], origin[1], origin[2]).unwrap();
            writeln!(out, "SPACING {:e} {:e} {:e}", h[0], h[1], h[2]).unwrap();
            writeln!(out, "POINT_DATA {n}").unwrap();
            for (name, part) in [("real", 0), ("imag", 1)] {
                writeln!(out, "SCALARS {name} double 1").unwrap();
                writeln!(out, "LOOKUP_TABLE default").unwrap();
                for v in 0..n {
                    let z = value(v);
                    writeln!(out, "{:e}", if part == 0 { z.re } else { z.im }).unwrap();
                }
            }
            fs::write(path, out)?;
        }
    }
    Ok(())
}

fn parse_triple<T: std::str::FromStr>(s: &str, line: usize) -> Result<[T; 3]> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Parse { line, msg: format!("expected three values, got {s:?}") });
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| Error::Parse { line, msg: format!("invalid value {p:?}") })?);
    }
    let mut it = out.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// Reads a raw volume and its sidecar.
pub fn read_volume_raw(path: &Path) -> Result<(VolumeGrid, VolumeMeta)> {
    let side = fs::read_to_string(sidecar_path(path))?;
    let mut dims = None;
    let mut lower = None;
    let mut upper = None;
    let mut masked_geometric = false;
    let mut meta = VolumeMeta::default();
    for (i, line) in side.lines().enumerate() {
        let Some((key, value)) = line.split_once('=') else { continue };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::Parse { line: i + 1, msg: format!("invalid {key}") });
        match key {
            "dims" => dims = Some(parse_triple::<usize>(value, i + 1)?),
            "lower" => lower = Some(parse_triple::<f64>(value, i + 1)?),
            "upper" => upper = Some(parse_triple::<f64>(value, i + 1)?),
            "mask" => masked_geometric = value == "outside-unit-ball",
            "c" => meta.c = num(value)?,
            "cutoff" => meta.cutoff = num(value)?,
            "provenance" => meta.provenance = value.to_string(),
            _ => {}
        }
    }
    let missing = |k: &str| Error::Validation(format!("volume sidecar lacks {k}"));
    let spec = VolumeSpec {
        dims: dims.ok_or_else(|| missing("dims"))?,
        extent: Aabb::new(lower.ok_or_else(|| missing("lower"))?, upper.ok_or_else(|| missing("upper"))?)?,
    };
    let n = spec.len();
    let bytes = fs::read(path)?;
    if bytes.len() != 16 * n {
        return Err(Error::Integrity(format!("raw volume has {} bytes, expected {}", bytes.len(), 16 * n)));
    }
    let word = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("eight bytes"));
    let values = (0..n).map(|v| Complex64::new(word(v), word(n + v))).collect();
    let masked = if masked_geometric {
        spec.centers().iter().map(|x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2] > 1.0).collect()
    } else {
        vec![false; n]
    };
    Ok((VolumeGrid { spec, values, masked }, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_volume_raw_is_128_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let spec = VolumeSpec::cube(2);
        let vol = VolumeGrid { spec, values: vec![Complex64::new(0.0, 0.0); 8], masked: vec![false; 8] };
        let p = dir.path().join("v.raw");
        write_volume(&vol, &p, VolumeFormat::Raw, &VolumeMeta::default()).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(bytes.len(), 128);
        assert!(bytes.iter().all(|&b| b == 0));
        assert!(sidecar_path(&p).exists());
    }

    #[test]
    fn farfield_header_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        fs::write(&p, format!("k=0\nN1=1\nN2=1\n{FARFIELD_COLUMNS}\n")).unwrap();
        assert!(matches!(read_farfield(&p), Err(Error::Validation(_))));
        fs::write(&p, format!("k=2\nN1=1\nN2=1\n{FARFIELD_COLUMNS}\n0,0,1,1,0,0,x,0\n")).unwrap();
        assert!(matches!(read_farfield(&p), Err(Error::Parse { line: 5, .. })));
        fs::write(&p, format!("k=2\nN1=1\nN2=2\n{FARFIELD_COLUMNS}\n0,0,1,1,0,0,1,0\n")).unwrap();
        assert!(matches!(read_farfield(&p), Err(Error::Validation(_))));
    }

    #[test]
    fn short_binary_is_integrity_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.psw3");
        fs::write(&p, b"PSW").unwrap();
        assert!(matches!(read_basis_cache(&p), Err(Error::Integrity(_))));
        fs::write(&p, b"XXXX\x01abcdefgh").unwrap();
        assert!(matches!(read_basis_cache(&p), Err(Error::Format(_))));
        fs::write(&p, b"PSW3\x07abcdefgh").unwrap();
        assert!(matches!(read_basis_cache(&p), Err(Error::Format(_))));
    }
}
