//! Canonical numbers, CSV rows and the binary coefficient format.

use std::io::{self, Read, Write};

use wigrot_core::{CoeffTriangle, DenseMatrix};

pub const MAGIC: &[u8; 4] = b"HROT";
pub const BIN_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "n,m_prime,m,value";

/// Shortest decimal that parses back to the same bits, at most 17
/// significant digits. Plain notation in `[1e-5, 1e16)`, scientific outside.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Storage layout of a binary block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Triangle,
    Dense,
}

impl Layout {
    pub fn code(self) -> u32 {
        match self {
            Layout::Triangle => 0,
            Layout::Dense => 1,
        }
    }

    pub fn from_code(c: u32) -> Option<Self> {
        match c {
            0 => Some(Layout::Triangle),
            1 => Some(Layout::Dense),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layout::Triangle => "triangle",
            Layout::Dense => "dense",
        }
    }

    /// Number of values following a header of degree `n`.
    pub fn payload_len(self, n: u32) -> usize {
        let n = n as usize;
        match self {
            Layout::Triangle => (n + 1) * (n + 1),
            Layout::Dense => (2 * n + 1) * (2 * n + 1),
        }
    }
}

/// Fixed-size header preceding each degree in the binary format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputHeader {
    pub version: u32,
    pub n: u32,
    pub beta: f64,
    pub layout: Layout,
}

pub const HEADER_BYTES: usize = 24;

impl OutputHeader {
    pub fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.version.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.beta.to_le_bytes())?;
        w.write_all(&self.layout.code().to_le_bytes())
    }

    pub fn parse(bytes: &[u8; HEADER_BYTES]) -> io::Result<Self> {
        let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
        if &bytes[0..4] != MAGIC {
            return Err(bad("missing HROT magic".into()));
        }
        let u32_at = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != BIN_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let layout = Layout::from_code(u32_at(20)).ok_or_else(|| bad(format!("unknown layout code {}", u32_at(20))))?;
        Ok(OutputHeader { version, n: u32_at(8), beta: f64::from_le_bytes(bytes[12..20].try_into().unwrap()), layout })
    }
}

/// One decoded binary block.
#[derive(Debug, Clone, PartialEq)]
pub struct BinBlock {
    pub header: OutputHeader,
    pub values: Vec<f64>,
}

pub fn write_bin_block(w: &mut dyn Write, header: &OutputHeader, values: &[f64]) -> io::Result<()> {
    debug_assert_eq!(values.len(), header.layout.payload_len(header.n));
    header.write_to(w)?;
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

/// Reads blocks until end of input.
pub fn read_bin(r: &mut dyn Read) -> io::Result<Vec<BinBlock>> {
    let mut all = Vec::new();
    r.read_to_end(&mut all)?;
    let mut blocks = Vec::new();
    let mut rest = all.as_slice();
    while !rest.is_empty() {
        if rest.len() < HEADER_BYTES {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated header"));
        }
        let header = OutputHeader::parse(rest[..HEADER_BYTES].try_into().unwrap())?;
        let len = header.layout.payload_len(header.n) * 8;
        let body = &rest[HEADER_BYTES..];
        if body.len() < len {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated payload"));
        }
        let values = body[..len].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        blocks.push(BinBlock { header, values });
        rest = &body[len..];
    }
    Ok(blocks)
}

/// One emitted coefficient.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Entry {
    pub n: usize,
    pub m_prime: i64,
    pub m: i64,
    pub value: f64,
}

/// Entries in triangle order: ascending `m`, then ascending `m'`.
pub fn triangle_entries(t: &CoeffTriangle) -> Vec<Entry> {
    t.iter().map(|(m_prime, m, value)| Entry { n: t.n(), m_prime, m, value }).collect()
}

/// Entries in row-major order over `(m', m)`.
pub fn dense_entries(d: &DenseMatrix) -> Vec<Entry> {
    let ni = d.n() as i64;
    let mut out = Vec::with_capacity(d.dim() * d.dim());
    for mp in -ni..=ni {
        for (k, &value) in d.row(mp).iter().enumerate() {
            out.push(Entry { n: d.n(), m_prime: mp, m: k as i64 - ni, value });
        }
    }
    out
}

pub fn csv_line(e: &Entry) -> String {
    format!("{},{},{},{}", e.n, e.m_prime, e.m, num(e.value))
}

/// Parses rows written by [`csv_line`], skipping the header.
pub fn parse_csv(text: &str) -> Result<Vec<Entry>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(CSV_HEADER) => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(format!("line {}: expected 4 fields", i + 2));
            }
            let err = |e: &dyn std::fmt::Display| format!("line {}: {e}", i + 2);
            Ok(Entry {
                n: f[0].parse().map_err(|e| err(&e))?,
                m_prime: f[1].parse().map_err(|e| err(&e))?,
                m: f[2].parse().map_err(|e| err(&e))?,
                value: f[3].parse().map_err(|e| err(&e))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_numbers() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.5), "-0.5");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1e-300), "1e-300");
        assert_eq!(num(2.5e20), "2.5e20");
        assert_eq!(num(0.1 + 0.2), "0.30000000000000004");
        for v in [1e-5, 9.99e-6, 1.0 / 3.0, -7.25e15, 1e16, f64::MIN_POSITIVE] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
            assert_eq!(num(s.parse().unwrap()), s);
        }
    }

    #[test]
    fn header_round_trip() {
        let h = OutputHeader { version: BIN_VERSION, n: 7, beta: 0.25, layout: Layout::Dense };
        let mut buf = Vec::new();
        h.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_BYTES);
        assert_eq!(OutputHeader::parse(buf.as_slice().try_into().unwrap()).unwrap(), h);
        buf[0] = b'X';
        assert!(OutputHeader::parse(buf.as_slice().try_into().unwrap()).is_err());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let h = OutputHeader { version: BIN_VERSION, n: 1, beta: 0.0, layout: Layout::Triangle };
        let mut buf = Vec::new();
        write_bin_block(&mut buf, &h, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(read_bin(&mut buf.as_slice()).unwrap()[0].values, vec![1.0, 2.0, 3.0, 4.0]);
        buf.pop();
        assert!(read_bin(&mut buf.as_slice()).is_err());
    }
}
