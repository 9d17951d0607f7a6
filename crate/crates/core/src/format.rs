//! The `ADRT1` file format.
//!
//! ```text
//! ADRT1 <image|sino> n=<n> hlo=<int> hhi=<int> dtype=<i64|f64>
//! <row h = hlo: 2^n values>
//! ...
//! <row h = hhi - 1>
//! ```
//!
//! Canonical text output uses single spaces and LF line endings. Floats are
//! written with 17 significant digits so that parsing restores them exactly.
//! Image files must have `hlo=0` and `hhi=2^n`.
//!
//! The binary container carries the same header followed by ` payload=le64`,
//! a newline, and the rows as little-endian 8-byte values.

use std::io::{BufRead, Write};

use crate::error::{AdrtError, Result};
use crate::grid::{check_scale, Kind, SquareImage, StripImage};
use crate::sample::{Dtype, Sample};

const MAGIC: &str = "ADRT1";
const BINARY_MARKER: &str = "payload=le64";

/// Samples that can be written to and read from `ADRT1` files.
pub trait FileSample: Sample {
    fn parse_token(token: &str) -> Option<Self>;
    fn write_token(self, out: &mut String);
    fn to_le(self) -> [u8; 8];
    fn from_le(bytes: [u8; 8]) -> Self;
}

impl FileSample for i64 {
    fn parse_token(token: &str) -> Option<Self> {
        token.parse().ok()
    }
    fn write_token(self, out: &mut String) {
        out.push_str(&self.to_string());
    }
    fn to_le(self) -> [u8; 8] {
        self.to_le_bytes()
    }
    fn from_le(bytes: [u8; 8]) -> Self {
        i64::from_le_bytes(bytes)
    }
}

impl FileSample for f64 {
    fn parse_token(token: &str) -> Option<Self> {
        token.parse().ok()
    }
    fn write_token(self, out: &mut String) {
        out.push_str(&format!("{self:.16e}"));
    }
    fn to_le(self) -> [u8; 8] {
        self.to_le_bytes()
    }
    fn from_le(bytes: [u8; 8]) -> Self {
        f64::from_le_bytes(bytes)
    }
}

/// Parsed header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub kind: Kind,
    pub n: u32,
    pub lo: i64,
    pub hi: i64,
    pub dtype: Dtype,
    pub binary: bool,
}

impl Header {
    /// Strip images whose window is not the square are written as `sino`.
    pub fn of<T: Sample>(f: &StripImage<T>, binary: bool) -> Self {
        let square = f.lo() == 0 && f.hi() == f.width() as i64;
        Header {
            kind: if square { f.kind() } else { Kind::Sino },
            n: f.n(),
            lo: f.lo(),
            hi: f.hi(),
            dtype: T::DTYPE,
            binary,
        }
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "{MAGIC} {} n={} hlo={} hhi={} dtype={}",
            self.kind.as_str(),
            self.n,
            self.lo,
            self.hi,
            self.dtype.as_str()
        );
        if self.binary {
            s.push(' ');
            s.push_str(BINARY_MARKER);
        }
        s
    }

    pub fn parse(line: &str) -> Result<Self> {
        let err = |column: usize, message: String| AdrtError::Format {
            line: 1,
            column,
            message,
        };
        let fields = tokens(line);
        let mut it = fields.iter();
        match it.next() {
            Some(&(_, MAGIC)) => {}
            Some(&(c, other)) => return Err(err(c, format!("expected {MAGIC}, found {other:?}"))),
            None => return Err(err(1, "empty header".into())),
        }
        let kind = match it.next() {
            Some(&(_, "image")) => Kind::Image,
            Some(&(_, "sino")) => Kind::Sino,
            Some(&(c, other)) => {
                return Err(err(c, format!("expected image or sino, found {other:?}")))
            }
            None => return Err(err(line.len() + 1, "missing kind".into())),
        };

        let mut value = |key: &str| -> Result<(usize, &str)> {
            match it.next() {
                Some(&(c, tok)) => match tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')) {
                    Some(v) => Ok((c + key.len() + 1, v)),
                    None => Err(err(c, format!("expected {key}=..., found {tok:?}"))),
                },
                None => Err(err(line.len() + 1, format!("missing {key}"))),
            }
        };
        let (c, v) = value("n")?;
        let n: u32 = v.parse().map_err(|_| err(c, format!("bad scale {v:?}")))?;
        check_scale(n).map_err(|e| err(c, e.to_string()))?;
        let (c, v) = value("hlo")?;
        let lo: i64 = v.parse().map_err(|_| err(c, format!("bad integer {v:?}")))?;
        let (c, v) = value("hhi")?;
        let hi: i64 = v.parse().map_err(|_| err(c, format!("bad integer {v:?}")))?;
        if hi < lo {
            return Err(err(c, format!("hhi={hi} is below hlo={lo}")));
        }
        let (c, v) = value("dtype")?;
        let dtype = match v {
            "i64" => Dtype::I64,
            "f64" => Dtype::F64,
            _ => return Err(err(c, format!("unknown dtype {v:?}"))),
        };
        let binary = match it.next() {
            None => false,
            Some(&(_, BINARY_MARKER)) => true,
            Some(&(c, other)) => return Err(err(c, format!("unexpected field {other:?}"))),
        };
        if let Some(&(c, other)) = it.next() {
            return Err(err(c, format!("unexpected field {other:?}")));
        }
        if kind == Kind::Image && (lo != 0 || hi != 1i64 << n) {
            return Err(err(
                1,
                format!("image files need hlo=0 hhi={}, found hlo={lo} hhi={hi}", 1i64 << n),
            ));
        }
        Ok(Header {
            kind,
            n,
            lo,
            hi,
            dtype,
            binary,
        })
    }
}

/// Whitespace-separated tokens with their 1-based byte columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// A file's contents, tagged by element type.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyImage {
    I64(StripImage<i64>),
    F64(StripImage<f64>),
}

impl AnyImage {
    pub fn dtype(&self) -> Dtype {
        match self {
            AnyImage::I64(_) => Dtype::I64,
            AnyImage::F64(_) => Dtype::F64,
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            AnyImage::I64(f) => f.kind(),
            AnyImage::F64(f) => f.kind(),
        }
    }
}

impl From<StripImage<i64>> for AnyImage {
    fn from(f: StripImage<i64>) -> Self {
        AnyImage::I64(f)
    }
}

impl From<StripImage<f64>> for AnyImage {
    fn from(f: StripImage<f64>) -> Self {
        AnyImage::F64(f)
    }
}

fn read_line(reader: &mut impl BufRead, buf: &mut String) -> Result<bool> {
    buf.clear();
    if reader.read_line(buf)? == 0 {
        return Ok(false);
    }
    if buf.ends_with('\n') {
        buf.pop();
        if buf.ends_with('\r') {
            buf.pop();
        }
    }
    Ok(true)
}

fn parse_body<T: FileSample>(header: &Header, reader: &mut impl BufRead) -> Result<StripImage<T>> {
    let width = 1usize << header.n;
    let rows = (header.hi - header.lo) as usize;
    let mut values = Vec::with_capacity(width * rows);
    if header.binary {
        let mut bytes = vec![0u8; 8 * width * rows];
        reader.read_exact(&mut bytes).map_err(|_| AdrtError::Format {
            line: 2,
            column: 1,
            message: format!("binary payload shorter than {} bytes", bytes.len()),
        })?;
        let mut extra = [0u8; 1];
        if reader.read(&mut extra)? != 0 {
            return Err(AdrtError::Format {
                line: 2,
                column: bytes.len() + 1,
                message: "trailing bytes after binary payload".into(),
            });
        }
        values.extend(
            bytes
                .chunks_exact(8)
                .map(|c| T::from_le(c.try_into().expect("8-byte chunk"))),
        );
    } else {
        let mut buf = String::new();
        let mut line = 1;
        while read_line(reader, &mut buf)? {
            line += 1;
            let toks = tokens(&buf);
            if toks.is_empty() && line > rows + 1 {
                continue;
            }
            if line > rows + 1 {
                return Err(AdrtError::Format {
                    line,
                    column: 1,
                    message: format!("expected {rows} data rows, found more"),
                });
            }
            if toks.len() != width {
                return Err(AdrtError::Format {
                    line,
                    column: toks.get(width).map_or(buf.len() + 1, |t| t.0),
                    message: format!("expected {width} values, found {}", toks.len()),
                });
            }
            for (column, tok) in toks {
                let v = T::parse_token(tok).ok_or_else(|| AdrtError::Format {
                    line,
                    column,
                    message: format!("not a {} value: {tok:?}", T::DTYPE.as_str()),
                })?;
                values.push(v);
            }
        }
        if line < rows + 1 {
            return Err(AdrtError::Format {
                line: line + 1,
                column: 1,
                message: format!("expected {rows} data rows, found {}", line - 1),
            });
        }
    }
    StripImage::from_row_major(header.n, header.lo, header.hi, header.kind, &values)
}

/// Reads a text or binary `ADRT1` stream.
pub fn read_image(mut reader: impl BufRead) -> Result<AnyImage> {
    let mut buf = String::new();
    if !read_line(&mut reader, &mut buf)? {
        return Err(AdrtError::Format {
            line: 1,
            column: 1,
            message: "empty input".into(),
        });
    }
    let header = Header::parse(&buf)?;
    Ok(match header.dtype {
        Dtype::I64 => AnyImage::I64(parse_body(&header, &mut reader)?),
        Dtype::F64 => AnyImage::F64(parse_body(&header, &mut reader)?),
    })
}

pub fn parse_str(text: &str) -> Result<AnyImage> {
    read_image(text.as_bytes())
}

/// Writes the canonical text form.
pub fn write_text<T: FileSample>(f: &StripImage<T>, mut out: impl Write) -> Result<()> {
    let mut text = Header::of(f, false).line();
    text.push('\n');
    for h in f.lo()..f.hi() {
        for j in 0..f.width() {
            if j > 0 {
                text.push(' ');
            }
            f.get(h, j).write_token(&mut text);
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_binary<T: FileSample>(f: &StripImage<T>, mut out: impl Write) -> Result<()> {
    let mut bytes = Header::of(f, true).line().into_bytes();
    bytes.push(b'\n');
    bytes.reserve(8 * f.width() * f.rows());
    for v in f.to_row_major() {
        bytes.extend_from_slice(&v.to_le());
    }
    out.write_all(&bytes)?;
    Ok(())
}

pub fn to_text<T: FileSample>(f: &StripImage<T>) -> String {
    let mut out = Vec::new();
    write_text(f, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("ascii output")
}

pub fn write_any(f: &AnyImage, binary: bool, out: impl Write) -> Result<()> {
    match (f, binary) {
        (AnyImage::I64(f), false) => write_text(f, out),
        (AnyImage::F64(f), false) => write_text(f, out),
        (AnyImage::I64(f), true) => write_binary(f, out),
        (AnyImage::F64(f), true) => write_binary(f, out),
    }
}

pub fn square_to_text<T: FileSample>(f: &SquareImage<T>) -> String {
    to_text(&f.embed())
}
