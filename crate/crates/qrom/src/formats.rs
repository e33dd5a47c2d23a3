//! Raw picture ingestion: Netpbm graymaps (P2 ASCII, P5 8-bit binary) and
//! comma-separated pixel rows.

use std::fmt;

use qrom_core::RawImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    PgmAscii,
    PgmBinary,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedHeader(&'static str),
    PixelOutOfRange { value: u64, maxval: u32 },
    InvalidPixel,
    Truncated { expected: usize, found: usize },
    TrailingData,
    RaggedRows { expected: usize, found: usize },
    Unsupported(&'static str),
}

/// A parse failure and the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MalformedHeader(what) => write!(f, "malformed header ({what})"),
            ParseErrorKind::PixelOutOfRange { value, maxval } => {
                write!(f, "pixel {value} out of range 0..={maxval}")
            }
            ParseErrorKind::InvalidPixel => write!(f, "invalid pixel value"),
            ParseErrorKind::Truncated { expected, found } => {
                write!(f, "truncated payload: expected {expected} pixels, found {found}")
            }
            ParseErrorKind::TrailingData => write!(f, "unexpected data after pixels"),
            ParseErrorKind::RaggedRows { expected, found } => {
                write!(f, "row has {found} pixels, expected {expected}")
            }
            ParseErrorKind::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

fn err<T>(kind: ParseErrorKind, offset: usize) -> Result<T, ParseError> {
    Err(ParseError { kind, offset })
}

pub fn parse_image(bytes: &[u8], format: ImageFormat) -> Result<RawImage, ParseError> {
    match format {
        ImageFormat::PgmAscii => parse_pgm_as(bytes, Some(b"P2")),
        ImageFormat::PgmBinary => parse_pgm_as(bytes, Some(b"P5")),
        ImageFormat::Csv => parse_csv(bytes),
    }
}

/// Either PGM flavour, chosen by the magic number.
pub fn parse_pgm(bytes: &[u8]) -> Result<RawImage, ParseError> {
    parse_pgm_as(bytes, None)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && !matches!(self.bytes[self.pos], b'\n' | b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Next whitespace-delimited token and its starting offset.
    fn token(&mut self) -> Option<(usize, &'a [u8])> {
        self.skip_blank();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| (start, &self.bytes[start..self.pos]))
    }

    fn number(&mut self, what: &'static str) -> Result<(usize, u64), ParseError> {
        let Some((start, tok)) = self.token() else {
            return err(ParseErrorKind::MalformedHeader(what), self.pos);
        };
        match parse_u64(tok) {
            Some(v) => Ok((start, v)),
            None => err(ParseErrorKind::MalformedHeader(what), start),
        }
    }
}

fn parse_u64(tok: &[u8]) -> Option<u64> {
    std::str::from_utf8(tok).ok()?.parse().ok()
}

fn parse_pgm_as(bytes: &[u8], expect: Option<&[u8; 2]>) -> Result<RawImage, ParseError> {
    let magic = bytes.get(..2).unwrap_or(bytes);
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        _ => return err(ParseErrorKind::MalformedHeader("missing P2/P5 magic"), 0),
    };
    if let Some(expected) = expect {
        if magic != expected {
            return err(ParseErrorKind::MalformedHeader("magic does not match declared format"), 0);
        }
    }
    let mut cur = Cursor { bytes, pos: 2 };
    if bytes.get(2).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        return err(ParseErrorKind::MalformedHeader("missing P2/P5 magic"), 0);
    }
    let (w_at, width) = cur.number("width")?;
    let (h_at, height) = cur.number("height")?;
    let (m_at, maxval) = cur.number("maxval")?;
    if width == 0 {
        return err(ParseErrorKind::MalformedHeader("zero width"), w_at);
    }
    if height == 0 {
        return err(ParseErrorKind::MalformedHeader("zero height"), h_at);
    }
    if maxval == 0 || maxval > 65535 {
        return err(ParseErrorKind::MalformedHeader("maxval outside 1..=65535"), m_at);
    }
    let maxval = maxval as u32;
    let count = usize::try_from(width.saturating_mul(height))
        .map_err(|_| ParseError { kind: ParseErrorKind::MalformedHeader("image too large"), offset: w_at })?;
    let mut pixels = Vec::with_capacity(count.min(bytes.len()));

    if binary {
        if maxval > 255 {
            return err(ParseErrorKind::Unsupported("16-bit binary graymap"), m_at);
        }
        // exactly one whitespace byte separates maxval from the raster
        let start = cur.pos + 1;
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return err(ParseErrorKind::Truncated { expected: count, found: 0 }, cur.pos);
        }
        let raster = &bytes[start.min(bytes.len())..];
        if raster.len() < count {
            return err(
                ParseErrorKind::Truncated { expected: count, found: raster.len() },
                bytes.len(),
            );
        }
        for (i, &b) in raster[..count].iter().enumerate() {
            if u32::from(b) > maxval {
                return err(ParseErrorKind::PixelOutOfRange { value: b.into(), maxval }, start + i);
            }
            pixels.push(u32::from(b));
        }
    } else {
        while pixels.len() < count {
            let Some((at, tok)) = cur.token() else {
                return err(
                    ParseErrorKind::Truncated { expected: count, found: pixels.len() },
                    bytes.len(),
                );
            };
            let value = parse_u64(tok).ok_or(ParseError { kind: ParseErrorKind::InvalidPixel, offset: at })?;
            if value > u64::from(maxval) {
                return err(ParseErrorKind::PixelOutOfRange { value, maxval }, at);
            }
            pixels.push(value as u32);
        }
        if let Some((at, _)) = cur.token() {
            return err(ParseErrorKind::TrailingData, at);
        }
    }
    Ok(RawImage::new(width as usize, height as usize, maxval, pixels).expect("validated above"))
}

/// One image row per line; `maxval` is the largest pixel (at least 1).
fn parse_csv(bytes: &[u8]) -> Result<RawImage, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut width = None;
    let mut height = 0;
    let mut pixels = Vec::new();
    let mut record = csv::ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let offset = e.position().map_or(0, |p| p.byte() as usize);
                return match e.kind() {
                    csv::ErrorKind::UnequalLengths { expected_len, len, .. } => err(
                        ParseErrorKind::RaggedRows {
                            expected: *expected_len as usize,
                            found: *len as usize,
                        },
                        offset,
                    ),
                    _ => err(ParseErrorKind::InvalidPixel, offset),
                };
            }
        }
        let row_at = record.position().map_or(0, |p| p.byte() as usize);
        for field in record.iter() {
            let value = parse_u64(field)
                .filter(|&v| v <= u64::from(u32::MAX))
                .ok_or(ParseError { kind: ParseErrorKind::InvalidPixel, offset: row_at })?;
            pixels.push(value as u32);
        }
        width.get_or_insert(record.len());
        height += 1;
    }
    let Some(width) = width else {
        return err(ParseErrorKind::MalformedHeader("no rows"), 0);
    };
    if width == 0 {
        return err(ParseErrorKind::MalformedHeader("empty row"), 0);
    }
    let maxval = pixels.iter().copied().max().unwrap_or(0).max(1);
    Ok(RawImage::new(width, height, maxval, pixels).expect("rectangular by construction"))
}

/// Serializes `img` as an ASCII graymap.
pub fn write_pgm_ascii(img: &RawImage) -> String {
    let mut out = format!("P2\n{} {}\n{}\n", img.width(), img.height(), img.maxval());
    for row in img.pixels().chunks(img.width()) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
