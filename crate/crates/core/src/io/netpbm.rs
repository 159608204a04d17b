//! Self-contained netpbm readers (PGM P2/P5, PPM P3/P6).
//!
//! Frames come back as `height × width` matrices of raw sample values;
//! color images are reduced to luma with the ITU-R 601 weights
//! (0.299 R + 0.587 G + 0.114 B). Per-set normalization happens later, at
//! ingestion.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Loads a PGM or PPM file as a grayscale frame.
pub fn load_gray_frame(path: &Path) -> Result<DMatrix<f64>> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    parse_gray_frame(&bytes).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses netpbm bytes into a grayscale frame.
pub fn parse_gray_frame(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < 2 {
        return Err(Error::data("not a netpbm file".to_string()));
    }
    let magic = &bytes[0..2];
    let (channels, ascii) = match magic {
        b"P2" => (1usize, true),
        b"P3" => (3usize, true),
        b"P5" => (1usize, false),
        b"P6" => (3usize, false),
        _ => {
            return Err(Error::data(format!(
                "unsupported netpbm magic {:?}",
                String::from_utf8_lossy(magic)
            )))
        }
    };

    let mut cursor = 2;
    let width = read_header_int(bytes, &mut cursor)?;
    let height = read_header_int(bytes, &mut cursor)?;
    let maxval = read_header_int(bytes, &mut cursor)?;
    if width == 0 || height == 0 {
        return Err(Error::data("zero-sized image".to_string()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::data(format!("invalid maxval {maxval}")));
    }

    let count = width * height * channels;
    let samples: Vec<f64> = if ascii {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(read_header_int(bytes, &mut cursor)? as f64);
        }
        out
    } else {
        // Exactly one whitespace byte separates the header from the raster.
        if cursor >= bytes.len() || !bytes[cursor].is_ascii_whitespace() {
            return Err(Error::data("missing raster separator".to_string()));
        }
        cursor += 1;
        let wide = maxval > 255;
        let stride = if wide { 2 } else { 1 };
        let needed = count * stride;
        if bytes.len() < cursor + needed {
            return Err(Error::data(format!(
                "truncated raster: need {needed} bytes, have {}",
                bytes.len() - cursor
            )));
        }
        let raster = &bytes[cursor..cursor + needed];
        (0..count)
            .map(|i| {
                if wide {
                    u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as f64
                } else {
                    raster[i] as f64
                }
            })
            .collect()
    };

    for &s in &samples {
        if s > maxval as f64 {
            return Err(Error::data(format!("sample {s} exceeds maxval {maxval}")));
        }
    }

    let frame = DMatrix::from_fn(height, width, |row, col| {
        let base = (row * width + col) * channels;
        if channels == 1 {
            samples[base]
        } else {
            0.299 * samples[base] + 0.587 * samples[base + 1] + 0.114 * samples[base + 2]
        }
    });
    Ok(frame)
}

/// Reads the next unsigned integer token, skipping whitespace and `#`
/// comments.
fn read_header_int(bytes: &[u8], cursor: &mut usize) -> Result<usize> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    let start = *cursor;
    while *cursor < bytes.len() && bytes[*cursor].is_ascii_digit() {
        *cursor += 1;
    }
    if start == *cursor {
        return Err(Error::data("expected integer in netpbm header".to_string()));
    }
    std::str::from_utf8(&bytes[start..*cursor])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::data("malformed integer in netpbm header".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ascii_pgm() {
        let data = b"P2\n# comment\n3 2\n255\n0 50 100\n150 200 255\n";
        let frame = parse_gray_frame(data).unwrap();
        assert_eq!(frame.shape(), (2, 3));
        assert_eq!(frame[(0, 0)], 0.0);
        assert_eq!(frame[(0, 2)], 100.0);
        assert_eq!(frame[(1, 2)], 255.0);
    }

    #[test]
    fn parses_binary_pgm() {
        let mut data = b"P5\n2 2\n255\n".to_vec();
        data.extend_from_slice(&[10, 20, 30, 40]);
        let frame = parse_gray_frame(&data).unwrap();
        assert_eq!(frame[(0, 0)], 10.0);
        assert_eq!(frame[(1, 1)], 40.0);
    }

    #[test]
    fn parses_16bit_pgm() {
        let mut data = b"P5\n1 1\n65535\n".to_vec();
        data.extend_from_slice(&1000u16.to_be_bytes());
        let frame = parse_gray_frame(&data).unwrap();
        assert_eq!(frame[(0, 0)], 1000.0);
    }

    #[test]
    fn converts_ppm_to_luma() {
        let mut data = b"P6\n1 1\n255\n".to_vec();
        data.extend_from_slice(&[100, 50, 200]);
        let frame = parse_gray_frame(&data).unwrap();
        let expected = 0.299 * 100.0 + 0.587 * 50.0 + 0.114 * 200.0;
        assert!((frame[(0, 0)] - expected).abs() < 1e-12);
    }

    #[test]
    fn parses_ascii_ppm() {
        let data = b"P3\n1 2\n255\n255 0 0\n0 255 0\n";
        let frame = parse_gray_frame(data).unwrap();
        assert!((frame[(0, 0)] - 0.299 * 255.0).abs() < 1e-12);
        assert!((frame[(1, 0)] - 0.587 * 255.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_gray_frame(b"JUNK").is_err());
        assert!(parse_gray_frame(b"P5\n2 2\n255\n\x01\x02").is_err()); // truncated
        assert!(parse_gray_frame(b"P2\n1 1\n255\n943").is_err()); // exceeds maxval
    }
}
