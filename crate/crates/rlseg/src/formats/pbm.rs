//! PBM bitmap exchange (P1 ASCII and P4 packed), bit 1 meaning black.

use std::io::{BufRead, Write};

use crate::bitmap::Bitmap;
use crate::error::{Error, Result};

/// Reads either PBM flavor, sniffing the magic.
pub fn read_pbm(reader: &mut impl BufRead) -> Result<Bitmap> {
    let mut magic = [0u8; 2];
    reader.read_exact(&mut magic)?;
    match &magic {
        b"P1" => read_p1(reader),
        b"P4" => read_p4(reader),
        other => Err(Error::Format(format!(
            "not a PBM file (magic {:?})",
            String::from_utf8_lossy(other)
        ))),
    }
}

fn read_header_number(reader: &mut impl BufRead) -> Result<u32> {
    // skip whitespace and '#' comments, then read digits
    let mut value: Option<u64> = None;
    loop {
        let mut byte = [0u8; 1];
        if reader.read(&mut byte)? == 0 {
            return value
                .map(|v| v as u32)
                .ok_or_else(|| Error::Format("unexpected end of PBM header".into()));
        }
        match byte[0] {
            b'#' => {
                let mut skipped = Vec::new();
                reader.read_until(b'\n', &mut skipped)?;
            }
            b if b.is_ascii_whitespace() => {
                if let Some(v) = value {
                    return Ok(v as u32);
                }
            }
            b @ b'0'..=b'9' => {
                let v = value.unwrap_or(0) * 10 + (b - b'0') as u64;
                if v > u32::MAX as u64 {
                    return Err(Error::Format("PBM dimension overflow".into()));
                }
                value = Some(v);
            }
            other => {
                return Err(Error::Format(format!(
                    "unexpected byte {other:#04x} in PBM header"
                )))
            }
        }
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Format("zero PBM dimension".into()));
    }
    if (width as u64) * (height as u64) > 1 << 31 {
        return Err(Error::Format("PBM dimensions unreasonably large".into()));
    }
    Ok(())
}

fn read_p1(reader: &mut impl BufRead) -> Result<Bitmap> {
    let width = read_header_number(reader)?;
    let height = read_header_number(reader)?;
    check_dims(width, height)?;
    let mut pixels = Vec::with_capacity((width * height) as usize);
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    for byte in buf {
        match byte {
            b'0' => pixels.push(0),
            b'1' => pixels.push(1),
            b'#' => {
                // comments inside raster are rare but legal until newline;
                // treated as consuming the rest of this byte stream's line
                return Err(Error::Format("comments inside P1 raster unsupported".into()));
            }
            b if b.is_ascii_whitespace() => continue,
            other => {
                return Err(Error::Format(format!(
                    "unexpected byte {other:#04x} in P1 raster"
                )))
            }
        }
    }
    if pixels.len() != (width * height) as usize {
        return Err(Error::Format(format!(
            "P1 raster has {} samples, expected {}",
            pixels.len(),
            width * height
        )));
    }
    Bitmap::from_pixels(height, width, pixels)
}

fn read_p4(reader: &mut impl BufRead) -> Result<Bitmap> {
    let width = read_header_number(reader)?;
    let height = read_header_number(reader)?;
    check_dims(width, height)?;
    let row_bytes = width.div_ceil(8) as usize;
    let mut raster = vec![0u8; row_bytes * height as usize];
    reader.read_exact(&mut raster)?;
    let mut pixels = Vec::with_capacity((width * height) as usize);
    for r in 0..height as usize {
        let row = &raster[r * row_bytes..(r + 1) * row_bytes];
        for c in 0..width as usize {
            let bit = (row[c / 8] >> (7 - c % 8)) & 1;
            pixels.push(bit);
        }
    }
    Bitmap::from_pixels(height, width, pixels)
}

/// Writes packed P4.
pub fn write_pbm(writer: &mut impl Write, bitmap: &Bitmap) -> Result<()> {
    writeln!(writer, "P4")?;
    writeln!(writer, "{} {}", bitmap.width(), bitmap.height())?;
    let row_bytes = bitmap.width().div_ceil(8) as usize;
    let mut packed = vec![0u8; row_bytes];
    for r in 0..bitmap.height() {
        packed.fill(0);
        for (c, &p) in bitmap.row(r).iter().enumerate() {
            if p == 1 {
                packed[c / 8] |= 0x80 >> (c % 8);
            }
        }
        writer.write_all(&packed)?;
    }
    Ok(())
}

/// Writes ASCII P1.
pub fn write_pbm_ascii(writer: &mut impl Write, bitmap: &Bitmap) -> Result<()> {
    writeln!(writer, "P1")?;
    writeln!(writer, "{} {}", bitmap.width(), bitmap.height())?;
    for r in 0..bitmap.height() {
        let mut line = String::with_capacity(2 * bitmap.width() as usize);
        for (c, &p) in bitmap.row(r).iter().enumerate() {
            if c > 0 {
                line.push(' ');
            }
            line.push(if p == 1 { '1' } else { '0' });
        }
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    #[test]
    fn parses_ascii_with_comments() {
        let data = b"P1\n# a comment\n3 2\n0 1 0\n110\n";
        let b = read_pbm(&mut Cursor::new(&data[..])).unwrap();
        assert_eq!((b.height(), b.width()), (2, 3));
        assert_eq!(b.pixels(), &[0, 1, 0, 1, 1, 0]);
    }

    #[test]
    fn rejects_wrong_magic_and_truncation() {
        assert!(read_pbm(&mut Cursor::new(&b"P5\n1 1\n0"[..])).is_err());
        assert!(read_pbm(&mut Cursor::new(&b"P4\n8 2\n\x00"[..])).is_err());
        assert!(read_pbm(&mut Cursor::new(&b"P1\n2 2\n0 1 0\n"[..])).is_err());
    }

    proptest! {
        #[test]
        fn packed_and_ascii_round_trip(h in 1u32..20, w in 1u32..20, seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pixels: Vec<u8> = (0..h * w).map(|_| u8::from(rng.gen_bool(0.5))).collect();
            let b = Bitmap::from_pixels(h, w, pixels).unwrap();

            let mut packed = Vec::new();
            write_pbm(&mut packed, &b).unwrap();
            prop_assert_eq!(&read_pbm(&mut Cursor::new(&packed)).unwrap(), &b);

            let mut ascii = Vec::new();
            write_pbm_ascii(&mut ascii, &b).unwrap();
            prop_assert_eq!(&read_pbm(&mut Cursor::new(&ascii)).unwrap(), &b);
        }
    }
}
