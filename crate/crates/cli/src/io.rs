//! Image ingestion: PGM (P2 ascii / P5 binary) and CSV of integers.
//! The first stored row maps to y = 0 (the bottom row of the grid).

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hcf_core::{ImageDomain, ImageValues};

pub fn read_image(path: &Path) -> Result<ImageValues> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "pgm" => read_pgm(path),
        "csv" | "txt" => read_csv(path),
        other => bail!("unsupported image extension '{}'; use .pgm or .csv", other),
    }
}

fn read_pgm(path: &Path) -> Result<ImageValues> {
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if data.len() < 2 {
        bail!("{}: not a PGM file", path.display());
    }
    let magic = &data[..2];
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        _ => bail!("{}: expected P2 or P5 magic", path.display()),
    };

    // tokenize the header, skipping '#' comments
    let mut pos = 2usize;
    let mut header: Vec<u64> = Vec::new();
    while header.len() < 3 {
        while pos < data.len() && (data[pos] as char).is_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !(data[pos] as char).is_whitespace() {
            pos += 1;
        }
        if start == pos {
            bail!("{}: truncated header", path.display());
        }
        let tok = std::str::from_utf8(&data[start..pos])?;
        header.push(tok.parse::<u64>().with_context(|| format!("bad header token '{}'", tok))?);
    }
    let (w, h, maxval) = (header[0] as u32, header[1] as u32, header[2]);
    if maxval == 0 || maxval > 65535 {
        bail!("{}: maxval {} out of range", path.display(), maxval);
    }
    let domain = ImageDomain::new(w, h)?;
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(h as usize);
    if binary {
        pos += 1; // single whitespace after maxval
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let need = w as usize * h as usize * bytes_per;
        if data.len() < pos + need {
            bail!("{}: raster truncated", path.display());
        }
        for r in 0..h as usize {
            let mut row = Vec::with_capacity(w as usize);
            for c in 0..w as usize {
                let off = pos + (r * w as usize + c) * bytes_per;
                let v = if bytes_per == 1 {
                    data[off] as i64
                } else {
                    ((data[off] as i64) << 8) | data[off + 1] as i64
                };
                row.push(v);
            }
            rows.push(row);
        }
    } else {
        let text = std::str::from_utf8(&data[pos..])?;
        let mut vals = text
            .lines()
            .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace())
            .map(|t| t.parse::<i64>());
        for _ in 0..h {
            let mut row = Vec::with_capacity(w as usize);
            for _ in 0..w {
                let v = vals
                    .next()
                    .ok_or_else(|| anyhow::anyhow!("{}: raster truncated", path.display()))??;
                row.push(v);
            }
            rows.push(row);
        }
    }
    Ok(ImageValues::from_rows(domain, &rows)?)
}

fn read_csv(path: &Path) -> Result<ImageValues> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .with_context(|| format!("{}:{}: bad value '{}'", path.display(), lineno + 1, t))
            })
            .collect::<Result<Vec<i64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: empty image", path.display());
    }
    let w = rows[0].len() as u32;
    if rows.iter().any(|r| r.len() != w as usize) {
        bail!("{}: ragged rows", path.display());
    }
    let domain = ImageDomain::new(w, rows.len() as u32)?;
    Ok(ImageValues::from_rows(domain, &rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hcf_core::Pixel;
    use std::io::Write;

    fn write_temp(name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("hcf-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(bytes).unwrap();
        path
    }

    #[test]
    fn reads_ascii_pgm_with_comment() {
        let p = write_temp("a.pgm", b"P2\n# comment\n3 2\n255\n1 2 3\n4 5 6\n");
        let img = read_image(&p).unwrap();
        assert_eq!(img.domain().w(), 3);
        assert_eq!(img.get(Pixel::new(0, 0)), 1);
        assert_eq!(img.get(Pixel::new(2, 1)), 6);
    }

    #[test]
    fn reads_binary_pgm() {
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let p = write_temp("b.pgm", &bytes);
        let img = read_image(&p).unwrap();
        assert_eq!(img.get(Pixel::new(0, 0)), 1);
        assert_eq!(img.get(Pixel::new(2, 1)), 6);
    }

    #[test]
    fn reads_csv() {
        let p = write_temp("c.csv", b"1, 2, 3\n4, 5, 6\n");
        let img = read_image(&p).unwrap();
        assert_eq!(img.get(Pixel::new(1, 1)), 5);
    }

    #[test]
    fn rejects_garbage() {
        let p = write_temp("d.pgm", b"P9\nnope");
        assert!(read_image(&p).is_err());
        let q = write_temp("e.csv", b"1,2\n3\n");
        assert!(read_image(&q).is_err());
    }
}
