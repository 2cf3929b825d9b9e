//! Predictions files: per image a line `H W S|N|-` (`-` when no image label
//! was predicted), then `H` rows of `W` space-separated cell labels or, when
//! the method predicts no cell labels, a single `-` line; records are
//! separated by a blank line.

use std::io::{BufRead, Write};

use super::metrics::ImagePrediction;
use crate::error::{Error, Result};
use crate::snake_data::ImageLabel;

pub fn write_predictions<W: Write>(mut out: W, preds: &[ImagePrediction]) -> Result<()> {
    for p in preds {
        let tag = match p.image {
            Some(ImageLabel::Snake) => "S",
            Some(ImageLabel::NoSnake) => "N",
            None => "-",
        };
        writeln!(out, "{} {} {tag}", p.height, p.width)?;
        match &p.pixels {
            Some(labels) => {
                for row in labels.chunks(p.width.max(1)) {
                    let row: Vec<String> = row.iter().map(ToString::to_string).collect();
                    writeln!(out, "{}", row.join(" "))?;
                }
            }
            None => writeln!(out, "-")?,
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_predictions<R: BufRead>(input: R) -> Result<Vec<ImagePrediction>> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let err = |i: usize, message: String| Error::Parse { line: i + 1, message };
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let head: Vec<&str> = lines[i].split_whitespace().collect();
        if head.len() != 3 {
            return Err(err(i, "expected `H W S|N|-`".into()));
        }
        let height: usize = head[0].parse().map_err(|_| err(i, "bad height".into()))?;
        let width: usize = head[1].parse().map_err(|_| err(i, "bad width".into()))?;
        let image = match head[2] {
            "S" => Some(ImageLabel::Snake),
            "N" => Some(ImageLabel::NoSnake),
            "-" => None,
            other => return Err(err(i, format!("unknown image label `{other}`"))),
        };
        i += 1;
        let pixels = if lines.get(i).map(|l| l.trim()) == Some("-") {
            i += 1;
            None
        } else {
            let mut labels = Vec::with_capacity(height * width);
            for _ in 0..height {
                let line = lines
                    .get(i)
                    .ok_or_else(|| err(i, "truncated record".into()))?;
                let row = line
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| err(i, e.to_string()))?;
                if row.len() != width {
                    return Err(err(i, format!("expected {width} labels, got {}", row.len())));
                }
                labels.extend(row);
                i += 1;
            }
            Some(labels)
        };
        out.push(ImagePrediction {
            height,
            width,
            pixels,
            image,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let preds = vec![
            ImagePrediction {
                height: 2,
                width: 3,
                pixels: Some(vec![0, 1, 2, 10, 0, 0]),
                image: Some(ImageLabel::NoSnake),
            },
            ImagePrediction {
                height: 1,
                width: 1,
                pixels: None,
                image: Some(ImageLabel::Snake),
            },
            ImagePrediction {
                height: 1,
                width: 2,
                pixels: Some(vec![3, 4]),
                image: None,
            },
        ];
        let mut buf = Vec::new();
        write_predictions(&mut buf, &preds).unwrap();
        assert_eq!(read_predictions(&buf[..]).unwrap(), preds);
        assert!(read_predictions("2 2 S\n0 0\n".as_bytes()).is_err());
        assert!(read_predictions("1 2 X\n0 0\n".as_bytes()).is_err());
    }
}
