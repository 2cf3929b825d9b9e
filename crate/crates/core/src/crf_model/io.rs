//! Plain-text model files.
//!
//! The first line is the schema header `k l_1..l_k d_1..d_k d_11 d_12 .. d_kk`
//! (space separated); it is followed by the flattened weights, one value per
//! line.

use std::io::{BufRead, Write};

use super::{TypeSchema, Weights};
use crate::error::{Error, Result};

pub fn write_weights<W: Write>(mut out: W, w: &Weights) -> Result<()> {
    let s = w.schema();
    let mut header = vec![s.num_types()];
    header.extend_from_slice(s.all_labels());
    header.extend_from_slice(s.node_dims());
    header.extend_from_slice(s.edge_dims());
    let header: Vec<String> = header.iter().map(ToString::to_string).collect();
    writeln!(out, "{}", header.join(" "))?;
    for x in w.flatten() {
        // Display for f64 is the shortest representation that round-trips
        writeln!(out, "{x}")?;
    }
    Ok(())
}

pub fn read_weights<R: BufRead>(input: R) -> Result<Weights> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing schema header".into(),
    })?;
    let header = header?;
    let counts = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad schema header: {e}"),
        })?;
    let k = *counts.first().ok_or(Error::Parse {
        line: 1,
        message: "empty schema header".into(),
    })?;
    if counts.len() != 1 + 2 * k + k * k {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "schema header for k = {k} needs {} numbers, found {}",
                1 + 2 * k + k * k,
                counts.len()
            ),
        });
    }
    let labels = counts[1..1 + k].to_vec();
    let node_dims = counts[1 + k..1 + 2 * k].to_vec();
    let edge_dims = counts[1 + 2 * k..].to_vec();
    let schema = TypeSchema::new(labels, node_dims, edge_dims).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;

    let mut flat = Vec::with_capacity(schema.weight_len());
    for (i, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let x: f64 = t.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("`{t}` is not a number"),
        })?;
        flat.push(x);
    }
    if flat.len() != schema.weight_len() {
        return Err(Error::Parse {
            line: flat.len() + 2,
            message: format!(
                "expected {} weights, found {}",
                schema.weight_len(),
                flat.len()
            ),
        });
    }
    Weights::unflatten(&schema, &flat)
}
