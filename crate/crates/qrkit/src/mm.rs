//! Matrix Market I/O: reads dense `array` and sparse `coordinate` files
//! (real, general), writes dense `array` files. Values are written in
//! shortest round-trip scientific notation so a write/read cycle is
//! bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mat::DenseMatrix;

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix> {
    let file = File::open(path)?;
    read_matrix_market_from(BufReader::new(file))
}

pub fn read_matrix_market_from(reader: impl Read) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(reader).lines();
    let banner = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    };
    let header: Vec<String> = banner.split_whitespace().map(|t| t.to_lowercase()).collect();
    if header.len() < 5 || header[0] != "%%matrixmarket" || header[1] != "matrix" {
        return Err(Error::Parse {
            line: 1,
            msg: "expected '%%MatrixMarket matrix <format> <field> <symmetry>' banner".into(),
        });
    }
    let format = header[2].as_str();
    if format != "array" && format != "coordinate" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported format '{format}' (array or coordinate)"),
        });
    }
    if header[3] != "real" && header[3] != "integer" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported field '{}' (real only)", header[3]),
        });
    }
    if header[4] != "general" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported symmetry '{}' (general only)", header[4]),
        });
    }

    let mut line_no = 1usize;
    let mut size_line: Option<(usize, String)> = None;
    let mut tokens: Vec<(usize, String)> = Vec::new();
    for line in lines {
        let line = line?;
        line_no += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if size_line.is_none() {
            size_line = Some((line_no, trimmed.to_string()));
        } else {
            for tok in trimmed.split_whitespace() {
                tokens.push((line_no, tok.to_string()));
            }
        }
    }
    let (size_ln, size) = size_line.ok_or(Error::Parse {
        line: line_no,
        msg: "missing size line".into(),
    })?;
    let dims: Vec<&str> = size.split_whitespace().collect();

    let parse_usize = |s: &str, ln: usize| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse {
            line: ln,
            msg: format!("expected integer, got '{s}'"),
        })
    };
    let parse_f64 = |s: &str, ln: usize| -> Result<f64> {
        s.parse().map_err(|_| Error::Parse {
            line: ln,
            msg: format!("expected real value, got '{s}'"),
        })
    };

    match format {
        "array" => {
            if dims.len() != 2 {
                return Err(Error::Parse {
                    line: size_ln,
                    msg: format!("array size line needs 'rows cols', got '{size}'"),
                });
            }
            let m = parse_usize(dims[0], size_ln)?;
            let n = parse_usize(dims[1], size_ln)?;
            if tokens.len() != m * n {
                return Err(Error::Parse {
                    line: tokens.last().map(|t| t.0).unwrap_or(size_ln),
                    msg: format!("expected {} values, found {}", m * n, tokens.len()),
                });
            }
            let mut data = Vec::with_capacity(m * n);
            for (ln, tok) in &tokens {
                data.push(parse_f64(tok, *ln)?);
            }
            DenseMatrix::from_col_major(m, n, data)
        }
        _ => {
            if dims.len() != 3 {
                return Err(Error::Parse {
                    line: size_ln,
                    msg: format!("coordinate size line needs 'rows cols nnz', got '{size}'"),
                });
            }
            let m = parse_usize(dims[0], size_ln)?;
            let n = parse_usize(dims[1], size_ln)?;
            let nnz = parse_usize(dims[2], size_ln)?;
            if tokens.len() != 3 * nnz {
                return Err(Error::Parse {
                    line: tokens.last().map(|t| t.0).unwrap_or(size_ln),
                    msg: format!("expected {} entry fields, found {}", 3 * nnz, tokens.len()),
                });
            }
            let mut data = vec![0.0; m * n];
            for e in tokens.chunks(3) {
                let i = parse_usize(&e[0].1, e[0].0)?;
                let j = parse_usize(&e[1].1, e[1].0)?;
                let v = parse_f64(&e[2].1, e[2].0)?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(Error::Parse {
                        line: e[0].0,
                        msg: format!("entry ({i}, {j}) outside {m}x{n}"),
                    });
                }
                data[(j - 1) * m + (i - 1)] = v;
            }
            DenseMatrix::from_col_major(m, n, data)
        }
    }
}

/// Writes a dense array-format file; `comments` become `%`-prefixed lines
/// right after the banner.
pub fn write_matrix_market_array(path: &Path, x: &DenseMatrix, comments: &[String]) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_matrix_market_array_to(&mut w, x, comments)?;
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market_array_to(
    w: &mut impl Write,
    x: &DenseMatrix,
    comments: &[String],
) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    for c in comments {
        writeln!(w, "% {c}")?;
    }
    writeln!(w, "{} {}", x.rows(), x.cols())?;
    for v in x.data() {
        writeln!(w, "{v:e}")?;
    }
    Ok(())
}
