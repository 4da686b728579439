//! Text formats: candidates files, results files, partition summaries, and
//! checkpoints. Parsing then serializing a canonical file is the identity.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::orchestrate::ClassPartition;
use crate::signature::{Method, SignatureRecord};
use crate::topology::ExponentTuple;

/// One tuple per line, space-separated, non-decreasing; '#' lines are
/// comments. All data lines must share the same length.
pub fn parse_candidates<R: BufRead>(reader: R) -> Result<Vec<ExponentTuple>> {
    let mut tuples = Vec::new();
    let mut m = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let values: Vec<u64> = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("invalid integer {tok:?}"),
                })
            })
            .collect::<Result<_>>()?;
        match m {
            None => m = Some(values.len()),
            Some(m) if m != values.len() => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {m} entries, found {}", values.len()),
                });
            }
            _ => {}
        }
        let tuple = ExponentTuple::from_sorted(values).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        tuples.push(tuple);
    }
    Ok(tuples)
}

pub fn write_candidates<W: Write>(mut writer: W, tuples: &[ExponentTuple]) -> Result<()> {
    for tuple in tuples {
        writeln!(writer, "{tuple}")?;
    }
    Ok(())
}

pub fn candidates_line(tuple: &ExponentTuple) -> String {
    format!("{tuple}\n")
}

/// Header of a results file: column names, the group order, and the note
/// tying 0-based residues to the 1-based Σᵢ labels used in the literature.
pub fn results_header(m: usize, order: Option<u64>) -> String {
    let mut header = String::from("#");
    for i in 1..=m {
        let _ = write!(header, " a{i}");
    }
    header.push_str(" tau g method N");
    if let Some(order) = order {
        let _ = write!(
            header,
            " | bP order {order}; g = tau/8 mod order, 0 = standard sphere, \
             literature label Sigma_i = residue i mod order"
        );
    }
    header.push('\n');
    header
}

/// Tab-separated record line: exponents, tau, class (`-` when absent),
/// method tag, and the common multiple N.
pub fn result_line(record: &SignatureRecord) -> String {
    let mut line = String::new();
    for v in record.tuple.entries() {
        let _ = write!(line, "{v}\t");
    }
    let class = record
        .class
        .map_or_else(|| "-".to_string(), |g| g.to_string());
    let _ = writeln!(
        line,
        "{}\t{}\t{}\t{}",
        record.tau, class, record.method, record.multiple
    );
    line
}

/// Parsed results file: the tuple length, group order when the header
/// carries one, and the records.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsFile {
    pub m: usize,
    pub order: Option<u64>,
    pub records: Vec<SignatureRecord>,
}

pub fn parse_results<R: BufRead>(reader: R) -> Result<ResultsFile> {
    let mut records = Vec::new();
    let mut m = None;
    let mut order = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(pos) = trimmed.find("bP order ") {
                let rest = &trimmed[pos + "bP order ".len()..];
                let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
                order = digits.parse::<u64>().ok();
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() < 5 {
            return Err(Error::Parse {
                line: lineno,
                msg: "expected exponents, tau, g, method, N".into(),
            });
        }
        let m_here = fields.len() - 4;
        match m {
            None => m = Some(m_here),
            Some(m) if m != m_here => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {m} exponents, found {m_here}"),
                });
            }
            _ => {}
        }
        let parse_err =
            |msg: String| Error::Parse { line: lineno, msg };
        let values: Vec<u64> = fields[..m_here]
            .iter()
            .map(|tok| {
                tok.parse::<u64>()
                    .map_err(|_| parse_err(format!("invalid exponent {tok:?}")))
            })
            .collect::<Result<_>>()?;
        let tuple =
            ExponentTuple::from_sorted(values).map_err(|e| parse_err(e.to_string()))?;
        let tau: i128 = fields[m_here]
            .parse()
            .map_err(|_| parse_err(format!("invalid tau {:?}", fields[m_here])))?;
        let class = match fields[m_here + 1] {
            "-" => None,
            tok => Some(
                tok.parse::<u64>()
                    .map_err(|_| parse_err(format!("invalid class {tok:?}")))?,
            ),
        };
        let method = Method::from_tag(fields[m_here + 2])
            .ok_or_else(|| parse_err(format!("unknown method {:?}", fields[m_here + 2])))?;
        let multiple: u64 = fields[m_here + 3]
            .parse()
            .map_err(|_| parse_err(format!("invalid N {:?}", fields[m_here + 3])))?;
        records.push(SignatureRecord {
            tuple,
            tau,
            method,
            multiple,
            residual: None,
            precision: None,
            class,
        });
    }
    Ok(ResultsFile {
        m: m.unwrap_or(0),
        order,
        records,
    })
}

/// Partition summary: a header with the totals, then one line per class
/// with its tally and first representative (`-` when unrealized).
pub fn write_partition_summary<W: Write>(
    mut writer: W,
    partition: &ClassPartition,
) -> Result<()> {
    writeln!(
        writer,
        "# partition m {} | bP order {} | tuples {} | classes {}",
        partition.m(),
        partition.order(),
        partition.total(),
        partition.classes_found()
    )?;
    writeln!(writer, "# g\tcount\tfirst")?;
    for g in 0..partition.order() {
        let rep = partition
            .representative(g)
            .map_or_else(|| "-".to_string(), |t| t.to_string());
        writeln!(writer, "{g}\t{}\t{rep}", partition.count(g))?;
    }
    Ok(())
}

pub fn parse_partition_summary<R: BufRead>(reader: R) -> Result<ClassPartition> {
    let mut seen_header = false;
    let mut partition = ClassPartition::empty();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# partition m ") {
            let parse_err = |msg: &str| Error::Parse {
                line: lineno,
                msg: msg.into(),
            };
            let mut parts = rest.split(" | ");
            let m: usize = parts
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| parse_err("missing m"))?;
            let order: u64 = parts
                .next()
                .and_then(|t| t.trim().strip_prefix("bP order "))
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err("missing order"))?;
            partition = ClassPartition::new(m, order);
            seen_header = true;
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        if !seen_header {
            return Err(Error::Parse {
                line: lineno,
                msg: "data before partition header".into(),
            });
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: "expected class, count, representative".into(),
            });
        }
        let g: u64 = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("invalid class {:?}", fields[0]),
        })?;
        let count: u64 = fields[1].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("invalid count {:?}", fields[1]),
        })?;
        if fields[2] != "-" {
            let values: Vec<u64> = fields[2]
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u64>().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("invalid representative {:?}", fields[2]),
                    })
                })
                .collect::<Result<_>>()?;
            let tuple = ExponentTuple::from_sorted(values).map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            partition.restore(g, count, Some(tuple));
        } else if count > 0 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("class {g} has count {count} but no representative"),
            });
        }
    }
    Ok(partition)
}

/// Serialized orchestrator state between committed chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub digest: String,
    pub mode: String,
    /// Input tuples consumed so far, valid or not.
    pub committed: u64,
    /// Bytes of output emitted for the committed prefix.
    pub out_bytes: u64,
    pub partition: ClassPartition,
}

pub fn write_checkpoint_atomic(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    let mut body = String::new();
    let _ = writeln!(body, "# checkpoint");
    let _ = writeln!(body, "digest={}", checkpoint.digest);
    let _ = writeln!(body, "mode={}", checkpoint.mode);
    let _ = writeln!(body, "m={}", checkpoint.partition.m());
    let _ = writeln!(body, "order={}", checkpoint.partition.order());
    let _ = writeln!(body, "committed={}", checkpoint.committed);
    let _ = writeln!(body, "out_bytes={}", checkpoint.out_bytes);
    let _ = writeln!(body, "found={}", found_bitmap_hex(&checkpoint.partition));
    let counts: Vec<String> = (0..checkpoint.partition.order())
        .map(|g| checkpoint.partition.count(g).to_string())
        .collect();
    let _ = writeln!(body, "counts={}", counts.join(","));
    for g in 0..checkpoint.partition.order() {
        if let Some(rep) = checkpoint.partition.representative(g) {
            let _ = writeln!(body, "rep={g}:{rep}");
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, body)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)?;
    let mut digest = None;
    let mut mode = None;
    let mut m = None;
    let mut order = None;
    let mut committed = None;
    let mut out_bytes = None;
    let mut found_hex = None;
    let mut counts: Option<Vec<u64>> = None;
    let mut reps: Vec<(u64, ExponentTuple)> = Vec::new();
    let malformed = |msg: &str| Error::CheckpointFormat { msg: msg.into() };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| malformed("missing '='"))?;
        match key {
            "digest" => digest = Some(value.to_string()),
            "mode" => mode = Some(value.to_string()),
            "m" => m = value.parse().ok(),
            "order" => order = value.parse().ok(),
            "committed" => committed = value.parse().ok(),
            "out_bytes" => out_bytes = value.parse().ok(),
            "found" => found_hex = Some(value.to_string()),
            "counts" => {
                counts = value
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse().ok())
                    .collect();
            }
            "rep" => {
                let (g, tuple) = value
                    .split_once(':')
                    .ok_or_else(|| malformed("malformed representative"))?;
                let g: u64 = g
                    .parse()
                    .map_err(|_| malformed("bad representative class"))?;
                let values: Vec<u64> = tuple
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| malformed("bad representative tuple")))
                    .collect::<std::result::Result<_, _>>()?;
                let tuple = ExponentTuple::from_sorted(values)
                    .map_err(|_| malformed("invalid representative tuple"))?;
                reps.push((g, tuple));
            }
            _ => return Err(malformed(&format!("unknown key {key:?}"))),
        }
    }
    let m = m.ok_or_else(|| malformed("missing m"))?;
    let order: u64 = order.ok_or_else(|| malformed("missing order"))?;
    let counts = counts.ok_or_else(|| malformed("missing counts"))?;
    if counts.len() as u64 != order {
        return Err(malformed("counts length does not match order"));
    }
    let mut partition = ClassPartition::new(m, order);
    let mut rep_map: std::collections::HashMap<u64, ExponentTuple> =
        reps.into_iter().collect();
    for (g, &count) in counts.iter().enumerate() {
        let rep = rep_map.remove(&(g as u64));
        if count > 0 && rep.is_none() {
            return Err(malformed(&format!(
                "class {g} counted but has no representative"
            )));
        }
        partition.restore(g as u64, count, rep);
    }
    let checkpoint = Checkpoint {
        digest: digest.ok_or_else(|| malformed("missing digest"))?,
        mode: mode.ok_or_else(|| malformed("missing mode"))?,
        committed: committed.ok_or_else(|| malformed("missing committed"))?,
        out_bytes: out_bytes.ok_or_else(|| malformed("missing out_bytes"))?,
        partition,
    };
    if let Some(hex) = found_hex {
        if hex != found_bitmap_hex(&checkpoint.partition) {
            return Err(malformed("found bitmap disagrees with counts"));
        }
    }
    Ok(checkpoint)
}

/// Bitmap over classes, bit g set when class g is realized; little-endian
/// bytes rendered as lowercase hex.
pub fn found_bitmap_hex(partition: &ClassPartition) -> String {
    let order = partition.order();
    let mut bytes = vec![0u8; order.div_ceil(8) as usize];
    for g in 0..order {
        if partition.found(g) {
            bytes[(g / 8) as usize] |= 1 << (g % 8);
        }
    }
    let mut hex = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidates_round_trip() {
        let text = "2 2 2 3 5\n2 3 7 43 47\n";
        let tuples = parse_candidates(text.as_bytes()).unwrap();
        assert_eq!(tuples.len(), 2);
        let mut out = Vec::new();
        write_candidates(&mut out, &tuples).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn candidates_comments_and_errors() {
        let tuples = parse_candidates("# header\n2 3 7 43 47\n".as_bytes()).unwrap();
        assert_eq!(tuples.len(), 1);

        match parse_candidates("2 3 7 43 5\n".as_bytes()) {
            Err(Error::Parse { line: 1, msg }) => assert!(msg.contains("non-decreasing")),
            other => panic!("expected sorted-order error, got {other:?}"),
        }
        match parse_candidates("2 3 7 43 47\n2 3 5\n".as_bytes()) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("expected mixed-length error, got {other:?}"),
        }
        match parse_candidates("2 3 x\n".as_bytes()) {
            Err(Error::Parse { line: 1, msg }) => assert!(msg.contains("invalid integer")),
            other => panic!("expected integer error, got {other:?}"),
        }
    }

    #[test]
    fn results_round_trip() {
        let tuple = ExponentTuple::new(vec![2, 2, 2, 3, 5]).unwrap();
        let record = SignatureRecord {
            tuple,
            tau: 8,
            method: Method::Naive,
            multiple: 30,
            residual: None,
            precision: None,
            class: Some(1),
        };
        let mut text = results_header(5, Some(28));
        text.push_str(&result_line(&record));
        let parsed = parse_results(text.as_bytes()).unwrap();
        assert_eq!(parsed.m, 5);
        assert_eq!(parsed.order, Some(28));
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0], record);

        let mut round = results_header(parsed.m, parsed.order);
        for r in &parsed.records {
            round.push_str(&result_line(r));
        }
        assert_eq!(round, text);
    }

    #[test]
    fn results_class_can_be_absent() {
        let line = "2\t4\t6\t8\t10\t-16\t-\tnaive\t120\n";
        let parsed = parse_results(line.as_bytes()).unwrap();
        assert_eq!(parsed.records[0].class, None);
        assert_eq!(parsed.records[0].tau, -16);
        assert_eq!(result_line(&parsed.records[0]), line);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(sha256_hex(b"2 2 2 3 5\n"), sha256_hex(b"2 2 2 3 5\n"));
        assert_ne!(sha256_hex(b"a"), sha256_hex(b"b"));
    }
}
