//! Edge-list TSV interchange format.
//!
//! ```text
//! # n=100 seed=7
//! # model={"kind":"constant","c":2.0}
//! # normalizer=deterministic-mu-n L_N=200
//! # version=0.1.0
//! 1	2	1
//! ```
//!
//! Data lines are `src\tdst\tmultiplicity` with 1-based vertices, sorted by
//! `(src, dst)`. Header lines start with `#`; the `n=` key declares the
//! vertex count.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::MultiDigraph;

/// Provenance written above the arcs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub model: Option<String>,
    pub normalizer: Option<String>,
    pub l_n: Option<f64>,
    pub version: Option<String>,
    /// Any further `key=value` pairs, e.g. `from=100`.
    pub extra: BTreeMap<String, String>,
}

pub fn write_edge_list<W: Write>(g: &MultiDigraph, header: &Header, mut out: W) -> Result<()> {
    let seed = header.seed.map(|s| format!(" seed={s}")).unwrap_or_default();
    writeln!(out, "# n={}{seed}", g.n())?;
    if let Some(m) = &header.model {
        writeln!(out, "# model={m}")?;
    }
    match (&header.normalizer, header.l_n) {
        (Some(mode), Some(l)) => writeln!(out, "# normalizer={mode} L_N={l}")?,
        (Some(mode), None) => writeln!(out, "# normalizer={mode}")?,
        (None, Some(l)) => writeln!(out, "# L_N={l}")?,
        (None, None) => {}
    }
    for (k, v) in &header.extra {
        writeln!(out, "# {k}={v}")?;
    }
    let version = header.version.clone().unwrap_or_else(|| env!("CARGO_PKG_VERSION").to_string());
    writeln!(out, "# version={version}")?;
    for a in g.arcs() {
        writeln!(out, "{}\t{}\t{}", a.src + 1, a.dst + 1, a.mult)?;
    }
    Ok(())
}

fn parse_header_line(line: &str, header: &mut Header) {
    let body = line.trim_start_matches('#').trim();
    // the model value is JSON and may contain spaces
    if let Some(model) = body.strip_prefix("model=") {
        header.model = Some(model.to_string());
        return;
    }
    for token in body.split_whitespace() {
        let Some((k, v)) = token.split_once('=') else { continue };
        match k {
            "n" => header.n = v.parse().ok(),
            "seed" => header.seed = v.parse().ok(),
            "normalizer" => header.normalizer = Some(v.to_string()),
            "L_N" => header.l_n = v.parse().ok(),
            "version" => header.version = Some(v.to_string()),
            _ => {
                header.extra.insert(k.to_string(), v.to_string());
            }
        }
    }
}

/// Parse an edge list. `n_override` takes precedence over the header.
pub fn read_edge_list<R: BufRead>(input: R, n_override: Option<usize>) -> Result<(MultiDigraph, Header)> {
    let mut header = Header::default();
    let mut triples = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            parse_header_line(trimmed, &mut header);
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let num = |s: &str, what: &str| -> Result<u64> {
            s.trim().parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("{what} is not a non-negative integer: {s:?}"),
            })
        };
        let src = num(fields[0], "source")?;
        let dst = num(fields[1], "target")?;
        let mult = num(fields[2], "multiplicity")?;
        if src == 0 || dst == 0 {
            return Err(Error::Parse { line: lineno, message: "vertices are 1-based".into() });
        }
        triples.push((lineno, src as usize - 1, dst as usize - 1, mult));
    }
    let n = n_override.or(header.n).ok_or_else(|| Error::Parse {
        line: 0,
        message: "no n declared (add a '# n=...' header or pass --n)".into(),
    })?;
    if let Some(&(lineno, s, d, _)) = triples.iter().find(|t| t.1 >= n || t.2 >= n) {
        return Err(Error::Parse {
            line: lineno,
            message: format!("vertex {} exceeds n={n}", s.max(d) + 1),
        });
    }
    header.n = Some(n);
    let g = MultiDigraph::from_triples(n, triples.into_iter().map(|(_, s, d, m)| (s, d, m)))?;
    Ok((g, header))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = MultiDigraph::from_triples(4, [(0, 1, 3), (3, 3, 1), (2, 0, 2)]).unwrap();
        let h = Header {
            seed: Some(7),
            model: Some(r#"{"kind":"constant","c":2.0}"#.into()),
            normalizer: Some("deterministic-mu-n".into()),
            l_n: Some(8.0),
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_edge_list(&g, &h, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# n=4 seed=7\n"));
        assert!(text.contains("1\t2\t3\n"));
        let (g2, h2) = read_edge_list(&buf[..], None).unwrap();
        assert_eq!(g, g2);
        assert_eq!(h2.seed, Some(7));
        assert_eq!(h2.model, h.model);
        assert_eq!(h2.l_n, Some(8.0));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "# n=3\n1\t2\t1\n2\tx\t1\n";
        match read_edge_list(text.as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_edge_list("# n=2\n1\t3\t1\n".as_bytes(), None).is_err());
        assert!(read_edge_list("# n=2\n1 2 1\n".as_bytes(), None).is_err());
    }

    #[test]
    fn missing_n() {
        let err = read_edge_list("# seed=1\n".as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("no n declared"));
        let (g, _) = read_edge_list("# seed=1\n".as_bytes(), Some(5)).unwrap();
        assert_eq!(g.n(), 5);
    }
}
