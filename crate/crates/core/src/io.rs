//! Hypergraph and certificate files.
//!
//! Hypergraphs come either as JSON, `{"r":2,"s":1,"arcs":[{"tail":["a","b"],"head":["c"]}]}`,
//! or as lines of the form `a b -> c`, optionally preceded by a `#r=2 s=1`
//! header. Input starting with `{` is JSON.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::DirectedHypergraph;
use crate::labeling::WeightedIncidenceLabeling;
use crate::polyform::Phase;

/// A vertex label given as a JSON string or number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Text(String),
    Number(serde_json::Number),
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Text(s) => f.write_str(s),
            Label::Number(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub tail: Vec<Label>,
    pub head: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    pub arcs: Vec<ArcRecord>,
}

impl HypergraphFile {
    pub fn from_graph(g: &DirectedHypergraph) -> Self {
        let labels = |vs: &[usize]| vs.iter().map(|&v| Label::Text(g.label(v).to_owned())).collect();
        Self {
            r: Some(g.r()),
            s: Some(g.s()),
            arcs: g
                .arcs()
                .iter()
                .map(|a| ArcRecord {
                    tail: labels(a.tail()),
                    head: labels(a.head()),
                })
                .collect(),
        }
    }

    pub fn into_graph(self) -> Result<DirectedHypergraph> {
        let first = self.arcs.first();
        let r = self.r.or(first.map(|a| a.tail.len()));
        let s = self.s.or(first.map(|a| a.head.len()));
        let (Some(r), Some(s)) = (r, s) else {
            return Err(Error::EmptyGraph);
        };
        DirectedHypergraph::build(r, s, self.arcs.into_iter().map(|a| (a.tail, a.head)))
    }
}

fn json_error(err: serde_json::Error) -> Error {
    Error::Parse {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|err| {
        let prefix = &bytes[..err.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = prefix.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
        Error::Parse {
            line,
            column,
            message: "input is not valid UTF-8".into(),
        }
    })
}

/// Parses JSON or line-format input.
pub fn parse_hypergraph(bytes: &[u8]) -> Result<DirectedHypergraph> {
    let text = utf8(bytes)?;
    if text.trim_start().starts_with('{') {
        let file: HypergraphFile = serde_json::from_str(text).map_err(json_error)?;
        file.into_graph()
    } else {
        parse_lines(text)
    }
}

fn parse_header(body: &str, line: usize, offset: usize) -> Result<[Option<usize>; 2]> {
    let mut out = [None, None];
    for (col, token) in tokens(body) {
        let column = offset + col;
        let err = |message: String| Error::Parse {
            line,
            column,
            message,
        };
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got {token:?}")))?;
        let slot = match key {
            "r" => 0,
            "s" => 1,
            _ => return Err(err(format!("unknown header key {key:?}"))),
        };
        out[slot] = Some(
            value
                .parse()
                .map_err(|_| err(format!("invalid arity {value:?}")))?,
        );
    }
    Ok(out)
}

/// Whitespace-separated tokens with their 1-based byte columns.
fn tokens(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.split_whitespace()
        .map(move |t| (t.as_ptr() as usize - s.as_ptr() as usize + 1, t))
}

fn parse_lines(text: &str) -> Result<DirectedHypergraph> {
    let mut arity = [None, None];
    let mut arcs: Vec<(Vec<&str>, Vec<&str>)> = Vec::new();
    let mut arc_lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(body) = trimmed.strip_prefix('#') {
            if body.contains('=') {
                let offset = raw.len() - body.len();
                let [r, s] = parse_header(body, line, offset)?;
                arity[0] = r.or(arity[0]);
                arity[1] = s.or(arity[1]);
            }
            continue;
        }
        let Some((tail, head)) = raw.split_once("->") else {
            return Err(Error::Parse {
                line,
                column: raw.len() - trimmed.len() + 1,
                message: "expected `tail -> head`".into(),
            });
        };
        let arrow = tail.len() + 1;
        if head.contains("->") {
            return Err(Error::Parse {
                line,
                column: arrow + 2 + head.find("->").unwrap_or(0),
                message: "more than one `->`".into(),
            });
        }
        let tail: Vec<&str> = tokens(tail).map(|(_, t)| t).collect();
        let head: Vec<&str> = tokens(head).map(|(_, t)| t).collect();
        if tail.is_empty() || head.is_empty() {
            return Err(Error::Parse {
                line,
                column: arrow,
                message: "both sides of `->` need at least one vertex".into(),
            });
        }
        arcs.push((tail, head));
        arc_lines.push(line);
    }
    let r = arity[0].or(arcs.first().map(|a| a.0.len()));
    let s = arity[1].or(arcs.first().map(|a| a.1.len()));
    let (Some(r), Some(s)) = (r, s) else {
        return Err(Error::EmptyGraph);
    };
    if let Some(bad) = arcs.iter().position(|(t, h)| t.len() != r || h.len() != s) {
        return Err(Error::Parse {
            line: arc_lines[bad],
            column: 1,
            message: Error::ArityMismatch {
                arc: bad,
                r,
                s,
                tail: arcs[bad].0.len(),
                head: arcs[bad].1.len(),
            }
            .to_string(),
        });
    }
    DirectedHypergraph::build(r, s, arcs)
}

pub fn hypergraph_to_json(g: &DirectedHypergraph) -> String {
    serde_json::to_string(&HypergraphFile::from_graph(g)).expect("hypergraph serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub vertex: Label,
    pub arc: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub mode: Phase,
    pub alpha: f64,
    pub entries: Vec<CertificateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl CertificateFile {
    pub fn from_labeling(g: &DirectedHypergraph, l: &WeightedIncidenceLabeling) -> Self {
        let mut entries = Vec::new();
        for (e, arc) in g.arcs().iter().enumerate() {
            let sides = [(arc.tail(), &l.tail[e]), (arc.head(), &l.head[e])];
            for (vs, values) in sides {
                for (&v, &value) in vs.iter().zip(values.iter()) {
                    entries.push(CertificateEntry {
                        vertex: Label::Text(g.label(v).to_owned()),
                        arc: e,
                        value,
                    });
                }
            }
        }
        Self {
            mode: l.mode,
            alpha: l.alpha,
            entries,
            weights: l.weights.clone(),
        }
    }

    /// Resolves labels against `g`; every incidence needs exactly one entry.
    pub fn into_labeling(self, g: &DirectedHypergraph) -> Result<WeightedIncidenceLabeling> {
        let mut values: HashMap<(usize, usize), f64> = HashMap::new();
        for entry in &self.entries {
            let label = entry.vertex.to_string();
            let v = g
                .vertex_id(&label)
                .ok_or_else(|| Error::InvalidLabeling(format!("unknown vertex {label:?}")))?;
            if entry.arc >= g.arc_count() {
                return Err(Error::InvalidLabeling(format!("unknown arc {}", entry.arc)));
            }
            let arc = g.arc(entry.arc);
            if !arc.tail().contains(&v) && !arc.head().contains(&v) {
                return Err(Error::InvalidLabeling(format!(
                    "vertex {label:?} is not in arc {}",
                    entry.arc
                )));
            }
            if values.insert((v, entry.arc), entry.value).is_some() {
                return Err(Error::InvalidLabeling(format!(
                    "duplicate entry for vertex {label:?} in arc {}",
                    entry.arc
                )));
            }
        }
        let mut missing = None;
        let l = WeightedIncidenceLabeling::from_fn(g, self.mode, self.alpha, self.weights, |v, e, _| {
            values.get(&(v, e)).copied().unwrap_or_else(|| {
                missing.get_or_insert((v, e));
                f64::NAN
            })
        });
        if let Some((v, e)) = missing {
            return Err(Error::InvalidLabeling(format!(
                "no entry for vertex {:?} in arc {e}",
                g.label(v)
            )));
        }
        l.validate(g)?;
        Ok(l)
    }
}

pub fn parse_certificate(bytes: &[u8], g: &DirectedHypergraph) -> Result<WeightedIncidenceLabeling> {
    let file: CertificateFile = serde_json::from_str(utf8(bytes)?).map_err(json_error)?;
    file.into_labeling(g)
}

pub fn certificate_to_json(g: &DirectedHypergraph, l: &WeightedIncidenceLabeling) -> String {
    serde_json::to_string(&CertificateFile::from_labeling(g, l)).expect("certificate serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_single_digraph_arc() {
        let g = parse_hypergraph(br#"{"r":1,"s":1,"arcs":[{"tail":["u"],"head":["v"]}]}"#).unwrap();
        assert_eq!(g.arc_count(), 1);
        assert_eq!(g.label(g.arc(0).head()[0]), "v");
    }

    #[test]
    fn json_numeric_labels_and_inferred_arity() {
        let g = parse_hypergraph(br#" {"arcs":[{"tail":[1,2],"head":[3]},{"tail":[2,4],"head":["3"]}]}"#)
            .unwrap();
        assert_eq!((g.r(), g.s(), g.vertex_count()), (2, 1, 4));
    }

    #[test]
    fn line_format_with_header() {
        let g = parse_hypergraph(b"#r=2 s=1\na b -> c\n").unwrap();
        assert_eq!((g.r(), g.s(), g.arc_count()), (2, 1, 1));
    }

    #[test]
    fn line_format_comments_and_blanks() {
        let g = parse_hypergraph(b"# a digraph\n\n1 -> 2\n2 -> 3\n").unwrap();
        assert_eq!((g.r(), g.s(), g.arc_count()), (1, 1, 2));
    }

    #[test]
    fn overlap_reports_arc() {
        let err = parse_hypergraph(b"a -> b\nc -> c\n").unwrap_err();
        assert!(matches!(err, Error::Overlap { arc: 1, ref vertex } if vertex == "c"));
        let err = parse_hypergraph(br#"{"r":1,"s":1,"arcs":[{"tail":["x"],"head":["x"]}]}"#).unwrap_err();
        assert!(matches!(err, Error::Overlap { arc: 0, .. }));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_hypergraph(b"a -> b\n  c d\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                column: 3,
                message: "expected `tail -> head`".into()
            }
        );
        let err = parse_hypergraph(b"#r=x\na -> b\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 2, .. }));
        let err = parse_hypergraph(b"a -> b\na b -> c\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_hypergraph(b"{\"r\":1,\n \"arcs\": [}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn hypergraph_json_round_trip() {
        let g = parse_hypergraph(b"a b -> c\nb d -> e\n").unwrap();
        let back = parse_hypergraph(hypergraph_to_json(&g).as_bytes()).unwrap();
        assert_eq!(back.labelled_arcs(), g.labelled_arcs());
        assert_eq!((back.r(), back.s()), (2, 1));
    }

    #[test]
    fn certificate_round_trip() {
        let g = parse_hypergraph(b"a b -> c\nd b -> e\n").unwrap();
        let l = WeightedIncidenceLabeling::from_fn(&g, Phase::Parabolic, 0.5, None, |v, e, _| {
            (v + 2 * e + 1) as f64 / 10.0
        });
        let json = certificate_to_json(&g, &l);
        assert!(!json.contains("weights"));
        assert_eq!(parse_certificate(json.as_bytes(), &g).unwrap(), l);
    }

    #[test]
    fn certificate_rejects_bad_entries() {
        let g = parse_hypergraph(b"a -> b\n").unwrap();
        let missing = br#"{"mode":"parabolic","alpha":1,"entries":[{"vertex":"a","arc":0,"value":1}]}"#;
        assert!(matches!(parse_certificate(missing, &g), Err(Error::InvalidLabeling(_))));
        let stray = br#"{"mode":"parabolic","alpha":1,"entries":[{"vertex":"a","arc":0,"value":1},{"vertex":"b","arc":0,"value":1},{"vertex":"z","arc":0,"value":1}]}"#;
        assert!(matches!(parse_certificate(stray, &g), Err(Error::InvalidLabeling(_))));
        let dup = br#"{"mode":"parabolic","alpha":1,"entries":[{"vertex":"a","arc":0,"value":1},{"vertex":"a","arc":0,"value":1}]}"#;
        assert!(matches!(parse_certificate(dup, &g), Err(Error::InvalidLabeling(_))));
    }
}
