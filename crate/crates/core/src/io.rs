//! Text formats: the line-oriented circuit file and the word grammars.
//!
//! Circuit files look like
//!
//! ```text
//! pcq 1
//! q 2
//! node 0
//! node 1
//! edge 1 0 1
//! mark M 1:1 0:-1
//! ```
//!
//! with `#` starting a comment.  Serialization is canonical: nodes are
//! renumbered densely in ascending id order, edges are sorted by
//! `(src, dst)`, markings alphabetically and their digits by node.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::bs::BgLetter;
use crate::circuit::{Marking, NodeId, PowerCircuit};
use crate::error::{Error, Result};
use crate::higman::HLetter;

/// A circuit together with its named markings.
#[derive(Debug)]
pub struct CircuitFile {
    pub circuit: PowerCircuit,
    pub markings: BTreeMap<String, Marking>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} '{tok}'")))
}

// ---------------------------------------------------------------------------
// Circuits
// ---------------------------------------------------------------------------

/// Parses a circuit file; syntax problems yield `Parse`, semantic ones
/// (digit range, cycles, multi-edges) yield `Validation`.
pub fn parse_circuit(text: &str) -> Result<CircuitFile> {
    let mut q: Option<i64> = None;
    let mut header = false;
    let mut nodes: BTreeMap<u64, usize> = BTreeMap::new();
    let mut edges: Vec<(usize, u64, u64, i64)> = Vec::new();
    let mut marks: Vec<(usize, String, Vec<(u64, i64)>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(kw) = toks.next() else { continue };
        if !header {
            if kw != "pcq" {
                return Err(parse_err(line, "expected header 'pcq 1'"));
            }
            let v: u32 = number(toks.next(), line, "format version")?;
            if v != 1 {
                return Err(parse_err(line, format!("unsupported format version {v}")));
            }
            header = true;
        } else {
            match kw {
                "q" => {
                    if q.is_some() {
                        return Err(parse_err(line, "duplicate 'q' record"));
                    }
                    q = Some(number(toks.next(), line, "base")?);
                }
                "node" => {
                    let id: u64 = number(toks.next(), line, "node id")?;
                    if nodes.insert(id, line).is_some() {
                        return Err(parse_err(line, format!("duplicate node {id}")));
                    }
                }
                "edge" => {
                    let src = number(toks.next(), line, "edge source")?;
                    let dst = number(toks.next(), line, "edge target")?;
                    let label = number(toks.next(), line, "edge label")?;
                    edges.push((line, src, dst, label));
                }
                "mark" => {
                    let name = toks
                        .next()
                        .ok_or_else(|| parse_err(line, "missing marking name"))?
                        .to_string();
                    let mut digits = Vec::new();
                    for tok in toks.by_ref() {
                        let (id, d) = tok
                            .split_once(':')
                            .ok_or_else(|| parse_err(line, format!("bad digit '{tok}'")))?;
                        digits.push((number(Some(id), line, "node id")?, number(Some(d), line, "digit")?));
                    }
                    marks.push((line, name, digits));
                }
                other => return Err(parse_err(line, format!("unknown record '{other}'"))),
            }
            if kw != "mark" {
                if let Some(extra) = toks.next() {
                    return Err(parse_err(line, format!("unexpected token '{extra}'")));
                }
            }
            continue;
        }
        if let Some(extra) = toks.next() {
            return Err(parse_err(line, format!("unexpected token '{extra}'")));
        }
    }
    if !header {
        return Err(parse_err(1, "missing header 'pcq 1'"));
    }
    let q = q.ok_or_else(|| parse_err(text.lines().count().max(1), "missing 'q' record"))?;
    let mut pc = PowerCircuit::new(q).map_err(|e| Error::Validation(e.to_string()))?;
    let mut ids: HashMap<u64, NodeId> = HashMap::new();
    for &id in nodes.keys() {
        ids.insert(id, pc.add_node([])?);
    }
    let lookup = |ids: &HashMap<u64, NodeId>, id: u64, line: usize| {
        ids.get(&id)
            .copied()
            .ok_or_else(|| parse_err(line, format!("unknown node {id}")))
    };
    for &(line, src, dst, label) in &edges {
        let (u, v) = (lookup(&ids, src, line)?, lookup(&ids, dst, line)?);
        if label == 0 || !pc.base().contains(label) {
            return Err(Error::Validation(format!(
                "line {line}: label {label} outside the digit range of base {q}"
            )));
        }
        pc.add_edge(u, v, label)
            .map_err(|e| Error::Validation(format!("line {line}: {e}")))?;
    }
    let mut markings = BTreeMap::new();
    for (line, name, digits) in marks {
        if markings.contains_key(&name) {
            return Err(parse_err(line, format!("duplicate marking '{name}'")));
        }
        let mut ds: BTreeMap<NodeId, i64> = BTreeMap::new();
        for (id, d) in digits {
            let u = lookup(&ids, id, line)?;
            if d == 0 || !pc.base().contains(d) {
                return Err(Error::Validation(format!(
                    "line {line}: digit {d} outside the digit range of base {q}"
                )));
            }
            if ds.insert(u, d).is_some() {
                return Err(parse_err(line, format!("node {id} marked twice")));
            }
        }
        markings.insert(name, pc.new_marking(ds)?);
    }
    Ok(CircuitFile {
        circuit: pc,
        markings,
    })
}

/// Canonical text of a circuit and a set of named markings.
pub fn serialize_circuit<'a>(
    pc: &PowerCircuit,
    markings: impl IntoIterator<Item = (&'a str, &'a Marking)>,
) -> Result<String> {
    let rank: HashMap<NodeId, usize> = {
        let mut ids: Vec<NodeId> = pc.nodes().collect();
        ids.sort();
        ids.into_iter().enumerate().map(|(i, u)| (u, i)).collect()
    };
    let mut out = String::new();
    writeln!(out, "pcq 1").unwrap();
    writeln!(out, "q {}", pc.q()).unwrap();
    for i in 0..rank.len() {
        writeln!(out, "node {i}").unwrap();
    }
    let mut edges: Vec<(usize, usize, i32)> = Vec::new();
    for u in pc.nodes() {
        for (&v, &d) in pc.successors(u)? {
            edges.push((rank[&u], rank[&v], d));
        }
    }
    edges.sort();
    for (s, t, d) in edges {
        writeln!(out, "edge {s} {t} {d}").unwrap();
    }
    let mut named: Vec<(&str, &Marking)> = markings.into_iter().collect();
    named.sort_by(|a, b| a.0.cmp(b.0));
    for (name, m) in named {
        let mut digits: Vec<(usize, i32)> = pc.digits(m)?.iter().map(|(u, &d)| (rank[u], d)).collect();
        digits.sort();
        write!(out, "mark {name}").unwrap();
        for (i, d) in digits {
            write!(out, " {i}:{d}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

fn exponent(tok: &str, rest: &str, line: usize) -> Result<i64> {
    if rest.is_empty() {
        return Ok(1);
    }
    let e: i64 = rest
        .strip_prefix('^')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(line, format!("bad letter '{tok}'")))?;
    if e == 0 {
        return Err(parse_err(line, format!("zero exponent in '{tok}'")));
    }
    Ok(e)
}

/// Parses a word over `a_1 … a_f`: whitespace-separated tokens `a<i>`,
/// `a<i>^<e>` and `A<i>` (for `a_i^{-1}`).
pub fn parse_word(text: &str, f: usize) -> Result<Vec<HLetter>> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let (inverse, body) = match tok.as_bytes()[0] {
            b'a' => (false, &tok[1..]),
            b'A' => (true, &tok[1..]),
            _ => return Err(parse_err(1, format!("bad letter '{tok}'"))),
        };
        let digits = body.bytes().take_while(u8::is_ascii_digit).count();
        let gen: usize = body[..digits]
            .parse()
            .map_err(|_| parse_err(1, format!("missing generator index in '{tok}'")))?;
        if gen == 0 || gen > f {
            return Err(parse_err(1, format!("generator index {gen} outside 1..{f}")));
        }
        let rest = &body[digits..];
        if inverse && !rest.is_empty() {
            return Err(parse_err(1, format!("bad letter '{tok}'")));
        }
        let exp = if inverse { -1 } else { exponent(tok, rest, 1)? };
        out.push(HLetter { gen, exp });
    }
    Ok(out)
}

/// Canonical text of a word over `a_1 … a_f`.
pub fn format_word(word: &[HLetter]) -> String {
    let toks: Vec<String> = word
        .iter()
        .map(|l| match l.exp {
            1 => format!("a{}", l.gen),
            -1 => format!("A{}", l.gen),
            e => format!("a{}^{}", l.gen, e),
        })
        .collect();
    toks.join(" ")
}

/// Parses a word over `BG(q)`: whitespace-separated tokens `a`, `b`,
/// `a^<e>`, `b^<e>`, and `A`, `B` for the inverses.
pub fn parse_bg_word(text: &str) -> Result<Vec<BgLetter>> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let mut chars = tok.chars();
        let c = chars.next();
        let rest = chars.as_str();
        let letter = match c {
            Some('a') => BgLetter::A(exponent(tok, rest, 1)?),
            Some('b') => BgLetter::B(exponent(tok, rest, 1)?),
            Some('A') if rest.is_empty() => BgLetter::A(-1),
            Some('B') if rest.is_empty() => BgLetter::B(-1),
            _ => return Err(parse_err(1, format!("bad letter '{tok}'"))),
        };
        out.push(letter);
    }
    Ok(out)
}

/// Canonical text of a `BG(q)` word.
pub fn format_bg_word(word: &[BgLetter]) -> String {
    let toks: Vec<String> = word
        .iter()
        .map(|l| {
            let (c, e) = match *l {
                BgLetter::A(e) => ('a', e),
                BgLetter::B(e) => ('b', e),
            };
            match e {
                1 => c.to_string(),
                -1 => c.to_ascii_uppercase().to_string(),
                e => format!("{c}^{e}"),
            }
        })
        .collect();
    toks.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let f = parse_circuit("pcq 1\nq 2\nnode 0\n").unwrap();
        assert_eq!(f.circuit.len(), 1);
        assert!(f.markings.is_empty());
    }

    #[test]
    fn word_grammar() {
        assert_eq!(parse_word("a1", 4).unwrap(), vec![HLetter { gen: 1, exp: 1 }]);
        assert_eq!(
            parse_word("A2 a1^-3", 4).unwrap(),
            vec![HLetter { gen: 2, exp: -1 }, HLetter { gen: 1, exp: -3 }]
        );
        assert!(matches!(parse_word("a5", 4), Err(Error::Parse { .. })));
        assert!(matches!(parse_word("a1^0", 4), Err(Error::Parse { .. })));
        assert!(matches!(parse_word("b1", 4), Err(Error::Parse { .. })));
        assert_eq!(parse_bg_word("b a B a^-2").unwrap().len(), 4);
        assert!(parse_bg_word("c").is_err());
    }
}
