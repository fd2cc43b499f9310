use std::collections::HashMap;
use std::io::Write;

use super::{malformed, output_numbering, renumbered, IoError};
use crate::network::{GateType, Network, NetworkKind, Signal};

/// Writes a combinational AIGER file. Inputs take variables `1..=I`, AND
/// gates follow in topological order; no symbol table or comment section.
pub fn write_aiger<W: Write>(net: &Network, out: &mut W, ascii: bool) -> Result<(), IoError> {
    if net.kind() != NetworkKind::Aig {
        return Err(IoError::WrongKind {
            format: if ascii {
                super::FileFormat::AigerAscii
            } else {
                super::FileFormat::AigerBinary
            },
            kind: net.kind(),
        });
    }
    let (index, gates) = output_numbering(net);
    let i = net.num_pis();
    let a = gates.len();
    let header = if ascii { "aag" } else { "aig" };
    writeln!(out, "{header} {} {i} 0 {} {a}", i + a, net.num_pos())?;
    if ascii {
        for k in 1..=i {
            writeln!(out, "{}", 2 * k)?;
        }
    }
    for &po in net.pos() {
        writeln!(out, "{}", renumbered(&index, po))?;
    }
    for &g in &gates {
        let lhs = index[g.index()].unwrap() * 2;
        let f = net.fanins(g);
        let (r0, r1) = {
            let x = renumbered(&index, f[0]);
            let y = renumbered(&index, f[1]);
            (x.max(y), x.min(y))
        };
        if ascii {
            writeln!(out, "{lhs} {r0} {r1}")?;
        } else {
            encode_delta(out, lhs - r0)?;
            encode_delta(out, r0 - r1)?;
        }
    }
    Ok(())
}

fn encode_delta<W: Write>(out: &mut W, mut x: u32) -> std::io::Result<()> {
    while x & !0x7f != 0 {
        out.write_all(&[(x & 0x7f) as u8 | 0x80])?;
        x >>= 7;
    }
    out.write_all(&[x as u8])
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn next_line(&mut self) -> Option<&'a str> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        self.pos += (end + 1).min(rest.len());
        self.line += 1;
        std::str::from_utf8(&rest[..end]).ok().map(|s| s.trim_end_matches('\r'))
    }

    fn expect_line(&mut self, what: &str) -> Result<&'a str, IoError> {
        let line = self.line + 1;
        self.next_line()
            .ok_or_else(|| malformed(line, format!("missing {what}")))
    }

    fn delta(&mut self) -> Result<u32, IoError> {
        let mut x: u64 = 0;
        let mut shift = 0;
        loop {
            let &b = self
                .bytes
                .get(self.pos)
                .ok_or_else(|| malformed(self.line, "truncated binary AND section"))?;
            self.pos += 1;
            x |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                break;
            }
            shift += 7;
            if shift > 28 {
                return Err(malformed(self.line, "delta too large"));
            }
        }
        u32::try_from(x).map_err(|_| malformed(self.line, "delta too large"))
    }
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<u32>, IoError> {
    line.split_ascii_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| malformed(lineno, format!("expected a number, found `{t}`")))
        })
        .collect()
}

/// Reads a combinational AIGER file (ASCII or binary). The result has
/// structural hashing disabled so the file structure is kept as is.
pub fn read_aiger(bytes: &[u8]) -> Result<Network, IoError> {
    let mut cur = Cursor {
        bytes,
        pos: 0,
        line: 0,
    };
    let header = cur.expect_line("header")?;
    let mut fields = header.split_ascii_whitespace();
    let binary = match fields.next() {
        Some("aag") => false,
        Some("aig") => true,
        _ => return Err(malformed(1, "expected `aag` or `aig` header")),
    };
    let nums = parse_numbers(&fields.collect::<Vec<_>>().join(" "), 1)?;
    if nums.len() < 5 {
        return Err(malformed(1, "header needs M I L O A"));
    }
    let (m, i, l, o, a) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
    if l > 0 {
        return Err(IoError::UnsupportedFeature(format!("{l} latches")));
    }
    if nums[5..].iter().any(|&x| x > 0) {
        return Err(IoError::UnsupportedFeature(
            "bad-state, constraint, justice or fairness sections".into(),
        ));
    }
    if u64::from(i) + u64::from(a) > u64::from(m) || (binary && i + a != m) {
        return Err(malformed(1, "M does not match I + A"));
    }

    let mut net = Network::new(NetworkKind::Aig);
    net.set_structural_hashing(false);
    let mut var_signal: HashMap<u32, Signal> = HashMap::new();
    var_signal.insert(0, Signal::FALSE);

    if binary {
        for k in 1..=i {
            var_signal.insert(k, net.create_pi());
        }
    } else {
        for _ in 0..i {
            let line = cur.line + 1;
            let nums = parse_numbers(cur.expect_line("input")?, line)?;
            let &[lit] = nums.as_slice() else {
                return Err(malformed(line, "expected one input literal"));
            };
            if lit < 2 || lit & 1 == 1 || lit / 2 > m {
                return Err(malformed(line, format!("invalid input literal {lit}")));
            }
            if var_signal.insert(lit / 2, net.create_pi()).is_some() {
                return Err(malformed(line, format!("variable {} defined twice", lit / 2)));
            }
        }
    }

    let mut outputs = Vec::with_capacity(o as usize);
    for _ in 0..o {
        let line = cur.line + 1;
        let nums = parse_numbers(cur.expect_line("output")?, line)?;
        let &[lit] = nums.as_slice() else {
            return Err(malformed(line, "expected one output literal"));
        };
        outputs.push((lit, line));
    }

    // (lhs var, rhs0, rhs1, line)
    let mut ands = Vec::with_capacity(a as usize);
    if binary {
        for k in 0..a {
            let lhs = 2 * (i + k + 1);
            let d0 = cur.delta()?;
            let d1 = cur.delta()?;
            let r0 = lhs
                .checked_sub(d0)
                .ok_or_else(|| malformed(cur.line, "delta exceeds lhs"))?;
            let r1 = r0
                .checked_sub(d1)
                .ok_or_else(|| malformed(cur.line, "delta exceeds rhs0"))?;
            if d0 == 0 {
                return Err(malformed(cur.line, "AND gate reads itself"));
            }
            ands.push((lhs / 2, r0, r1, cur.line));
        }
    } else {
        for _ in 0..a {
            let line = cur.line + 1;
            let nums = parse_numbers(cur.expect_line("AND gate")?, line)?;
            let &[lhs, r0, r1] = nums.as_slice() else {
                return Err(malformed(line, "expected `lhs rhs0 rhs1`"));
            };
            if lhs < 2 || lhs & 1 == 1 || lhs / 2 > m {
                return Err(malformed(line, format!("invalid AND literal {lhs}")));
            }
            if var_signal.contains_key(&(lhs / 2)) || ands.iter().any(|&(v, ..)| v == lhs / 2) {
                return Err(malformed(line, format!("variable {} defined twice", lhs / 2)));
            }
            ands.push((lhs / 2, r0, r1, line));
        }
    }
    // Symbol table and comments are ignored.

    let by_var: HashMap<u32, usize> = ands.iter().enumerate().map(|(k, e)| (e.0, k)).collect();
    // 0 = unvisited, 1 = on stack, 2 = built
    let mut state = vec![0u8; ands.len()];
    for root in 0..ands.len() {
        let mut stack = vec![(root, false)];
        while let Some((k, expanded)) = stack.pop() {
            if state[k] == 2 {
                continue;
            }
            let (var, r0, r1, line) = ands[k];
            if expanded {
                let f0 = literal(&var_signal, r0, line)?;
                let f1 = literal(&var_signal, r1, line)?;
                let s = net
                    .add_gate_raw(GateType::And, &[f0, f1])
                    .map_err(|e| malformed(line, e.to_string()))?;
                var_signal.insert(var, s);
                state[k] = 2;
                continue;
            }
            if state[k] == 1 {
                return Err(malformed(line, "combinational cycle"));
            }
            state[k] = 1;
            stack.push((k, true));
            for r in [r1, r0] {
                if let Some(&dep) = by_var.get(&(r / 2)) {
                    match state[dep] {
                        0 => stack.push((dep, false)),
                        1 => return Err(malformed(line, "combinational cycle")),
                        _ => {}
                    }
                }
            }
        }
    }

    for (lit, line) in outputs {
        let s = literal(&var_signal, lit, line)?;
        net.add_po(s).map_err(|e| malformed(line, e.to_string()))?;
    }
    Ok(net)
}

fn literal(map: &HashMap<u32, Signal>, lit: u32, line: usize) -> Result<Signal, IoError> {
    map.get(&(lit / 2))
        .map(|&s| s ^ (lit & 1 == 1))
        .ok_or_else(|| malformed(line, format!("literal {lit} is not defined")))
}
