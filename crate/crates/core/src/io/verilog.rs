use std::collections::HashMap;
use std::fmt::Write;

use super::{malformed, output_numbering, IoError};
use crate::network::{GateType, Network, NetworkKind, Signal};

fn operand(names: &[Option<String>], s: Signal) -> String {
    if s.is_constant() {
        return if s.is_complemented() { "1'b1" } else { "1'b0" }.to_string();
    }
    let name = names[s.node().index()].as_deref().expect("live node has a name");
    if s.is_complemented() {
        format!("~{name}")
    } else {
        name.to_string()
    }
}

/// Structural Verilog: one `assign` per gate, inputs `x<i>`, outputs
/// `y<i>`, internal wires `n<k>` numbered like the AIGER writer. A gate
/// that drives some output without complement takes that output's name.
pub fn write_verilog(net: &Network) -> String {
    let (index, gates) = output_numbering(net);
    let mut names: Vec<Option<String>> = vec![None; net.node_capacity()];
    for (i, &pi) in net.pis().iter().enumerate() {
        names[pi.index()] = Some(format!("x{i}"));
    }
    let mut named_by_output = vec![false; net.num_pos()];
    for (o, po) in net.pos().iter().enumerate() {
        let node = po.node();
        if !po.is_complemented() && net.is_gate(node) && names[node.index()].is_none() {
            names[node.index()] = Some(format!("y{o}"));
            named_by_output[o] = true;
        }
    }
    let mut wires = Vec::new();
    for &g in &gates {
        if names[g.index()].is_none() {
            let name = format!("n{}", index[g.index()].unwrap());
            wires.push(name.clone());
            names[g.index()] = Some(name);
        }
    }

    let inputs: Vec<String> = (0..net.num_pis()).map(|i| format!("x{i}")).collect();
    let outputs: Vec<String> = (0..net.num_pos()).map(|o| format!("y{o}")).collect();
    let ports: Vec<&str> = inputs.iter().chain(&outputs).map(String::as_str).collect();

    let mut out = String::new();
    writeln!(out, "// network: {}", net.kind()).unwrap();
    writeln!(out, "module top({});", ports.join(", ")).unwrap();
    if !inputs.is_empty() {
        writeln!(out, "  input {};", inputs.join(", ")).unwrap();
    }
    if !outputs.is_empty() {
        writeln!(out, "  output {};", outputs.join(", ")).unwrap();
    }
    if !wires.is_empty() {
        writeln!(out, "  wire {};", wires.join(", ")).unwrap();
    }
    for &g in &gates {
        let f: Vec<String> = net.fanins(g).iter().map(|&s| operand(&names, s)).collect();
        let expr = match net.gate_type(g).unwrap() {
            GateType::And => format!("{} & {}", f[0], f[1]),
            GateType::Xor => format!("{} ^ {}", f[0], f[1]),
            GateType::Maj => format!(
                "({a} & {b}) | ({a} & {c}) | ({b} & {c})",
                a = f[0],
                b = f[1],
                c = f[2]
            ),
        };
        writeln!(out, "  assign {} = {expr};", names[g.index()].as_ref().unwrap()).unwrap();
    }
    for (o, &po) in net.pos().iter().enumerate() {
        if !named_by_output[o] {
            writeln!(out, "  assign y{o} = {};", operand(&names, po)).unwrap();
        }
    }
    out.push_str("endmodule\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Const(bool),
    Sym(char),
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, IoError> {
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some((at, c)) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '(' | ')' | ',' | ';' | '=' | '&' | '|' | '^' | '~' => tokens.push(Token::Sym(c)),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = at + c.len_utf8();
                while let Some(&(i, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = i + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Ident(line[at..end].to_string()));
            }
            '1' if line[at..].starts_with("1'b0") || line[at..].starts_with("1'b1") => {
                tokens.push(Token::Const(&line[at + 3..at + 4] == "1"));
                chars.next();
                chars.next();
                chars.next();
            }
            _ => return Err(malformed(lineno, format!("unexpected character `{c}`"))),
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn sym(&mut self, c: char) -> Result<(), IoError> {
        match self.tokens.get(self.pos) {
            Some(Token::Sym(d)) if *d == c => {
                self.pos += 1;
                Ok(())
            }
            other => Err(malformed(self.line, format!("expected `{c}`, found {other:?}"))),
        }
    }

    fn ident(&mut self) -> Result<String, IoError> {
        match self.tokens.get(self.pos) {
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(name.clone())
            }
            other => Err(malformed(self.line, format!("expected a name, found {other:?}"))),
        }
    }

    fn done(&self) -> Result<(), IoError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(malformed(self.line, "trailing tokens"))
        }
    }

    fn name_list(&mut self) -> Result<Vec<String>, IoError> {
        let mut names = vec![self.ident()?];
        while self.peek() == Some(&Token::Sym(',')) {
            self.pos += 1;
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn operand(&mut self, env: &HashMap<String, Signal>) -> Result<Signal, IoError> {
        let mut complement = false;
        while self.peek() == Some(&Token::Sym('~')) {
            self.pos += 1;
            complement = !complement;
        }
        let s = match self.tokens.get(self.pos) {
            Some(Token::Const(v)) => Signal::FALSE ^ *v,
            Some(Token::Ident(name)) => *env
                .get(name)
                .ok_or_else(|| malformed(self.line, format!("`{name}` is used before it is assigned")))?,
            other => return Err(malformed(self.line, format!("expected an operand, found {other:?}"))),
        };
        self.pos += 1;
        Ok(s ^ complement)
    }

    fn conjunction(&mut self, env: &HashMap<String, Signal>) -> Result<(Signal, Signal), IoError> {
        self.sym('(')?;
        let a = self.operand(env)?;
        self.sym('&')?;
        let b = self.operand(env)?;
        self.sym(')')?;
        Ok((a, b))
    }
}

enum Rhs {
    Alias(Signal),
    Gate(GateType, Vec<Signal>),
}

fn parse_rhs(p: &mut Parser, env: &HashMap<String, Signal>) -> Result<Rhs, IoError> {
    if p.peek() == Some(&Token::Sym('(')) {
        let (a, b) = p.conjunction(env)?;
        p.sym('|')?;
        let (a2, c) = p.conjunction(env)?;
        p.sym('|')?;
        let (b2, c2) = p.conjunction(env)?;
        if a2 != a || b2 != b || c2 != c {
            return Err(malformed(p.line, "majority terms must read `(a & b) | (a & c) | (b & c)`"));
        }
        return Ok(Rhs::Gate(GateType::Maj, vec![a, b, c]));
    }
    let a = p.operand(env)?;
    let gate = match p.peek() {
        Some(Token::Sym('&')) => GateType::And,
        Some(Token::Sym('^')) => GateType::Xor,
        _ => return Ok(Rhs::Alias(a)),
    };
    p.pos += 1;
    let b = p.operand(env)?;
    Ok(Rhs::Gate(gate, vec![a, b]))
}

/// Reads the Verilog subset produced by [`write_verilog`]. The network kind
/// comes from the leading `// network:` comment, or is inferred from the
/// operators used.
pub fn read_verilog(text: &str) -> Result<Network, IoError> {
    let mut declared_kind = None;
    let mut statements = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let (code, comment) = match raw.find("//") {
            Some(at) => (&raw[..at], Some(&raw[at + 2..])),
            None => (raw, None),
        };
        if let Some(comment) = comment {
            if let Some(kind) = comment.trim().strip_prefix("network:") {
                declared_kind = Some(
                    kind.trim()
                        .parse::<NetworkKind>()
                        .map_err(|e| malformed(lineno, e.to_string()))?,
                );
            }
        }
        if !code.trim().is_empty() {
            statements.push((lineno, tokenize(code, lineno)?));
        }
    }

    let kind = match declared_kind {
        Some(kind) => kind,
        None => infer_kind(&statements),
    };
    let mut net = Network::new(kind);
    net.set_structural_hashing(false);
    let mut env: HashMap<String, Signal> = HashMap::new();
    let mut ports: Option<Vec<String>> = None;
    let mut outputs: Vec<String> = Vec::new();
    let mut ended = false;

    for (line, tokens) in &statements {
        let mut p = Parser {
            tokens,
            pos: 0,
            line: *line,
        };
        if ended {
            return Err(malformed(*line, "text after endmodule"));
        }
        let keyword = p.ident()?;
        match keyword.as_str() {
            "module" if ports.is_none() => {
                p.ident()?;
                p.sym('(')?;
                let list = if p.peek() == Some(&Token::Sym(')')) {
                    Vec::new()
                } else {
                    p.name_list()?
                };
                p.sym(')')?;
                p.sym(';')?;
                ports = Some(list);
            }
            "input" | "output" | "wire" if ports.is_some() => {
                let names = p.name_list()?;
                p.sym(';')?;
                let declared = ports.as_ref().unwrap();
                for name in names {
                    if keyword != "wire" && !declared.contains(&name) {
                        return Err(malformed(*line, format!("`{name}` is not a port")));
                    }
                    match keyword.as_str() {
                        "input" => {
                            if env.insert(name.clone(), net.create_pi()).is_some() {
                                return Err(malformed(*line, format!("`{name}` declared twice")));
                            }
                        }
                        "output" => outputs.push(name),
                        _ => {}
                    }
                }
            }
            "assign" if ports.is_some() => {
                let lhs = p.ident()?;
                p.sym('=')?;
                let rhs = parse_rhs(&mut p, &env)?;
                p.sym(';')?;
                let signal = match rhs {
                    Rhs::Alias(s) => s,
                    Rhs::Gate(gate, fanins) => net
                        .add_gate_raw(gate, &fanins)
                        .map_err(|e| malformed(*line, e.to_string()))?,
                };
                if env.insert(lhs.clone(), signal).is_some() {
                    return Err(malformed(*line, format!("`{lhs}` assigned twice")));
                }
            }
            "endmodule" if ports.is_some() => ended = true,
            other => return Err(malformed(*line, format!("unsupported construct `{other}`"))),
        }
        p.done()?;
    }
    if !ended {
        return Err(malformed(text.lines().count(), "missing endmodule"));
    }
    for name in outputs {
        let s = *env
            .get(&name)
            .ok_or_else(|| malformed(0, format!("output `{name}` is never assigned")))?;
        net.add_po(s).expect("assigned signals are live");
    }
    Ok(net)
}

fn infer_kind(statements: &[(usize, Vec<Token>)]) -> NetworkKind {
    let has = |c: char| {
        statements
            .iter()
            .any(|(_, t)| t.contains(&Token::Sym(c)))
    };
    if has('|') {
        NetworkKind::Mig
    } else if has('^') {
        NetworkKind::Xag
    } else {
        NetworkKind::Aig
    }
}
