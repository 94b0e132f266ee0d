//! Parser for the `.eam` model format.
//!
//! ```text
//! system <name> [timeunit <unit>]
//! param <name> in [<lo>, <hi>]
//! component <name> {
//!   trigger periodic <P> | trigger data <in_port>
//!   exec [<bcet>, <wcet>] | exec <t>
//!   energy <rate>
//!   in <port> [= param <name>]
//!   out <port>
//!   mode when <port|param> in [<a>, <b>] : exec [<b1>, <b2>] energy <r>
//! }
//! connect <comp>.<out_port> -> <comp>.<in_port>
//! ```
//!
//! Every statement starts with a keyword and has a fixed shape, so line breaks
//! are insignificant; `#` starts a comment running to the end of the line.

use std::fmt;

use super::diag::{DiagCode, Diagnostic, Element, Position};
use super::validate::validate;
use super::{ArchitectureModel, Component, Connection, ExecTime, InPort, Interval, Mode, Parameter, PortRef, Trigger};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Arrow,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn syntax(pos: Position, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagCode::Syntax, Element::Model, msg).at(pos)
}

fn lex(text: &str) -> Result<Vec<(Tok, Position)>, Diagnostic> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Position { line: li + 1, column: i + 1 };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let single = match c {
                '[' => Some(Tok::LBracket),
                ']' => Some(Tok::RBracket),
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ',' => Some(Tok::Comma),
                ':' => Some(Tok::Colon),
                '.' => Some(Tok::Dot),
                '=' => Some(Tok::Eq),
                _ => None,
            };
            if let Some(t) = single {
                out.push((t, pos));
                i += 1;
                continue;
            }
            if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push((Tok::Arrow, pos));
                i += 2;
                continue;
            }
            if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let v = lit.parse::<i64>().map_err(|_| syntax(pos, format!("integer literal `{lit}` out of range")))?;
                out.push((Tok::Int(v), pos));
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
                continue;
            }
            return Err(syntax(pos, format!("unexpected character `{c}`")));
        }
    }
    let eof = Position {
        line: text.lines().count().max(1),
        column: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    out.push((Tok::Eof, eof));
    Ok(out)
}

/// Positions of declared elements, used to attach locations to semantic
/// diagnostics. When an element is declared more than once the last
/// declaration wins.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    entries: Vec<(Element, Position)>,
}

impl SourceMap {
    fn record(&mut self, element: Element, pos: Position) {
        self.entries.push((element, pos));
    }

    pub fn position_of(&self, element: &Element) -> Option<Position> {
        let direct = self.entries.iter().rev().find(|(e, _)| e == element).map(|(_, p)| *p);
        direct.or_else(|| match element {
            Element::Port { component, .. } | Element::Mode { component, .. } => {
                self.position_of(&Element::Component(component.clone()))
            }
            _ => None,
        })
    }

    /// Fill in missing positions on `diags`.
    pub fn locate(&self, diags: &mut [Diagnostic]) {
        for d in diags.iter_mut() {
            if d.position.is_none() {
                d.position = self.position_of(&d.element);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("{} syntax error(s); first: {}", .0.len(), .0[0])]
    Syntax(Vec<Diagnostic>),
    #[error("{} invariant violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Diagnostic>),
}

impl ModelError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            ModelError::Syntax(d) | ModelError::Invalid(d) => d,
        }
    }
}

/// Parse and validate a model document. Warnings (see
/// [`DiagCode::severity`]) do not fail the parse; call
/// [`validate`](super::validate) to see them.
pub fn parse_model(text: &str) -> Result<ArchitectureModel, ModelError> {
    let (model, map) = parse_unchecked(text).map_err(ModelError::Syntax)?;
    let mut errors: Vec<Diagnostic> = validate(&model).into_iter().filter(|d| d.is_error()).collect();
    if errors.is_empty() {
        Ok(model)
    } else {
        map.locate(&mut errors);
        Err(ModelError::Invalid(errors))
    }
}

/// Parse a document into a model without checking model invariants.
pub fn parse_unchecked(text: &str) -> Result<(ArchitectureModel, SourceMap), Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser { toks, at: 0, map: SourceMap::default(), field_errors: Vec::new() };
    let model = p.document().map_err(|d| vec![d])?;
    if !p.field_errors.is_empty() {
        return Err(p.field_errors);
    }
    Ok((model, p.map))
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
    map: SourceMap,
    field_errors: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Position {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Position) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(syntax(self.pos(), format!("expected {expected}, found {}", self.peek())))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Position> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Position> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().1),
            _ => self.unexpected(&format!("`{kw}`")),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Position)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().1;
                Ok((s, pos))
            }
            _ => self.unexpected(what),
        }
    }

    fn int(&mut self, what: &str) -> PResult<i64> {
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            _ => self.unexpected(what),
        }
    }

    fn interval(&mut self) -> PResult<(i64, i64)> {
        self.expect(Tok::LBracket)?;
        let lo = self.int("lower bound")?;
        self.expect(Tok::Comma)?;
        let hi = self.int("upper bound")?;
        self.expect(Tok::RBracket)?;
        Ok((lo, hi))
    }

    fn exec(&mut self) -> PResult<ExecTime> {
        if *self.peek() == Tok::LBracket {
            let (b, w) = self.interval()?;
            Ok(ExecTime::new(b, w))
        } else {
            Ok(ExecTime::fixed(self.int("execution time or `[`")?))
        }
    }

    fn port_ref(&mut self) -> PResult<PortRef> {
        let (c, _) = self.ident("component name")?;
        self.expect(Tok::Dot)?;
        let (p, _) = self.ident("port name")?;
        Ok(PortRef::new(c, p))
    }

    fn document(&mut self) -> PResult<ArchitectureModel> {
        let sys_pos = self.keyword("system")?;
        let (name, _) = self.ident("system name")?;
        let mut model = ArchitectureModel::new(name);
        self.map.record(Element::Model, sys_pos);
        if matches!(self.peek(), Tok::Ident(s) if s == "timeunit") {
            self.bump();
            model.time_unit = self.ident("time unit")?.0;
        }
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "param" => {
                    let pos = self.bump().1;
                    let (pname, _) = self.ident("parameter name")?;
                    self.keyword("in")?;
                    let (lo, hi) = self.interval()?;
                    self.map.record(Element::Param(pname.clone()), pos);
                    model.parameters.push(Parameter::new(pname, lo, hi));
                }
                Tok::Ident(kw) if kw == "component" => {
                    let c = self.component()?;
                    model.components.push(c);
                }
                Tok::Ident(kw) if kw == "connect" => {
                    let pos = self.bump().1;
                    let source = self.port_ref()?;
                    self.expect(Tok::Arrow)?;
                    let sink = self.port_ref()?;
                    self.map.record(Element::Connection(model.connections.len()), pos);
                    model.connections.push(Connection::new(source, sink));
                }
                _ => return self.unexpected("`param`, `component`, `connect` or end of input"),
            }
        }
        Ok(model)
    }

    fn component(&mut self) -> PResult<Component> {
        let pos = self.keyword("component")?;
        let (name, _) = self.ident("component name")?;
        self.map.record(Element::Component(name.clone()), pos);
        self.expect(Tok::LBrace)?;

        let mut trigger: Option<Trigger> = None;
        let mut exec: Option<ExecTime> = None;
        let mut energy: Option<i64> = None;
        let mut in_ports = Vec::new();
        let mut out_ports = Vec::new();
        let mut modes = Vec::new();

        let elem = Element::Component(name.clone());
        let dup = |field: &str, pos: Position, errs: &mut Vec<Diagnostic>| {
            errs.push(
                Diagnostic::new(DiagCode::DuplicateField, elem.clone(), format!("`{field}` declared twice")).at(pos),
            );
        };

        loop {
            let field_pos = self.pos();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(kw) if kw == "trigger" => {
                    self.bump();
                    let t = match self.peek().clone() {
                        Tok::Ident(k) if k == "periodic" => {
                            self.bump();
                            Trigger::Periodic { period: self.int("period")? }
                        }
                        Tok::Ident(k) if k == "data" => {
                            self.bump();
                            Trigger::DataDriven { port: self.ident("trigger port")?.0 }
                        }
                        _ => return self.unexpected("`periodic` or `data`"),
                    };
                    if trigger.replace(t).is_some() {
                        dup("trigger", field_pos, &mut self.field_errors);
                    }
                }
                Tok::Ident(kw) if kw == "exec" => {
                    self.bump();
                    let e = self.exec()?;
                    if exec.replace(e).is_some() {
                        dup("exec", field_pos, &mut self.field_errors);
                    }
                }
                Tok::Ident(kw) if kw == "energy" => {
                    self.bump();
                    let r = self.int("energy rate")?;
                    if energy.replace(r).is_some() {
                        dup("energy", field_pos, &mut self.field_errors);
                    }
                }
                Tok::Ident(kw) if kw == "in" => {
                    self.bump();
                    let (pname, _) = self.ident("port name")?;
                    let port = if *self.peek() == Tok::Eq {
                        self.bump();
                        self.keyword("param")?;
                        InPort::bound(pname, self.ident("parameter name")?.0)
                    } else {
                        InPort::new(pname)
                    };
                    in_ports.push(port);
                }
                Tok::Ident(kw) if kw == "out" => {
                    self.bump();
                    out_ports.push(self.ident("port name")?.0);
                }
                Tok::Ident(kw) if kw == "mode" => {
                    self.bump();
                    self.keyword("when")?;
                    let (var, _) = self.ident("port or parameter name")?;
                    self.keyword("in")?;
                    let (lo, hi) = self.interval()?;
                    self.expect(Tok::Colon)?;
                    self.keyword("exec")?;
                    let e = self.exec()?;
                    self.keyword("energy")?;
                    let r = self.int("energy rate")?;
                    self.map.record(Element::Mode { component: name.clone(), index: modes.len() }, field_pos);
                    modes.push(Mode { var, guard: Interval::new(lo, hi), exec: e, energy_rate: r });
                }
                _ => return self.unexpected("a component field or `}`"),
            }
        }

        let mut missing = |field: &str| {
            self.field_errors
                .push(Diagnostic::new(DiagCode::MissingField, elem.clone(), format!("missing `{field}`")).at(pos));
        };
        if trigger.is_none() {
            missing("trigger");
        }
        if exec.is_none() {
            missing("exec");
        }
        if energy.is_none() {
            missing("energy");
        }
        Ok(Component {
            name,
            trigger: trigger.unwrap_or(Trigger::Periodic { period: 1 }),
            exec: exec.unwrap_or(ExecTime::fixed(0)),
            energy_rate: energy.unwrap_or(0),
            in_ports,
            out_ports,
            modes,
        })
    }
}
