//! The `.qcc` scenario format.
//!
//! ```text
//! # comment
//! name: single-cat
//! modes:
//!   path  path          L R
//!   pol   polarization  H V
//! pre: (i|L,H> + |R,H>)/sqrt(2)
//! post: (|L,H> + |R,V>)/sqrt(2)
//! elements:
//!   hwp(pol) @ path=R
//! observables:
//!   Pi_L = proj(path, L)
//!   sigma_z^L = proj(path, L) * sigma_z(pol)
//! pointer:
//!   g = 0.01
//!   sigma = 1
//!   points = 1024
//!   half_width = 8
//! ```
//!
//! Section headers start in column 1; section bodies are indented. `pre` and
//! `post` may continue over indented lines. Ket expressions combine basis kets
//! `|l1,l2,...>` (one label per mode) with complex coefficients built from
//! numbers, `i`, `sqrt(...)`, `+ - * /` and parentheses; juxtaposition
//! multiplies. Observables use `proj(mode, label)`, `sigma_z(mode)` and `id`
//! with the same arithmetic. Unknown sections are errors.

use std::fmt::Write as _;

use super::expr::{ComplexLiteral, OperatorExpr};
use super::{Observable, PointerConfig, Scenario};
use crate::error::{Error, Result};
use crate::optics::{ElementKind, OpticalElement};
use crate::pointer::PointerGrid;
use crate::qcore::{c64, Complex64, HilbertLayout, Mode, ModeKind, QuantumState};

const SECTIONS: [&str; 7] = [
    "name",
    "modes",
    "pre",
    "post",
    "elements",
    "observables",
    "pointer",
];

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '^')
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(is_ident_start) && chars.all(is_ident_char)
}

// ---------------------------------------------------------------- lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Ket(Vec<String>),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    At,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number `{x}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Ket(l) => format!("ket `|{}>`", l.join(",")),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::At => "`@`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

/// Tokenizes `text`, which starts at (`line`, `col`) of the document.
fn lex(text: &str, line: usize, col: usize, out: &mut Vec<Spanned>) -> Result<()> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let at = col + i;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '=' => Some(Tok::Eq),
            '@' => Some(Tok::At),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line, col: at });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let x = s
                .parse::<f64>()
                .map_err(|_| perr(line, at, format!("malformed number `{s}`")))?;
            out.push(Spanned {
                tok: Tok::Num(x),
                line,
                col: at,
            });
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                col: at,
            });
        } else if c == '|' {
            let close = chars[i..]
                .iter()
                .position(|&c| c == '>')
                .ok_or_else(|| perr(line, at, "unterminated ket, expected `>`"))?;
            let inner: String = chars[i + 1..i + close].iter().collect();
            let labels: Vec<String> = inner.split(',').map(|l| l.trim().to_string()).collect();
            if labels.iter().any(String::is_empty) {
                return Err(perr(line, at, format!("empty label in ket `|{inner}>`")));
            }
            out.push(Spanned {
                tok: Tok::Ket(labels),
                line,
                col: at,
            });
            i += close + 1;
        } else {
            return Err(perr(line, at, format!("unexpected character `{c}`")));
        }
    }
    Ok(())
}

// ------------------------------------------------------------ expressions

#[derive(Debug, Clone)]
enum Value {
    Scalar(Complex64),
    Ket(Vec<Complex64>),
    Op(OperatorExpr),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Ket(_) => "ket",
            Value::Op(_) => "operator",
        }
    }
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    layout: Option<&'a HilbertLayout>,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Spanned], layout: Option<&'a HilbertLayout>, end: (usize, usize)) -> Self {
        Self {
            toks,
            pos: 0,
            layout,
            end,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.end)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        perr(l, c, message)
    }

    fn unexpected(&self, expected: &str) -> Error {
        match self.peek() {
            Some(t) => self.err(format!("expected {expected}, found {}", t.describe())),
            None => self.err(format!("expected {expected}, found end of input")),
        }
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize)> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let s = self.bump().expect("peeked");
                let Tok::Ident(name) = s.tok else { unreachable!() };
                Ok((name, s.line, s.col))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Num(x)) => {
                let x = *x;
                self.pos += 1;
                Ok(if neg { -x } else { x })
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of line")),
        }
    }

    fn layout(&self) -> Result<&'a HilbertLayout> {
        self.layout
            .ok_or_else(|| self.err("kets and operators need a `modes:` section"))
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            let (l, c) = self.here();
            let sub = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.term()?;
            acc = add(acc, rhs, sub).map_err(|m| perr(l, c, m))?;
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        loop {
            let (l, c) = self.here();
            let div = match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    false
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    true
                }
                // juxtaposition: `i|L>`, `2 sqrt(2)`
                Some(Tok::Num(_) | Tok::Ident(_) | Tok::LParen | Tok::Ket(_)) => false,
                _ => return Ok(acc),
            };
            let rhs = self.unary()?;
            acc = if div {
                divide(acc, rhs)
            } else {
                multiply(acc, rhs)
            }
            .map_err(|m| perr(l, c, m))?;
        }
    }

    fn unary(&mut self) -> Result<Value> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                let v = self.unary()?;
                multiply(Value::Scalar(c64(-1.0, 0.0)), v).map_err(|m| self.err(m))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Value> {
        let Some(s) = self.bump() else {
            self.pos -= 1;
            return Err(self.unexpected("an expression"));
        };
        match s.tok {
            Tok::Num(x) => Ok(Value::Scalar(c64(x, 0.0))),
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            Tok::Ket(labels) => {
                let layout = self.layout()?;
                if labels.len() != layout.len() {
                    return Err(perr(
                        s.line,
                        s.col,
                        format!(
                            "ket `|{}>` has {} labels, layout has {} modes",
                            labels.join(","),
                            labels.len(),
                            layout.len()
                        ),
                    ));
                }
                let index = layout.index_of_labels(&labels).map_err(|e| {
                    let msg = match e {
                        Error::UnknownLabel { mode, label } => {
                            format!("unknown label `{label}` for mode `{mode}`")
                        }
                        other => other.to_string(),
                    };
                    perr(s.line, s.col, msg)
                })?;
                let mut v = vec![c64(0.0, 0.0); layout.dim()];
                v[index] = c64(1.0, 0.0);
                Ok(Value::Ket(v))
            }
            Tok::Ident(name) => self.named(name, s.line, s.col),
            other => {
                self.pos -= 1;
                let _ = other;
                Err(self.unexpected("an expression"))
            }
        }
    }

    fn named(&mut self, name: String, line: usize, col: usize) -> Result<Value> {
        match name.as_str() {
            "i" => Ok(Value::Scalar(c64(0.0, 1.0))),
            "id" => Ok(Value::Op(OperatorExpr::Identity)),
            "sqrt" => {
                self.expect(Tok::LParen)?;
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                match v {
                    Value::Scalar(z) => Ok(Value::Scalar(z.sqrt())),
                    other => Err(perr(
                        line,
                        col,
                        format!("sqrt expects a scalar, got a {}", other.kind()),
                    )),
                }
            }
            "proj" => {
                self.expect(Tok::LParen)?;
                let (mode, ml, mc) = self.ident("a mode name")?;
                self.expect(Tok::Comma)?;
                let (label, ll, lc) = self.ident("a basis label")?;
                self.expect(Tok::RParen)?;
                let layout = self.layout()?;
                let m = layout
                    .mode(&mode)
                    .map_err(|_| perr(ml, mc, format!("unknown mode `{mode}`")))?;
                m.label_index(&label).map_err(|_| {
                    perr(ll, lc, format!("unknown label `{label}` for mode `{mode}`"))
                })?;
                Ok(Value::Op(OperatorExpr::Projector { mode, label }))
            }
            "sigma_z" => {
                self.expect(Tok::LParen)?;
                let (mode, ml, mc) = self.ident("a mode name")?;
                self.expect(Tok::RParen)?;
                let layout = self.layout()?;
                let m = layout
                    .mode(&mode)
                    .map_err(|_| perr(ml, mc, format!("unknown mode `{mode}`")))?;
                if m.kind() != ModeKind::Polarization || m.dim() != 2 {
                    return Err(perr(ml, mc, format!("sigma_z needs a polarization mode, `{mode}` is not")));
                }
                Ok(Value::Op(OperatorExpr::SigmaZ { mode }))
            }
            _ => Err(perr(line, col, format!("unknown identifier `{name}`"))),
        }
    }
}

fn add(a: Value, b: Value, subtract: bool) -> std::result::Result<Value, String> {
    let sign = if subtract { -1.0 } else { 1.0 };
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x + y * sign)),
        (Value::Ket(x), Value::Ket(y)) => Ok(Value::Ket(
            x.iter().zip(&y).map(|(p, q)| p + q * sign).collect(),
        )),
        (Value::Op(x), Value::Op(y)) => Ok(Value::Op(if subtract {
            OperatorExpr::Difference(Box::new(x), Box::new(y))
        } else {
            OperatorExpr::Sum(Box::new(x), Box::new(y))
        })),
        (a, b) => Err(format!("cannot add a {} and a {}", a.kind(), b.kind())),
    }
}

fn multiply(a: Value, b: Value) -> std::result::Result<Value, String> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x * y)),
        (Value::Scalar(x), Value::Ket(v)) | (Value::Ket(v), Value::Scalar(x)) => {
            Ok(Value::Ket(v.iter().map(|p| p * x).collect()))
        }
        (Value::Scalar(x), Value::Op(o)) | (Value::Op(o), Value::Scalar(x)) => {
            Ok(Value::Op(OperatorExpr::Scaled(x, Box::new(o))))
        }
        (Value::Op(x), Value::Op(y)) => Ok(Value::Op(x.times(y))),
        (a, b) => Err(format!("cannot multiply a {} by a {}", a.kind(), b.kind())),
    }
}

fn divide(a: Value, b: Value) -> std::result::Result<Value, String> {
    match b {
        Value::Scalar(y) if y.norm() == 0.0 => Err("division by zero".into()),
        Value::Scalar(y) => multiply(a, Value::Scalar(c64(1.0, 0.0) / y)),
        other => Err(format!("cannot divide by a {}", other.kind())),
    }
}

// --------------------------------------------------------------- sections

struct Line<'a> {
    number: usize,
    /// column of `text`'s first character
    col: usize,
    text: &'a str,
}

struct Section<'a> {
    name: String,
    line: usize,
    inline: Line<'a>,
    body: Vec<Line<'a>>,
}

fn split_sections(doc: &str) -> Result<Vec<Section<'_>>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in doc.lines().enumerate() {
        let number = idx + 1;
        let text = raw.split('#').next().unwrap_or("");
        if text.trim().is_empty() {
            continue;
        }
        let indented = text.starts_with(|c: char| c.is_whitespace());
        if indented {
            let trimmed = text.trim_start();
            let col = text.len() - trimmed.len() + 1;
            let Some(current) = sections.last_mut() else {
                return Err(perr(number, col, "indented line outside any section"));
            };
            current.body.push(Line {
                number,
                col,
                text: trimmed.trim_end(),
            });
            continue;
        }
        let Some(colon) = text.find(':') else {
            return Err(perr(number, 1, "expected a section header like `modes:`"));
        };
        let name = text[..colon].trim();
        if !SECTIONS.contains(&name) {
            return Err(perr(
                number,
                1,
                format!(
                    "unknown section `{name}` (expected one of: {})",
                    SECTIONS.join(", ")
                ),
            ));
        }
        if sections.iter().any(|s| s.name == name) {
            return Err(perr(number, 1, format!("duplicate section `{name}`")));
        }
        let rest = &text[colon + 1..];
        let trimmed = rest.trim_start();
        sections.push(Section {
            name: name.to_string(),
            line: number,
            inline: Line {
                number,
                col: colon + 2 + (rest.len() - trimmed.len()),
                text: trimmed.trim_end(),
            },
            body: Vec::new(),
        });
    }
    Ok(sections)
}

fn no_inline(s: &Section) -> Result<()> {
    if s.inline.text.is_empty() {
        Ok(())
    } else {
        Err(perr(
            s.inline.number,
            s.inline.col,
            format!("section `{}` takes its entries on indented lines", s.name),
        ))
    }
}

fn end_of(s: &Section) -> (usize, usize) {
    let last = s.body.last().unwrap_or(&s.inline);
    (last.number, last.col + last.text.chars().count())
}

fn parse_modes(s: &Section) -> Result<HilbertLayout> {
    no_inline(s)?;
    let mut modes = Vec::new();
    for line in &s.body {
        let words: Vec<&str> = line.text.split_whitespace().collect();
        if words.len() < 3 {
            return Err(perr(
                line.number,
                line.col,
                "expected `<name> <path|polarization> <label> <label>...`",
            ));
        }
        for w in [words[0]].iter().chain(&words[2..]) {
            if !is_ident(w) {
                return Err(perr(line.number, line.col, format!("invalid name `{w}`")));
            }
        }
        let kind = ModeKind::from_keyword(words[1]).ok_or_else(|| {
            perr(
                line.number,
                line.col,
                format!("unknown mode kind `{}` (expected path or polarization)", words[1]),
            )
        })?;
        modes.push(Mode::new(words[0], kind, &words[2..]));
    }
    if modes.is_empty() {
        return Err(perr(s.line, 1, "`modes:` declares no modes"));
    }
    HilbertLayout::new(modes).map_err(|e| perr(s.line, 1, e.to_string()))
}

fn parse_state(s: &Section, layout: &HilbertLayout) -> Result<QuantumState> {
    let mut toks = Vec::new();
    for line in std::iter::once(&s.inline).chain(&s.body) {
        lex(line.text, line.number, line.col, &mut toks)?;
    }
    let mut p = Parser::new(&toks, Some(layout), end_of(s));
    let v = p.expr()?;
    p.finish()?;
    match v {
        Value::Ket(amps) => Ok(QuantumState::new(layout.clone(), amps)?),
        other => Err(perr(
            s.inline.number,
            s.inline.col,
            format!("`{}:` must be a ket expression, got a {}", s.name, other.kind()),
        )),
    }
}

fn parse_element(line: &Line) -> Result<OpticalElement> {
    let mut toks = Vec::new();
    lex(line.text, line.number, line.col, &mut toks)?;
    let mut p = Parser::new(&toks, None, (line.number, line.col + line.text.len()));
    let (kind, kl, kc) = p.ident("an element (bs, ps, hwp, pbs, mirror)")?;
    p.expect(Tok::LParen)?;
    let (first, _, _) = p.ident("a mode name")?;
    let mut targets = vec![first];
    let kind = match kind.as_str() {
        "bs" => {
            let mut reflectivity = 0.5;
            if p.peek() == Some(&Tok::Comma) {
                p.pos += 1;
                reflectivity = p.number()?;
                if !(0.0..=1.0).contains(&reflectivity) {
                    return Err(p.err("reflectivity must lie in [0, 1]"));
                }
            }
            ElementKind::BeamSplitter { reflectivity }
        }
        "ps" => {
            p.expect(Tok::Comma)?;
            let (port, _, _) = p.ident("a port label")?;
            ElementKind::PhaseShifter { port }
        }
        "hwp" => ElementKind::HalfWavePlate,
        "pbs" => {
            p.expect(Tok::Comma)?;
            targets.push(p.ident("a polarization mode name")?.0);
            ElementKind::PolarizingBeamSplitter
        }
        "mirror" => ElementKind::Mirror,
        other => return Err(perr(kl, kc, format!("unknown element `{other}`"))),
    };
    p.expect(Tok::RParen)?;
    let mut element = OpticalElement {
        kind,
        targets,
        arm: None,
    };
    if p.peek() == Some(&Tok::At) {
        p.pos += 1;
        let (mode, _, _) = p.ident("an arm mode name")?;
        p.expect(Tok::Eq)?;
        let (label, _, _) = p.ident("an arm label")?;
        element = element.in_arm(&mode, &label);
    }
    p.finish()?;
    Ok(element)
}

fn parse_observable(line: &Line, layout: &HilbertLayout) -> Result<Observable> {
    let mut toks = Vec::new();
    lex(line.text, line.number, line.col, &mut toks)?;
    let mut p = Parser::new(&toks, Some(layout), (line.number, line.col + line.text.len()));
    let (name, _, _) = p.ident("an observable name")?;
    p.expect(Tok::Eq)?;
    let v = p.expr()?;
    p.finish()?;
    match v {
        Value::Op(expr) => Observable::new(name, expr, layout)
            .map_err(|e| perr(line.number, line.col, e.to_string())),
        other => Err(perr(
            line.number,
            line.col,
            format!("observable `{name}` must be an operator, got a {}", other.kind()),
        )),
    }
}

fn parse_pointer(s: &Section) -> Result<PointerConfig> {
    no_inline(s)?;
    let defaults = PointerConfig::default();
    let (mut g, mut sigma, mut points, mut half_width) = (
        defaults.g,
        defaults.grid.sigma(),
        defaults.grid.points() as f64,
        defaults.grid.half_width(),
    );
    for line in &s.body {
        let mut toks = Vec::new();
        lex(line.text, line.number, line.col, &mut toks)?;
        let mut p = Parser::new(&toks, None, (line.number, line.col + line.text.len()));
        let (key, kl, kc) = p.ident("a pointer parameter")?;
        p.expect(Tok::Eq)?;
        let value = p.number()?;
        p.finish()?;
        match key.as_str() {
            "g" => g = value,
            "sigma" => sigma = value,
            "points" => points = value,
            "half_width" => half_width = value,
            other => {
                return Err(perr(
                    kl,
                    kc,
                    format!("unknown pointer parameter `{other}` (expected g, sigma, points, half_width)"),
                ))
            }
        }
    }
    if points.fract() != 0.0 || points < 0.0 {
        return Err(perr(s.line, 1, format!("points must be a whole number, got {points}")));
    }
    let grid = PointerGrid::new(half_width, points as usize, sigma)
        .map_err(|e| Error::Validation(Box::new(e)))?;
    Ok(PointerConfig { g, grid })
}

/// Parses a `.qcc` document. Without a `name:` section the scenario is
/// called `scenario`.
pub fn parse_scenario(doc: &str) -> Result<Scenario> {
    parse_scenario_named(doc, "scenario")
}

pub(crate) fn parse_scenario_named(doc: &str, default_name: &str) -> Result<Scenario> {
    let sections = split_sections(doc)?;
    let get = |name: &str| sections.iter().find(|s| s.name == name);
    let eof = doc.lines().count() + 1;
    let require = |name: &str| {
        get(name).ok_or_else(|| perr(eof, 1, format!("missing section `{name}:`")))
    };

    let name = match get("name") {
        Some(s) => {
            if !s.body.is_empty() || s.inline.text.is_empty() {
                return Err(perr(s.line, 1, "`name:` takes a single inline value"));
            }
            s.inline.text.to_string()
        }
        None => default_name.to_string(),
    };
    let layout = parse_modes(require("modes")?)?;
    let source = parse_state(require("pre")?, &layout)?;
    let post = parse_state(require("post")?, &layout)?;
    let elements = match get("elements") {
        Some(s) => {
            no_inline(s)?;
            s.body.iter().map(parse_element).collect::<Result<Vec<_>>>()?
        }
        None => Vec::new(),
    };
    let observables = match get("observables") {
        Some(s) => {
            no_inline(s)?;
            s.body
                .iter()
                .map(|l| parse_observable(l, &layout))
                .collect::<Result<Vec<_>>>()?
        }
        None => Vec::new(),
    };
    let pointer = match get("pointer") {
        Some(s) => parse_pointer(s)?,
        None => PointerConfig::default(),
    };
    Scenario::new(name, source, elements, post, observables, pointer)
}

fn write_state(out: &mut String, s: &QuantumState) {
    let terms: Vec<String> = s
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() != 0.0)
        .map(|(k, a)| {
            format!(
                "{}|{}>",
                ComplexLiteral(*a),
                s.layout().labels_of(k).join(",")
            )
        })
        .collect();
    // continuation lines keep long states readable
    for (k, t) in terms.iter().enumerate() {
        if k == 0 {
            let _ = write!(out, " {t}");
        } else {
            let _ = write!(out, "\n  + {t}");
        }
    }
    out.push('\n');
}

/// Canonical `.qcc` text. `parse_scenario(serialize_scenario(s))` reproduces
/// `s` up to amplitude round-off.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name: {}", s.name);
    out.push_str("modes:\n");
    for m in s.layout.modes() {
        let _ = writeln!(
            out,
            "  {} {} {}",
            m.name(),
            m.kind().keyword(),
            m.labels().join(" ")
        );
    }
    out.push_str("pre:");
    write_state(&mut out, &s.source);
    out.push_str("post:");
    write_state(&mut out, &s.postselection);
    if !s.elements.is_empty() {
        out.push_str("elements:\n");
        for e in &s.elements {
            let _ = writeln!(out, "  {e}");
        }
    }
    if !s.observables.is_empty() {
        out.push_str("observables:\n");
        for o in &s.observables {
            let _ = writeln!(out, "  {} = {}", o.name, o.expr);
        }
    }
    out.push_str("pointer:\n");
    let _ = writeln!(out, "  g = {}", s.pointer.g);
    let _ = writeln!(out, "  sigma = {}", s.pointer.grid.sigma());
    let _ = writeln!(out, "  points = {}", s.pointer.grid.points());
    let _ = writeln!(out, "  half_width = {}", s.pointer.grid.half_width());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODES: &str = "modes:\n  path path L R\n  pol polarization H V\n";

    fn doc(body: &str) -> String {
        format!("{MODES}{body}")
    }

    fn parse_err(text: &str) -> (usize, usize, String) {
        match parse_scenario(text).unwrap_err() {
            Error::Parse {
                line,
                column,
                message,
            } => (line, column, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ket_arithmetic() {
        let s = parse_scenario(&doc(
            "pre: (i|L,H> + |R,H>)/sqrt(2)\npost: 2|L,H> - 0.5e1 i |R,V>\n",
        ))
        .unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.preselection.amplitude(&["L", "H"]).unwrap() - c64(0.0, r)).norm() < 1e-15);
        let n = (4.0f64 + 25.0).sqrt();
        assert!((s.postselection.amplitude(&["R", "V"]).unwrap() - c64(0.0, -5.0 / n)).norm() < 1e-15);
    }

    #[test]
    fn continuation_lines() {
        let s = parse_scenario(&doc("pre: |L,H>\n  + |R,H>\npost: |L,H>\n")).unwrap();
        assert!((s.source.amplitude(&["R", "H"]).unwrap().re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unknown_label_names_it() {
        let (line, col, msg) = parse_err(&doc("pre: |L,X>\npost: |L,H>\n"));
        assert_eq!((line, col), (4, 6));
        assert!(msg.contains("`X`"), "{msg}");
    }

    #[test]
    fn unknown_section_is_error() {
        let (line, _, msg) = parse_err(&doc("pre: |L,H>\npost: |L,H>\ncolour: blue\n"));
        assert_eq!(line, 6);
        assert!(msg.contains("colour"));
    }

    #[test]
    fn missing_section() {
        let (_, _, msg) = parse_err(&doc("pre: |L,H>\n"));
        assert!(msg.contains("post"));
    }

    #[test]
    fn type_errors() {
        let (_, _, msg) = parse_err(&doc("pre: |L,H> + 1\npost: |L,H>\n"));
        assert!(msg.contains("cannot add"), "{msg}");
        let (_, _, msg) = parse_err(&doc("pre: |L,H>\npost: |L,H>\nobservables:\n  A = 2\n"));
        assert!(msg.contains("must be an operator"), "{msg}");
        let (_, _, msg) = parse_err(&doc("pre: |L,H> / 0\npost: |L,H>\n"));
        assert!(msg.contains("division by zero"));
    }

    #[test]
    fn trailing_garbage() {
        let (_, _, msg) = parse_err(&doc("pre: |L,H> )\npost: |L,H>\n"));
        assert!(msg.contains("expected end of line"), "{msg}");
    }

    #[test]
    fn zero_ket_is_validation_error() {
        let err = parse_scenario(&doc("pre: |L,H> - |L,H>\npost: |L,H>\n")).unwrap_err();
        assert!(matches!(err, Error::Validation(ref e) if **e == Error::ZeroNorm), "{err:?}");
    }

    #[test]
    fn orthogonal_selection_is_validation_error() {
        let err = parse_scenario(&doc("pre: |L,H>\npost: |R,H>\n")).unwrap_err();
        assert!(matches!(err.root(), Error::OrthogonalSelection { .. }), "{err:?}");
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn elements_and_arms() {
        let s = parse_scenario(&doc(
            "pre: |R,H>\npost: |L,H>\nelements:\n  bs(path)\n  hwp(pol) @ path=R\n  ps(path, L)\n  bs(path, 0.3)\n  pbs(path, pol)\n  mirror(path)\n",
        ))
        .unwrap();
        assert_eq!(s.elements.len(), 6);
        assert_eq!(s.elements[1].arm.as_ref().unwrap().label, "R");
        let (_, _, msg) = parse_err(&doc("pre: |R,H>\npost: |L,H>\nelements:\n  laser(path)\n"));
        assert!(msg.contains("unknown element"));
    }

    #[test]
    fn pointer_section() {
        let s = parse_scenario(&doc(
            "pre: |L,H>\npost: |L,H>\npointer:\n  g = 0.05\n  points = 512\n",
        ))
        .unwrap();
        assert_eq!(s.pointer.g, 0.05);
        assert_eq!(s.pointer.grid.points(), 512);
        assert_eq!(s.pointer.grid.sigma(), 1.0);
        let err = parse_scenario(&doc("pre: |L,H>\npost: |L,H>\npointer:\n  points = 10\n"))
            .unwrap_err();
        assert!(matches!(err.root(), Error::GridTooCoarse(_)));
    }

    #[test]
    fn operator_round_trip_structure() {
        let text = doc(
            "pre: |L,H>\npost: |L,H>\nobservables:\n  A = -proj(path, L) * (sigma_z(pol) + 2 id) - i proj(path,R) * proj(path, R)\n",
        );
        let s = parse_scenario(&text).unwrap();
        let again = parse_scenario(&serialize_scenario(&s)).unwrap();
        assert_eq!(s.observables[0].expr, again.observables[0].expr);
    }
}
