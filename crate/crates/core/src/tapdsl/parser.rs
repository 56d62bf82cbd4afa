//! Recursive-descent parser for `.tap` files.
//!
//! ```text
//! file          := space_block? tapping_block*
//! space_block   := "space" IDENT "{" (KIND IDENT ":" INT)+ "}"
//! tapping_block := "tapping" IDENT "{" tap_line+ "}"
//! tap_line      := ("input" | "target") IDENT chans? "@" lag ("[" "drop" "p" "=" FLOAT "]")?
//! chans         := "[" INT ("," INT)* "]"
//! lag           := INT | INT ".." INT
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::sync::Arc;

use super::{Role, Tap, Tapping};
use crate::error::{Error, Pos, Result};
use crate::smcore::{Group, Kind, SensorimotorSpace};

/// Parsed contents of a `.tap` file.
#[derive(Debug, Clone, PartialEq)]
pub struct TapFile {
    /// The declared space, or the fallback passed to [`parse_with_space`].
    pub space: Option<Arc<SensorimotorSpace>>,
    pub tappings: Vec<Tapping>,
}

impl TapFile {
    pub fn tapping(&self, name: &str) -> Option<&Tapping> {
        self.tappings.iter().find(|t| t.name() == name)
    }
}

pub fn parse(text: &str) -> Result<TapFile> {
    parse_with_space(text, None)
}

/// Parses `text`; tappings are resolved against the file's own space block,
/// or against `fallback` when the file has none.
pub fn parse_with_space(text: &str, fallback: Option<Arc<SensorimotorSpace>>) -> Result<TapFile> {
    let tokens = lex(text)?;
    Parser { tokens, pos: 0 }.file(fallback)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    At,
    Colon,
    Eq,
    DotDot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::At => "`@`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn err(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let start = i;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '{' => single(&mut i, Tok::LBrace),
            '}' => single(&mut i, Tok::RBrace),
            '[' => single(&mut i, Tok::LBracket),
            ']' => single(&mut i, Tok::RBracket),
            ',' => single(&mut i, Tok::Comma),
            '@' => single(&mut i, Tok::At),
            ':' => single(&mut i, Tok::Colon),
            '=' => single(&mut i, Tok::Eq),
            '.' if chars.get(i + 1) == Some(&'.') => {
                i += 2;
                Tok::DotDot
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            c if c.is_ascii_digit() || ((c == '-' || c == '+') && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                i += 1;
                let digits = |i: &mut usize| {
                    while *i < chars.len() && chars[*i].is_ascii_digit() {
                        *i += 1;
                    }
                };
                digits(&mut i);
                if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(char::is_ascii_digit) {
                    i += 1;
                    digits(&mut i);
                }
                if matches!(chars.get(i), Some('e' | 'E')) {
                    let mut j = i + 1;
                    if matches!(chars.get(j), Some('+' | '-')) {
                        j += 1;
                    }
                    if chars.get(j).is_some_and(char::is_ascii_digit) {
                        i = j;
                        digits(&mut i);
                    }
                }
                Tok::Number(chars[start..i].iter().collect())
            }
            other => return Err(err(pos, format!("unexpected character `{other}`"))),
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

fn single(i: &mut usize, tok: Tok) -> Tok {
    *i += 1;
    tok
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn here(&self) -> Pos {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.tokens[self.pos].clone();
        if t.0 != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(pos)
        } else {
            Err(err(pos, format!("expected {}, found {}", want.describe(), tok.describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos)> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (tok, pos) => Err(err(pos, format!("expected {what}, found {}", tok.describe()))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos> {
        match self.bump() {
            (Tok::Ident(s), pos) if s == kw => Ok(pos),
            (tok, pos) => Err(err(pos, format!("expected `{kw}`, found {}", tok.describe()))),
        }
    }

    fn int(&mut self) -> Result<(i64, Pos)> {
        match self.bump() {
            (Tok::Number(s), pos) => {
                let v = s.parse().map_err(|_| err(pos, format!("expected integer, found `{s}`")))?;
                Ok((v, pos))
            }
            (tok, pos) => Err(err(pos, format!("expected integer, found {}", tok.describe()))),
        }
    }

    fn float(&mut self) -> Result<(f64, Pos)> {
        match self.bump() {
            (Tok::Number(s), pos) => {
                let v = s.parse().map_err(|_| err(pos, format!("expected number, found `{s}`")))?;
                Ok((v, pos))
            }
            (tok, pos) => Err(err(pos, format!("expected number, found {}", tok.describe()))),
        }
    }

    fn file(mut self, fallback: Option<Arc<SensorimotorSpace>>) -> Result<TapFile> {
        let mut space = fallback;
        if matches!(self.peek(), Tok::Ident(s) if s == "space") {
            space = Some(Arc::new(self.space_block()?));
        }
        let mut tappings: Vec<Tapping> = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(s) if s == "tapping" => {
                    let pos = self.here();
                    let space = space
                        .clone()
                        .ok_or_else(|| err(pos, "tapping declared without a space block"))?;
                    let (tapping, name_pos) = self.tapping_block(space)?;
                    if tappings.iter().any(|t| t.name() == tapping.name()) {
                        return Err(err(name_pos, format!("duplicate tapping name `{}`", tapping.name())));
                    }
                    tappings.push(tapping);
                }
                Tok::Ident(s) if s == "space" => {
                    return Err(err(self.here(), "space block must come first and appear once"));
                }
                tok => {
                    return Err(err(self.here(), format!("expected `tapping`, found {}", tok.describe())));
                }
            }
        }
        Ok(TapFile { space, tappings })
    }

    fn space_block(&mut self) -> Result<SensorimotorSpace> {
        self.keyword("space")?;
        let (name, _) = self.ident("space name")?;
        self.expect(Tok::LBrace)?;
        let mut groups: Vec<Group> = Vec::new();
        while *self.peek() != Tok::RBrace {
            let (kind, kind_pos) = self.ident("modality kind")?;
            let kind: Kind = kind.parse().map_err(|_| {
                err(kind_pos, format!("unknown modality kind `{kind}`; expected motor, proprio, extero or intero"))
            })?;
            let (gname, gpos) = self.ident("group name")?;
            if groups.iter().any(|g| g.name == gname) {
                return Err(err(gpos, format!("duplicate group name `{gname}`")));
            }
            self.expect(Tok::Colon)?;
            let (dim, dpos) = self.int()?;
            if dim <= 0 {
                return Err(err(dpos, format!("group `{gname}` must have positive dimension")));
            }
            groups.push(Group::new(kind, gname, dim as usize));
        }
        let close = self.expect(Tok::RBrace)?;
        if groups.is_empty() {
            return Err(err(close, "space block declares no groups"));
        }
        SensorimotorSpace::new(name, groups).map_err(|e| err(close, e.to_string()))
    }

    fn tapping_block(&mut self, space: Arc<SensorimotorSpace>) -> Result<(Tapping, Pos)> {
        self.keyword("tapping")?;
        let (name, name_pos) = self.ident("tapping name")?;
        self.expect(Tok::LBrace)?;
        let mut taps = Vec::new();
        while *self.peek() != Tok::RBrace {
            self.tap_line(&space, &mut taps)?;
        }
        self.expect(Tok::RBrace)?;
        let tapping = Tapping::new(name, space, taps).map_err(|e| err(name_pos, e.to_string()))?;
        Ok((tapping, name_pos))
    }

    fn tap_line(&mut self, space: &SensorimotorSpace, taps: &mut Vec<Tap>) -> Result<()> {
        let (role, rpos) = self.ident("`input` or `target`")?;
        let role = match role.as_str() {
            "input" => Role::Input,
            "target" => Role::Target,
            other => return Err(err(rpos, format!("expected `input` or `target`, found `{other}`"))),
        };
        let (group, gpos) = self.ident("group name")?;
        let dim = space
            .group(&group)
            .ok_or_else(|| err(gpos, format!("unknown group `{group}`")))?
            .dim;
        let mut channels = None;
        if *self.peek() == Tok::LBracket {
            self.bump();
            let mut list = Vec::new();
            loop {
                let (c, cpos) = self.int()?;
                if c < 0 || c as usize >= dim {
                    return Err(err(cpos, format!("channel index {c} out of range for group `{group}` (dim {dim})")));
                }
                if list.contains(&(c as usize)) {
                    return Err(err(cpos, format!("channel {c} listed twice")));
                }
                list.push(c as usize);
                match self.bump() {
                    (Tok::Comma, _) => continue,
                    (Tok::RBracket, _) => break,
                    (tok, pos) => return Err(err(pos, format!("expected `,` or `]`, found {}", tok.describe()))),
                }
            }
            channels = Some(list);
        }
        self.expect(Tok::At)?;
        let (lo, lpos) = self.int()?;
        let mut hi = lo;
        if *self.peek() == Tok::DotDot {
            self.bump();
            let (h, hpos) = self.int()?;
            if h < lo {
                return Err(err(hpos, format!("lag range {lo}..{h} is not ascending")));
            }
            hi = h;
        }
        let mut drop_p = 0.0;
        if *self.peek() == Tok::LBracket {
            self.bump();
            self.keyword("drop")?;
            self.keyword("p")?;
            self.expect(Tok::Eq)?;
            let (p, ppos) = self.float()?;
            if !(0.0..=1.0).contains(&p) {
                return Err(err(ppos, format!("drop p={p} outside [0,1]")));
            }
            drop_p = p;
            self.expect(Tok::RBracket)?;
        }
        for lag in lo..=hi {
            let tap = Tap { group: group.clone(), channels: channels.clone(), lag, role, drop_p };
            if taps.contains(&tap) {
                return Err(err(lpos, format!("duplicate {role} tap on `{group}` @ {lag}")));
            }
            taps.push(tap);
        }
        Ok(())
    }
}
