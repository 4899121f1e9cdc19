use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{ArchitectureSpec, Topology};
use crate::metaheuristics::AgentKind;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseArchError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: &'static str },
    #[error("unknown agent or macro `{name}` at offset {pos}")]
    UnknownLeaf { pos: usize, name: String },
    #[error("node at offset {pos} has {found} child(ren), at least 2 are required")]
    Arity { pos: usize, found: usize },
    #[error("cycle count at offset {pos} must be a positive 32-bit integer")]
    Cycles { pos: usize },
    #[error("`{0}` cannot be used as a macro name")]
    MacroName(String),
}

/// Named architectures that may appear wherever a leaf is expected.
///
/// Bodies are parsed when bound, so a macro can only refer to names bound
/// before it and expansion always terminates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Macros {
    bindings: BTreeMap<String, ArchitectureSpec>,
}

impl Macros {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `Hu`, `Ca` and `Ox`: the depth 0, 1 and 2 reference architectures.
    pub fn presets() -> Self {
        let mut m = Self::empty();
        for (name, body) in [
            ("Hu", "5Ri(MAHC,MATS,MAHC)"),
            ("Ca", "5Br(Hu,MAHC,CEM)"),
            ("Ox", "5Br(Ca,MAHC,CEM)"),
        ] {
            m.bind(name, body).expect("preset macro");
        }
        m
    }

    pub fn bind(&mut self, name: &str, body: &str) -> Result<(), ParseArchError> {
        let valid = name.starts_with(|c: char| c.is_ascii_alphabetic())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && name.parse::<AgentKind>().is_err();
        if !valid {
            return Err(ParseArchError::MacroName(name.to_string()));
        }
        let spec = self.parse(body)?;
        self.bindings.insert(name.to_string(), spec);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ArchitectureSpec> {
        self.bindings.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }

    pub fn parse(&self, text: &str) -> Result<ArchitectureSpec, ParseArchError> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            macros: self,
        };
        let spec = p.arch()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.syntax("unexpected trailing input"));
        }
        Ok(spec)
    }
}

/// Parses with the preset macros bound.
pub fn parse_architecture(text: &str) -> Result<ArchitectureSpec, ParseArchError> {
    Macros::presets().parse(text)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    macros: &'a Macros,
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: &'static str) -> ParseArchError {
        ParseArchError::Syntax { pos: self.pos, message }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.pos += 1;
        }
        let src: &'a [u8] = self.src;
        core::str::from_utf8(&src[start..self.pos]).expect("ascii run")
    }

    fn expect(&mut self, byte: u8, message: &'static str) -> Result<(), ParseArchError> {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(message))
        }
    }

    fn arch(&mut self) -> Result<ArchitectureSpec, ParseArchError> {
        self.skip_ws();
        match self.peek() {
            Some(b'0'..=b'9') => self.node(),
            Some(c) if c.is_ascii_alphabetic() => self.leaf(),
            None => Err(self.syntax("unexpected end of input")),
            Some(_) => Err(self.syntax("expected an agent, a macro or a cycle count")),
        }
    }

    fn leaf(&mut self) -> Result<ArchitectureSpec, ParseArchError> {
        let start = self.pos;
        let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == b'_');
        if let Ok(kind) = name.parse::<AgentKind>() {
            return Ok(ArchitectureSpec::Leaf(kind));
        }
        match self.macros.get(name) {
            Some(spec) => Ok(spec.clone()),
            None => Err(ParseArchError::UnknownLeaf {
                pos: start,
                name: name.to_string(),
            }),
        }
    }

    fn node(&mut self) -> Result<ArchitectureSpec, ParseArchError> {
        let start = self.pos;
        let cycles = self
            .take_while(|c| c.is_ascii_digit())
            .parse::<u32>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or(ParseArchError::Cycles { pos: start })?;
        self.skip_ws();
        let topo_pos = self.pos;
        let code = self.take_while(|c| c.is_ascii_alphabetic());
        let topology = Topology::from_code(code).ok_or(ParseArchError::Syntax {
            pos: topo_pos,
            message: "expected topology Ri, Br or Ra",
        })?;
        self.expect(b'(', "expected `(`")?;
        let mut children = Vec::new();
        loop {
            children.push(self.arch()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.syntax("expected `,` or `)`")),
            }
        }
        if children.len() < 2 {
            return Err(ParseArchError::Arity {
                pos: start,
                found: children.len(),
            });
        }
        Ok(ArchitectureSpec::Node {
            cycles,
            topology,
            children,
        })
    }
}
