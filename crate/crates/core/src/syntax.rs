//! Text formats: words and presentation files.
//!
//! Word grammar: `1` for the empty word, otherwise terms separated by
//! whitespace or `*`, each term an identifier with an optional `^<nonzero
//! integer>` exponent. Identifiers match `[A-Za-z][A-Za-z0-9_]*`; braid
//! names may also be written `A_{i,j}`.
//!
//! Presentation files are line oriented with `#` comments:
//!
//! ```text
//! base y1 y2 y3
//! stable x1
//! rel x1 : y1 ^ y2 y3 = y1 ^ y3^-1 y2
//! ```
//!
//! or a single `preset gn <n>` / `preset p2 <n>` line.

use std::fmt;

use thiserror::Error;

use crate::braid::SemidirectExtension;
use crate::presentation::{gn, p2, Association, HnnPresentation, PresentationError};
use crate::words::{GeneratorClass, GeneratorId, Letter, Sign, Word};

const MAX_EXPONENT: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn shifted(mut self, line: usize, column_offset: usize) -> Self {
        self.line = line;
        self.column += column_offset;
        self
    }
}

/// Generator names for parsing and printing words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    base: Vec<String>,
    stable: Vec<String>,
    outer: Option<String>,
    braid_strands: Option<u32>,
}

impl Alphabet {
    pub fn new(base: Vec<String>, stable: Vec<String>, outer: Option<String>) -> Self {
        Alphabet {
            base,
            stable,
            outer,
            braid_strands: None,
        }
    }

    /// Accept `A_{i,j}` (or `A_i_j`) for `P⁽²⁾_{n+1}`: `x_i = A_{i,n+1}`,
    /// `y_i = A_{i,n}`, and `A_{n,n+1}` is the outer letter `t`.
    pub fn with_braid_names(mut self, n: u32) -> Self {
        self.braid_strands = Some(n);
        self
    }

    pub fn outer(&self) -> Option<&str> {
        self.outer.as_deref()
    }

    pub fn resolve(&self, name: &str) -> Option<GeneratorId> {
        if let Some(i) = self.base.iter().position(|b| b == name) {
            return Some(GeneratorId::base(i as u32 + 1));
        }
        if let Some(i) = self.stable.iter().position(|s| s == name) {
            return Some(GeneratorId::stable(i as u32 + 1));
        }
        if self.outer.as_deref() == Some(name) {
            return Some(GeneratorId::OUTER);
        }
        let n = self.braid_strands?;
        let (i, j) = parse_braid_name(name)?;
        if i == 0 || i >= j {
            return None;
        }
        if j == n + 1 && i == n && self.outer.is_some() {
            Some(GeneratorId::OUTER)
        } else if j == n + 1 && i < n && i as usize <= self.stable.len() {
            Some(GeneratorId::stable(i))
        } else if j == n && i as usize <= self.base.len() {
            Some(GeneratorId::base(i))
        } else {
            None
        }
    }

    pub fn name(&self, g: GeneratorId) -> String {
        let named = match g.class {
            GeneratorClass::Base => self.base.get(g.index as usize - 1),
            GeneratorClass::Stable => self.stable.get(g.index as usize - 1),
            GeneratorClass::Outer => self.outer.as_ref(),
        };
        named.cloned().unwrap_or_else(|| g.to_string())
    }

    pub fn format_letter(&self, l: Letter) -> String {
        match l.sign {
            Sign::Pos => self.name(l.generator),
            Sign::Neg => format!("{}^-1", self.name(l.generator)),
        }
    }

    pub fn format(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.iter()
            .map(|&l| self.format_letter(l))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn display<'a>(&'a self, w: &'a Word) -> DisplayWord<'a> {
        DisplayWord { alphabet: self, word: w }
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, ParseError> {
        WordParser::new(text, self).parse()
    }
}

pub struct DisplayWord<'a> {
    alphabet: &'a Alphabet,
    word: &'a Word,
}

impl fmt::Display for DisplayWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alphabet.format(self.word))
    }
}

fn parse_braid_name(name: &str) -> Option<(u32, u32)> {
    let rest = name.strip_prefix("A_")?;
    let (i, j) = if let Some(inner) = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        inner.split_once(',')?
    } else {
        rest.split_once('_')?
    };
    Some((i.trim().parse().ok()?, j.trim().parse().ok()?))
}

struct WordParser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> WordParser<'a> {
    fn new(text: &str, alphabet: &'a Alphabet) -> Self {
        WordParser {
            chars: text.chars().collect(),
            pos: 0,
            alphabet,
        }
    }

    fn err(&self, at: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(1, at + 1, msg)
    }

    fn skip_separators(&mut self) {
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_whitespace() || *c == '*')
        {
            self.pos += 1;
        }
    }

    fn skip_spaces(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn parse(mut self) -> Result<Word, ParseError> {
        self.skip_spaces();
        let rest: String = self.chars[self.pos..].iter().collect();
        if rest.trim() == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        loop {
            self.skip_separators();
            if self.pos >= self.chars.len() {
                break;
            }
            let start = self.pos;
            let name = self.identifier()?;
            let g = self
                .alphabet
                .resolve(&name)
                .ok_or_else(|| self.err(start, format!("unknown generator `{name}`")))?;
            let save = self.pos;
            self.skip_spaces();
            let exponent = if self.chars.get(self.pos) == Some(&'^') {
                self.pos += 1;
                self.skip_spaces();
                self.integer()?
            } else {
                self.pos = save;
                1
            };
            letters.extend(Word::power(g, exponent).into_letters());
        }
        if letters.is_empty() {
            return Err(self.err(0, "empty input; write `1` for the empty word"));
        }
        Ok(Word::new(letters))
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.chars.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() => {}
            Some(c) => return Err(self.err(start, format!("expected a generator name, found `{c}`"))),
            None => return Err(self.err(start, "expected a generator name")),
        }
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        // A_{i,j}
        if self.chars[start..self.pos].ends_with(&['_']) && self.chars.get(self.pos) == Some(&'{') {
            let close = self.chars[self.pos..]
                .iter()
                .position(|&c| c == '}')
                .ok_or_else(|| self.err(self.pos, "unterminated `{`"))?;
            self.pos += close + 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let start = self.pos;
        if matches!(self.chars.get(self.pos), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value: i64 = text
            .parse()
            .map_err(|_| self.err(start, "expected an integer exponent"))?;
        if value == 0 {
            return Err(self.err(start, "exponent must be nonzero"));
        }
        if value.abs() > MAX_EXPONENT {
            return Err(self.err(start, "exponent too large"));
        }
        Ok(value)
    }
}

/// A parsed presentation source.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum LoadedPresentation {
    Hnn(HnnPresentation),
    /// `preset p2 <n>`: the extension, with `n` kept for braid names.
    Semidirect { extension: SemidirectExtension, n: u32 },
}

impl LoadedPresentation {
    pub fn presentation(&self) -> &HnnPresentation {
        match self {
            LoadedPresentation::Hnn(p) => p,
            LoadedPresentation::Semidirect { extension, .. } => extension.base(),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            LoadedPresentation::Hnn(p) => p.alphabet(),
            LoadedPresentation::Semidirect { extension, n } => {
                extension.alphabet().with_braid_names(*n)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

pub fn preset(kind: &str, n: u32) -> Result<LoadedPresentation, LoadError> {
    match kind {
        "gn" => Ok(LoadedPresentation::Hnn(gn(n)?)),
        "p2" => Ok(LoadedPresentation::Semidirect {
            extension: p2(n)?,
            n,
        }),
        other => Err(ParseError::new(1, 1, format!("unknown preset `{other}` (expected gn or p2)")).into()),
    }
}

pub fn parse_presentation(source: &str) -> Result<LoadedPresentation, LoadError> {
    let mut base: Option<Vec<String>> = None;
    let mut stable: Option<Vec<String>> = None;
    let mut rels: Vec<(usize, usize, &str)> = Vec::new();
    let mut preset_line: Option<(usize, Vec<&str>)> = None;
    let mut content_lines = 0;

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        content_lines += 1;
        let indent = line.len() - line.trim_start().len();
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap_or_default();
        match keyword {
            "base" | "stable" => {
                let names: Vec<String> = tokens.map(str::to_string).collect();
                for name in &names {
                    check_identifier(name, line_no, raw)?;
                }
                let slot = if keyword == "base" { &mut base } else { &mut stable };
                if slot.replace(names).is_some() {
                    return Err(ParseError::new(line_no, indent + 1, format!("duplicate `{keyword}` line")).into());
                }
            }
            "rel" => {
                let body_start = indent + 3;
                rels.push((line_no, body_start, &line[body_start..]));
            }
            "preset" => preset_line = Some((line_no, tokens.collect())),
            "outer" => {
                return Err(ParseError::new(line_no, indent + 1, "an outer letter is only available through `preset p2 <n>`").into())
            }
            other => {
                return Err(ParseError::new(line_no, indent + 1, format!("unknown directive `{other}`")).into())
            }
        }
    }

    if let Some((line_no, args)) = preset_line {
        if content_lines > 1 {
            return Err(ParseError::new(line_no, 1, "a preset line must be the only directive").into());
        }
        let [kind, n] = args.as_slice() else {
            return Err(ParseError::new(line_no, 1, "expected `preset gn <n>` or `preset p2 <n>`").into());
        };
        let n: u32 = n
            .parse()
            .map_err(|_| ParseError::new(line_no, 1, format!("bad preset size `{n}`")))?;
        return preset(kind, n).map_err(|e| match e {
            LoadError::Parse(p) => LoadError::Parse(p.shifted(line_no, 0)),
            other => other,
        });
    }

    let base = base.ok_or_else(|| ParseError::new(1, 1, "missing `base` line"))?;
    let stable = stable.unwrap_or_default();
    for name in base.iter().chain(&stable) {
        if name == "t" {
            return Err(ParseError::new(1, 1, "`t` is reserved for the outer letter").into());
        }
    }
    let mut p = HnnPresentation::new(base, stable);
    let alphabet = p.alphabet();
    for (line_no, offset, body) in rels {
        let (stable_id, a) = parse_rel(body, &alphabet).map_err(|e| e.shifted(line_no, offset))?;
        p.add_association(stable_id, a);
    }
    p.validate()
        .map_err(|v| LoadError::Presentation(PresentationError::Invalid(v)))?;
    Ok(LoadedPresentation::Hnn(p))
}

fn check_identifier(name: &str, line: usize, raw: &str) -> Result<(), ParseError> {
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        let col = raw.find(name).unwrap_or(0) + 1;
        Err(ParseError::new(line, col, format!("invalid generator name `{name}`")))
    }
}

/// `<stable> : <y> ^ <w> = <y> ^ <v>`; columns in errors are relative to `body`.
fn parse_rel(body: &str, alphabet: &Alphabet) -> Result<(GeneratorId, Association), ParseError> {
    let col_of = |sub: &str| sub.as_ptr() as usize - body.as_ptr() as usize;
    let (stable_part, rest) = body
        .split_once(':')
        .ok_or_else(|| ParseError::new(1, 1, "expected `<stable> : <y> ^ <w> = <y> ^ <v>`"))?;
    let stable_name = stable_part.trim();
    let stable = alphabet
        .resolve(stable_name)
        .filter(|g| g.class == GeneratorClass::Stable)
        .ok_or_else(|| ParseError::new(1, col_of(stable_part) + 1, format!("`{stable_name}` is not a stable generator")))?;
    let (left, right) = rest
        .split_once('=')
        .ok_or_else(|| ParseError::new(1, col_of(rest) + 1, "expected `=`"))?;
    let side = |s: &str| -> Result<(GeneratorId, Word), ParseError> {
        let (y_part, conj) = s
            .split_once('^')
            .ok_or_else(|| ParseError::new(1, col_of(s) + 1, "expected `<y> ^ <conjugator>`"))?;
        let y_name = y_part.trim();
        let y = alphabet
            .resolve(y_name)
            .ok_or_else(|| ParseError::new(1, col_of(y_part) + 1, format!("unknown generator `{y_name}`")))?;
        let w = alphabet
            .parse_word(conj)
            .map_err(|e| e.shifted(1, col_of(conj)))?;
        Ok((y, w))
    };
    let (y1, w) = side(left)?;
    let (y2, v) = side(right)?;
    if y1 != y2 {
        return Err(ParseError::new(1, col_of(right) + 1, "both sides must conjugate the same generator"));
    }
    Ok((stable, Association::new(y1, w, v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gn3_alphabet() -> Alphabet {
        gn(3).unwrap().alphabet()
    }

    #[test]
    fn parses_words() {
        let a = gn3_alphabet();
        let w = a.parse_word("y1*x2^-1 y1").unwrap();
        assert_eq!(w, Word::new(vec![Letter::y(1), Letter::x(2).inverse(), Letter::y(1)]));
        assert_eq!(a.parse_word("1").unwrap(), Word::empty());
        assert_eq!(a.parse_word(" x1^3 ").unwrap().len(), 3);
        assert_eq!(a.parse_word("x1^-2").unwrap(), Word::power(GeneratorId::stable(1), -2));
    }

    #[test]
    fn positioned_errors() {
        let a = gn3_alphabet();
        let e = a.parse_word("y1 z9").unwrap_err();
        assert_eq!((e.line, e.column), (1, 4));
        let e = a.parse_word("y1^0").unwrap_err();
        assert_eq!(e.column, 4);
        assert!(a.parse_word("").is_err());
        assert!(a.parse_word("y1^").is_err());
        assert!(a.parse_word("3y").is_err());
    }

    #[test]
    fn canonical_spelling_round_trips() {
        let a = gn3_alphabet();
        for text in ["1", "y2^-1 y1 y2 x2 y2^-1", "x1 x1 y2"] {
            assert_eq!(a.format(&a.parse_word(text).unwrap()), text);
        }
    }

    #[test]
    fn braid_names() {
        let ext = p2(3).unwrap();
        let a = ext.alphabet().with_braid_names(3);
        assert_eq!(a.resolve("A_1_4"), Some(GeneratorId::stable(1)));
        assert_eq!(a.resolve("A_{2,3}"), Some(GeneratorId::base(2)));
        assert_eq!(a.resolve("A_3_4"), Some(GeneratorId::OUTER));
        assert_eq!(a.resolve("A_1_2"), None);
        assert_eq!(
            a.parse_word("A_{1,3} A_{1,4}").unwrap(),
            Word::new(vec![Letter::y(1), Letter::x(1)])
        );
    }

    #[test]
    fn presentation_file() {
        let src = "# G_3 by hand\nbase y1 y2\nstable x1 x2\nrel x1 : y2 ^ 1 = y2 ^ 1\nrel x2 : y1 ^ y2 = y1 ^ y2\n";
        let LoadedPresentation::Hnn(p) = parse_presentation(src).unwrap() else {
            panic!("expected an HNN presentation");
        };
        assert_eq!(p, gn(3).unwrap());
    }

    #[test]
    fn presentation_file_errors() {
        let e = parse_presentation("base y1\nstable x1\nrel x1 : y1 ^ q = y1 ^ 1\n").unwrap_err();
        match e {
            LoadError::Parse(p) => {
                assert_eq!(p.line, 3);
                assert_eq!(p.column, 15);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(parse_presentation("stable x1\n").is_err());
        assert!(parse_presentation("base y1\nfoo\n").is_err());
        assert!(matches!(
            parse_presentation("base y1 y2\nstable x1\nrel x1 : y1 ^ y1 y2 = y1 ^ 1\n"),
            Err(LoadError::Presentation(_))
        ));
    }

    #[test]
    fn preset_lines() {
        assert!(matches!(
            parse_presentation("preset p2 3\n").unwrap(),
            LoadedPresentation::Semidirect { n: 3, .. }
        ));
        assert!(parse_presentation("preset gn 1\n").is_err());
        assert!(parse_presentation("preset gn 3\nbase y1\n").is_err());
    }
}
