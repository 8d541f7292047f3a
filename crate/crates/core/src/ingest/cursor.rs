use crate::error::SyntaxError;

/// Character cursor over a single line of input.
pub(crate) struct Cursor {
    line: usize,
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(line: usize, text: &str) -> Self {
        Cursor {
            line,
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    /// True when only whitespace or a `#` comment remains.
    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), None | Some('#'))
    }

    pub(crate) fn error(&mut self, expected: impl Into<String>) -> SyntaxError {
        self.skip_ws();
        let found: String = self.chars[self.pos..]
            .iter()
            .take_while(|c| !c.is_whitespace())
            .take(24)
            .collect();
        SyntaxError {
            line: self.line,
            column: self.pos + 1,
            expected: expected.into(),
            found: if found.is_empty() {
                "end of line".to_string()
            } else {
                format!("`{found}`")
            },
        }
    }

    /// An identifier whose tail characters also satisfy `extra`.
    pub(crate) fn ident_with(
        &mut self,
        what: &str,
        extra: impl Fn(char) -> bool,
    ) -> Result<String, SyntaxError> {
        self.skip_ws();
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Err(self.error(what));
        }
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || extra(c))
        {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        self.ident_with(what, |_| false)
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat(kw) {
            Ok(())
        } else {
            Err(self.error(format!("`{kw}`")))
        }
    }

    /// Consumes `sym` if it is next (after whitespace).
    pub(crate) fn eat(&mut self, sym: &str) -> bool {
        self.skip_ws();
        let n = sym.chars().count();
        if self.pos + n <= self.chars.len()
            && self.chars[self.pos..self.pos + n]
                .iter()
                .copied()
                .eq(sym.chars())
        {
            self.pos += n;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, sym: &str) -> Result<(), SyntaxError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error(format!("`{sym}`")))
        }
    }

    /// A run of non-whitespace characters.
    pub(crate) fn word(&mut self, what: &str) -> Result<String, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(what));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    /// A double-quoted string; `\"` and `\\` are the only escapes.
    pub(crate) fn quoted(&mut self, what: &str) -> Result<String, SyntaxError> {
        self.skip_ws();
        if self.peek() != Some('"') {
            return Err(self.error(what));
        }
        let open = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => {
                    self.pos = open;
                    return Err(self.error("closing `\"`"));
                }
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') if matches!(self.chars.get(self.pos + 1), Some('"' | '\\')) => {
                    out.push(self.chars[self.pos + 1]);
                    self.pos += 2;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    /// Reads `key=` and returns the key; the caller reads the value.
    pub(crate) fn key(&mut self, what: &str) -> Result<String, SyntaxError> {
        let key = self.ident(what)?;
        self.expect("=")?;
        Ok(key)
    }

    pub(crate) fn finish(&mut self) -> Result<(), SyntaxError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("end of line"))
        }
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Yields `(line_number, text)` for lines that carry a directive.
pub(crate) fn directive_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim_start();
        (!t.is_empty() && !t.starts_with('#')).then_some((i + 1, l))
    })
}
