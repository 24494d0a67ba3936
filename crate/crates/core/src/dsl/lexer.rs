use super::{Diagnostic, DiagnosticCode, Span};
use crate::model::{Rgb, TimeOfDay};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Time(TimeOfDay),
    Color(Rgb),
    Str(String),
    Ref(String),
    Colon,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Arrow,
    Eq,
    DotDot,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Time(t) => format!("time {t}"),
            Tok::Color(c) => format!("color {c}"),
            Tok::Str(_) => "string".into(),
            Tok::Ref(r) => format!("`${r}`"),
            Tok::Colon => "`:`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eq => "`=`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn lex(source: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lexer = Lexer {
        chars: source.char_indices().collect(),
        pos: 0,
        line: 1,
        col: 1,
        len: source.len(),
        tokens: Vec::new(),
        diags: Vec::new(),
    };
    lexer.run();
    (lexer.tokens, lexer.diags)
}

struct Lexer {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    col: usize,
    len: usize,
    tokens: Vec<Token>,
    diags: Vec<Diagnostic>,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl Lexer {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(o, _)| o)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: (usize, usize, usize)) -> Span {
        let (offset, line, column) = start;
        Span {
            offset,
            line,
            column,
            length: self.offset() - offset,
        }
    }

    fn error(&mut self, start: (usize, usize, usize), message: String) {
        let span = self.span_from(start);
        self.diags.push(Diagnostic::error(DiagnosticCode::Lexical, message, span));
    }

    fn push(&mut self, start: (usize, usize, usize), tok: Tok) {
        let span = self.span_from(start);
        self.tokens.push(Token { tok, span });
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek(0).filter(|c| pred(*c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn run(&mut self) {
        while let Some(c) = self.peek(0) {
            let start = (self.offset(), self.line, self.col);
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    let hex = (1..=6).all(|i| self.peek(i).is_some_and(|c| c.is_ascii_hexdigit()));
                    if hex && !self.peek(7).is_some_and(is_ident_char) {
                        self.bump();
                        let digits: String = (0..6).filter_map(|_| self.bump()).collect();
                        let v = u32::from_str_radix(&digits, 16).expect("hex digits");
                        self.push(start, Tok::Color(Rgb::from_packed(v)));
                    } else {
                        self.take_while(|c| c != '\n');
                    }
                }
                c if c.is_ascii_digit() => self.number(start, false),
                '-' => {
                    self.bump();
                    match self.peek(0) {
                        Some('>') => {
                            self.bump();
                            self.push(start, Tok::Arrow);
                        }
                        Some(d) if d.is_ascii_digit() => self.number(start, true),
                        _ => self.error(start, "expected `->` or a negative number after `-`".into()),
                    }
                }
                '.' => {
                    self.bump();
                    if self.peek(0) == Some('.') {
                        self.bump();
                        self.push(start, Tok::DotDot);
                    } else {
                        self.error(start, "expected `..`".into());
                    }
                }
                '$' => {
                    self.bump();
                    let name = self.take_while(is_ident_char);
                    if name.is_empty() {
                        self.error(start, "expected a context variable name after `$`".into());
                    } else {
                        self.push(start, Tok::Ref(name));
                    }
                }
                '"' => self.string(start),
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let name = self.take_while(is_ident_char);
                    self.push(start, Tok::Ident(name));
                }
                _ => {
                    let tok = match c {
                        ':' => Some(Tok::Colon),
                        '{' => Some(Tok::LBrace),
                        '}' => Some(Tok::RBrace),
                        '(' => Some(Tok::LParen),
                        ')' => Some(Tok::RParen),
                        '[' => Some(Tok::LBracket),
                        ']' => Some(Tok::RBracket),
                        ',' => Some(Tok::Comma),
                        '=' => Some(Tok::Eq),
                        _ => None,
                    };
                    self.bump();
                    match tok {
                        Some(tok) => self.push(start, tok),
                        None => self.error(start, format!("unexpected character {c:?}")),
                    }
                }
            }
        }
        let start = (self.offset(), self.line, self.col);
        self.push(start, Tok::Eof);
    }

    fn number(&mut self, start: (usize, usize, usize), negative: bool) {
        let digits = self.take_while(|c| c.is_ascii_digit());
        let is_time = !negative
            && digits.len() <= 2
            && self.peek(0) == Some(':')
            && self.peek(1).is_some_and(|c| c.is_ascii_digit())
            && self.peek(2).is_some_and(|c| c.is_ascii_digit());
        if is_time {
            self.bump();
            let minutes = self.take_while(|c| c.is_ascii_digit());
            match format!("{digits}:{minutes}").parse::<TimeOfDay>() {
                Ok(t) => self.push(start, Tok::Time(t)),
                Err(e) => self.error(start, e.to_string()),
            }
            return;
        }
        let text = if negative { format!("-{digits}") } else { digits };
        match text.parse::<i64>() {
            Ok(v) => self.push(start, Tok::Int(v)),
            Err(_) => self.error(start, format!("integer {text} is out of range")),
        }
    }

    fn string(&mut self, start: (usize, usize, usize)) {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    self.error(start, "unterminated string".into());
                    return;
                }
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some(c @ ('"' | '\\')) => s.push(c),
                    _ => {
                        self.error(start, "invalid escape in string".into());
                        return;
                    }
                },
                Some(c) => s.push(c),
            }
        }
        self.push(start, Tok::Str(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        let (tokens, diags) = lex(src);
        assert!(diags.is_empty(), "{diags:?}");
        tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn colors_versus_comments() {
        assert_eq!(toks("#FF0000"), vec![Tok::Color(Rgb(255, 0, 0)), Tok::Eof]);
        assert_eq!(toks("# a comment\nx"), vec![Tok::Ident("x".into()), Tok::Eof]);
        assert_eq!(toks("#fixme later"), vec![Tok::Eof]);
        assert_eq!(toks("#abcdefg"), vec![Tok::Eof]);
    }

    #[test]
    fn numbers_times_arrows() {
        assert_eq!(
            toks("case 06:00..17:01 -> [-100,100]"),
            vec![
                Tok::Ident("case".into()),
                Tok::Time("06:00".parse().unwrap()),
                Tok::DotDot,
                Tok::Time("17:01".parse().unwrap()),
                Tok::Arrow,
                Tok::LBracket,
                Tok::Int(-100),
                Tok::Comma,
                Tok::Int(100),
                Tok::RBracket,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn spans_are_one_based() {
        let (tokens, _) = lex("a\n  bc");
        assert_eq!(tokens[1].span, Span { offset: 4, line: 2, column: 3, length: 2 });
    }

    #[test]
    fn lexical_errors() {
        let (_, diags) = lex("a ? b");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].span.column, 3);
        let (_, diags) = lex("25:00");
        assert_eq!(diags.len(), 1);
        let (_, diags) = lex("\"open");
        assert_eq!(diags[0].message, "unterminated string");
        let (_, diags) = lex("99999999999999999999");
        assert_eq!(diags.len(), 1);
    }
}
