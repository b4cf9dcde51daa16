//! Lenient streaming HTML tokenizer.
//!
//! Annotation bodies are fragments, frequently malformed. The tokenizer never
//! fails: a `<` that does not start a tag is text, and an unterminated tag at
//! the end of input is dropped.

use std::borrow::Cow;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token<'a> {
    /// Raw text between tags, entities still encoded.
    Text(&'a str),
    /// Opening tag with its lowercased name.
    StartTag {
        name: String,
        self_closing: bool,
    },
    EndTag {
        name: String,
    },
    /// Comment, doctype or processing instruction.
    Other,
}

pub struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    pub fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }
}

fn is_name_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b':' | b'.')
}

/// Index just past the `>` closing a tag that starts at `from`, skipping over
/// quoted attribute values.
fn find_tag_end(bytes: &[u8], from: usize) -> Option<usize> {
    let mut quote: Option<u8> = None;
    let mut i = from;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None => match b {
                b'"' | b'\'' => quote = Some(b),
                b'>' => return Some(i + 1),
                _ => {}
            },
        }
        i += 1;
    }
    None
}

impl<'a> Iterator for Tokenizer<'a> {
    type Item = Token<'a>;

    fn next(&mut self) -> Option<Token<'a>> {
        let bytes = self.src.as_bytes();
        loop {
            if self.pos >= bytes.len() {
                return None;
            }
            let start = self.pos;
            if bytes[start] != b'<' {
                let end = self.src[start..]
                    .find('<')
                    .map_or(bytes.len(), |off| start + off);
                self.pos = end;
                return Some(Token::Text(&self.src[start..end]));
            }

            let rest = &bytes[start + 1..];
            if rest.starts_with(b"!--") {
                self.pos = self.src[start + 4..]
                    .find("-->")
                    .map_or(bytes.len(), |off| start + 4 + off + 3);
                return Some(Token::Other);
            }
            match rest.first() {
                Some(b'!') | Some(b'?') => {
                    self.pos = find_tag_end(bytes, start + 1).unwrap_or(bytes.len());
                    return Some(Token::Other);
                }
                Some(b'/') if rest.get(1).is_some_and(u8::is_ascii_alphabetic) => {
                    let name_start = start + 2;
                    let name_end = scan_name(bytes, name_start);
                    let Some(end) = find_tag_end(bytes, name_end) else {
                        self.pos = bytes.len();
                        continue;
                    };
                    self.pos = end;
                    return Some(Token::EndTag {
                        name: self.src[name_start..name_end].to_ascii_lowercase(),
                    });
                }
                Some(b) if b.is_ascii_alphabetic() => {
                    let name_start = start + 1;
                    let name_end = scan_name(bytes, name_start);
                    let Some(end) = find_tag_end(bytes, name_end) else {
                        self.pos = bytes.len();
                        continue;
                    };
                    self.pos = end;
                    let self_closing = end >= 2 && bytes[end - 2] == b'/';
                    return Some(Token::StartTag {
                        name: self.src[name_start..name_end].to_ascii_lowercase(),
                        self_closing,
                    });
                }
                _ => {
                    // Stray '<' is literal text.
                    let end = self.src[start + 1..]
                        .find('<')
                        .map_or(bytes.len(), |off| start + 1 + off);
                    self.pos = end;
                    return Some(Token::Text(&self.src[start..end]));
                }
            }
        }
    }
}

fn scan_name(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && is_name_char(bytes[i]) {
        i += 1;
    }
    i
}

fn named_entity(name: &str) -> Option<char> {
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "ndash" => '\u{2013}',
        "mdash" => '\u{2014}',
        "lsquo" => '\u{2018}',
        "rsquo" => '\u{2019}',
        "ldquo" => '\u{201c}',
        "rdquo" => '\u{201d}',
        "hellip" => '\u{2026}',
        "copy" => '\u{a9}',
        "reg" => '\u{ae}',
        "trade" => '\u{2122}',
        "eacute" => '\u{e9}',
        "egrave" => '\u{e8}',
        "aacute" => '\u{e1}',
        "ntilde" => '\u{f1}',
        "uuml" => '\u{fc}',
        "ouml" => '\u{f6}',
        "auml" => '\u{e4}',
        _ => return None,
    })
}

/// Decodes character references. Unknown or malformed references are kept
/// verbatim.
pub fn decode_entities(text: &str) -> Cow<'_, str> {
    if !text.contains('&') {
        return Cow::Borrowed(text);
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let decoded = tail[1..]
            .find(';')
            .filter(|&semi| semi <= 32)
            .and_then(|semi| {
                let body = &tail[1..1 + semi];
                let ch = if let Some(num) = body.strip_prefix('#') {
                    let code = match num.strip_prefix(['x', 'X']) {
                        Some(hex) => u32::from_str_radix(hex, 16).ok(),
                        None => num.parse::<u32>().ok(),
                    };
                    code.and_then(char::from_u32)
                } else {
                    named_entity(body)
                };
                ch.map(|c| (c, semi + 2))
            });
        match decoded {
            Some((c, consumed)) => {
                out.push(c);
                rest = &tail[consumed..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    Cow::Owned(out)
}

/// Visible text of a fragment: tags removed, entities decoded.
pub fn text_content(html: &str) -> String {
    let mut out = String::new();
    for token in Tokenizer::new(html) {
        if let Token::Text(t) = token {
            out.push_str(&decode_entities(t));
        }
    }
    out
}
