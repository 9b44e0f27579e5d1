//! Leading ordinal labels such as `2.a)` or `iii.` at the start of a heading.

use serde::{Deserialize, Serialize};

/// Format code of one sub-label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelFormat {
    None = 0,
    Arabic = 1,
    Lowercase = 2,
    Uppercase = 3,
    Roman = 4,
    Other = 5,
}

/// Format code of the separator following a sub-label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatorFormat {
    None = 0,
    FullStop = 1,
    Colon = 2,
    Parenthesis = 3,
    Other = 4,
}

/// Four `(format, value, separator)` triples, one per title level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LolDescriptor(pub [u32; 12]);

impl LolDescriptor {
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// Number of sub-labels present.
    pub fn depth(&self) -> usize {
        (0..4).take_while(|&i| self.0[i * 3] != 0).count()
    }

    pub fn sub_label(&self, i: usize) -> (u32, u32, u32) {
        (self.0[i * 3], self.0[i * 3 + 1], self.0[i * 3 + 2])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

const ROMAN: [&str; 10] = ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x"];

struct SubLabel {
    format: LabelFormat,
    value: u32,
    separator: SeparatorFormat,
}

/// Encodes up to four leading sub-labels of `text`.
///
/// A chain such as `3.a.i` continues only while sub-labels are glued together
/// by separators. The first sub-label must be an Arabic number or carry an
/// explicit separator (circled numbers and Greek letters excepted), so that
/// ordinary words like "A guide" stay unlabelled.
/// Bare `i`, `v` and `x` read as Roman numerals, not letters.
pub fn parse_leading_ordinal_label(text: &str) -> LolDescriptor {
    let chars: Vec<char> = text.trim_start().chars().collect();
    let mut pos = 0;
    if chars.first() == Some(&'(') {
        pos = 1;
    }
    let mut subs: Vec<SubLabel> = Vec::new();
    while subs.len() < 4 {
        let Some((format, value, after_label)) = read_label(&chars, pos) else {
            break;
        };
        let (separator, after_sep) = read_separator(&chars, after_label);
        let next = chars.get(after_sep).copied();
        let at_boundary = next.map_or(true, char::is_whitespace);
        if separator == SeparatorFormat::None {
            let first_ok = !subs.is_empty() || matches!(format, LabelFormat::Arabic | LabelFormat::Other);
            if at_boundary && first_ok {
                subs.push(SubLabel { format, value, separator });
            }
            break;
        }
        subs.push(SubLabel { format, value, separator });
        if at_boundary {
            break;
        }
        pos = after_sep;
    }

    let mut out = [0u32; 12];
    for (i, s) in subs.iter().enumerate() {
        out[i * 3] = s.format as u32;
        out[i * 3 + 1] = s.value;
        out[i * 3 + 2] = s.separator as u32;
    }
    LolDescriptor(out)
}

fn read_label(chars: &[char], pos: usize) -> Option<(LabelFormat, u32, usize)> {
    let c = *chars.get(pos)?;
    if c.is_ascii_digit() {
        let end = run_end(chars, pos, |c| c.is_ascii_digit());
        if end - pos > 3 {
            return None;
        }
        let value: u32 = chars[pos..end].iter().collect::<String>().parse().ok()?;
        return Some((LabelFormat::Arabic, value, end));
    }
    if c.is_ascii_alphabetic() {
        let end = run_end(chars, pos, |c| c.is_ascii_alphabetic());
        let word: String = chars[pos..end].iter().collect();
        let lower = word.to_ascii_lowercase();
        let uniform_case = word == lower || word == word.to_ascii_uppercase();
        if uniform_case {
            if let Some(i) = ROMAN.iter().position(|r| *r == lower) {
                return Some((LabelFormat::Roman, i as u32 + 1, end));
            }
        }
        if end - pos == 1 {
            let format = if c.is_ascii_lowercase() { LabelFormat::Lowercase } else { LabelFormat::Uppercase };
            let value = (c.to_ascii_lowercase() as u32) - ('a' as u32) + 1;
            return Some((format, value, end));
        }
        return None;
    }
    // Greek letters and circled numbers.
    if ('α'..='ω').contains(&c) || ('Α'..='Ω').contains(&c) {
        let base = if c >= 'α' { 'α' } else { 'Α' };
        return Some((LabelFormat::Other, c as u32 - base as u32 + 1, pos + 1));
    }
    if ('\u{2460}'..='\u{2473}').contains(&c) {
        return Some((LabelFormat::Other, c as u32 - 0x2460 + 1, pos + 1));
    }
    None
}

fn read_separator(chars: &[char], pos: usize) -> (SeparatorFormat, usize) {
    match chars.get(pos) {
        Some('.') => (SeparatorFormat::FullStop, pos + 1),
        Some(':') => (SeparatorFormat::Colon, pos + 1),
        Some(')') => (SeparatorFormat::Parenthesis, pos + 1),
        Some('-' | '–' | '—' | ']' | '/' | '>') => (SeparatorFormat::Other, pos + 1),
        _ => (SeparatorFormat::None, pos),
    }
}

fn run_end(chars: &[char], start: usize, pred: impl Fn(char) -> bool) -> usize {
    let mut end = start;
    while end < chars.len() && pred(chars[end]) {
        end += 1;
    }
    end
}
