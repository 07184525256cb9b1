//! Plain text from rendered page HTML, and a rule-based sentence splitter.

/// Tokens that end in a period without ending a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "no", "vs", "etc", "inc", "ltd", "co", "corp", "jan",
    "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "e.g", "i.e", "c",
    "ca", "gen", "col", "lt", "sgt", "capt", "rev", "fr",
];

/// Elements whose content is dropped along with the tags.
const SKIPPED: &[&str] = &["script", "style", "sup", "table", "math", "figure"];

fn decode_entity(name: &str) -> Option<char> {
    match name {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "nbsp" => Some(' '),
        "ndash" => Some('-'),
        "mdash" => Some('-'),
        _ => {
            let num = name.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse().ok()?,
            };
            char::from_u32(code)
        }
    }
}

/// Removes markup, decodes character references and the content of
/// reference, script, style and table elements, and collapses whitespace.
/// Block-level closing tags become paragraph breaks (`\n`).
pub fn strip_html(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut skip_depth: Vec<String> = Vec::new();
    let mut rest = html;
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix('<') {
            let end = after.find('>').map_or(after.len(), |i| i + 1);
            let tag = &after[..end.saturating_sub(1).min(after.len())];
            rest = &after[end.min(after.len())..];
            let closing = tag.starts_with('/');
            let name: String = tag
                .trim_start_matches('/')
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric())
                .collect::<String>()
                .to_ascii_lowercase();
            let self_closing = tag.ends_with('/');
            if SKIPPED.contains(&name.as_str()) && !self_closing {
                if closing {
                    if skip_depth.last() == Some(&name) {
                        skip_depth.pop();
                    }
                } else {
                    skip_depth.push(name);
                }
                continue;
            }
            if skip_depth.is_empty()
                && matches!(
                    name.as_str(),
                    "p" | "div" | "br" | "li" | "h1" | "h2" | "h3" | "h4" | "dd"
                )
            {
                out.push('\n');
            }
            continue;
        }
        let next = rest.find('<').unwrap_or(rest.len());
        if skip_depth.is_empty() {
            let mut text = &rest[..next];
            while let Some(amp) = text.find('&') {
                out.push_str(&text[..amp]);
                let tail = &text[amp + 1..];
                match tail
                    .find(';')
                    .filter(|&i| i <= 8)
                    .and_then(|i| Some((decode_entity(&tail[..i])?, i)))
                {
                    Some((c, i)) => {
                        out.push(c);
                        text = &tail[i + 1..];
                    }
                    None => {
                        out.push('&');
                        text = tail;
                    }
                }
            }
            out.push_str(text);
        }
        rest = &rest[next..];
    }
    out.split('\n')
        .map(|line| line.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|line| !line.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

fn is_abbreviation(word: &str) -> bool {
    let w = word
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .trim_end_matches('.')
        .to_lowercase();
    ABBREVIATIONS.contains(&w.as_str()) || (w.len() == 1 && w.chars().all(char::is_alphabetic))
}

/// Splits plain text into sentences at `.`, `?` or `!` followed by a space
/// and an uppercase letter, unless the period closes a known abbreviation or
/// an initial. Paragraph breaks always end a sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for para in text.split('\n') {
        let words: Vec<&str> = para.split_whitespace().collect();
        let mut current: Vec<&str> = Vec::new();
        for (i, w) in words.iter().enumerate() {
            current.push(w);
            let ends = w.ends_with(['.', '?', '!']) || w.ends_with(".\"") || w.ends_with(".)");
            let next_upper = words
                .get(i + 1)
                .and_then(|n| n.trim_start_matches(['"', '(', '\'']).chars().next())
                .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit());
            if ends && next_upper && !(w.ends_with('.') && is_abbreviation(w)) {
                out.push(current.join(" "));
                current.clear();
            }
        }
        if !current.is_empty() {
            out.push(current.join(" "));
        }
    }
    out
}

/// Sentences of a rendered page.
pub fn page_sentences(html: &str) -> Vec<String> {
    split_sentences(&strip_html(html))
}
