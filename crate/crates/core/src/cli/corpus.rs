//! Built-in domain corpus and `@file` resolution for polygon specs.

use std::path::Path;

use crate::geometry::Domain;

const DEFAULT: &str = include_str!("../../corpus/default.txt");
const FILES: [(&str, &str); 2] = [
    ("square.txt", include_str!("../../corpus/square.txt")),
    ("triangle.txt", include_str!("../../corpus/triangle.txt")),
];

/// Spec strings of the default corpus, in file order.
pub fn default_specs() -> Vec<String> {
    DEFAULT
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

fn inline_vertices(text: &str) -> String {
    let pairs: Vec<String> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(","))
        .collect();
    pairs.join(" ")
}

/// Parse a domain spec. `polygon:@name` reads `name` from the working
/// directory and falls back to the built-in corpus files.
pub fn resolve(spec: &str) -> crate::geometry::Result<Domain> {
    let trimmed = spec.trim();
    if let Some(rest) = trimmed.strip_prefix("polygon:@") {
        let (name, tail) = match rest.find(';') {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        if !Path::new(name).exists() {
            if let Some((_, text)) = FILES.iter().find(|(f, _)| *f == name) {
                return Domain::parse(&format!("polygon:{}{tail}", inline_vertices(text)));
            }
        }
    }
    Domain::parse(trimmed)
}
