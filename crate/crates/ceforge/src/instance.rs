//! Text format for instances, chain maps, and term-family isomorphisms.
//!
//! One line-oriented format covers everything the command-line tools read
//! and write.  `#` starts a comment, blank lines are ignored, sections are
//! brace-delimited with the opening brace ending its line and the closing
//! brace alone on its line.  Serialization is canonical — fixed section
//! order, two-space indentation, covering relations only — so canonical
//! files round-trip byte-exactly through parse followed by serialize.
//!
//! An instance file looks like:
//!
//! ```text
//! poset {
//!   elements p q
//!   relation p q
//! }
//! coefficients Z
//! rank p 1
//! rank q 1
//! block p<-q {
//!   2
//! }
//! ```
//!
//! A `block p<-q` holds the component of the differential mapping the
//! grade-`q` generators into the grade-`p` generators, row-major, one row
//! per line.  Degree maps for chain-complex mode are declared with
//! `mode chain` plus one `degree p k1 k2 ...` line per element.
//! Coefficient tags: `Z` (integers), `Q` (rationals), `Z2` (the binary
//! field), `F<p>` (a prime field).

use crate::ce::{CEIso, CESystem};
use crate::error::{Error, Result};
use crate::fgab::GroupHom;
use crate::graded::{FilteredChainMap, GradedDifferentialGroup};
use crate::linalg::{Coefficients, ExactMatrix};
use crate::poset::{ElemMask, Poset};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Parse a coefficients tag: `Z`, `Q`, `Z2`, or `F<p>`.
pub fn parse_coefficients_tag(tok: &str) -> Result<Coefficients> {
    match tok {
        "Z" => Ok(Coefficients::IntegerRing),
        "Q" => Ok(Coefficients::Rationals),
        "Z2" => Ok(Coefficients::BinaryField),
        _ => {
            if let Some(rest) = tok.strip_prefix('F') {
                let p: u64 = rest.parse().map_err(|_| {
                    Error::invalid(format!("unknown coefficients tag `{tok}`"))
                })?;
                let c = Coefficients::PrimeField(p);
                c.validate()?;
                Ok(c)
            } else {
                Err(Error::invalid(format!("unknown coefficients tag `{tok}`")))
            }
        }
    }
}

/// The canonical tag for a coefficients choice.
pub fn coefficients_tag(coeffs: Coefficients) -> String {
    match coeffs {
        Coefficients::IntegerRing => "Z".to_string(),
        Coefficients::Rationals => "Q".to_string(),
        Coefficients::BinaryField => "Z2".to_string(),
        Coefficients::PrimeField(p) => format!("F{p}"),
    }
}

/// Parse a comma-separated list of element labels into a mask; `-` is the
/// empty set.
pub fn parse_mask(poset: &Poset, csv: &str) -> Result<ElemMask> {
    if csv == "-" {
        return Ok(0);
    }
    let mut mask: ElemMask = 0;
    for label in csv.split(',') {
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::invalid(format!("empty element label in `{csv}`")));
        }
        mask |= 1 << poset.index_of(label)?;
    }
    Ok(mask)
}

/// Canonical comma-separated form of a mask; the empty set prints as `-`.
pub fn mask_csv(poset: &Poset, mask: ElemMask) -> String {
    if mask == 0 {
        return "-".to_string();
    }
    let labels: Vec<&str> = (0..poset.len())
        .filter(|p| mask >> p & 1 == 1)
        .map(|p| poset.labels()[p].as_str())
        .collect();
    labels.join(",")
}

// ---------------------------------------------------------------------
// Tokenized lines
// ---------------------------------------------------------------------

struct Lines {
    /// (1-based line number, whitespace-split tokens); comment-only and
    /// blank lines are dropped.
    items: Vec<(usize, Vec<String>)>,
    pos: usize,
    last_line: usize,
}

impl Lines {
    fn tokenize(text: &str) -> Lines {
        let mut items = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            last_line = i + 1;
            let content = match raw.find('#') {
                Some(h) => &raw[..h],
                None => raw,
            };
            let tokens: Vec<String> =
                content.split_whitespace().map(|t| t.to_string()).collect();
            if !tokens.is_empty() {
                items.push((i + 1, tokens));
            }
        }
        Lines { items, pos: 0, last_line }
    }

    fn peek(&self) -> Option<&(usize, Vec<String>)> {
        self.items.get(self.pos)
    }

    fn next(&mut self) -> Option<(usize, Vec<String>)> {
        let item = self.items.get(self.pos).cloned();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn eof_line(&self) -> usize {
        self.last_line + 1
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Read the body of a brace section: returns the content lines until the
/// line holding only `}`.
fn section_body(lines: &mut Lines, what: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut body = Vec::new();
    loop {
        match lines.next() {
            None => {
                return Err(parse_err(
                    lines.eof_line(),
                    format!("unclosed `{what}` section, expected `}}`"),
                ))
            }
            Some((line, tokens)) => {
                if tokens == ["}"] {
                    return Ok(body);
                }
                if tokens.iter().any(|t| t == "{" || t == "}") {
                    return Err(parse_err(
                        line,
                        format!("unexpected brace inside `{what}` section"),
                    ));
                }
                body.push((line, tokens));
            }
        }
    }
}

fn check_label(line: usize, label: &str) -> Result<()> {
    let bad = label.contains(',') || label.contains("<-") || label.contains('#');
    if bad {
        return Err(parse_err(
            line,
            format!("element label `{label}` may not contain `,`, `#`, or `<-`"),
        ));
    }
    Ok(())
}

/// Expect the statement `head ... {` and return its line number.
fn open_section(line: usize, tokens: &[String], expected_len: usize) -> Result<()> {
    if tokens.len() != expected_len || tokens[expected_len - 1] != "{" {
        return Err(parse_err(line, "expected `{` at end of section header"));
    }
    Ok(())
}

/// Parse a matrix body with known dimensions; `line0` anchors diagnostics.
fn parse_matrix_body(
    coeffs: Coefficients,
    rows: usize,
    cols: usize,
    body: &[(usize, Vec<String>)],
    key: &str,
) -> Result<ExactMatrix> {
    let expected = if cols == 0 { 0 } else { rows };
    if body.len() != expected {
        let line = body
            .first()
            .map(|(l, _)| *l)
            .unwrap_or(0);
        return Err(Error::validation(
            "dimensions",
            format!(
                "block {key} has {} row lines, expected {expected} (line {line})",
                body.len()
            ),
        ));
    }
    let mut m = ExactMatrix::zeros(coeffs, rows, cols);
    for (r, (line, tokens)) in body.iter().enumerate() {
        if tokens.len() != cols {
            return Err(Error::validation(
                "dimensions",
                format!(
                    "block {key} row has {} entries, expected {cols} (line {line})",
                    tokens.len()
                ),
            ));
        }
        for (c, tok) in tokens.iter().enumerate() {
            let v = coeffs
                .parse_scalar(tok)
                .map_err(|e| parse_err(*line, e.to_string()))?;
            m.set(r, c, v);
        }
    }
    Ok(m)
}

fn format_matrix_body(out: &mut String, coeffs: Coefficients, m: &ExactMatrix, indent: &str) {
    if m.cols == 0 {
        return;
    }
    for r in 0..m.rows {
        let row: Vec<String> = (0..m.cols)
            .map(|c| coeffs.format_scalar(m.at(r, c)))
            .collect();
        let _ = writeln!(out, "{indent}{}", row.join(" "));
    }
}

/// Split a block key `p<-q` into its two labels.
fn split_block_key<'k>(line: usize, key: &'k str) -> Result<(&'k str, &'k str)> {
    key.split_once("<-")
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .ok_or_else(|| parse_err(line, format!("block key `{key}` is not of the form `p<-q`")))
}

// ---------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------

/// Parse an instance file into a validated graded differential group.
///
/// Syntax faults are reported as parse errors carrying the line; semantic
/// faults (unknown elements, mismatched dimensions, a block keyed against
/// the order, a differential that does not square to zero) come back as
/// validation errors naming the violated invariant.
pub fn parse_instance(text: &str) -> Result<GradedDifferentialGroup> {
    let mut lines = Lines::tokenize(text);
    let mut poset: Option<Poset> = None;
    let mut coeffs: Option<Coefficients> = None;
    let mut mode_chain = false;
    let mut ranks: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut degrees: BTreeMap<String, (usize, Vec<i64>)> = BTreeMap::new();
    let mut blocks: Vec<(usize, String, Vec<(usize, Vec<String>)>)> = Vec::new();
    let mut first_block_line = None;

    while let Some((line, tokens)) = lines.next() {
        match tokens[0].as_str() {
            "poset" => {
                open_section(line, &tokens, 2)?;
                if poset.is_some() {
                    return Err(parse_err(line, "duplicate `poset` section"));
                }
                let body = section_body(&mut lines, "poset")?;
                let mut labels: Option<(usize, Vec<String>)> = None;
                let mut relations: Vec<(String, String)> = Vec::new();
                for (bline, btokens) in body {
                    match btokens[0].as_str() {
                        "elements" => {
                            if labels.is_some() {
                                return Err(parse_err(bline, "duplicate `elements` line"));
                            }
                            if btokens.len() < 2 {
                                return Err(parse_err(bline, "expected at least one element"));
                            }
                            for l in &btokens[1..] {
                                check_label(bline, l)?;
                            }
                            labels = Some((bline, btokens[1..].to_vec()));
                        }
                        "relation" => {
                            if btokens.len() != 3 {
                                return Err(parse_err(
                                    bline,
                                    "expected `relation <lower> <upper>`",
                                ));
                            }
                            relations.push((btokens[1].clone(), btokens[2].clone()));
                        }
                        other => {
                            return Err(parse_err(
                                bline,
                                format!("unknown poset statement `{other}`"),
                            ))
                        }
                    }
                }
                let (lline, labels) = labels.ok_or_else(|| {
                    parse_err(line, "poset section is missing an `elements` line")
                })?;
                let label_refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
                let rel_refs: Vec<(&str, &str)> =
                    relations.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                let p = Poset::from_labels(&label_refs, &rel_refs).map_err(|e| {
                    Error::validation("poset", format!("{e} (section at line {lline})"))
                })?;
                // Rebuild from covering pairs so the same order always
                // yields the same value, whatever relations were listed.
                let covers = covering_pairs(&p);
                let cover_refs: Vec<(&str, &str)> = covers
                    .iter()
                    .map(|&(a, b)| (label_refs[a], label_refs[b]))
                    .collect();
                poset = Some(Poset::from_labels(&label_refs, &cover_refs)?);
            }
            "coefficients" => {
                if coeffs.is_some() {
                    return Err(parse_err(line, "duplicate `coefficients` line"));
                }
                if tokens.len() != 2 {
                    return Err(parse_err(line, "expected `coefficients <tag>`"));
                }
                coeffs = Some(
                    parse_coefficients_tag(&tokens[1])
                        .map_err(|e| parse_err(line, e.to_string()))?,
                );
            }
            "mode" => {
                if tokens.len() != 2 || tokens[1] != "chain" {
                    return Err(parse_err(line, "expected `mode chain`"));
                }
                if mode_chain {
                    return Err(parse_err(line, "duplicate `mode` line"));
                }
                mode_chain = true;
            }
            "rank" => {
                if tokens.len() != 3 {
                    return Err(parse_err(line, "expected `rank <element> <count>`"));
                }
                let n: usize = tokens[2]
                    .parse()
                    .map_err(|_| parse_err(line, format!("bad rank `{}`", tokens[2])))?;
                if ranks.insert(tokens[1].clone(), (line, n)).is_some() {
                    return Err(parse_err(
                        line,
                        format!("duplicate rank for element `{}`", tokens[1]),
                    ));
                }
            }
            "degree" => {
                if tokens.len() < 2 {
                    return Err(parse_err(line, "expected `degree <element> <ints...>`"));
                }
                let mut vals = Vec::new();
                for t in &tokens[2..] {
                    vals.push(t.parse::<i64>().map_err(|_| {
                        parse_err(line, format!("bad degree `{t}`"))
                    })?);
                }
                if degrees.insert(tokens[1].clone(), (line, vals)).is_some() {
                    return Err(parse_err(
                        line,
                        format!("duplicate degree line for element `{}`", tokens[1]),
                    ));
                }
            }
            "block" => {
                open_section(line, &tokens, 3)?;
                let body = section_body(&mut lines, "block")?;
                first_block_line.get_or_insert(line);
                blocks.push((line, tokens[1].clone(), body));
            }
            other => return Err(parse_err(line, format!("unknown statement `{other}`"))),
        }
    }

    let poset = poset.ok_or_else(|| parse_err(lines.eof_line(), "missing `poset` section"))?;
    let coeffs =
        coeffs.ok_or_else(|| parse_err(lines.eof_line(), "missing `coefficients` line"))?;

    // Resolve ranks; elements without a rank line default to rank zero.
    let mut rank_vec = vec![0usize; poset.len()];
    for (label, (line, n)) in &ranks {
        let idx = poset.index_of(label).map_err(|_| {
            Error::validation(
                "declared elements",
                format!("rank references unknown element `{label}` (line {line})"),
            )
        })?;
        rank_vec[idx] = *n;
    }

    // Degree lines and `mode chain` come together or not at all.
    if mode_chain && degrees.is_empty() && rank_vec.iter().any(|&r| r > 0) {
        return Err(Error::validation(
            "degrees",
            "`mode chain` requires a degree line for every element with generators".to_string(),
        ));
    }
    if !mode_chain && !degrees.is_empty() {
        let line = degrees.values().map(|(l, _)| *l).min().unwrap_or(0);
        return Err(Error::validation(
            "degrees",
            format!("degree lines require `mode chain` (line {line})"),
        ));
    }
    let degree_vecs: Option<Vec<Vec<i64>>> = if mode_chain {
        let mut out: Vec<Vec<i64>> = vec![Vec::new(); poset.len()];
        for (label, (line, vals)) in &degrees {
            let idx = poset.index_of(label).map_err(|_| {
                Error::validation(
                    "declared elements",
                    format!("degree references unknown element `{label}` (line {line})"),
                )
            })?;
            out[idx] = vals.clone();
        }
        for p in 0..poset.len() {
            if out[p].len() != rank_vec[p] {
                return Err(Error::validation(
                    "degrees",
                    format!(
                        "element {} has {} degrees for {} generators",
                        poset.labels()[p],
                        out[p].len(),
                        rank_vec[p]
                    ),
                ));
            }
        }
        Some(out)
    } else {
        None
    };

    // Blocks: known elements, right direction, right dimensions.
    let mut block_list: Vec<(usize, usize, ExactMatrix)> = Vec::new();
    let mut seen_keys: Vec<String> = Vec::new();
    for (line, key, body) in &blocks {
        let (pl, ql) = split_block_key(*line, key)?;
        let resolve = |label: &str| {
            poset.index_of(label).map_err(|_| {
                Error::validation(
                    "declared elements",
                    format!("block key references unknown element `{label}` (line {line})"),
                )
            })
        };
        let p = resolve(pl)?;
        let q = resolve(ql)?;
        if seen_keys.contains(key) {
            return Err(Error::validation(
                "blocks",
                format!("duplicate block key `{key}` (line {line})"),
            ));
        }
        seen_keys.push(key.clone());
        if !poset.leq(p, q) {
            return Err(Error::validation(
                "filtered",
                format!(
                    "block {key} maps grade {ql} into grade {pl}, but {pl} is not below {ql} \
                     in the order (line {line})"
                ),
            ));
        }
        let m = parse_matrix_body(coeffs, rank_vec[p], rank_vec[q], body, key)?;
        block_list.push((p, q, m));
    }

    GradedDifferentialGroup::new(poset, coeffs, rank_vec, degree_vecs, &block_list).map_err(
        |e| match e {
            Error::NotADifferential(_) => Error::validation(
                "differential",
                format!(
                    "the blocks do not square to zero (blocks begin at line {})",
                    first_block_line.unwrap_or(0)
                ),
            ),
            other => other,
        },
    )
}

/// Canonical text for an instance.
pub fn serialize_instance(g: &GradedDifferentialGroup) -> String {
    let mut out = String::new();
    let poset = &g.poset;
    out.push_str("poset {\n");
    let _ = writeln!(out, "  elements {}", poset.labels().join(" "));
    for (p, q) in covering_pairs(poset) {
        let _ = writeln!(out, "  relation {} {}", poset.labels()[p], poset.labels()[q]);
    }
    out.push_str("}\n");
    let _ = writeln!(out, "coefficients {}", coefficients_tag(g.coeffs));
    if g.degrees.is_some() {
        out.push_str("mode chain\n");
    }
    for p in 0..poset.len() {
        let _ = writeln!(out, "rank {} {}", poset.labels()[p], g.ranks[p]);
    }
    if let Some(degs) = &g.degrees {
        for p in 0..poset.len() {
            let vals: Vec<String> = degs[p].iter().map(|d| d.to_string()).collect();
            let mut line = format!("degree {}", poset.labels()[p]);
            if !vals.is_empty() {
                line.push(' ');
                line.push_str(&vals.join(" "));
            }
            let _ = writeln!(out, "{line}");
        }
    }
    out.push_str(&serialize_blocks(g, g, &g.d, ""));
    out
}

/// The covering pairs (transitive reduction) of the order, sorted.
fn covering_pairs(poset: &Poset) -> Vec<(usize, usize)> {
    let n = poset.len();
    let mut covers = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if p == q || !poset.leq(p, q) {
                continue;
            }
            let has_mid = (0..n).any(|r| r != p && r != q && poset.leq(p, r) && poset.leq(r, q));
            if !has_mid {
                covers.push((p, q));
            }
        }
    }
    covers.sort();
    covers
}

/// The `block` sections of a matrix whose rows are graded by `target` and
/// columns by `source`; zero blocks are omitted.
fn serialize_blocks(
    target: &GradedDifferentialGroup,
    source: &GradedDifferentialGroup,
    matrix: &ExactMatrix,
    indent: &str,
) -> String {
    let mut out = String::new();
    let coeffs = target.coeffs;
    for p in 0..target.poset.len() {
        for q in 0..source.poset.len() {
            if target.ranks[p] == 0 || source.ranks[q] == 0 {
                continue;
            }
            let rows: Vec<usize> =
                (0..target.ranks[p]).map(|i| target.offset(p) + i).collect();
            let cols: Vec<usize> =
                (0..source.ranks[q]).map(|i| source.offset(q) + i).collect();
            let block = matrix.submatrix(&rows, &cols);
            if block.is_zero() {
                continue;
            }
            let _ = writeln!(
                out,
                "{indent}block {}<-{} {{",
                target.poset.labels()[p],
                source.poset.labels()[q]
            );
            format_matrix_body(&mut out, coeffs, &block, &format!("{indent}  "));
            let _ = writeln!(out, "{indent}}}");
        }
    }
    out
}

// ---------------------------------------------------------------------
// Chain maps and raw graded matrices
// ---------------------------------------------------------------------

/// Parse a `map { ... }` document into the matrix of a map from `source`
/// to `target`, using the same block conventions as instance files
/// (`block p<-q` maps the grade-`q` generators of the source into the
/// grade-`p` generators of the target).
pub fn parse_map_blocks(
    text: &str,
    target: &GradedDifferentialGroup,
    source: &GradedDifferentialGroup,
) -> Result<ExactMatrix> {
    if target.coeffs != source.coeffs {
        return Err(Error::invalid(
            "map endpoints use different coefficients".to_string(),
        ));
    }
    let coeffs = target.coeffs;
    let mut lines = Lines::tokenize(text);
    let (line, tokens) = lines
        .next()
        .ok_or_else(|| parse_err(1, "expected `map {`"))?;
    if tokens[0] != "map" {
        return Err(parse_err(line, "expected `map {`"));
    }
    open_section(line, &tokens, 2)?;
    let mut matrix = ExactMatrix::zeros(coeffs, target.total_rank(), source.total_rank());
    let mut seen_keys: Vec<String> = Vec::new();
    loop {
        let Some((bline, btokens)) = lines.next() else {
            return Err(parse_err(lines.eof_line(), "unclosed `map` section"));
        };
        if btokens == ["}"] {
            break;
        }
        if btokens[0] != "block" {
            return Err(parse_err(bline, "expected `block p<-q {` or `}`"));
        }
        open_section(bline, &btokens, 3)?;
        let key = btokens[1].clone();
        let body = section_body(&mut lines, "block")?;
        let (pl, ql) = split_block_key(bline, &key)?;
        let p = target.poset.index_of(pl).map_err(|_| {
            Error::validation(
                "declared elements",
                format!("block key references unknown element `{pl}` (line {bline})"),
            )
        })?;
        let q = source.poset.index_of(ql).map_err(|_| {
            Error::validation(
                "declared elements",
                format!("block key references unknown element `{ql}` (line {bline})"),
            )
        })?;
        if seen_keys.contains(&key) {
            return Err(Error::validation(
                "blocks",
                format!("duplicate block key `{key}` (line {bline})"),
            ));
        }
        seen_keys.push(key);
        let block = parse_matrix_body(
            coeffs,
            target.ranks[p],
            source.ranks[q],
            &body,
            &btokens[1],
        )?;
        matrix.paste(target.offset(p), source.offset(q), &block);
    }
    if lines.peek().is_some() {
        let (line, _) = lines.next().unwrap();
        return Err(parse_err(line, "unexpected content after `map` section"));
    }
    Ok(matrix)
}

/// Canonical `map { ... }` text for a matrix graded by `target` (rows) and
/// `source` (columns).
pub fn serialize_map_blocks(
    target: &GradedDifferentialGroup,
    source: &GradedDifferentialGroup,
    matrix: &ExactMatrix,
) -> String {
    let mut out = String::from("map {\n");
    out.push_str(&serialize_blocks(target, source, matrix, "  "));
    out.push_str("}\n");
    out
}

/// Parse a `map` document and package it as a chain map from `source` to
/// `target`, verifying the chain equation.
pub fn parse_chain_map(
    text: &str,
    source: &GradedDifferentialGroup,
    target: &GradedDifferentialGroup,
) -> Result<FilteredChainMap> {
    let matrix = parse_map_blocks(text, target, source)?;
    FilteredChainMap::new(source.clone(), target.clone(), matrix)
}

/// Canonical text of a chain map.
pub fn serialize_chain_map(map: &FilteredChainMap) -> String {
    serialize_map_blocks(&map.target, &map.source, &map.matrix)
}

// ---------------------------------------------------------------------
// Term-family isomorphisms
// ---------------------------------------------------------------------

/// Parse a `ce-iso { ... }` document against a source and target system.
/// Each component is keyed by a comma-separated convex set and holds the
/// matrix of the map between the two systems' terms for that set, in their
/// canonical presentations.
pub fn parse_ce_iso(text: &str, source: &CESystem, target: &CESystem) -> Result<CEIso> {
    let poset = source.poset();
    let coeffs = source.group.coeffs;
    let mut lines = Lines::tokenize(text);
    let (line, tokens) = lines
        .next()
        .ok_or_else(|| parse_err(1, "expected `ce-iso {`"))?;
    if tokens[0] != "ce-iso" {
        return Err(parse_err(line, "expected `ce-iso {`"));
    }
    open_section(line, &tokens, 2)?;
    let mut components = BTreeMap::new();
    loop {
        let Some((cline, ctokens)) = lines.next() else {
            return Err(parse_err(lines.eof_line(), "unclosed `ce-iso` section"));
        };
        if ctokens == ["}"] {
            break;
        }
        if ctokens[0] != "component" {
            return Err(parse_err(cline, "expected `component <set> {` or `}`"));
        }
        open_section(cline, &ctokens, 3)?;
        let mask = parse_mask(poset, &ctokens[1]).map_err(|e| {
            Error::validation(
                "declared elements",
                format!("{e} (line {cline})"),
            )
        })?;
        if components.contains_key(&mask) {
            return Err(Error::validation(
                "blocks",
                format!("duplicate component `{}` (line {cline})", ctokens[1]),
            ));
        }
        let body = section_body(&mut lines, "component")?;
        let src_group = source.e_group(mask)?;
        let tgt_group = target.e_group(mask)?;
        let matrix = parse_matrix_body(
            coeffs,
            tgt_group.total_rank(),
            src_group.total_rank(),
            &body,
            &ctokens[1],
        )?;
        let hom = GroupHom::from_matrix(src_group, tgt_group, matrix)?;
        components.insert(mask, hom);
    }
    if lines.peek().is_some() {
        let (line, _) = lines.next().unwrap();
        return Err(parse_err(line, "unexpected content after `ce-iso` section"));
    }
    Ok(CEIso { components })
}

/// Canonical text of a term-family map, keyed by convex sets.
pub fn serialize_ce_iso(iso: &CEIso, poset: &Poset, coeffs: Coefficients) -> String {
    let mut out = String::from("ce-iso {\n");
    for (mask, hom) in &iso.components {
        let _ = writeln!(out, "  component {} {{", mask_csv(poset, *mask));
        format_matrix_body(&mut out, coeffs, &hom.matrix, "    ");
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_CHAIN: &str = "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z\nrank p 1\nrank q 1\nblock p<-q {\n  2\n}\n";

    #[test]
    fn minimal_instance_parses() {
        let text = "poset {\n  elements p\n}\ncoefficients Z\nrank p 1\n";
        let g = parse_instance(text).unwrap();
        assert_eq!(g.total_rank(), 1);
        assert!(g.d.is_zero());
        assert_eq!(serialize_instance(&g), text);
    }

    #[test]
    fn two_chain_round_trips_bit_exactly() {
        let g = parse_instance(TWO_CHAIN).unwrap();
        assert_eq!(g.ranks, vec![1, 1]);
        assert_eq!(*g.d.at(0, 1), crate::linalg::int(2));
        assert_eq!(serialize_instance(&g), TWO_CHAIN);
        let again = parse_instance(&serialize_instance(&g)).unwrap();
        assert_eq!(again.d, g.d);
        assert_eq!(again.poset, g.poset);
    }

    #[test]
    fn wrong_direction_block_names_the_filtered_invariant() {
        let text = "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z\nrank p 1\nrank q 1\nblock q<-p {\n  2\n}\n";
        match parse_instance(text) {
            Err(Error::Validation { invariant, detail }) => {
                assert_eq!(invariant, "filtered");
                assert!(detail.contains("line 8"), "detail: {detail}");
            }
            other => panic!("expected filtered validation error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let text = "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z\nrank p 2\nrank q 1\nblock p<-q {\n  2\n}\n";
        match parse_instance(text) {
            Err(Error::Validation { invariant, .. }) => assert_eq!(invariant, "dimensions"),
            other => panic!("expected dimensions error, got {other:?}"),
        }
    }

    #[test]
    fn non_differential_blocks_are_rejected() {
        // d(q) = p1 with d(p1) nonzero inside the grade makes d² ≠ 0.
        let text = "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z\nrank p 2\nrank q 1\nblock p<-p {\n  0 1\n  0 0\n}\nblock p<-q {\n  0\n  1\n}\n";
        match parse_instance(text) {
            Err(Error::Validation { invariant, detail }) => {
                assert_eq!(invariant, "differential");
                assert!(detail.contains("line"), "detail: {detail}");
            }
            other => panic!("expected differential error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "poset {\n  elements p\n}\ncoefficients Z\nrank p one\n";
        match parse_instance(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        let unclosed = "poset {\n  elements p\n";
        assert!(matches!(parse_instance(unclosed), Err(Error::Parse { .. })));
        let fraction_over_z = "poset {\n  elements p\n}\ncoefficients Z\nrank p 2\nblock p<-p {\n  0 1/2\n  0 0\n}\n";
        match parse_instance(fraction_over_z) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_elements_are_validation_errors() {
        let text = "poset {\n  elements p\n}\ncoefficients Z\nrank r 1\n";
        match parse_instance(text) {
            Err(Error::Validation { invariant, .. }) => {
                assert_eq!(invariant, "declared elements")
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn chain_mode_round_trips() {
        let text = "poset {\n  elements a b c\n  relation a c\n  relation b c\n}\ncoefficients Z2\nmode chain\nrank a 1\nrank b 1\nrank c 1\ndegree a 0\ndegree b 0\ndegree c 1\nblock a<-c {\n  1\n}\nblock b<-c {\n  1\n}\n";
        let g = parse_instance(text).unwrap();
        assert_eq!(serialize_instance(&g), text);
        // Degree lines without the mode marker are rejected.
        let no_mode = text.replace("mode chain\n", "");
        assert!(matches!(
            parse_instance(&no_mode),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn rational_entries_round_trip() {
        let text = "poset {\n  elements p\n}\ncoefficients Q\nrank p 2\nblock p<-p {\n  0 1/3\n  0 0\n}\n";
        let g = parse_instance(text).unwrap();
        assert_eq!(serialize_instance(&g), text);
    }

    #[test]
    fn serializer_emits_covering_relations_only() {
        let text = "poset {\n  elements a b c\n  relation a b\n  relation b c\n  relation a c\n}\ncoefficients Z\nrank a 1\nrank b 1\nrank c 1\n";
        let g = parse_instance(text).unwrap();
        let canon = serialize_instance(&g);
        assert!(canon.contains("relation a b\n"));
        assert!(canon.contains("relation b c\n"));
        assert!(!canon.contains("relation a c\n"));
        let g2 = parse_instance(&canon).unwrap();
        assert_eq!(g2.poset, g.poset);
    }

    #[test]
    fn chain_map_round_trips() {
        let g = parse_instance(TWO_CHAIN).unwrap();
        let id = FilteredChainMap::new(
            g.clone(),
            g.clone(),
            ExactMatrix::identity(g.coeffs, g.total_rank()),
        )
        .unwrap();
        let text = serialize_chain_map(&id);
        let back = parse_chain_map(&text, &g, &g).unwrap();
        assert_eq!(back.matrix, id.matrix);
        assert_eq!(serialize_chain_map(&back), text);
    }

    #[test]
    fn ce_iso_round_trips() {
        let g = parse_instance(TWO_CHAIN).unwrap();
        let sys = CESystem::new(g);
        let iso = CEIso::identity(&sys, &sys).unwrap();
        let text = serialize_ce_iso(&iso, sys.poset(), sys.group.coeffs);
        let back = parse_ce_iso(&text, &sys, &sys).unwrap();
        assert_eq!(back.components.len(), iso.components.len());
        for (mask, hom) in &iso.components {
            assert_eq!(back.components[mask].matrix, hom.matrix);
        }
        assert_eq!(serialize_ce_iso(&back, sys.poset(), sys.group.coeffs), text);
        back.verify(&sys, &sys).unwrap();
    }

    #[test]
    fn masks_parse_and_print() {
        let g = parse_instance(TWO_CHAIN).unwrap();
        let poset = &g.poset;
        assert_eq!(parse_mask(poset, "p,q").unwrap(), 0b11);
        assert_eq!(parse_mask(poset, "q").unwrap(), 0b10);
        assert_eq!(parse_mask(poset, "-").unwrap(), 0);
        assert_eq!(mask_csv(poset, 0b11), "p,q");
        assert_eq!(mask_csv(poset, 0), "-");
        assert!(parse_mask(poset, "p,x").is_err());
    }
}
