//! LP text format writer and round-trip reader.
//!
//! The writer emits the five classic sections (Minimize / Subject To /
//! Bounds / Binary / End) with deterministic ordering and exact decimal
//! coefficients. Model parameters enter the system as decimal strings, so
//! in practice every coefficient has a terminating decimal form; should a
//! non-terminating rational ever appear, the row is preceded by a
//! `\ exact` comment carrying the fractions and the row itself shows a
//! 12-significant-digit decimal. The reader understands those comments, so
//! parsing the writer's output always reconstructs the model exactly.
//! Reading arbitrary third-party LP files is out of scope.

use crate::formulation::{LinearConstraint, LinearModel, Relation, Sense, Var};
use crate::rational::Rat;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

/// Longest name the format accepts.
const MAX_NAME: usize = 255;

/// Significant digits used for non-terminating coefficients.
const APPROX_DIGITS: usize = 12;

/// An LP-format document produced by [`export_lp`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpDocument {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("NameTooLong: {name:?} exceeds the {MAX_NAME}-character format limit")]
    NameTooLong { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("ParseError at line {line}, column {column}: {message}")]
pub struct LpParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Renders a model as LP text. Variables keep their declaration order in
/// the Binary section; constraints keep their model order; identical models
/// produce byte-identical documents.
pub fn export_lp(model: &LinearModel) -> Result<LpDocument, ExportError> {
    let mut text = String::new();
    text.push_str("Minimize\n");
    let (line, exact) = render_row("obj", &model.objective, None)?;
    if let Some(comment) = exact {
        text.push_str(&comment);
    }
    text.push_str(&line);
    text.push_str("Subject To\n");
    for constraint in &model.constraints {
        if constraint.name.len() > MAX_NAME {
            return Err(ExportError::NameTooLong {
                name: constraint.name.clone(),
            });
        }
        let (line, exact) = render_row(
            &constraint.name,
            &constraint.terms,
            Some((constraint.relation, &constraint.rhs)),
        )?;
        if let Some(comment) = exact {
            text.push_str(&comment);
        }
        text.push_str(&line);
    }
    text.push_str("Bounds\n");
    text.push_str("Binary\n");
    for var in &model.variables {
        let name = var.lp_name();
        if name.len() > MAX_NAME {
            return Err(ExportError::NameTooLong { name });
        }
        text.push(' ');
        text.push_str(&name);
        text.push('\n');
    }
    text.push_str("End\n");
    Ok(LpDocument { text })
}

/// Writes one `name: terms [rel rhs]` line; returns the line plus, when any
/// coefficient has no terminating decimal, the `\ exact` comment restoring
/// the fractions.
fn render_row(
    name: &str,
    terms: &[(Rat, Var)],
    tail: Option<(Relation, &Rat)>,
) -> Result<(String, Option<String>), ExportError> {
    if name.len() > MAX_NAME {
        return Err(ExportError::NameTooLong {
            name: name.to_string(),
        });
    }
    let mut line = format!(" {name}:");
    let mut exact_tokens: Vec<(String, Rat)> = Vec::new();
    if terms.is_empty() {
        line.push_str(" 0");
    }
    for (i, (coefficient, var)) in terms.iter().enumerate() {
        let magnitude = coefficient.abs();
        let rendered = match magnitude.to_decimal_string() {
            Some(d) => d,
            None => {
                exact_tokens.push((var.lp_name(), coefficient.clone()));
                magnitude.to_approx_string(APPROX_DIGITS)
            }
        };
        if i == 0 {
            line.push(' ');
            if coefficient.is_negative() {
                line.push('-');
            }
        } else if coefficient.is_negative() {
            line.push_str(" - ");
        } else {
            line.push_str(" + ");
        }
        let _ = write!(line, "{rendered} {}", var.lp_name());
    }
    if let Some((relation, rhs)) = tail {
        let rendered = match rhs.to_decimal_string() {
            Some(d) => d,
            None => {
                exact_tokens.push(("rhs".to_string(), rhs.clone()));
                let mag = rhs.abs().to_approx_string(APPROX_DIGITS);
                if rhs.is_negative() {
                    format!("-{mag}")
                } else {
                    mag
                }
            }
        };
        let _ = write!(line, " {} {rendered}", relation.symbol());
    }
    line.push('\n');
    let comment = if exact_tokens.is_empty() {
        None
    } else {
        let mut c = format!("\\ exact {name}:");
        for (token, value) in &exact_tokens {
            let (p, q) = value.numer_denom_strings();
            let _ = write!(c, " {token}={p}/{q}");
        }
        c.push('\n');
        Some(c)
    };
    Ok((line, comment))
}

/// Parses a document produced by [`export_lp`] back into an equal model.
pub fn parse_lp(text: &str) -> Result<LinearModel, LpParseError> {
    Parser::new(text).run()
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    at: usize,
    /// Exact-fraction overrides keyed by row name, from `\ exact` comments.
    exact: HashMap<String, Vec<(String, Rat)>>,
}

#[derive(Debug, PartialEq)]
enum Token {
    Number(Rat),
    Ident(String),
    Plus,
    Minus,
    Rel(Relation),
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            lines: text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect(),
            at: 0,
            exact: HashMap::new(),
        }
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> LpParseError {
        LpParseError {
            line,
            column,
            message: message.into(),
        }
    }

    /// Next meaningful line, consuming blanks and comments (and stashing
    /// `\ exact` comments).
    fn next_line(&mut self) -> Result<Option<(usize, &'a str)>, LpParseError> {
        while self.at < self.lines.len() {
            let (number, raw) = self.lines[self.at];
            self.at += 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('\\') {
                if let Some(rest) = comment.trim_start().strip_prefix("exact ") {
                    self.stash_exact(number, rest)?;
                }
                continue;
            }
            return Ok(Some((number, raw)));
        }
        Ok(None)
    }

    fn stash_exact(&mut self, line: usize, rest: &str) -> Result<(), LpParseError> {
        let (name, tokens) = rest
            .rsplit_once(':')
            .ok_or_else(|| self.error(line, 1, "malformed exact comment"))?;
        let mut pairs = Vec::new();
        for item in tokens.split_whitespace() {
            let (token, value) = item
                .split_once('=')
                .ok_or_else(|| self.error(line, 1, "malformed exact comment entry"))?;
            let value: Rat = value
                .parse()
                .map_err(|e| self.error(line, 1, format!("bad exact fraction: {e}")))?;
            pairs.push((token.to_string(), value));
        }
        self.exact.insert(name.trim().to_string(), pairs);
        Ok(())
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), LpParseError> {
        match self.next_line()? {
            Some((_, raw)) if raw.trim() == keyword => Ok(()),
            Some((line, raw)) => Err(self.error(
                line,
                1,
                format!("expected {keyword:?}, found {:?}", raw.trim()),
            )),
            None => Err(self.error(
                self.lines.last().map_or(1, |(n, _)| *n),
                1,
                format!("expected {keyword:?}, found end of input"),
            )),
        }
    }

    fn run(mut self) -> Result<LinearModel, LpParseError> {
        self.expect_keyword("Minimize")?;
        let (line, raw) = match self.next_line()? {
            Some(x) => x,
            None => return Err(self.error(1, 1, "missing objective")),
        };
        let (name, objective, tail) = self.parse_row(line, raw)?;
        if name != "obj" {
            return Err(self.error(line, 1, format!("expected objective row, found {name:?}")));
        }
        if tail.is_some() {
            return Err(self.error(line, 1, "objective must not carry a relation"));
        }

        self.expect_keyword("Subject To")?;
        let mut constraints = Vec::new();
        let mut seen_names = BTreeSet::new();
        loop {
            let (line, raw) = match self.next_line()? {
                Some(x) => x,
                None => return Err(self.error(self.last_line(), 1, "unterminated Subject To")),
            };
            if raw.trim() == "Bounds" {
                break;
            }
            let (name, terms, tail) = self.parse_row(line, raw)?;
            let (relation, rhs) = tail
                .ok_or_else(|| self.error(line, 1, format!("constraint {name:?} has no relation")))?;
            if !seen_names.insert(name.clone()) {
                return Err(self.error(line, 1, format!("duplicate constraint name {name:?}")));
            }
            constraints.push(LinearConstraint {
                name,
                terms,
                relation,
                rhs,
            });
        }

        // Bounds section: binaries need none; accept and skip any entries.
        let mut variables = Vec::new();
        loop {
            let (line, raw) = match self.next_line()? {
                Some(x) => x,
                None => return Err(self.error(self.last_line(), 1, "missing Binary section")),
            };
            if raw.trim() == "Binary" {
                break;
            }
            let _ = line; // bound lines carry no information for binary models
        }
        let mut saw_end = false;
        while let Some((line, raw)) = self.next_line()? {
            let token = raw.trim();
            if token == "End" {
                saw_end = true;
                break;
            }
            let var = Var::from_lp_name(token)
                .ok_or_else(|| self.error(line, 1, format!("bad variable name {token:?}")))?;
            variables.push(var);
        }
        if !saw_end {
            return Err(self.error(self.last_line(), 1, "missing End marker"));
        }

        // Reference check: every used variable must be declared.
        let declared: BTreeSet<Var> = variables.iter().copied().collect();
        for (coefficient, var) in &objective {
            let _ = coefficient;
            if !declared.contains(var) {
                return Err(self.error(1, 1, format!("undeclared variable {var} in objective")));
            }
        }
        for constraint in &constraints {
            for (_, var) in &constraint.terms {
                if !declared.contains(var) {
                    return Err(self.error(
                        1,
                        1,
                        format!("undeclared variable {var} in constraint {:?}", constraint.name),
                    ));
                }
            }
        }

        // Restore exact fractions recorded in comments.
        let mut objective = objective;
        for (name, overrides) in &self.exact {
            if name == "obj" {
                apply_overrides(&mut objective, None, overrides);
            } else if let Some(c) = constraints.iter_mut().find(|c| &c.name == name) {
                let rhs = &mut c.rhs;
                apply_overrides(&mut c.terms, Some(rhs), overrides);
            }
        }

        Ok(LinearModel {
            variables,
            objective,
            constraints,
            sense: Sense::Minimize,
        })
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(1, |(n, _)| *n)
    }

    /// Parses ` name: [sign] coef var (+|- coef var)* [rel rhs]`.
    #[allow(clippy::type_complexity)]
    fn parse_row(
        &self,
        line: usize,
        raw: &str,
    ) -> Result<(String, Vec<(Rat, Var)>, Option<(Relation, Rat)>), LpParseError> {
        let colon = raw
            .find(':')
            .ok_or_else(|| self.error(line, 1, "missing ':' after row name"))?;
        let name = raw[..colon].trim().to_string();
        if name.is_empty() {
            return Err(self.error(line, 1, "empty row name"));
        }
        let tokens = self.tokenize(line, &raw[colon + 1..], colon + 2)?;
        let mut terms = Vec::new();
        let mut tail = None;
        let mut i = 0;
        while i < tokens.len() {
            let (column, token) = &tokens[i];
            match token {
                Token::Rel(relation) => {
                    let mut sign = Rat::one();
                    let mut j = i + 1;
                    if let Some((_, Token::Minus)) = tokens.get(j) {
                        sign = -Rat::one();
                        j += 1;
                    } else if let Some((_, Token::Plus)) = tokens.get(j) {
                        j += 1;
                    }
                    match tokens.get(j) {
                        Some((_, Token::Number(value))) => {
                            if j + 1 != tokens.len() {
                                let (col, _) = &tokens[j + 1];
                                return Err(self.error(line, *col, "trailing tokens after rhs"));
                            }
                            tail = Some((*relation, sign * value.clone()));
                            i = j + 1;
                        }
                        _ => return Err(self.error(line, *column, "missing rhs after relation")),
                    }
                }
                Token::Plus | Token::Minus | Token::Number(_) => {
                    let mut sign = Rat::one();
                    let mut j = i;
                    match &tokens[j].1 {
                        Token::Minus => {
                            sign = -Rat::one();
                            j += 1;
                        }
                        Token::Plus => {
                            j += 1;
                        }
                        _ => {}
                    }
                    let value = match tokens.get(j) {
                        Some((_, Token::Number(value))) => value.clone(),
                        _ => {
                            return Err(self.error(line, *column, "expected a coefficient"));
                        }
                    };
                    match tokens.get(j + 1) {
                        Some((col, Token::Ident(ident))) => {
                            let var = Var::from_lp_name(ident).ok_or_else(|| {
                                self.error(line, *col, format!("bad variable name {ident:?}"))
                            })?;
                            terms.push((sign * value, var));
                            i = j + 2;
                        }
                        _ if value.is_zero() => {
                            // Bare zero stands for an empty expression.
                            i = j + 1;
                        }
                        _ => {
                            return Err(self.error(
                                line,
                                *column,
                                "constant terms other than a bare 0 are not supported",
                            ))
                        }
                    }
                }
                Token::Ident(ident) => {
                    return Err(self.error(
                        line,
                        *column,
                        format!("coefficient required before variable {ident:?}"),
                    ))
                }
            }
        }
        Ok((name, terms, tail))
    }

    fn tokenize(
        &self,
        line: usize,
        text: &str,
        offset: usize,
    ) -> Result<Vec<(usize, Token)>, LpParseError> {
        let bytes = text.as_bytes();
        let mut tokens = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let column = offset + i;
            let b = bytes[i];
            match b {
                b' ' | b'\t' => i += 1,
                b'+' => {
                    tokens.push((column, Token::Plus));
                    i += 1;
                }
                b'-' => {
                    tokens.push((column, Token::Minus));
                    i += 1;
                }
                b'<' | b'>' => {
                    if bytes.get(i + 1) != Some(&b'=') {
                        return Err(self.error(line, column, "expected '=' after inequality sign"));
                    }
                    tokens.push((
                        column,
                        Token::Rel(if b == b'<' { Relation::Le } else { Relation::Ge }),
                    ));
                    i += 2;
                }
                b'=' => {
                    tokens.push((column, Token::Rel(Relation::Eq)));
                    i += 1;
                }
                b'0'..=b'9' | b'.' => {
                    let start = i;
                    while i < bytes.len() && matches!(bytes[i], b'0'..=b'9' | b'.') {
                        i += 1;
                    }
                    let literal = &text[start..i];
                    let value: Rat = literal
                        .parse()
                        .map_err(|e| self.error(line, column, format!("bad number: {e}")))?;
                    tokens.push((column, Token::Number(value)));
                }
                _ => {
                    let start = i;
                    while i < bytes.len()
                        && !matches!(bytes[i], b' ' | b'\t' | b'+' | b'-' | b'<' | b'>' | b'=')
                    {
                        i += 1;
                    }
                    tokens.push((column, Token::Ident(text[start..i].to_string())));
                }
            }
        }
        Ok(tokens)
    }
}

fn apply_overrides(
    terms: &mut [(Rat, Var)],
    rhs: Option<&mut Rat>,
    overrides: &[(String, Rat)],
) {
    let mut rhs = rhs;
    for (token, value) in overrides {
        if token == "rhs" {
            if let Some(rhs) = rhs.as_deref_mut() {
                *rhs = value.clone();
            }
            continue;
        }
        if let Some(var) = Var::from_lp_name(token) {
            for (coefficient, term_var) in terms.iter_mut() {
                if *term_var == var {
                    *coefficient = value.clone();
                }
            }
        }
    }
}
