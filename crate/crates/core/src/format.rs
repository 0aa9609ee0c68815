//! The line-oriented model file format.
//!
//! ```text
//! # comments start with '#'
//! [model]
//! name = cp1
//! dim = 1
//! euler_char = 2
//! c1_cd1 = 2
//! order = 12
//! base_point = 0, 0
//! [novikov]
//! q 2
//! [basis]
//! t 0 0
//! s 1 1
//! [eta]
//! 0 1
//! 1 0
//! [chern]
//! 0 2
//! 0 0
//! [f0]
//! 1/2 ; t^2 s
//! 1 ; q
//! [f1]
//! -1/24 ; s
//! ```
//!
//! Rationals are written `p/q` or as integers. Every `[f0]`/`[f1]` line is
//! one term: a coefficient, a semicolon, then zero or more `var` or
//! `var^e` factors. Potentials are written in the original coordinates;
//! recentering to `base_point` happens on load.

use std::collections::BTreeMap;
use std::path::Path;

use crate::model::{BasisClass, ModelError, ModelParts, ModelSpec};
use crate::scalar::Scalar;
use crate::series::{Monomial, Series};

struct Line<'a> {
    number: usize,
    text: &'a str,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &text[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &text[s..]));
    }
    out
}

fn scalar_at(line: usize, col: usize, tok: &str) -> Result<Scalar, ModelError> {
    tok.parse::<Scalar>()
        .map_err(|_| parse_err(line, col, format!("expected a rational, found '{tok}'")))
}

fn uint_at(line: usize, col: usize, tok: &str) -> Result<u32, ModelError> {
    tok.parse::<u32>()
        .map_err(|_| parse_err(line, col, format!("expected a non-negative integer, found '{tok}'")))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

/// Parses model text into a validated [`ModelSpec`].
pub fn parse_model(text: &str) -> Result<ModelSpec, ModelError> {
    let mut sections: BTreeMap<String, (usize, Vec<Line>)> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let trimmed = content.trim();
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') {
                let col = raw.find('[').unwrap() + 1;
                return Err(parse_err(number, col, "unterminated section header"));
            }
            let name = trimmed[1..trimmed.len() - 1].trim().to_string();
            let known = ["model", "novikov", "basis", "eta", "chern", "f0", "f1"];
            if !known.contains(&name.as_str()) {
                let col = raw.find('[').unwrap() + 1;
                return Err(parse_err(number, col, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                let col = raw.find('[').unwrap() + 1;
                return Err(parse_err(number, col, format!("section [{name}] repeated")));
            }
            sections.insert(name.clone(), (number, Vec::new()));
            current = Some(name);
            continue;
        }
        match &current {
            Some(name) => sections.get_mut(name).unwrap().1.push(Line {
                number,
                text: content,
            }),
            None => {
                let col = raw.len() - raw.trim_start().len() + 1;
                return Err(parse_err(number, col, "content before the first section"));
            }
        }
    }

    let last_line = text.lines().count().max(1);
    let missing = |name: &str| parse_err(last_line, 1, format!("missing section [{name}]"));

    // [model]
    let (_, model_lines) = sections.get("model").ok_or_else(|| missing("model"))?;
    let mut keys: BTreeMap<String, (usize, usize, String)> = BTreeMap::new();
    for l in model_lines {
        let Some(eq) = l.text.find('=') else {
            let col = l.text.len() - l.text.trim_start().len() + 1;
            return Err(parse_err(l.number, col, "expected 'key = value'"));
        };
        let key = l.text[..eq].trim().to_string();
        let value = l.text[eq + 1..].trim().to_string();
        let vcol = eq + 2 + (l.text[eq + 1..].len() - l.text[eq + 1..].trim_start().len());
        let known = ["name", "dim", "euler_char", "c1_cd1", "order", "base_point"];
        if !known.contains(&key.as_str()) {
            let col = l.text.len() - l.text.trim_start().len() + 1;
            return Err(parse_err(l.number, col, format!("unknown key '{key}'")));
        }
        keys.insert(key, (l.number, vcol, value));
    }
    let model_header = sections["model"].0;
    let need = |k: &str| {
        keys.get(k)
            .cloned()
            .ok_or_else(|| parse_err(model_header, 1, format!("[model] lacks key '{k}'")))
    };
    let name = need("name")?.2;
    let (ln, col, v) = need("dim")?;
    let dim = uint_at(ln, col, &v)?;
    let (ln, col, v) = need("euler_char")?;
    let euler_char = scalar_at(ln, col, &v)?;
    let (ln, col, v) = need("c1_cd1")?;
    let c1_cd1 = scalar_at(ln, col, &v)?;
    let (ln, col, v) = need("order")?;
    let order = uint_at(ln, col, &v)?;

    // [novikov]
    let mut novikov = Vec::new();
    if let Some((_, lines)) = sections.get("novikov") {
        for l in lines {
            let t = tokens(l.text);
            if t.len() != 2 {
                return Err(parse_err(l.number, t[0].0, "expected 'variable weight'"));
            }
            if !is_identifier(t[0].1) {
                return Err(parse_err(l.number, t[0].0, format!("bad variable name '{}'", t[0].1)));
            }
            novikov.push((t[0].1.to_string(), uint_at(l.number, t[1].0, t[1].1)?));
        }
    }

    // [basis]
    let (_, basis_lines) = sections.get("basis").ok_or_else(|| missing("basis"))?;
    let mut basis = Vec::new();
    for l in basis_lines {
        let t = tokens(l.text);
        if t.len() != 3 {
            return Err(parse_err(l.number, t[0].0, "expected 'label p q'"));
        }
        if !is_identifier(t[0].1) {
            return Err(parse_err(l.number, t[0].0, format!("bad class label '{}'", t[0].1)));
        }
        basis.push(BasisClass::new(
            t[0].1,
            uint_at(l.number, t[1].0, t[1].1)?,
            uint_at(l.number, t[2].0, t[2].1)?,
        ));
    }
    let n = basis.len();

    let matrix = |name: &str| -> Result<Vec<Vec<Scalar>>, ModelError> {
        let (header, lines) = sections.get(name).ok_or_else(|| missing(name))?;
        if lines.len() != n {
            return Err(parse_err(*header, 1, format!("[{name}] needs {n} rows, found {}", lines.len())));
        }
        lines
            .iter()
            .map(|l| {
                let t = tokens(l.text);
                if t.len() != n {
                    return Err(parse_err(l.number, t[0].0, format!("expected {n} entries, found {}", t.len())));
                }
                t.iter().map(|(c, s)| scalar_at(l.number, *c, s)).collect()
            })
            .collect()
    };
    let eta = matrix("eta")?;
    let chern = matrix("chern")?;

    let base_point = match keys.get("base_point") {
        None => vec![Scalar::zero(); n],
        Some((ln, col, v)) => {
            let mut out = Vec::new();
            let mut offset = 0;
            for piece in v.split(',') {
                let lead = piece.len() - piece.trim_start().len();
                out.push(scalar_at(*ln, col + offset + lead, piece.trim())?);
                offset += piece.len() + 1;
            }
            out
        }
    };

    let table = ModelSpec::make_table(&basis, &novikov)?;
    let potential = |name: &str| -> Result<Option<Series>, ModelError> {
        let Some((_, lines)) = sections.get(name) else {
            return Ok(None);
        };
        let mut terms = Vec::new();
        for l in lines {
            let Some(semi) = l.text.find(';') else {
                let col = l.text.len() - l.text.trim_start().len() + 1;
                return Err(parse_err(l.number, col, "expected 'coeff ; monomial'"));
            };
            let coeff_txt = &l.text[..semi];
            let lead = coeff_txt.len() - coeff_txt.trim_start().len();
            let coeff = scalar_at(l.number, lead + 1, coeff_txt.trim())?;
            let mut exps = vec![0u32; table.len()];
            for (col, tok) in tokens(&l.text[semi + 1..]) {
                let col = col + semi + 1;
                let (var, e) = match tok.split_once('^') {
                    Some((v, e)) => (v, uint_at(l.number, col + v.len() + 1, e)?),
                    None => (tok, 1),
                };
                let idx = table
                    .index_of(var)
                    .ok_or_else(|| parse_err(l.number, col, format!("undeclared variable '{var}'")))?;
                exps[idx] += e;
            }
            let m = Monomial::from_exponents(&exps)
                .map_err(|_| parse_err(l.number, semi + 2, "exponent too large"))?;
            if m.degree(&table) > order {
                return Err(parse_err(
                    l.number,
                    semi + 2,
                    format!("term has weighted degree {} above the model order {}", m.degree(&table), order),
                ));
            }
            terms.push((m, coeff));
        }
        Ok(Some(Series::from_terms(&table, order, terms)))
    };
    let f0 = potential("f0")?.ok_or_else(|| missing("f0"))?;
    let f1 = potential("f1")?;

    ModelSpec::new(ModelParts {
        name,
        dim,
        basis,
        eta,
        chern,
        euler_char,
        c1_cd1,
        novikov,
        base_point,
        order,
        f0,
        f1,
    })
}

/// Reads and validates a model file.
pub fn load_model(path: &Path) -> Result<ModelSpec, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}

fn write_terms(out: &mut String, s: &Series) {
    let table = s.table();
    for (m, c) in s.sorted_terms() {
        let mut factors = Vec::new();
        for (i, e) in m.exponents().enumerate() {
            match e {
                0 => {}
                1 => factors.push(table.name(i).to_string()),
                _ => factors.push(format!("{}^{}", table.name(i), e)),
            }
        }
        out.push_str(&format!("{} ; {}\n", c, factors.join(" ")).replace(" \n", "\n"));
    }
}

/// Writes a model in the file format, potentials in original coordinates.
pub fn serialize_model(spec: &ModelSpec) -> String {
    let mut out = String::new();
    out.push_str("[model]\n");
    out.push_str(&format!("name = {}\n", spec.name));
    out.push_str(&format!("dim = {}\n", spec.dim));
    out.push_str(&format!("euler_char = {}\n", spec.euler_char));
    out.push_str(&format!("c1_cd1 = {}\n", spec.c1_cd1));
    out.push_str(&format!("order = {}\n", spec.order));
    let bp: Vec<String> = spec.base_point.iter().map(|x| x.to_string()).collect();
    out.push_str(&format!("base_point = {}\n", bp.join(", ")));
    if !spec.novikov.is_empty() {
        out.push_str("\n[novikov]\n");
        for (v, w) in &spec.novikov {
            out.push_str(&format!("{v} {w}\n"));
        }
    }
    out.push_str("\n[basis]\n");
    for b in &spec.basis {
        out.push_str(&format!("{} {} {}\n", b.label, b.p, b.q));
    }
    for (title, m) in [("eta", &spec.eta), ("chern", &spec.chern)] {
        out.push_str(&format!("\n[{title}]\n"));
        for row in m {
            let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&r.join(" "));
            out.push('\n');
        }
    }
    out.push_str("\n[f0]\n");
    write_terms(&mut out, &spec.f0);
    if let Some(f1) = &spec.f1 {
        out.push_str("\n[f1]\n");
        write_terms(&mut out, f1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CP1: &str = "\
# projective line
[model]
name = cp1
dim = 1
euler_char = 2
c1_cd1 = 2
order = 4
[novikov]
q 2
[basis]
t 0 0
s 1 1
[eta]
0 1
1 0
[chern]
0 2
0 0
[f0]
1/2 ; t^2 s
1 ; q
1 ; q s
1/2 ; q s^2
[f1]
-1/24 ; s
";

    #[test]
    fn parses_and_round_trips() {
        let m = parse_model(CP1).unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(m.f0.len(), 4);
        let again = parse_model(&serialize_model(&m)).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn reports_line_and_column() {
        let bad = CP1.replace("1/2 ; t^2 s", "1/2 ; t^2 x");
        match parse_model(&bad) {
            Err(ModelError::Parse { line, column, .. }) => {
                assert_eq!(line, 20);
                assert_eq!(column, 11);
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = CP1.replace("euler_char = 2", "euler_char = 2.5");
        assert!(matches!(parse_model(&bad), Err(ModelError::Parse { line: 5, .. })));
    }

    #[test]
    fn rejects_asymmetric_eta() {
        let bad = CP1.replace("[eta]\n0 1\n1 0", "[eta]\n0 1\n2 0");
        let err = parse_model(&bad).unwrap_err();
        assert!(err.to_string().contains("eta not symmetric at (1,2)"), "{err}");
    }

    #[test]
    fn rejects_chern_weight_violation() {
        let bad = CP1.replace("[chern]\n0 2\n0 0", "[chern]\n0 0\n2 0");
        let err = parse_model(&bad).unwrap_err();
        assert!(err.to_string().contains("b_1 != 1 + b_2"), "{err}");
    }
}
