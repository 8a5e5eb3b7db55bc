//! Line-oriented model-file grammar.
//!
//! Sections `[system]`, `[liouvillian]`, `[initial]`, `[solve]`, `[output]`;
//! `key = value` pairs, `dim`/`mode` declaration lines, one Liouvillian term
//! per line, `#` comments. Complex literals are written `(re, im)`. Rates are
//! passed through verbatim: Lindblad terms take the half-rate (`gamma/2`
//! convention), nothing is doubled or halved by the parser.
//!
//! Parsing is total: a document either parses and validates completely or an
//! error with line and column is returned; no side effects happen either way.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use thiserror::Error;

use super::{
    DimDecl, DistFileDecl, DistKindDecl, Factor, InitialDecl, ModeAtom, ModeDecl, ModelDocument,
    ObsKindDecl, ObservableDecl, OutputDecl, PropFileDecl, SolveDecl, SolveMode, SystemDecl, Term,
};
use crate::basis::MlsDim;
use crate::dynamics::{Temperature, DEFAULT_MONITOR_EVERY};
use crate::liouville::{ModeOp, Side};

#[derive(Error, Debug, Clone, PartialEq)]
#[error("line {line}, col {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Self { line, col, message: message.into() }
    }
}

#[derive(Clone, Debug)]
struct Tok {
    col: usize,
    text: String,
}

/// Split a comment-stripped line into tokens; a token starting with `(` runs
/// to the matching `)` so complex literals may contain spaces.
fn tokenize(line_no: usize, s: &str) -> Result<Vec<Tok>, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if chars[i] == '(' {
            while i < chars.len() && chars[i] != ')' {
                i += 1;
            }
            if i == chars.len() {
                return Err(ParseError::new(line_no, start + 1, "unterminated '(' in complex literal"));
            }
            i += 1;
        } else {
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
        }
        toks.push(Tok { col: start + 1, text: chars[start..i].iter().collect() });
    }
    Ok(toks)
}

fn parse_f64(tok: &Tok, line: usize) -> Result<f64, ParseError> {
    let v: f64 = tok
        .text
        .parse()
        .map_err(|_| ParseError::new(line, tok.col, format!("expected a number, got '{}'", tok.text)))?;
    if !v.is_finite() {
        return Err(ParseError::new(line, tok.col, "number must be finite"));
    }
    Ok(v)
}

fn parse_u32(tok: &Tok, line: usize) -> Result<u32, ParseError> {
    tok.text
        .parse()
        .map_err(|_| ParseError::new(line, tok.col, format!("expected an integer, got '{}'", tok.text)))
}

fn parse_complex(tok: &Tok, line: usize) -> Result<C64, ParseError> {
    let t = tok.text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| ParseError::new(line, tok.col, "complex literal must be written (re, im)"))?;
    let mut parts = inner.split(',');
    let (re, im) = match (parts.next(), parts.next(), parts.next()) {
        (Some(re), Some(im), None) => (re.trim(), im.trim()),
        _ => return Err(ParseError::new(line, tok.col, "complex literal must have two components")),
    };
    let re: f64 = re
        .parse()
        .map_err(|_| ParseError::new(line, tok.col, format!("malformed complex real part '{re}'")))?;
    let im: f64 = im
        .parse()
        .map_err(|_| ParseError::new(line, tok.col, format!("malformed complex imaginary part '{im}'")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(ParseError::new(line, tok.col, "complex literal must be finite"));
    }
    Ok(C64::new(re, im))
}

fn parse_dim_name(tok: &Tok, line: usize) -> Result<MlsDim, ParseError> {
    let t = &tok.text;
    let digits: Option<(u8, u8)> = t.strip_prefix('n').and_then(|rest| {
        let b: Vec<char> = rest.chars().collect();
        if b.len() == 2 && b[0].is_ascii_digit() && b[1].is_ascii_digit() {
            Some((b[0] as u8 - b'0', b[1] as u8 - b'0'))
        } else {
            None
        }
    });
    let (k, l) = digits.ok_or_else(|| {
        ParseError::new(line, tok.col, format!("expected a dimension name like n10, got '{t}'"))
    })?;
    Ok(MlsDim::new(k, l))
}

fn parse_level(tok: &Tok, line: usize, levels: u8) -> Result<u8, ParseError> {
    let v: u8 = tok
        .text
        .parse()
        .map_err(|_| ParseError::new(line, tok.col, format!("expected a level index, got '{}'", tok.text)))?;
    if v >= levels {
        return Err(ParseError::new(
            line,
            tok.col,
            format!("level {v} out of range for a {levels}-level system"),
        ));
    }
    Ok(v)
}

struct SectionLines {
    lines: Vec<(usize, Vec<Tok>)>,
    header_line: usize,
}

/// Parse a model document; errors carry line and column.
pub fn parse_model(text: &str) -> Result<ModelDocument, ParseError> {
    let mut sections: HashMap<String, SectionLines> = HashMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') {
                return Err(ParseError::new(line_no, 1, "unterminated section header"));
            }
            let name = trimmed[1..trimmed.len() - 1].to_string();
            if !matches!(name.as_str(), "system" | "liouvillian" | "initial" | "solve" | "output") {
                return Err(ParseError::new(line_no, 1, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(ParseError::new(line_no, 1, format!("duplicate section [{name}]")));
            }
            sections.insert(name.clone(), SectionLines { lines: Vec::new(), header_line: line_no });
            current = Some(name);
            continue;
        }
        let toks = tokenize(line_no, stripped)?;
        match &current {
            Some(name) => sections.get_mut(name).unwrap().lines.push((line_no, toks)),
            None => return Err(ParseError::new(line_no, 1, "content before any section header")),
        }
    }

    let system_lines = sections
        .remove("system")
        .ok_or_else(|| ParseError::new(1, 1, "missing [system] section"))?;
    let system = parse_system(&system_lines)?;

    let liou = sections
        .remove("liouvillian")
        .ok_or_else(|| ParseError::new(1, 1, "missing [liouvillian] section"))?;
    let terms = parse_liouvillian(&liou, &system)?;

    let initial_lines = sections
        .remove("initial")
        .ok_or_else(|| ParseError::new(1, 1, "missing [initial] section"))?;
    let initial = parse_initial(&initial_lines, &system)?;

    let solve_lines = sections
        .remove("solve")
        .ok_or_else(|| ParseError::new(1, 1, "missing [solve] section"))?;
    let solve = parse_solve(&solve_lines)?;

    let output = match sections.remove("output") {
        Some(lines) => parse_output(&lines, &system)?,
        None => OutputDecl::default(),
    };

    Ok(ModelDocument { system, terms, initial, solve, output })
}

fn expect_eq(toks: &[Tok], line: usize) -> Result<(), ParseError> {
    if toks.len() < 2 || toks[1].text != "=" {
        let col = toks.get(1).map(|t| t.col).unwrap_or(1);
        return Err(ParseError::new(line, col, format!("expected '=' after '{}'", toks[0].text)));
    }
    Ok(())
}

fn kv_attr(tok: &Tok, key: &str, line: usize) -> Result<String, ParseError> {
    tok.text
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .map(str::to_string)
        .ok_or_else(|| ParseError::new(line, tok.col, format!("expected {key}=<value>, got '{}'", tok.text)))
}

fn parse_system(section: &SectionLines) -> Result<SystemDecl, ParseError> {
    let mut systems: Option<u32> = None;
    let mut levels: Option<u8> = None;
    let mut energies: Option<Vec<f64>> = None;
    let mut dims: Vec<DimDecl> = Vec::new();
    let mut modes: Vec<ModeDecl> = Vec::new();
    let mut seen_mode = false;
    for (line, toks) in &section.lines {
        let line = *line;
        match toks[0].text.as_str() {
            "systems" => {
                expect_eq(toks, line)?;
                systems = Some(parse_u32(&toks[2], line)?);
            }
            "levels" => {
                expect_eq(toks, line)?;
                levels = Some(parse_u32(&toks[2], line)? as u8);
            }
            "energies" => {
                expect_eq(toks, line)?;
                let vals = toks[2..]
                    .iter()
                    .map(|t| parse_f64(t, line))
                    .collect::<Result<Vec<f64>, _>>()?;
                energies = Some(vals);
            }
            "dim" => {
                if seen_mode {
                    return Err(ParseError::new(line, toks[0].col, "dimensions must be declared before modes"));
                }
                if toks.len() < 2 {
                    return Err(ParseError::new(line, toks[0].col, "dim needs a name like n11"));
                }
                let dim = parse_dim_name(&toks[1], line)?;
                if dim == MlsDim::new(0, 0) {
                    return Err(ParseError::new(line, toks[1].col, "n00 is the implicit ground density and cannot be declared"));
                }
                if let Some(l) = levels {
                    if dim.left >= l || dim.right >= l {
                        return Err(ParseError::new(line, toks[1].col, format!("dimension {dim} exceeds the level count")));
                    }
                }
                if dims.iter().any(|d: &DimDecl| d.dim == dim) {
                    return Err(ParseError::new(line, toks[1].col, format!("duplicate dim {dim}")));
                }
                let cutoff = match toks.get(2) {
                    None => None,
                    Some(t) => {
                        let v = kv_attr(t, "cutoff", line)?;
                        Some(v.parse().map_err(|_| {
                            ParseError::new(line, t.col, format!("malformed cutoff '{v}'"))
                        })?)
                    }
                };
                dims.push(DimDecl { dim, cutoff });
            }
            "mode" => {
                seen_mode = true;
                if toks.len() != 4 {
                    return Err(ParseError::new(
                        line,
                        toks[0].col,
                        "mode declaration is: mode <name> fock=<int> energy=<float>",
                    ));
                }
                let name = toks[1].text.clone();
                if modes.iter().any(|m| m.name == name) {
                    return Err(ParseError::new(line, toks[1].col, format!("duplicate mode '{name}'")));
                }
                let fock_txt = kv_attr(&toks[2], "fock", line)?;
                let fock = fock_txt
                    .parse()
                    .map_err(|_| ParseError::new(line, toks[2].col, format!("malformed fock '{fock_txt}'")))?;
                let energy_txt = kv_attr(&toks[3], "energy", line)?;
                let energy = energy_txt
                    .parse()
                    .map_err(|_| ParseError::new(line, toks[3].col, format!("malformed energy '{energy_txt}'")))?;
                modes.push(ModeDecl { name, fock, energy });
            }
            other => {
                return Err(ParseError::new(line, toks[0].col, format!("unknown [system] keyword '{other}'")));
            }
        }
    }
    let h = section.header_line;
    let systems = systems.ok_or_else(|| ParseError::new(h, 1, "missing 'systems = <N>'"))?;
    let levels = levels.ok_or_else(|| ParseError::new(h, 1, "missing 'levels = <d+1>'"))?;
    let energies = energies.ok_or_else(|| ParseError::new(h, 1, "missing 'energies = <one per level>'"))?;
    if dims.is_empty() {
        return Err(ParseError::new(h, 1, "at least one dim declaration is required"));
    }
    if energies.len() != levels as usize {
        return Err(ParseError::new(h, 1, format!("need {levels} energies, got {}", energies.len())));
    }
    // dims are validated line by line above; a late levels declaration is
    // re-checked here
    for d in &dims {
        if d.dim.left >= levels || d.dim.right >= levels {
            return Err(ParseError::new(h, 1, format!("dimension {} exceeds the level count", d.dim)));
        }
    }
    Ok(SystemDecl { systems, levels, dims, energies, modes })
}

fn check_dim_declared(decl: &SystemDecl, dim: MlsDim, tok: &Tok, line: usize) -> Result<(), ParseError> {
    if dim == MlsDim::new(0, 0) || decl.dims.iter().any(|d| d.dim == dim) {
        Ok(())
    } else {
        Err(ParseError::new(line, tok.col, format!("dimension {dim} is not declared in [system]")))
    }
}

fn check_mode_declared(decl: &SystemDecl, name: &str, tok: &Tok, line: usize) -> Result<(), ParseError> {
    if decl.modes.iter().any(|m| m.name == name) {
        Ok(())
    } else {
        Err(ParseError::new(line, tok.col, format!("mode '{name}' is not declared in [system]")))
    }
}

fn need(toks: &[Tok], n: usize, line: usize, usage: &str) -> Result<(), ParseError> {
    if toks.len() != n {
        Err(ParseError::new(line, toks[0].col, format!("usage: {usage}")))
    } else {
        Ok(())
    }
}

fn parse_factor(decl: &SystemDecl, tok: &Tok, line: usize) -> Result<Factor, ParseError> {
    let t = &tok.text;
    if let Some(rest) = t.strip_prefix('J') {
        let chars: Vec<char> = rest.chars().collect();
        if chars.len() == 3 && chars[0].is_ascii_digit() && chars[1].is_ascii_digit() {
            let x = chars[0] as u8 - b'0';
            let y = chars[1] as u8 - b'0';
            let side = match chars[2] {
                'L' => Side::Left,
                'R' => Side::Right,
                _ => return Err(ParseError::new(line, tok.col, format!("factor '{t}' must end in L or R"))),
            };
            if x >= decl.levels || y >= decl.levels {
                return Err(ParseError::new(line, tok.col, format!("factor '{t}' exceeds the level count")));
            }
            return Ok(Factor::Collective { x, y, side });
        }
        return Err(ParseError::new(line, tok.col, format!("malformed collective factor '{t}'")));
    }
    let (head, mode) = t
        .split_once('@')
        .ok_or_else(|| ParseError::new(line, tok.col, format!("mode factor '{t}' needs @<mode>")))?;
    let (atom, side) = match head {
        "bL" => (ModeAtom::B, Side::Left),
        "bR" => (ModeAtom::B, Side::Right),
        "bdL" => (ModeAtom::Bd, Side::Left),
        "bdR" => (ModeAtom::Bd, Side::Right),
        "bdbL" => (ModeAtom::BdB, Side::Left),
        "bdbR" => (ModeAtom::BdB, Side::Right),
        "bbdL" => (ModeAtom::BBd, Side::Left),
        "bbdR" => (ModeAtom::BBd, Side::Right),
        _ => return Err(ParseError::new(line, tok.col, format!("unknown mode factor '{head}'"))),
    };
    check_mode_declared(decl, mode, tok, line)?;
    Ok(Factor::Mode { atom, side, mode: mode.to_string() })
}

fn parse_liouvillian(section: &SectionLines, decl: &SystemDecl) -> Result<Vec<Term>, ParseError> {
    let mut terms = Vec::new();
    for (line, toks) in &section.lines {
        let line = *line;
        let term = match toks[0].text.as_str() {
            "mls_h0" => {
                need(toks, 3, line, "mls_h0 <level> <freq>")?;
                Term::MlsH0 { level: parse_level(&toks[1], line, decl.levels)?, freq: parse_f64(&toks[2], line)? }
            }
            "mode_h0" => {
                need(toks, 3, line, "mode_h0 <mode> <freq>")?;
                check_mode_declared(decl, &toks[1].text, &toks[1], line)?;
                Term::ModeH0 { mode: toks[1].text.clone(), freq: parse_f64(&toks[2], line)? }
            }
            "mls_mode_rwa" | "mls_mode_nonrwa" => {
                need(toks, 5, line, "mls_mode_rwa <x> <y> <mode> <g>")?;
                let x = parse_level(&toks[1], line, decl.levels)?;
                let y = parse_level(&toks[2], line, decl.levels)?;
                check_mode_declared(decl, &toks[3].text, &toks[3], line)?;
                let g = parse_f64(&toks[4], line)?;
                if toks[0].text == "mls_mode_rwa" {
                    Term::MlsModeRwa { x, y, mode: toks[3].text.clone(), g }
                } else {
                    Term::MlsModeNonRwa { x, y, mode: toks[3].text.clone(), g }
                }
            }
            "mls_coh_drive" => {
                need(toks, 4, line, "mls_coh_drive <x> <y> <amp>")?;
                Term::MlsCohDrive {
                    x: parse_level(&toks[1], line, decl.levels)?,
                    y: parse_level(&toks[2], line, decl.levels)?,
                    amp: parse_f64(&toks[3], line)?,
                }
            }
            "mode_coh_drive" => {
                need(toks, 3, line, "mode_coh_drive <mode> <amp>")?;
                check_mode_declared(decl, &toks[1].text, &toks[1], line)?;
                Term::ModeCohDrive { mode: toks[1].text.clone(), amp: parse_f64(&toks[2], line)? }
            }
            "lindblad_relax_mls" => {
                need(toks, 4, line, "lindblad_relax_mls <from-dim> <to-dim> <half-rate>")?;
                let from = parse_dim_name(&toks[1], line)?;
                let to = parse_dim_name(&toks[2], line)?;
                check_dim_declared(decl, from, &toks[1], line)?;
                check_dim_declared(decl, to, &toks[2], line)?;
                Term::LindbladRelaxMls { from, to, rate: parse_f64(&toks[3], line)? }
            }
            "lindblad_deph_mls" => {
                need(toks, 3, line, "lindblad_deph_mls <dim> <half-rate>")?;
                let dim = parse_dim_name(&toks[1], line)?;
                check_dim_declared(decl, dim, &toks[1], line)?;
                Term::LindbladDephMls { dim, rate: parse_f64(&toks[2], line)? }
            }
            "lindblad_mode" => {
                need(toks, 3, line, "lindblad_mode <mode> <half-rate>")?;
                check_mode_declared(decl, &toks[1].text, &toks[1], line)?;
                Term::LindbladMode { mode: toks[1].text.clone(), rate: parse_f64(&toks[2], line)? }
            }
            "lindblad_mode_thermal" => {
                need(toks, 4, line, "lindblad_mode_thermal <mode> <half-rate> <mean-occ>")?;
                check_mode_declared(decl, &toks[1].text, &toks[1], line)?;
                Term::LindbladModeThermal {
                    mode: toks[1].text.clone(),
                    rate: parse_f64(&toks[2], line)?,
                    mean_occ: parse_f64(&toks[3], line)?,
                }
            }
            "nonconnecting" => {
                need(toks, 3, line, "nonconnecting <dim> <(re, im)>")?;
                let dim = parse_dim_name(&toks[1], line)?;
                check_dim_declared(decl, dim, &toks[1], line)?;
                Term::Nonconnecting { dim, coeff: parse_complex(&toks[2], line)? }
            }
            "connecting" => {
                need(toks, 4, line, "connecting <inc-dim> <dec-dim> <(re, im)>")?;
                let inc = parse_dim_name(&toks[1], line)?;
                let dec = parse_dim_name(&toks[2], line)?;
                check_dim_declared(decl, inc, &toks[1], line)?;
                check_dim_declared(decl, dec, &toks[2], line)?;
                Term::Connecting { inc, dec, coeff: parse_complex(&toks[3], line)? }
            }
            "mode_elementary" => {
                need(toks, 4, line, "mode_elementary <kind> <mode> <(re, im)>")?;
                let kind = match toks[1].text.as_str() {
                    "bL" => ModeOp::BL,
                    "bR" => ModeOp::BR,
                    "bdL" => ModeOp::BdL,
                    "bdR" => ModeOp::BdR,
                    "bdbL" => ModeOp::BdBL,
                    "bdbR" => ModeOp::BdBR,
                    "bbdL" => ModeOp::BBdL,
                    "bbdR" => ModeOp::BBdR,
                    "bL_bdR" => ModeOp::BLBdR,
                    "bdL_bR" => ModeOp::BdLBR,
                    other => {
                        return Err(ParseError::new(line, toks[1].col, format!("unknown mode operator '{other}'")))
                    }
                };
                check_mode_declared(decl, &toks[2].text, &toks[2], line)?;
                Term::ModeElementary { kind, mode: toks[2].text.clone(), coeff: parse_complex(&toks[3], line)? }
            }
            "product" => {
                if toks.len() < 3 {
                    return Err(ParseError::new(line, toks[0].col, "usage: product <(re, im)> <factor> [factor ...]"));
                }
                let coeff = parse_complex(&toks[1], line)?;
                let factors = toks[2..]
                    .iter()
                    .map(|t| parse_factor(decl, t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                Term::Product { coeff, factors }
            }
            other => {
                return Err(ParseError::new(line, toks[0].col, format!("unknown Liouvillian term '{other}'")));
            }
        };
        terms.push(term);
    }
    Ok(terms)
}

fn parse_initial(section: &SectionLines, decl: &SystemDecl) -> Result<InitialDecl, ParseError> {
    let mut kind: Option<(String, usize)> = None;
    let mut qnumbers: Option<Vec<u32>> = None;
    let mut temperature: Option<Temperature> = None;
    for (line, toks) in &section.lines {
        let line = *line;
        match toks[0].text.as_str() {
            "kind" => {
                expect_eq(toks, line)?;
                kind = Some((toks[2].text.clone(), line));
            }
            "qnumbers" => {
                expect_eq(toks, line)?;
                let q = toks[2..]
                    .iter()
                    .map(|t| parse_u32(t, line))
                    .collect::<Result<Vec<u32>, _>>()?;
                let expected = decl.dims.len() + 2 * decl.modes.len();
                if q.len() != expected {
                    return Err(ParseError::new(
                        line,
                        toks[0].col,
                        format!(
                            "qnumbers needs {expected} entries (one per dim, then ket/bra per mode), got {}",
                            q.len()
                        ),
                    ));
                }
                qnumbers = Some(q);
            }
            "temperature" => {
                expect_eq(toks, line)?;
                temperature = Some(if toks[2].text == "zero" {
                    Temperature::Zero
                } else {
                    let t = parse_f64(&toks[2], line)?;
                    if t <= 0.0 {
                        return Err(ParseError::new(
                            line,
                            toks[2].col,
                            "temperature must be positive; write 'temperature = zero' for the beta -> infinity limit",
                        ));
                    }
                    Temperature::Finite(t)
                });
            }
            other => return Err(ParseError::new(line, toks[0].col, format!("unknown [initial] keyword '{other}'"))),
        }
    }
    let h = section.header_line;
    match kind {
        Some((k, line)) if k == "pure" => {
            let q = qnumbers.ok_or_else(|| ParseError::new(line, 1, "pure initial state needs 'qnumbers = ...'"))?;
            Ok(InitialDecl::Pure(q))
        }
        Some((k, line)) if k == "thermal" => {
            let t = temperature
                .ok_or_else(|| ParseError::new(line, 1, "thermal initial state needs 'temperature = ...'"))?;
            Ok(InitialDecl::Thermal(t))
        }
        Some((k, line)) => Err(ParseError::new(line, 1, format!("unknown initial kind '{k}' (pure|thermal)"))),
        None => Err(ParseError::new(h, 1, "missing 'kind = pure|thermal'")),
    }
}

fn parse_solve(section: &SectionLines) -> Result<SolveDecl, ParseError> {
    let mut keys: HashMap<String, (Tok, usize)> = HashMap::new();
    for (line, toks) in &section.lines {
        let line = *line;
        expect_eq(toks, line)?;
        if toks.len() != 3 {
            return Err(ParseError::new(line, toks[0].col, "expected 'key = value'"));
        }
        if keys.insert(toks[0].text.clone(), (toks[2].clone(), line)).is_some() {
            return Err(ParseError::new(line, toks[0].col, format!("duplicate key '{}'", toks[0].text)));
        }
    }
    let h = section.header_line;
    let prune = match keys.remove("prune") {
        None => false,
        Some((tok, line)) => match tok.text.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(ParseError::new(line, tok.col, format!("prune must be true or false, got '{other}'"))),
        },
    };
    let method = keys
        .remove("method")
        .ok_or_else(|| ParseError::new(h, 1, "missing 'method = rk4|adaptive|steady'"))?;
    let mut num = |key: &str| -> Result<Option<f64>, ParseError> {
        match keys.remove(key) {
            None => Ok(None),
            Some((tok, line)) => Ok(Some(parse_f64(&tok, line)?)),
        }
    };
    let mode = match method.0.text.as_str() {
        "rk4" => {
            let dt = num("dt")?.ok_or_else(|| ParseError::new(method.1, 1, "rk4 needs 'dt'"))?;
            let t_end = num("t_end")?.ok_or_else(|| ParseError::new(method.1, 1, "rk4 needs 't_end'"))?;
            SolveMode::Rk4 { dt, t_end }
        }
        "adaptive" => {
            let rtol = num("rtol")?.ok_or_else(|| ParseError::new(method.1, 1, "adaptive needs 'rtol'"))?;
            let atol = num("atol")?.ok_or_else(|| ParseError::new(method.1, 1, "adaptive needs 'atol'"))?;
            let t_end = num("t_end")?.ok_or_else(|| ParseError::new(method.1, 1, "adaptive needs 't_end'"))?;
            let dt_initial = num("dt_initial")?.unwrap_or(1e-3);
            let dt_min = num("dt_min")?.unwrap_or(1e-12);
            let dt_max = num("dt_max")?.unwrap_or(t_end);
            SolveMode::Adaptive { rtol, atol, dt_initial, dt_min, dt_max, t_end }
        }
        "steady" => {
            for stepping in ["dt", "t_end", "rtol", "atol", "dt_initial", "dt_min", "dt_max"] {
                if keys.contains_key(stepping) {
                    return Err(ParseError::new(
                        method.1,
                        method.0.col,
                        format!("choose one solve mode: steady-state request conflicts with '{stepping}'"),
                    ));
                }
            }
            SolveMode::Steady
        }
        other => return Err(ParseError::new(method.1, method.0.col, format!("unknown method '{other}'"))),
    };
    if let Some((tok, line)) = keys.into_iter().next().map(|(_, v)| v) {
        return Err(ParseError::new(line, tok.col, format!("unused [solve] value '{}'", tok.text)));
    }
    Ok(SolveDecl { mode, prune })
}

fn parse_output(section: &SectionLines, decl: &SystemDecl) -> Result<OutputDecl, ParseError> {
    let mut cadence = DEFAULT_MONITOR_EVERY;
    let mut files: Vec<PropFileDecl> = Vec::new();
    let mut distributions: Vec<DistFileDecl> = Vec::new();
    for (line, toks) in &section.lines {
        let line = *line;
        match toks[0].text.as_str() {
            "cadence" => {
                expect_eq(toks, line)?;
                cadence = parse_u32(&toks[2], line)?;
                if cadence == 0 {
                    return Err(ParseError::new(line, toks[2].col, "cadence must be at least 1"));
                }
            }
            "file" => {
                need(toks, 2, line, "file <name>")?;
                files.push(PropFileDecl { name: toks[1].text.clone(), columns: Vec::new() });
            }
            "observable" => {
                need(toks, 4, line, "observable <label> <kind> <arg>")?;
                let Some(file) = files.last_mut() else {
                    return Err(ParseError::new(line, toks[0].col, "observable requires a preceding 'file' line"));
                };
                let label = toks[1].text.clone();
                let kind = match toks[2].text.as_str() {
                    "mls_occupation" => {
                        let dim = parse_dim_name(&toks[3], line)?;
                        check_dim_declared(decl, dim, &toks[3], line)?;
                        ObsKindDecl::MlsOccupation(dim)
                    }
                    "mode_occupation" => {
                        check_mode_declared(decl, &toks[3].text, &toks[3], line)?;
                        ObsKindDecl::ModeOccupation(toks[3].text.clone())
                    }
                    "g2_zero" => {
                        check_mode_declared(decl, &toks[3].text, &toks[3], line)?;
                        ObsKindDecl::G2Zero(toks[3].text.clone())
                    }
                    other => {
                        return Err(ParseError::new(line, toks[2].col, format!("unknown observable kind '{other}'")))
                    }
                };
                file.columns.push(ObservableDecl { label, kind });
            }
            "distribution" => {
                need(toks, 4, line, "distribution <name> <kind> <arg>")?;
                let kind = match toks[2].text.as_str() {
                    "mode_number" => {
                        check_mode_declared(decl, &toks[3].text, &toks[3], line)?;
                        DistKindDecl::ModeNumber(toks[3].text.clone())
                    }
                    "mls_excitation" => {
                        let dim = parse_dim_name(&toks[3], line)?;
                        check_dim_declared(decl, dim, &toks[3], line)?;
                        DistKindDecl::MlsExcitation(dim)
                    }
                    other => {
                        return Err(ParseError::new(line, toks[2].col, format!("unknown distribution kind '{other}'")))
                    }
                };
                distributions.push(DistFileDecl { name: toks[1].text.clone(), kind });
            }
            other => return Err(ParseError::new(line, toks[0].col, format!("unknown [output] keyword '{other}'"))),
        }
    }
    for f in &files {
        if f.columns.is_empty() {
            return Err(ParseError::new(section.header_line, 1, format!("file '{}' has no observables", f.name)));
        }
    }
    Ok(OutputDecl { cadence, files, distributions })
}

fn fmt_c(c: C64) -> String {
    format!("({:?}, {:?})", c.re, c.im)
}

fn fmt_factor(f: &Factor) -> String {
    match f {
        Factor::Collective { x, y, side } => {
            format!("J{x}{y}{}", if *side == Side::Left { "L" } else { "R" })
        }
        Factor::Mode { atom, side, mode } => {
            let head = match (atom, side) {
                (ModeAtom::B, Side::Left) => "bL",
                (ModeAtom::B, Side::Right) => "bR",
                (ModeAtom::Bd, Side::Left) => "bdL",
                (ModeAtom::Bd, Side::Right) => "bdR",
                (ModeAtom::BdB, Side::Left) => "bdbL",
                (ModeAtom::BdB, Side::Right) => "bdbR",
                (ModeAtom::BBd, Side::Left) => "bbdL",
                (ModeAtom::BBd, Side::Right) => "bbdR",
            };
            format!("{head}@{mode}")
        }
    }
}

fn fmt_mode_op(kind: ModeOp) -> &'static str {
    match kind {
        ModeOp::BL => "bL",
        ModeOp::BR => "bR",
        ModeOp::BdL => "bdL",
        ModeOp::BdR => "bdR",
        ModeOp::BdBL => "bdbL",
        ModeOp::BdBR => "bdbR",
        ModeOp::BBdL => "bbdL",
        ModeOp::BBdR => "bbdR",
        ModeOp::BLBdR => "bL_bdR",
        ModeOp::BdLBR => "bdL_bR",
    }
}

/// Render a document in canonical form; `parse_model(print_model(doc))`
/// returns an equal document.
pub fn print_model(doc: &ModelDocument) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "[system]").unwrap();
    writeln!(w, "systems = {}", doc.system.systems).unwrap();
    writeln!(w, "levels = {}", doc.system.levels).unwrap();
    for d in &doc.system.dims {
        match d.cutoff {
            Some(c) => writeln!(w, "dim {} cutoff={c}", d.dim).unwrap(),
            None => writeln!(w, "dim {}", d.dim).unwrap(),
        }
    }
    let energies: Vec<String> = doc.system.energies.iter().map(|e| format!("{e:?}")).collect();
    writeln!(w, "energies = {}", energies.join(" ")).unwrap();
    for m in &doc.system.modes {
        writeln!(w, "mode {} fock={} energy={:?}", m.name, m.fock, m.energy).unwrap();
    }
    writeln!(w).unwrap();
    writeln!(w, "[liouvillian]").unwrap();
    for t in &doc.terms {
        match t {
            Term::MlsH0 { level, freq } => writeln!(w, "mls_h0 {level} {freq:?}").unwrap(),
            Term::ModeH0 { mode, freq } => writeln!(w, "mode_h0 {mode} {freq:?}").unwrap(),
            Term::MlsModeRwa { x, y, mode, g } => writeln!(w, "mls_mode_rwa {x} {y} {mode} {g:?}").unwrap(),
            Term::MlsModeNonRwa { x, y, mode, g } => {
                writeln!(w, "mls_mode_nonrwa {x} {y} {mode} {g:?}").unwrap()
            }
            Term::MlsCohDrive { x, y, amp } => writeln!(w, "mls_coh_drive {x} {y} {amp:?}").unwrap(),
            Term::ModeCohDrive { mode, amp } => writeln!(w, "mode_coh_drive {mode} {amp:?}").unwrap(),
            Term::LindbladRelaxMls { from, to, rate } => {
                writeln!(w, "lindblad_relax_mls {from} {to} {rate:?}").unwrap()
            }
            Term::LindbladDephMls { dim, rate } => writeln!(w, "lindblad_deph_mls {dim} {rate:?}").unwrap(),
            Term::LindbladMode { mode, rate } => writeln!(w, "lindblad_mode {mode} {rate:?}").unwrap(),
            Term::LindbladModeThermal { mode, rate, mean_occ } => {
                writeln!(w, "lindblad_mode_thermal {mode} {rate:?} {mean_occ:?}").unwrap()
            }
            Term::Nonconnecting { dim, coeff } => writeln!(w, "nonconnecting {dim} {}", fmt_c(*coeff)).unwrap(),
            Term::Connecting { inc, dec, coeff } => {
                writeln!(w, "connecting {inc} {dec} {}", fmt_c(*coeff)).unwrap()
            }
            Term::ModeElementary { kind, mode, coeff } => {
                writeln!(w, "mode_elementary {} {mode} {}", fmt_mode_op(*kind), fmt_c(*coeff)).unwrap()
            }
            Term::Product { coeff, factors } => {
                let fs: Vec<String> = factors.iter().map(fmt_factor).collect();
                writeln!(w, "product {} {}", fmt_c(*coeff), fs.join(" ")).unwrap()
            }
        }
    }
    writeln!(w).unwrap();
    writeln!(w, "[initial]").unwrap();
    match &doc.initial {
        InitialDecl::Pure(q) => {
            writeln!(w, "kind = pure").unwrap();
            let qs: Vec<String> = q.iter().map(|v| v.to_string()).collect();
            writeln!(w, "qnumbers = {}", qs.join(" ")).unwrap();
        }
        InitialDecl::Thermal(t) => {
            writeln!(w, "kind = thermal").unwrap();
            match t {
                Temperature::Finite(v) => writeln!(w, "temperature = {v:?}").unwrap(),
                Temperature::Zero => writeln!(w, "temperature = zero").unwrap(),
            }
        }
    }
    writeln!(w).unwrap();
    writeln!(w, "[solve]").unwrap();
    match &doc.solve.mode {
        SolveMode::Rk4 { dt, t_end } => {
            writeln!(w, "method = rk4").unwrap();
            writeln!(w, "dt = {dt:?}").unwrap();
            writeln!(w, "t_end = {t_end:?}").unwrap();
        }
        SolveMode::Adaptive { rtol, atol, dt_initial, dt_min, dt_max, t_end } => {
            writeln!(w, "method = adaptive").unwrap();
            writeln!(w, "rtol = {rtol:?}").unwrap();
            writeln!(w, "atol = {atol:?}").unwrap();
            writeln!(w, "dt_initial = {dt_initial:?}").unwrap();
            writeln!(w, "dt_min = {dt_min:?}").unwrap();
            writeln!(w, "dt_max = {dt_max:?}").unwrap();
            writeln!(w, "t_end = {t_end:?}").unwrap();
        }
        SolveMode::Steady => writeln!(w, "method = steady").unwrap(),
    }
    if doc.solve.prune {
        writeln!(w, "prune = true").unwrap();
    }
    writeln!(w).unwrap();
    writeln!(w, "[output]").unwrap();
    writeln!(w, "cadence = {}", doc.output.cadence).unwrap();
    for f in &doc.output.files {
        writeln!(w, "file {}", f.name).unwrap();
        for col in &f.columns {
            match &col.kind {
                ObsKindDecl::MlsOccupation(dim) => {
                    writeln!(w, "observable {} mls_occupation {dim}", col.label).unwrap()
                }
                ObsKindDecl::ModeOccupation(m) => {
                    writeln!(w, "observable {} mode_occupation {m}", col.label).unwrap()
                }
                ObsKindDecl::G2Zero(m) => writeln!(w, "observable {} g2_zero {m}", col.label).unwrap(),
            }
        }
    }
    for d in &doc.output.distributions {
        match &d.kind {
            DistKindDecl::ModeNumber(m) => writeln!(w, "distribution {} mode_number {m}", d.name).unwrap(),
            DistKindDecl::MlsExcitation(dim) => {
                writeln!(w, "distribution {} mls_excitation {dim}", d.name).unwrap()
            }
        }
    }
    out
}
