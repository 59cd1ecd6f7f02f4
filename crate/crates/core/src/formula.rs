//! Formula AST, concrete syntax, parser and printer.
//!
//! Grammar summary (loosest binding first):
//!
//! ```text
//! f   ::= f <-> f | f -> f | f '|' f | f & f | unary
//! unary ::= ! unary | X unary | AX unary | EX unary | AF unary | <> unary
//!         | EF unary | AG unary | EG unary | A[f U f] | E[f U f]
//!         | C[h] unary | G[h] unary | H[h] unary | E[h] unary | JC[{a,..}] unary
//!         | IC[h] | I[r] unary | I[{r,..}] unary
//!         | member(a, O) | role(r, O) | play(a, r, O) | dep(O, rs, rs)
//!         | know(O, lits) | incharge(O, r, atoms) | desire(O, atoms)
//!         | true | false | fact | ( f )
//! h   ::= a | {a,..} | a:r | {a,..}:{r,..}
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Who an agency operator is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Holder {
    /// A single agent `a`.
    Agent(String),
    /// A group of agents `Z`.
    Agents(BTreeSet<String>),
    /// Agent `a` enacting role `r`.
    Rea(String, String),
    /// Agents `V` enacting roles `U`.
    ReaGroup(BTreeSet<String>, BTreeSet<String>),
}

/// The role argument of initiative and dependency predicates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleSel {
    One(String),
    Many(BTreeSet<String>),
}

impl RoleSel {
    pub fn names(&self) -> Vec<&str> {
        match self {
            RoleSel::One(r) => vec![r.as_str()],
            RoleSel::Many(rs) => rs.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    AX(Box<Formula>),
    EX(Box<Formula>),
    AF(Box<Formula>),
    EF(Box<Formula>),
    AG(Box<Formula>),
    EG(Box<Formula>),
    /// `A[φ U ψ]`
    AU(Box<Formula>, Box<Formula>),
    /// `E[φ U ψ]`
    EU(Box<Formula>, Box<Formula>),
    /// Capability `C[h] φ`.
    Cap(Holder, Box<Formula>),
    /// Joint capability of an agent group, `JC[{a,b}] φ`.
    JointCap(BTreeSet<String>, Box<Formula>),
    /// Ability `G[h] φ`.
    Ability(Holder, Box<Formula>),
    /// Attempt `H[h] φ`.
    Attempt(Holder, Box<Formula>),
    /// In control `IC[h]`.
    InControl(Holder),
    /// Sees to it that, `E[h] φ`.
    Stit(Holder, Box<Formula>),
    /// Initiative `I[r] φ` or group initiative `I[{r,q}] φ`.
    Initiative(RoleSel, Box<Formula>),
    Member {
        agent: String,
        org: String,
    },
    RoleOf {
        role: String,
        org: String,
    },
    Play {
        agent: String,
        role: String,
        org: String,
    },
    Dep {
        org: String,
        from: RoleSel,
        to: RoleSel,
    },
    /// Body is a conjunction of literals.
    Know {
        org: String,
        body: Box<Formula>,
    },
    /// Body is a conjunction of atoms.
    InCharge {
        org: String,
        role: String,
        body: Box<Formula>,
    },
    /// Body is a conjunction of atoms.
    Desire {
        org: String,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// Flattens nested conjunctions.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            f => vec![f],
        }
    }

    /// The atom names of a conjunction of atoms, or `None` if `self` has any
    /// other shape.
    pub fn positive_atoms(&self) -> Option<Vec<&str>> {
        self.conjuncts()
            .into_iter()
            .map(|c| match c {
                Formula::Atom(a) => Some(a.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Every fact name mentioned anywhere in the formula.
    pub fn facts(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Atom(a) = f {
                out.insert(a.as_str());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        match self {
            Formula::True
            | Formula::False
            | Formula::Atom(_)
            | Formula::InControl(_)
            | Formula::Member { .. }
            | Formula::RoleOf { .. }
            | Formula::Play { .. }
            | Formula::Dep { .. } => {}
            Formula::Not(a)
            | Formula::AX(a)
            | Formula::EX(a)
            | Formula::AF(a)
            | Formula::EF(a)
            | Formula::AG(a)
            | Formula::EG(a)
            | Formula::Cap(_, a)
            | Formula::JointCap(_, a)
            | Formula::Ability(_, a)
            | Formula::Attempt(_, a)
            | Formula::Stit(_, a)
            | Formula::Initiative(_, a)
            | Formula::Know { body: a, .. }
            | Formula::InCharge { body: a, .. }
            | Formula::Desire { body: a, .. } => a.walk(visit),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b)
            | Formula::AU(a, b)
            | Formula::EU(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Display for Holder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Holder::Agent(a) => f.write_str(a),
            Holder::Agents(z) => f.write_str(&group(z)),
            Holder::Rea(a, r) => write!(f, "{a}:{r}"),
            Holder::ReaGroup(v, u) => write!(f, "{}:{}", group(v), group(u)),
        }
    }
}

impl fmt::Display for RoleSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoleSel::One(r) => f.write_str(r),
            RoleSel::Many(rs) => f.write_str(&group(rs)),
        }
    }
}

fn group(names: &BTreeSet<String>) -> String {
    let items: Vec<&str> = names.iter().map(String::as_str).collect();
    format!("{{{}}}", items.join(","))
}

// ---------------------------------------------------------------------------
// Printer

const P_IFF: u8 = 1;
const P_IMP: u8 = 2;
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_UNARY: u8 = 5;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => P_IFF,
        Formula::Implies(..) => P_IMP,
        Formula::Or(..) => P_OR,
        Formula::And(..) => P_AND,
        _ => P_UNARY,
    }
}

/// Renders a formula in the concrete syntax accepted by [`parse`], with the
/// fewest parentheses that preserve structure.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, 0);
    out
}

fn write_formula(out: &mut String, f: &Formula, min: u8) {
    let p = prec(f);
    if p < min {
        out.push('(');
        write_formula(out, f, 0);
        out.push(')');
        return;
    }
    let bin = |out: &mut String, a: &Formula, op: &str, b: &Formula, lp: u8, rp: u8| {
        write_formula(out, a, lp);
        out.push_str(op);
        write_formula(out, b, rp);
    };
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(a) => out.push_str(a),
        Formula::Iff(a, b) => bin(out, a, " <-> ", b, P_IFF, P_IMP),
        Formula::Implies(a, b) => bin(out, a, " -> ", b, P_OR, P_IMP),
        Formula::Or(a, b) => bin(out, a, " | ", b, P_OR, P_AND),
        Formula::And(a, b) => bin(out, a, " & ", b, P_AND, P_UNARY),
        Formula::Not(a) => {
            out.push('!');
            write_formula(out, a, P_UNARY);
        }
        Formula::AX(a) => prefix(out, "AX", a),
        Formula::EX(a) => prefix(out, "EX", a),
        Formula::AF(a) => prefix(out, "<>", a),
        Formula::EF(a) => prefix(out, "EF", a),
        Formula::AG(a) => prefix(out, "AG", a),
        Formula::EG(a) => prefix(out, "EG", a),
        Formula::AU(a, b) => until(out, 'A', a, b),
        Formula::EU(a, b) => until(out, 'E', a, b),
        Formula::Cap(h, a) => prefix(out, &format!("C[{h}]"), a),
        Formula::JointCap(z, a) => prefix(out, &format!("JC[{}]", group(z)), a),
        Formula::Ability(h, a) => prefix(out, &format!("G[{h}]"), a),
        Formula::Attempt(h, a) => prefix(out, &format!("H[{h}]"), a),
        Formula::Stit(h, a) => prefix(out, &format!("E[{h}]"), a),
        Formula::InControl(h) => out.push_str(&format!("IC[{h}]")),
        Formula::Initiative(r, a) => prefix(out, &format!("I[{r}]"), a),
        Formula::Member { agent, org } => out.push_str(&format!("member({agent}, {org})")),
        Formula::RoleOf { role, org } => out.push_str(&format!("role({role}, {org})")),
        Formula::Play { agent, role, org } => {
            out.push_str(&format!("play({agent}, {role}, {org})"))
        }
        Formula::Dep { org, from, to } => out.push_str(&format!("dep({org}, {from}, {to})")),
        Formula::Know { org, body } => {
            out.push_str(&format!("know({org}, "));
            write_formula(out, body, 0);
            out.push(')');
        }
        Formula::InCharge { org, role, body } => {
            out.push_str(&format!("incharge({org}, {role}, "));
            write_formula(out, body, 0);
            out.push(')');
        }
        Formula::Desire { org, body } => {
            out.push_str(&format!("desire({org}, "));
            write_formula(out, body, 0);
            out.push(')');
        }
    }
}

fn prefix(out: &mut String, op: &str, body: &Formula) {
    out.push_str(op);
    out.push(' ');
    write_formula(out, body, P_UNARY);
}

fn until(out: &mut String, q: char, a: &Formula, b: &Formula) {
    out.push(q);
    out.push('[');
    write_formula(out, a, P_UNARY);
    out.push_str(" U ");
    write_formula(out, b, P_UNARY);
    out.push(']');
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    WellFormedness,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at line {line}, column {column}: {message}", match .kind {
    ParseErrorKind::Syntax => "syntax error",
    ParseErrorKind::WellFormedness => "ill-formed formula",
})]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    /// Byte offset into the input.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Diamond,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Bang => "`!`",
            Tok::Amp => "`&`",
            Tok::Bar => "`|`",
            Tok::Arrow => "`->`",
            Tok::DArrow => "`<->`",
            Tok::Diamond => "`<>`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

const KEYWORDS: &[&str] = &[
    "true", "false", "X", "AX", "EX", "AF", "EF", "AG", "EG", "A", "E", "F", "G", "U", "C", "H",
    "JC", "IC", "I",
];

const PREDICATES: &[&str] = &[
    "member", "role", "play", "dep", "know", "incharge", "desire",
];

/// Whether `s` can be used as a fact, agent, role or org name.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && !s.ends_with('-')
        && !s.contains("->")
}

/// Whether `s` can be a fact name inside formulas (identifiers minus
/// reserved operator words).
pub fn is_atom_name(s: &str) -> bool {
    is_identifier(s) && !KEYWORDS.contains(&s)
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let rest = &src[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::DArrow, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("<>") {
            (Tok::Diamond, 2)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let mut j = i + 1;
            while j < bytes.len() {
                let d = bytes[j];
                let ident_char = d.is_ascii_alphanumeric()
                    || d == b'_'
                    || (d == b'-' && bytes.get(j + 1) != Some(&b'>'));
                if !ident_char {
                    break;
                }
                j += 1;
            }
            (Tok::Ident(src[i..j].to_string()), j - i)
        } else {
            let t = match c {
                b'!' => Tok::Bang,
                b'&' => Tok::Amp,
                b'|' => Tok::Bar,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBrack,
                b']' => Tok::RBrack,
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b',' => Tok::Comma,
                b':' => Tok::Colon,
                _ => {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(error_at(
                        src,
                        start,
                        ParseErrorKind::Syntax,
                        format!("unexpected character `{ch}`"),
                    ));
                }
            };
            (t, 1)
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

fn error_at(src: &str, offset: usize, kind: ParseErrorKind, message: String) -> ParseError {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    ParseError {
        kind,
        message,
        offset,
        line,
        column,
    }
}

// ---------------------------------------------------------------------------
// Parser

/// Parses formula text, enforcing the well-formedness restrictions:
/// CTL-only temporal nesting, negation-free `incharge`/`desire` bodies,
/// literal `know` bodies and agent-group `JC` holders.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let f = p.formula()?;
    p.expect(Tok::Eof)?;
    Ok(f)
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

/// Which restricted body grammar an org predicate uses.
#[derive(Clone, Copy)]
enum Body {
    Literals,
    Atoms,
}

impl<'s> Parser<'s> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn syntax<T>(&self, message: String) -> PResult<T> {
        Err(error_at(self.src, self.offset(), ParseErrorKind::Syntax, message))
    }

    fn ill_formed<T>(&self, offset: usize, message: impl Into<String>) -> PResult<T> {
        Err(error_at(
            self.src,
            offset,
            ParseErrorKind::WellFormedness,
            message.into(),
        ))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.syntax(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.syntax(format!("expected identifier, found {t}")),
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.implication()?;
        while self.eat(&Tok::DArrow) {
            let rhs = self.implication()?;
            lhs = Formula::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        let start = self.offset();
        let b = |f: Formula| Box::new(f);
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::Not(b(self.unary()?)))
            }
            Tok::Diamond => {
                self.bump();
                Ok(Formula::AF(b(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                let next_is = |t: Tok| *self.peek_at(1) == t;
                if PREDICATES.contains(&name.as_str()) && next_is(Tok::LParen) {
                    self.bump();
                    return self.predicate(&name);
                }
                let bracket = next_is(Tok::LBrack);
                match name.as_str() {
                    "true" => {
                        self.bump();
                        Ok(Formula::True)
                    }
                    "false" => {
                        self.bump();
                        Ok(Formula::False)
                    }
                    "X" | "AX" => {
                        self.bump();
                        Ok(Formula::AX(b(self.unary()?)))
                    }
                    "EX" => {
                        self.bump();
                        Ok(Formula::EX(b(self.unary()?)))
                    }
                    "AF" => {
                        self.bump();
                        Ok(Formula::AF(b(self.unary()?)))
                    }
                    "EF" => {
                        self.bump();
                        Ok(Formula::EF(b(self.unary()?)))
                    }
                    "AG" => {
                        self.bump();
                        Ok(Formula::AG(b(self.unary()?)))
                    }
                    "EG" => {
                        self.bump();
                        Ok(Formula::EG(b(self.unary()?)))
                    }
                    "A" if bracket => {
                        self.bump();
                        self.bump();
                        let (l, r) = self.until_body(start)?;
                        Ok(Formula::AU(l, r))
                    }
                    "E" if bracket => {
                        self.bump();
                        self.bump();
                        let save = self.pos;
                        if let Ok(h) = self.holder() {
                            if self.eat(&Tok::RBrack) {
                                return Ok(Formula::Stit(h, b(self.unary()?)));
                            }
                        }
                        self.pos = save;
                        let (l, r) = self.until_body(start)?;
                        Ok(Formula::EU(l, r))
                    }
                    "C" | "G" | "H" if bracket => {
                        self.bump();
                        self.bump();
                        let h = self.holder()?;
                        self.expect(Tok::RBrack)?;
                        let body = b(self.unary()?);
                        Ok(match name.as_str() {
                            "C" => Formula::Cap(h, body),
                            "G" => Formula::Ability(h, body),
                            _ => Formula::Attempt(h, body),
                        })
                    }
                    "JC" if bracket => {
                        self.bump();
                        self.bump();
                        let hpos = self.offset();
                        let h = self.holder()?;
                        self.expect(Tok::RBrack)?;
                        let Holder::Agents(z) = h else {
                            return self.ill_formed(
                                hpos,
                                "joint capability JC requires an agent group holder {a,..}",
                            );
                        };
                        Ok(Formula::JointCap(z, b(self.unary()?)))
                    }
                    "IC" if bracket => {
                        self.bump();
                        self.bump();
                        let h = self.holder()?;
                        self.expect(Tok::RBrack)?;
                        Ok(Formula::InControl(h))
                    }
                    "I" if bracket => {
                        self.bump();
                        self.bump();
                        let r = self.role_sel()?;
                        self.expect(Tok::RBrack)?;
                        Ok(Formula::Initiative(r, b(self.unary()?)))
                    }
                    "F" | "G" | "U" | "A" | "E" => self.ill_formed(
                        start,
                        format!(
                            "non-CTL formula: `{name}` must be paired with a path quantifier \
                             (AX/EX/AF/EF/AG/EG/A[.U.]/E[.U.])"
                        ),
                    ),
                    "C" | "H" | "JC" | "IC" | "I" => {
                        self.bump();
                        self.syntax(format!("expected `[` after `{name}`"))
                    }
                    _ if is_atom_name(&name) => {
                        self.bump();
                        Ok(Formula::Atom(name))
                    }
                    _ => self.syntax(format!("invalid identifier `{name}`")),
                }
            }
            t => self.syntax(format!("expected formula, found {t}")),
        }
    }

    /// Parses `φ U ψ]` after `A[` or `E[`.
    fn until_body(&mut self, start: usize) -> PResult<(Box<Formula>, Box<Formula>)> {
        let lhs = self.formula()?;
        if !matches!(self.peek(), Tok::Ident(s) if s == "U") {
            return self.ill_formed(
                start,
                "non-CTL formula: a path quantifier with brackets must wrap exactly one until",
            );
        }
        self.bump();
        let rhs = self.formula()?;
        self.expect(Tok::RBrack)?;
        Ok((Box::new(lhs), Box::new(rhs)))
    }

    fn name_set(&mut self) -> PResult<BTreeSet<String>> {
        self.expect(Tok::LBrace)?;
        let mut set = BTreeSet::new();
        loop {
            set.insert(self.ident()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(set)
    }

    fn holder(&mut self) -> PResult<Holder> {
        if *self.peek() == Tok::LBrace {
            let v = self.name_set()?;
            if self.eat(&Tok::Colon) {
                let u = self.name_set()?;
                return Ok(Holder::ReaGroup(v, u));
            }
            return Ok(Holder::Agents(v));
        }
        let a = self.ident()?;
        if self.eat(&Tok::Colon) {
            let r = self.ident()?;
            return Ok(Holder::Rea(a, r));
        }
        Ok(Holder::Agent(a))
    }

    fn role_sel(&mut self) -> PResult<RoleSel> {
        if *self.peek() == Tok::LBrace {
            Ok(RoleSel::Many(self.name_set()?))
        } else {
            Ok(RoleSel::One(self.ident()?))
        }
    }

    fn predicate(&mut self, name: &str) -> PResult<Formula> {
        self.expect(Tok::LParen)?;
        let f = match name {
            "member" => {
                let agent = self.ident()?;
                self.expect(Tok::Comma)?;
                Formula::Member {
                    agent,
                    org: self.ident()?,
                }
            }
            "role" => {
                let role = self.ident()?;
                self.expect(Tok::Comma)?;
                Formula::RoleOf {
                    role,
                    org: self.ident()?,
                }
            }
            "play" => {
                let agent = self.ident()?;
                self.expect(Tok::Comma)?;
                let role = self.ident()?;
                self.expect(Tok::Comma)?;
                Formula::Play {
                    agent,
                    role,
                    org: self.ident()?,
                }
            }
            "dep" => {
                let org = self.ident()?;
                self.expect(Tok::Comma)?;
                let from = self.role_sel()?;
                self.expect(Tok::Comma)?;
                Formula::Dep {
                    org,
                    from,
                    to: self.role_sel()?,
                }
            }
            "know" => {
                let org = self.ident()?;
                self.expect(Tok::Comma)?;
                Formula::Know {
                    org,
                    body: Box::new(self.body(Body::Literals, "know")?),
                }
            }
            "incharge" => {
                let org = self.ident()?;
                self.expect(Tok::Comma)?;
                let role = self.ident()?;
                self.expect(Tok::Comma)?;
                Formula::InCharge {
                    org,
                    role,
                    body: Box::new(self.body(Body::Atoms, "incharge")?),
                }
            }
            _ => {
                let org = self.ident()?;
                self.expect(Tok::Comma)?;
                Formula::Desire {
                    org,
                    body: Box::new(self.body(Body::Atoms, "desire")?),
                }
            }
        };
        self.expect(Tok::RParen)?;
        Ok(f)
    }

    /// Restricted body grammar: conjunctions of (possibly negated) atoms.
    fn body(&mut self, kind: Body, pred: &str) -> PResult<Formula> {
        let mut lhs = self.body_literal(kind, pred)?;
        loop {
            match self.peek() {
                Tok::Amp => {
                    self.bump();
                    let rhs = self.body_literal(kind, pred)?;
                    lhs = Formula::and(lhs, rhs);
                }
                Tok::Bar | Tok::Arrow | Tok::DArrow => {
                    return self.ill_formed(
                        self.offset(),
                        format!("only conjunction is allowed inside {pred}(..)"),
                    )
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn body_literal(&mut self, kind: Body, pred: &str) -> PResult<Formula> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Bang => match kind {
                Body::Atoms => self.ill_formed(
                    start,
                    format!("negation is not allowed inside {pred}(..)"),
                ),
                Body::Literals => {
                    self.bump();
                    match self.peek().clone() {
                        Tok::Ident(n) if is_atom_name(&n) => {
                            self.bump();
                            Ok(Formula::not(Formula::Atom(n)))
                        }
                        _ => self.ill_formed(
                            start,
                            format!("only negated facts are allowed inside {pred}(..)"),
                        ),
                    }
                }
            },
            Tok::LParen => {
                self.bump();
                let f = self.body(kind, pred)?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(n) if n == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(n) if n == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(n) if is_atom_name(&n) && *self.peek_at(1) != Tok::LParen => {
                self.bump();
                Ok(Formula::Atom(n))
            }
            Tok::Ident(_) => self.ill_formed(
                start,
                format!("only facts and conjunction are allowed inside {pred}(..)"),
            ),
            t => self.syntax(format!("expected fact, found {t}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::implies(a("a"), Formula::implies(a("b"), a("c")))
        );
        assert_eq!(
            parse("!p & q").unwrap(),
            Formula::and(Formula::not(a("p")), a("q"))
        );
        assert_eq!(
            parse("p | q & r").unwrap(),
            Formula::or(a("p"), Formula::and(a("q"), a("r")))
        );
        assert_eq!(
            parse("p <-> q <-> r").unwrap(),
            Formula::Iff(
                Box::new(Formula::Iff(Box::new(a("p")), Box::new(a("q")))),
                Box::new(a("r"))
            )
        );
        assert_eq!(
            parse("C[a] p & q").unwrap(),
            Formula::and(Formula::Cap(Holder::Agent("a".into()), Box::new(a("p"))), a("q"))
        );
    }

    #[test]
    fn holders_and_initiative() {
        let f = parse("incharge(Ogas, monopolist, provide_gas) -> I[monopolist] provide_gas")
            .unwrap();
        let Formula::Implies(l, r) = f else { panic!() };
        assert!(matches!(*l, Formula::InCharge { .. }));
        assert!(matches!(*r, Formula::Initiative(RoleSel::One(_), _)));
        let f = parse("H[{a,b}:{r,q}] p").unwrap();
        assert!(matches!(f, Formula::Attempt(Holder::ReaGroup(..), _)));
        assert_eq!(
            parse("IC[t:trader]").unwrap(),
            Formula::InControl(Holder::Rea("t".into(), "trader".into()))
        );
        assert!(matches!(parse("E[a] p").unwrap(), Formula::Stit(..)));
        assert!(matches!(parse("E[a U p]").unwrap(), Formula::EU(..)));
        assert!(matches!(parse("E[{a} U p]"), Err(_)));
    }

    #[test]
    fn printer_examples() {
        let f = Formula::AF(Box::new(Formula::Attempt(
            Holder::Rea("t".into(), "trader".into()),
            Box::new(a("buy_gas")),
        )));
        assert_eq!(print(&f), "<> H[t:trader] buy_gas");
        assert_eq!(print(&Formula::and(a("p"), a("q"))), "p & q");
        let f = Formula::EU(Box::new(a("p")), Box::new(Formula::and(a("q"), a("r"))));
        assert_eq!(print(&f), "E[p U (q & r)]");
        assert_eq!(print(&parse("!(p & q)").unwrap()), "!(p & q)");
        assert_eq!(print(&parse("(p -> q) -> r").unwrap()), "(p -> q) -> r");
        assert_eq!(
            print(&parse("dep(O, r, {q2, q1})").unwrap()),
            "dep(O, r, {q1,q2})"
        );
    }

    #[test]
    fn well_formedness_errors_are_positioned() {
        let e = parse("desire(O, !p)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::WellFormedness);
        assert_eq!((e.line, e.column), (1, 11));
        let e = parse("p &\n  incharge(O, r, p | q)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::WellFormedness);
        assert_eq!(e.line, 2);
        for bad in ["F p", "A G p", "E[F p]", "G p", "know(O, p | q)", "JC[a] p", "JC[a:r] p"] {
            let e = parse(bad).unwrap_err();
            assert_eq!(e.kind, ParseErrorKind::WellFormedness, "{bad}");
        }
        assert!(parse("know(O, p & !q)").is_ok());
    }

    #[test]
    fn syntax_errors() {
        for bad in ["((p", "p &", "C[a p", "p q", "$", "play(a, r)"] {
            let e = parse(bad).unwrap_err();
            assert_eq!(e.kind, ParseErrorKind::Syntax, "{bad}");
        }
    }

    #[test]
    fn hyphenated_names_and_comments() {
        assert_eq!(
            parse("provide-gas->q # trailing").unwrap(),
            Formula::implies(a("provide-gas"), a("q"))
        );
        assert!(parse("local-transport").is_ok());
    }
}
