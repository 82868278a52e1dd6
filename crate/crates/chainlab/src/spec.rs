//! The line-oriented experiment-spec format: algebra declarations over
//! the construction builders, a probe list, a global seed, and an
//! output path. Parsing validates names and shapes; rendering emits the
//! canonical form, and `parse(render(spec)) == spec`.

use std::collections::BTreeSet;
use std::fmt;

use chainlab_core::ordinal::Ordinal;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub out: Option<String>,
    pub algebras: Vec<AlgebraDecl>,
    pub probes: Vec<ProbeDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraDecl {
    pub name: String,
    pub builder: BuilderExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    Constants,
    Predecessor,
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyName::Constants => write!(f, "constants"),
            FamilyName::Predecessor => write!(f, "predecessor"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuilderExpr {
    Predecessor,
    Discrete(u64),
    ConstantCover(u64),
    SingletonCover(String),
    Uncurry(String, FamilyName),
    Witness(String, u64),
    WhaleyLift(String, Ordinal),
    Restrict(String, u64),
    LimitGlue(Vec<String>),
    StratifiedWitness(String, Vec<u64>, u64),
}

impl BuilderExpr {
    /// Names of previously declared algebras this builder consumes.
    pub fn references(&self) -> Vec<&str> {
        match self {
            BuilderExpr::Predecessor | BuilderExpr::Discrete(_) | BuilderExpr::ConstantCover(_) => {
                Vec::new()
            }
            BuilderExpr::SingletonCover(a)
            | BuilderExpr::Uncurry(a, _)
            | BuilderExpr::Witness(a, _)
            | BuilderExpr::WhaleyLift(a, _)
            | BuilderExpr::Restrict(a, _)
            | BuilderExpr::StratifiedWitness(a, _, _) => vec![a],
            BuilderExpr::LimitGlue(parts) => parts.iter().map(String::as_str).collect(),
        }
    }
}

impl fmt::Display for BuilderExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuilderExpr::Predecessor => write!(f, "predecessor"),
            BuilderExpr::Discrete(n) => write!(f, "discrete({n})"),
            BuilderExpr::ConstantCover(n) => write!(f, "constant_cover({n})"),
            BuilderExpr::SingletonCover(a) => write!(f, "singleton_cover({a})"),
            BuilderExpr::Uncurry(a, fam) => write!(f, "uncurry({a}, {fam})"),
            BuilderExpr::Witness(a, b) => write!(f, "witness({a}, {b})"),
            BuilderExpr::WhaleyLift(a, g) => write!(f, "whaley_lift({a}, {g})"),
            BuilderExpr::Restrict(a, n) => write!(f, "restrict({a}, {n})"),
            BuilderExpr::LimitGlue(parts) => write!(f, "limit_glue({})", parts.join(", ")),
            BuilderExpr::StratifiedWitness(a, sizes, b) => {
                let sizes: Vec<String> = sizes.iter().map(u64::to_string).collect();
                write!(f, "stratified_witness({a}, [{}], {b})", sizes.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Closure,
    Member,
    Free,
    FreeSearch,
    Chain,
    ChainFromFree,
    Trichotomy,
    RamseyColor,
    RamseyHomog,
    RamseyPipeline,
    Axioms,
    Witness,
    FreeOrWitness,
}

impl ProbeKind {
    pub const ALL: [ProbeKind; 13] = [
        ProbeKind::Closure,
        ProbeKind::Member,
        ProbeKind::Free,
        ProbeKind::FreeSearch,
        ProbeKind::Chain,
        ProbeKind::ChainFromFree,
        ProbeKind::Trichotomy,
        ProbeKind::RamseyColor,
        ProbeKind::RamseyHomog,
        ProbeKind::RamseyPipeline,
        ProbeKind::Axioms,
        ProbeKind::Witness,
        ProbeKind::FreeOrWitness,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeKind::Closure => "closure",
            ProbeKind::Member => "member",
            ProbeKind::Free => "free",
            ProbeKind::FreeSearch => "free-search",
            ProbeKind::Chain => "chain",
            ProbeKind::ChainFromFree => "chain-from-free",
            ProbeKind::Trichotomy => "trichotomy",
            ProbeKind::RamseyColor => "ramsey-color",
            ProbeKind::RamseyHomog => "ramsey-homog",
            ProbeKind::RamseyPipeline => "ramsey-pipeline",
            ProbeKind::Axioms => "axioms",
            ProbeKind::Witness => "witness",
            ProbeKind::FreeOrWitness => "free-or-witness",
        }
    }

    fn from_str(s: &str) -> Option<ProbeKind> {
        ProbeKind::ALL.iter().copied().find(|k| k.as_str() == s)
    }

    /// The keys a probe of this kind accepts: (required, optional).
    pub fn keys(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            ProbeKind::Closure => (
                &["set", "budget"],
                &["require", "expect_saturated", "expect_found", "expect_size"],
            ),
            ProbeKind::Member => (&["set", "y", "budget"], &["require", "expect"]),
            ProbeKind::Free => (&["set", "budget"], &["require", "expect"]),
            ProbeKind::FreeSearch => (&["pool", "k", "budget"], &["expect"]),
            ProbeKind::Chain => (
                &["sets", "budget"],
                &["require", "expect_stabilization", "expect_drops"],
            ),
            ProbeKind::ChainFromFree => (&["tuple", "budget"], &["require", "expect_drops"]),
            ProbeKind::Trichotomy => (&["k0", "k1", "budget"], &["expect"]),
            ProbeKind::RamseyColor => (
                &["pool", "m", "budget"],
                &["expect_partial_cells", "expect_max_color"],
            ),
            ProbeKind::RamseyHomog => (&["pool", "m", "k", "budget"], &["expect"]),
            ProbeKind::RamseyPipeline => (&["pool", "m", "k", "budget"], &["expect"]),
            ProbeKind::Axioms => (&["m", "xs", "budget"], &["expect_failures"]),
            ProbeKind::Witness => (&["u", "beta", "budget"], &["expect_alpha", "expect"]),
            ProbeKind::FreeOrWitness => (&["seq", "budget"], &["expect"]),
        }
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// A probe parameter value, kept syntactic: naturals, bare tokens
/// (ordinal literals, letters, verdict names), and nested lists.
/// Tokens with internal spaces are word literals like `z0^2 z3^1`; they
/// only arise inside bracketed lists, where whitespace does not split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Nat(u64),
    Token(String),
    List(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Token(t) => write!(f, "{t}"),
            Value::List(items) => {
                write!(f, "[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeDecl {
    pub kind: ProbeKind,
    pub algebra: String,
    pub params: Vec<(String, Value)>,
}

impl ProbeDecl {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for SpecError {}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError {
        line,
        column,
        message: message.into(),
    })
}

/// Parses the experiment-spec text. Diagnostics carry 1-based line and
/// column numbers; `#` starts a comment.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, SpecError> {
    let mut spec = ExperimentSpec {
        seed: 0,
        out: None,
        algebras: Vec::new(),
        probes: Vec::new(),
    };
    let mut names: BTreeSet<String> = BTreeSet::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = line.len() - line.trim_start().len() + 1;
        let (head, rest) = match trimmed.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (trimmed, ""),
        };
        match head {
            "seed" => {
                spec.seed = rest.parse().map_err(|_| SpecError {
                    line: line_no,
                    column,
                    message: format!("seed must be a natural number, got `{rest}`"),
                })?;
            }
            "out" => {
                if rest.is_empty() {
                    return err(line_no, column, "out needs a path");
                }
                spec.out = Some(rest.to_string());
            }
            "algebra" => {
                let decl = parse_algebra_decl(rest, line_no, column)?;
                if !names.insert(decl.name.clone()) {
                    return err(
                        line_no,
                        column,
                        format!("algebra `{}` is declared twice", decl.name),
                    );
                }
                for reference in decl.builder.references() {
                    if !names.contains(reference) {
                        return err(
                            line_no,
                            column,
                            format!(
                                "algebra `{}` references `{reference}` before its declaration",
                                decl.name
                            ),
                        );
                    }
                }
                spec.algebras.push(decl);
            }
            "probe" => {
                let decl = parse_probe_decl(rest, line_no, column)?;
                if !names.contains(&decl.algebra) {
                    return err(
                        line_no,
                        column,
                        format!(
                            "probe {} (`{}` kind {}) references undeclared algebra `{}`",
                            spec.probes.len() + 1,
                            decl.algebra,
                            decl.kind,
                            decl.algebra
                        ),
                    );
                }
                spec.probes.push(decl);
            }
            other => {
                return err(
                    line_no,
                    column,
                    format!("expected `seed`, `out`, `algebra`, or `probe`, got `{other}`"),
                )
            }
        }
    }
    Ok(spec)
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn parse_algebra_decl(rest: &str, line: usize, column: usize) -> Result<AlgebraDecl, SpecError> {
    let (name, builder_text) = match rest.split_once('=') {
        Some((n, b)) => (n.trim(), b.trim()),
        None => return err(line, column, "algebra declaration needs `= <builder>`"),
    };
    if !valid_name(name) {
        return err(line, column, format!("bad algebra name `{name}`"));
    }
    let builder = parse_builder(builder_text, line, column)?;
    Ok(AlgebraDecl {
        name: name.to_string(),
        builder,
    })
}

fn parse_builder(text: &str, line: usize, column: usize) -> Result<BuilderExpr, SpecError> {
    let (head, args) = match text.find('(') {
        Some(open) => {
            if !text.ends_with(')') {
                return err(line, column, "builder arguments must close with `)`");
            }
            let inner = &text[open + 1..text.len() - 1];
            (text[..open].trim(), split_args(inner))
        }
        None => (text.trim(), Vec::new()),
    };
    let wrong_arity = |want: &str| SpecError {
        line,
        column,
        message: format!("builder `{head}` expects {want}"),
    };
    let nat = |s: &str| -> Result<u64, SpecError> {
        s.parse().map_err(|_| SpecError {
            line,
            column,
            message: format!("expected a natural number, got `{s}`"),
        })
    };
    match head {
        "predecessor" => {
            if args.is_empty() {
                Ok(BuilderExpr::Predecessor)
            } else {
                Err(wrong_arity("no arguments"))
            }
        }
        "discrete" => match args.as_slice() {
            [n] => Ok(BuilderExpr::Discrete(nat(n)?)),
            _ => Err(wrong_arity("(size)")),
        },
        "constant_cover" => match args.as_slice() {
            [n] => Ok(BuilderExpr::ConstantCover(nat(n)?)),
            _ => Err(wrong_arity("(size)")),
        },
        "singleton_cover" => match args.as_slice() {
            [a] => Ok(BuilderExpr::SingletonCover(a.clone())),
            _ => Err(wrong_arity("(algebra)")),
        },
        "uncurry" => match args.as_slice() {
            [a, fam] => {
                let family = match fam.as_str() {
                    "constants" => FamilyName::Constants,
                    "predecessor" => FamilyName::Predecessor,
                    other => {
                        return err(line, column, format!("unknown family `{other}`"));
                    }
                };
                Ok(BuilderExpr::Uncurry(a.clone(), family))
            }
            _ => Err(wrong_arity("(algebra, family)")),
        },
        "witness" => match args.as_slice() {
            [a, b] => Ok(BuilderExpr::Witness(a.clone(), nat(b)?)),
            _ => Err(wrong_arity("(algebra, budget)")),
        },
        "whaley_lift" => match args.as_slice() {
            [a, g] => {
                let gamma: Ordinal = g.parse().map_err(|e| SpecError {
                    line,
                    column,
                    message: format!("bad ordinal literal `{g}`: {e}"),
                })?;
                Ok(BuilderExpr::WhaleyLift(a.clone(), gamma))
            }
            _ => Err(wrong_arity("(algebra, ordinal)")),
        },
        "restrict" => match args.as_slice() {
            [a, n] => Ok(BuilderExpr::Restrict(a.clone(), nat(n)?)),
            _ => Err(wrong_arity("(algebra, size)")),
        },
        "limit_glue" => {
            if args.is_empty() {
                Err(wrong_arity("(part, part, ...)"))
            } else {
                Ok(BuilderExpr::LimitGlue(args))
            }
        }
        "stratified_witness" => match args.as_slice() {
            [a, sizes, b] => {
                let inner = sizes
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| SpecError {
                        line,
                        column,
                        message: format!("expected a size list like [4,8,16], got `{sizes}`"),
                    })?;
                let sizes = inner
                    .split(',')
                    .map(|s| nat(s.trim()))
                    .collect::<Result<Vec<u64>, _>>()?;
                Ok(BuilderExpr::StratifiedWitness(a.clone(), sizes, nat(b)?))
            }
            _ => Err(wrong_arity("(algebra, [sizes], budget)")),
        },
        other => err(line, column, format!("unknown builder `{other}`")),
    }
}

/// Splits builder arguments on top-level commas (brackets nest).
fn split_args(inner: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in inner.chars() {
        match c {
            '[' => {
                depth += 1;
                current.push(c);
            }
            ']' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                out.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

fn parse_probe_decl(rest: &str, line: usize, column: usize) -> Result<ProbeDecl, SpecError> {
    let mut tokens = tokenize_probe(rest, line, column)?;
    if tokens.len() < 2 {
        return err(line, column, "probe needs a kind and an algebra name");
    }
    let kind_token = tokens.remove(0);
    let kind = ProbeKind::from_str(&kind_token).ok_or_else(|| SpecError {
        line,
        column,
        message: format!("unknown probe kind `{kind_token}`"),
    })?;
    let algebra = tokens.remove(0);
    if !valid_name(&algebra) {
        return err(line, column, format!("bad algebra name `{algebra}`"));
    }
    let mut params = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let (required, optional) = kind.keys();
    for token in tokens {
        let (key, value_text) = match token.split_once('=') {
            Some((k, v)) => (k.to_string(), v),
            None => return err(line, column, format!("expected key=value, got `{token}`")),
        };
        if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
            return err(
                line,
                column,
                format!("probe kind `{kind}` does not accept key `{key}`"),
            );
        }
        if !seen.insert(key.clone()) {
            return err(line, column, format!("duplicate key `{key}`"));
        }
        params.push((key, parse_value(value_text, line, column)?));
    }
    for req in required {
        if !seen.contains(*req) {
            return err(
                line,
                column,
                format!("probe kind `{kind}` requires key `{req}`"),
            );
        }
    }
    Ok(ProbeDecl {
        kind,
        algebra,
        params,
    })
}

/// Splits a probe line into whitespace-separated tokens; brackets keep
/// list values (which may contain spaces after commas) together.
fn tokenize_probe(rest: &str, line: usize, column: usize) -> Result<Vec<String>, SpecError> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut depth = 0usize;
    for c in rest.chars() {
        match c {
            '[' => {
                depth += 1;
                current.push(c);
            }
            ']' => {
                if depth == 0 {
                    return err(line, column, "unbalanced `]`");
                }
                depth -= 1;
                current.push(c);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            _ => current.push(c),
        }
    }
    if depth != 0 {
        return err(line, column, "unbalanced `[`");
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    Ok(tokens)
}

fn parse_value(text: &str, line: usize, column: usize) -> Result<Value, SpecError> {
    let text = text.trim();
    if let Some(inner) = text.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or_else(|| SpecError {
            line,
            column,
            message: format!("unclosed list `{text}`"),
        })?;
        let mut items = Vec::new();
        for part in split_args(inner) {
            if part.is_empty() {
                continue;
            }
            items.push(parse_value(&part, line, column)?);
        }
        return Ok(Value::List(items));
    }
    if text.is_empty() {
        return err(line, column, "empty value");
    }
    if text.chars().all(|c| c.is_ascii_digit()) {
        return text.parse().map(Value::Nat).map_err(|_| SpecError {
            line,
            column,
            message: format!("natural number out of range: `{text}`"),
        });
    }
    if text.contains(['[', ']', ',', '=']) {
        return err(line, column, format!("malformed value `{text}`"));
    }
    Ok(Value::Token(text.to_string()))
}

/// Renders a spec in canonical form.
pub fn render_spec(spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("seed {}\n", spec.seed));
    if let Some(path) = &spec.out {
        out.push_str(&format!("out {path}\n"));
    }
    for decl in &spec.algebras {
        out.push_str(&format!("algebra {} = {}\n", decl.name, decl.builder));
    }
    for probe in &spec.probes {
        out.push_str(&format!("probe {} {}", probe.kind, probe.algebra));
        for (key, value) in &probe.params {
            out.push_str(&format!(" {key}={value}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builder_examples() {
        let spec = parse_spec(
            "algebra A = predecessor\n\
             algebra C = whaley_lift(A, w*2)\n\
             probe free A set=[3,5] budget=100\n",
        )
        .unwrap();
        assert_eq!(spec.algebras.len(), 2);
        assert_eq!(spec.algebras[0].builder, BuilderExpr::Predecessor);
        assert_eq!(
            spec.algebras[1].builder,
            BuilderExpr::WhaleyLift("A".into(), "w*2".parse().unwrap())
        );
        assert_eq!(spec.probes.len(), 1);
        assert_eq!(spec.probes[0].kind, ProbeKind::Free);
        assert_eq!(
            spec.probes[0].get("set"),
            Some(&Value::List(vec![Value::Nat(3), Value::Nat(5)]))
        );
    }

    #[test]
    fn rejects_undeclared_references() {
        let e = parse_spec("probe free A set=[3] budget=10\n").unwrap_err();
        assert!(e.message.contains("undeclared algebra `A`"), "{e}");
        let e = parse_spec("algebra B = singleton_cover(A)\n").unwrap_err();
        assert!(e.message.contains("before its declaration"), "{e}");
    }

    #[test]
    fn rejects_bad_syntax() {
        assert!(parse_spec("algebra A predecessor\n").is_err());
        assert!(parse_spec("algebra A = nonsense(3)\n").is_err());
        assert!(
            parse_spec("algebra A = predecessor\nprobe free A bogus=1 set=[1] budget=9\n").is_err()
        );
        assert!(parse_spec("algebra A = predecessor\nprobe free A set=[1]\n").is_err());
        assert!(parse_spec("wibble\n").is_err());
        let e = parse_spec("algebra A = predecessor\nalgebra A = predecessor\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let spec = parse_spec(
            "# a comment\n\
             \n\
             seed 7\n\
             algebra A = discrete(4)  # trailing comment\n",
        )
        .unwrap();
        assert_eq!(spec.seed, 7);
        assert_eq!(spec.algebras[0].builder, BuilderExpr::Discrete(4));
    }

    #[test]
    fn nested_lists_parse() {
        let spec = parse_spec(
            "algebra A = predecessor\n\
             probe chain A sets=[[10],[9],[8]] budget=50\n",
        )
        .unwrap();
        assert_eq!(
            spec.probes[0].get("sets"),
            Some(&Value::List(vec![
                Value::List(vec![Value::Nat(10)]),
                Value::List(vec![Value::Nat(9)]),
                Value::List(vec![Value::Nat(8)]),
            ]))
        );
    }

    #[test]
    fn word_literals_survive_inside_lists() {
        let text = "algebra D = discrete(8)\n\
                    probe axioms D m=5 xs=[[z2^1,z2^3],z5^2 z7^1] budget=100\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(
            spec.probes[0].get("xs"),
            Some(&Value::List(vec![
                Value::List(vec![
                    Value::Token("z2^1".into()),
                    Value::Token("z2^3".into())
                ]),
                Value::Token("z5^2 z7^1".into()),
            ]))
        );
        assert_eq!(parse_spec(&render_spec(&spec)).unwrap(), spec);
    }

    #[test]
    fn render_round_trip() {
        let text = "seed 11\n\
                    out reports/basic.txt\n\
                    algebra A = predecessor\n\
                    algebra B = constant_cover(16)\n\
                    algebra C = whaley_lift(A, w*4)\n\
                    algebra D = stratified_witness(A, [4,8,16], 60)\n\
                    probe free B set=[2,9] budget=100 expect=not-free\n\
                    probe closure C set=[w] budget=50 require=saturated\n";
        let spec = parse_spec(text).unwrap();
        let rendered = render_spec(&spec);
        assert_eq!(parse_spec(&rendered).unwrap(), spec);
        assert_eq!(rendered, text);
    }
}
