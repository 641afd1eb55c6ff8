//! Prefix notation for sequence expressions.
//!
//! ```text
//! expr := (+ expr expr ...)            sum
//!       | (* expr expr ...)            product
//!       | (scalar c expr)              c * expr, c a complex literal
//!       | (toeplitz "f(t)" [quad])     T_n(f) by quadrature
//!       | (fourier (k c) ...)          T_n from explicit coefficients f_k = c
//!       | (jordan c)                   c I + shift, the Toeplitz matrix of c + e^{it}
//!       | (diag "a(x)")                D_n(a)
//!       | (zero)                       default zero-distributed leaf
//!       | (corner "c(n)" top-right|bottom-left)   zero-distributed corner leaf
//!       | (counterexample ce1-X)       raw leaf, no symbol
//!       | (conjugate-unitary seed expr)   U_n expr U_n^H, raw leaf
//! ```
//!
//! For example `(+ (toeplitz "2*cos(t)") (scalar 0-1i (zero)))`.

use crate::error::{Error, Result};
use crate::generators::{self, Corner, Counterexample, FourierSpec};
use crate::glt::SeqExpr;
use crate::spectral::{C64, ONE};
use crate::symbolic::{parse_complex, Formula, Var, Vars};

#[derive(Debug, Clone, PartialEq)]
enum Sx {
    Atom(String, usize),
    Str(String, usize),
    List(Vec<Sx>, usize),
}

impl Sx {
    fn offset(&self) -> usize {
        match self {
            Sx::Atom(_, o) | Sx::Str(_, o) | Sx::List(_, o) => *o,
        }
    }

    /// Atom or string text.
    fn text(&self) -> Option<&str> {
        match self {
            Sx::Atom(s, _) | Sx::Str(s, _) => Some(s),
            Sx::List(..) => None,
        }
    }
}

fn err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn read(&mut self) -> Result<Sx> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        match bytes.get(start) {
            None => Err(err(start, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match bytes.get(self.pos) {
                        None => return Err(err(start, "unclosed parenthesis")),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Sx::List(items, start));
                        }
                        _ => items.push(self.read()?),
                    }
                }
            }
            Some(b')') => Err(err(start, "unexpected `)`")),
            Some(b'"') => {
                let body = &self.src[start + 1..];
                let end = body.find('"').ok_or_else(|| err(start, "unterminated string"))?;
                self.pos = start + 1 + end + 1;
                Ok(Sx::Str(body[..end].to_string(), start))
            }
            Some(_) => {
                let rest = &self.src[start..];
                let len = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')' || c == '"')
                    .unwrap_or(rest.len());
                self.pos += len;
                Ok(Sx::Atom(rest[..len].to_string(), start))
            }
        }
    }
}

fn read_all(src: &str) -> Result<Sx> {
    let mut r = Reader { src, pos: 0 };
    let sx = r.read()?;
    r.skip_ws();
    if r.pos != src.len() {
        return Err(err(r.pos, "trailing input after expression"));
    }
    Ok(sx)
}

/// Parses an expression in the notation above.
pub fn parse_expr(src: &str) -> Result<SeqExpr> {
    compile(&read_all(src)?)
}

fn complex_at(sx: &Sx) -> Result<C64> {
    let text = sx.text().ok_or_else(|| err(sx.offset(), "expected a complex number"))?;
    parse_complex(text).map_err(|e| shift(e, sx.offset()))
}

fn formula_at(sx: &Sx) -> Result<Formula> {
    let text = sx.text().ok_or_else(|| err(sx.offset(), "expected a formula"))?;
    // strings start one byte after their quote
    let base = sx.offset() + usize::from(matches!(sx, Sx::Str(..)));
    Formula::parse(text).map_err(|e| shift(e, base))
}

fn shift(e: Error, base: usize) -> Error {
    match e {
        Error::Parse { offset, message } => Error::Parse {
            offset: base + offset,
            message,
        },
        other => other,
    }
}

fn integer_at(sx: &Sx) -> Result<i64> {
    sx.text()
        .and_then(|t| t.parse::<i64>().ok())
        .ok_or_else(|| err(sx.offset(), "expected an integer"))
}

fn arity(args: &[Sx], allowed: std::ops::RangeInclusive<usize>, head: &str, offset: usize) -> Result<()> {
    if !allowed.contains(&args.len()) {
        return Err(err(offset, format!("`{head}` takes {allowed:?} arguments, got {}", args.len())));
    }
    Ok(())
}

fn forbid_vars(f: &Formula, vars: &[(Var, &str)], offset: usize) -> Result<()> {
    for (v, name) in vars {
        if f.uses(*v) {
            return Err(err(offset, format!("variable `{name}` not allowed here")));
        }
    }
    Ok(())
}

fn compile(sx: &Sx) -> Result<SeqExpr> {
    let (items, offset) = match sx {
        Sx::List(items, o) => (items, *o),
        other => return Err(err(other.offset(), "expected a parenthesised expression")),
    };
    let (head, args) = items.split_first().ok_or_else(|| err(offset, "empty expression"))?;
    let head = match head {
        Sx::Atom(h, _) => h.as_str(),
        other => return Err(err(other.offset(), "expected an operator name")),
    };
    match head {
        "+" | "*" => {
            if args.len() < 2 {
                return Err(err(offset, format!("`{head}` needs at least two operands")));
            }
            let mut acc = compile(&args[0])?;
            for a in &args[1..] {
                let rhs = compile(a)?;
                acc = if head == "+" { acc + rhs } else { acc * rhs };
            }
            Ok(acc)
        }
        "scalar" => {
            arity(args, 2..=2, head, offset)?;
            Ok(SeqExpr::scalar(complex_at(&args[0])?, compile(&args[1])?))
        }
        "toeplitz" => {
            arity(args, 1..=2, head, offset)?;
            let f = formula_at(&args[0])?;
            forbid_vars(&f, &[(Var::X, "x"), (Var::N, "n")], args[0].offset())?;
            let mut spec = FourierSpec::formula(f);
            if let Some(q) = args.get(1) {
                let m = integer_at(q)?;
                if m <= 0 {
                    return Err(err(q.offset(), "quadrature size must be positive"));
                }
                spec = spec.with_quadrature(m as usize);
            }
            Ok(SeqExpr::toeplitz(spec))
        }
        "fourier" => {
            if args.is_empty() {
                return Err(err(offset, "`fourier` needs at least one (k c) pair"));
            }
            let mut pairs = Vec::new();
            for a in args {
                match a {
                    Sx::List(kc, _) if kc.len() == 2 => pairs.push((integer_at(&kc[0])?, complex_at(&kc[1])?)),
                    other => return Err(err(other.offset(), "expected a (k c) pair")),
                }
            }
            Ok(SeqExpr::toeplitz(FourierSpec::coefficients(pairs)))
        }
        "jordan" => {
            arity(args, 1..=1, head, offset)?;
            let lambda = complex_at(&args[0])?;
            Ok(SeqExpr::toeplitz(FourierSpec::coefficients([(0, lambda), (1, ONE)])))
        }
        "diag" => {
            arity(args, 1..=1, head, offset)?;
            let f = formula_at(&args[0])?;
            forbid_vars(&f, &[(Var::Theta, "t"), (Var::N, "n")], args[0].offset())?;
            Ok(SeqExpr::diag_formula(f))
        }
        "zero" => {
            arity(args, 0..=0, head, offset)?;
            Ok(SeqExpr::zero())
        }
        "corner" => {
            arity(args, 2..=2, head, offset)?;
            let f = formula_at(&args[0])?;
            forbid_vars(&f, &[(Var::X, "x"), (Var::Theta, "t")], args[0].offset())?;
            let which = match args[1].text() {
                Some("top-right") => Corner::TopRight,
                Some("bottom-left") => Corner::BottomLeft,
                _ => return Err(err(args[1].offset(), "expected `top-right` or `bottom-left`")),
            };
            let label = format!("(corner \"{}\" {})", f.source(), args[1].text().unwrap_or_default());
            Ok(SeqExpr::zero_with(label, move |n| {
                let c = f.eval(Vars {
                    n: n as f64,
                    ..Default::default()
                });
                if !c.is_finite() {
                    return Err(Error::Overflow(format!("corner weight `{}` at n = {n}", f.source())));
                }
                generators::corner(n, c, which)
            }))
        }
        "counterexample" => {
            arity(args, 1..=1, head, offset)?;
            let name = args[0].text().unwrap_or_default();
            let id = Counterexample::from_name(name)
                .ok_or_else(|| err(args[0].offset(), format!("unknown counterexample `{name}`")))?;
            Ok(SeqExpr::raw(format!("(counterexample {name})"), move |n| generators::counterexample(id, n)))
        }
        "conjugate-unitary" => {
            arity(args, 2..=2, head, offset)?;
            let seed = integer_at(&args[0])?;
            if seed < 0 {
                return Err(err(args[0].offset(), "seed must be non-negative"));
            }
            let inner = compile(&args[1])?;
            let label = format!("(conjugate-unitary {seed} {inner})");
            Ok(SeqExpr::raw(label, move |n| {
                let u = generators::random_unitary(n, generators::derive_seed(seed as u64, n))?;
                let m = inner.build(n)?;
                Ok(&(&u * &m) * &u.adjoint())
            }))
        }
        other => Err(err(offset + 1, format!("unknown operator `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glt::{build, symbol_of, Domain};
    use crate::spectral::{I, ZERO};

    #[test]
    fn parses_the_documented_example() {
        let e = parse_expr(r#"(+ (toeplitz "2*cos(t)") (scalar 0-1i (zero)))"#).unwrap();
        let s = symbol_of(&e).unwrap();
        assert_eq!(s.domain(), Domain::Theta);
        assert!((s.eval(0.0, 0.4) - C64::new(2.0 * 0.4f64.cos(), 0.0)).norm() < 1e-15);
        let m = build(&e, 16).unwrap();
        assert!((m[(0, 0)] + I).norm() < 1e-13);
        assert!((m[(1, 0)] - ONE).norm() < 1e-13);
    }

    #[test]
    fn leaves() {
        let f = parse_expr("(fourier (-1 1) (1 1))").unwrap();
        assert_eq!(
            build(&f, 5).unwrap(),
            generators::toeplitz(&FourierSpec::two_cos(), 5).unwrap()
        );
        let j = parse_expr("(jordan 0)").unwrap();
        assert_eq!(build(&j, 4).unwrap(), generators::jordan_block(4, ZERO).unwrap());
        let c = parse_expr(r#"(corner "n^(n-1)" top-right)"#).unwrap();
        assert_eq!(build(&c, 4).unwrap()[(0, 3)], C64::new(64.0, 0.0));
        assert_eq!(symbol_of(&c).unwrap().eval(0.5, 0.5), ZERO);
        let ce = parse_expr("(+ (counterexample ce3-X) (counterexample ce3-Y))").unwrap();
        assert!(symbol_of(&ce).is_none());
        assert_eq!(build(&ce, 6).unwrap(), generators::jordan_block(6, ZERO).unwrap());
        let d = parse_expr(r#"(* (diag "x") (toeplitz "2 cos(t)" 2048))"#).unwrap();
        assert_eq!(symbol_of(&d).unwrap().domain(), Domain::XTheta);
    }

    #[test]
    fn unitary_conjugation_preserves_spectrum() {
        let e = parse_expr(r#"(conjugate-unitary 7 (diag "x"))"#).unwrap();
        let m = build(&e, 8).unwrap();
        assert!(!m.is_diagonal());
        let mut eig: Vec<f64> = crate::spectral::eigenvalues(&m).unwrap().iter().map(|z| z.re).collect();
        eig.sort_by(f64::total_cmp);
        for (k, v) in eig.iter().enumerate() {
            assert!((v - (k + 1) as f64 / 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn errors_carry_offsets() {
        let cases = [
            ("(+ (zero)", 0),
            ("(frobnicate)", 1),
            ("(+ (zero))", 0),
            (r#"(toeplitz "cos(x)")"#, 10),
            (r#"(diag "1 +")"#, 10),
            ("(zero) extra", 7),
            ("(corner 1 left)", 10),
        ];
        for (src, want) in cases {
            match parse_expr(src) {
                Err(Error::Parse { offset, .. }) => assert_eq!(offset, want, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
