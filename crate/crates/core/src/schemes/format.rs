//! Line-oriented scheme files.
//!
//! ```text
//! # two weighted pairs joined by the central element
//! source 1 2 HH=1/2 VV=sqrt(3)/2
//! source 3 4 HH=1/2 VV=sqrt(3)/2
//! pdbs 2 3 1 1/3
//! attenuator 2 5 1/3 1
//! coincidence 1 2 3 4
//! ```
//!
//! Amplitudes are `re` or `re,im`. Every number may be written as a product
//! or quotient of decimals and `sqrt(..)` factors, with an optional leading
//! minus sign.

use num_complex::Complex64;

use super::{ElementSpec, SchemeDescription, SourceSpec};
use crate::elements::{AttenuatorSpec, PdbsSpec};
use crate::error::{Error, Result};
use crate::fock::Polarization;

pub fn parse_scheme(text: &str) -> Result<SchemeDescription> {
    let mut sources = Vec::new();
    let mut elements = Vec::new();
    let mut coincidence: Option<Vec<u32>> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap_or_default();
        let args: Vec<&str> = tokens.collect();
        let err = |msg: String| Error::parse(line_no, msg);
        match keyword {
            "source" => {
                if args.len() < 3 {
                    return Err(err("source needs two modes and at least one amplitude".into()));
                }
                let modes = (mode(args[0], line_no)?, mode(args[1], line_no)?);
                let mut amplitudes = Vec::new();
                for tok in &args[2..] {
                    let (label, value) = tok
                        .split_once('=')
                        .ok_or_else(|| err(format!("expected PP=amplitude, got '{tok}'")))?;
                    let pols: Vec<Polarization> =
                        label.chars().filter_map(Polarization::from_char).collect();
                    if pols.len() != 2 || label.chars().count() != 2 {
                        return Err(err(format!("bad polarization pair '{label}'")));
                    }
                    amplitudes.push(((pols[0], pols[1]), complex(value, line_no)?));
                }
                sources.push(SourceSpec::new(modes, amplitudes));
            }
            "pdbs" => {
                if args.len() != 4 {
                    return Err(err("pdbs takes: mode mode t_h t_v".into()));
                }
                elements.push(ElementSpec::Pdbs(PdbsSpec::new(
                    real(args[2], line_no)?,
                    real(args[3], line_no)?,
                    (mode(args[0], line_no)?, mode(args[1], line_no)?),
                )));
            }
            "attenuator" => {
                if args.len() != 4 {
                    return Err(err("attenuator takes: mode ancilla t_h t_v".into()));
                }
                elements.push(ElementSpec::Attenuator(AttenuatorSpec::new(
                    real(args[2], line_no)?,
                    real(args[3], line_no)?,
                    mode(args[0], line_no)?,
                    mode(args[1], line_no)?,
                )));
            }
            "coincidence" => {
                if coincidence.is_some() {
                    return Err(err("coincidence declared twice".into()));
                }
                if args.is_empty() {
                    return Err(err("coincidence needs at least one mode".into()));
                }
                coincidence =
                    Some(args.iter().map(|a| mode(a, line_no)).collect::<Result<Vec<_>>>()?);
            }
            other => return Err(err(format!("unknown declaration '{other}'"))),
        }
    }

    let last = text.lines().count().max(1);
    let coincidence_modes =
        coincidence.ok_or_else(|| Error::parse(last, "missing coincidence declaration"))?;
    let scheme = SchemeDescription { sources, elements, coincidence_modes };
    scheme.validate()?;
    for s in &scheme.sources {
        s.state()?;
    }
    for e in &scheme.elements {
        e.transform()?;
    }
    Ok(scheme)
}

fn mode(tok: &str, line: usize) -> Result<u32> {
    tok.parse().map_err(|_| Error::parse(line, format!("bad spatial mode '{tok}'")))
}

fn complex(tok: &str, line: usize) -> Result<Complex64> {
    match tok.split_once(',') {
        Some((r, i)) => Ok(Complex64::new(real(r, line)?, real(i, line)?)),
        None => Ok(Complex64::new(real(tok, line)?, 0.0)),
    }
}

fn real(tok: &str, line: usize) -> Result<f64> {
    eval_real(tok).ok_or_else(|| Error::parse(line, format!("bad number '{tok}'")))
}

fn eval_real(expr: &str) -> Option<f64> {
    let expr = expr.trim();
    let (sign, body) = match expr.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, expr),
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let f = factor(&rest[..end])?;
        match op {
            '*' => value *= f,
            _ => value /= f,
        }
        if end == rest.len() {
            break;
        }
        op = rest[end..].chars().next()?;
        rest = &rest[end + 1..];
    }
    value.is_finite().then_some(sign * value)
}

fn factor(tok: &str) -> Option<f64> {
    let tok = tok.trim();
    if let Some(inner) = tok.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
        let x: f64 = inner.trim().parse().ok()?;
        return (x >= 0.0).then(|| x.sqrt());
    }
    tok.parse().ok()
}

fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        fmt_num(z.re)
    } else {
        format!("{},{}", fmt_num(z.re), fmt_num(z.im))
    }
}

pub(super) fn to_text(scheme: &SchemeDescription) -> String {
    let mut out = String::new();
    for s in &scheme.sources {
        out.push_str(&format!("source {} {}", s.modes.0, s.modes.1));
        for &((p, q), a) in &s.amplitudes {
            out.push_str(&format!(" {p}{q}={}", fmt_complex(a)));
        }
        out.push('\n');
    }
    for e in &scheme.elements {
        match e {
            ElementSpec::Pdbs(p) => out.push_str(&format!(
                "pdbs {} {} {} {}\n",
                p.modes.0,
                p.modes.1,
                fmt_num(p.t_h),
                fmt_num(p.t_v)
            )),
            ElementSpec::Attenuator(a) => out.push_str(&format!(
                "attenuator {} {} {} {}\n",
                a.mode,
                a.ancilla,
                fmt_num(a.t_h),
                fmt_num(a.t_v)
            )),
        }
    }
    let modes: Vec<String> = scheme.coincidence_modes.iter().map(u32::to_string).collect();
    out.push_str(&format!("coincidence {}\n", modes.join(" ")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{build_chain, build_fig1a, build_fig1c};
    use approx::assert_abs_diff_eq;

    #[test]
    fn expressions() {
        assert_abs_diff_eq!(eval_real("sqrt(3)/2").unwrap(), 0.8660254037844386);
        assert_abs_diff_eq!(eval_real("-3/4").unwrap(), -0.75);
        assert_abs_diff_eq!(eval_real("1/sqrt(8)*2").unwrap(), 2.0 / 8f64.sqrt());
        assert_eq!(eval_real("0.25").unwrap(), 0.25);
        assert!(eval_real("sqrt(-1)").is_none());
        assert!(eval_real("1/0").is_none());
        assert!(eval_real("abc").is_none());
    }

    #[test]
    fn documented_example_parses() {
        let text = "# two weighted pairs\nsource 1 2 HH=1/2 VV=sqrt(3)/2\nsource 3 4 HH=1/2 VV=sqrt(3)/2\npdbs 2 3 1 1/3\ncoincidence 1 2 3 4\n";
        let s = parse_scheme(text).unwrap();
        let out = s.run().unwrap();
        let reference = build_fig1c().run().unwrap();
        assert_abs_diff_eq!(out.probability, reference.probability, epsilon = 1e-15);
    }

    #[test]
    fn builders_round_trip() {
        for s in [build_fig1a(), build_fig1c(), build_chain(3).unwrap()] {
            assert_eq!(parse_scheme(&s.to_text()).unwrap(), s);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("source 1 2 HH=1\nbogus 1\ncoincidence 1 2\n", 2),
            ("source 1 2 HX=1\ncoincidence 1 2\n", 1),
            ("source 1 2 HH=1\npdbs 1 2 1\ncoincidence 1 2\n", 2),
            ("source 1 2 HH=one\ncoincidence 1 2\n", 1),
            ("source 1 2 HH=1\n", 1),
        ];
        for (text, line) in cases {
            match parse_scheme(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn semantic_errors_surface() {
        let unnormalized = "source 1 2 HH=1 VV=1\ncoincidence 1 2\n";
        assert!(matches!(parse_scheme(unnormalized), Err(Error::Validation(_))));
        let bad_t = "source 1 2 HH=1\nsource 3 4 HH=1\npdbs 2 3 2 1\ncoincidence 1 2 3 4\n";
        assert!(matches!(parse_scheme(bad_t), Err(Error::Validation(_))));
    }
}
