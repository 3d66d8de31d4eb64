//! Line-oriented segment grammar.
//!
//! ```text
//! segment <kind> <params...> <lo> <hi|inf>
//! <kind> <params...> on (<lo>,<hi|inf>)
//! ```
//!
//! Kinds and parameters:
//!
//! ```text
//! power c beta          exp c rate         linear H          const c
//! sinh c rate           poly origin c0 c1 ...
//! tabulated t0 v0 t1 v1 ...
//! blend <kind> <params...> / <kind> <params...>
//! alternating beta H width
//! ```

use std::fmt::Write as _;

use super::{AlternatingPattern, MonotoneCubic, ProfileError, RadialProfile, Segment, SegmentKind, WarpingProfile};

fn parse_error(line: usize, message: impl Into<String>) -> ProfileError {
    ProfileError::Parse {
        line,
        message: message.into(),
    }
}

fn number(token: &str, line: usize, what: &str) -> Result<f64, ProfileError> {
    let value = match token {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        _ => token
            .parse::<f64>()
            .map_err(|_| parse_error(line, format!("cannot read {what} from '{token}'")))?,
    };
    if value.is_nan() {
        return Err(parse_error(line, format!("{what} is NaN")));
    }
    Ok(value)
}

fn numbers(tokens: &[&str], line: usize, kind: &str) -> Result<Vec<f64>, ProfileError> {
    tokens
        .iter()
        .map(|t| number(t, line, &format!("{kind} parameter")))
        .collect()
}

fn fixed<const N: usize>(tokens: &[&str], line: usize, kind: &str) -> Result<[f64; N], ProfileError> {
    if tokens.len() != N {
        return Err(parse_error(
            line,
            format!("'{kind}' takes {N} parameter(s), found {}", tokens.len()),
        ));
    }
    let v = numbers(tokens, line, kind)?;
    Ok(std::array::from_fn(|i| v[i]))
}

fn parse_kind(tokens: &[&str], line: usize) -> Result<SegmentKind, ProfileError> {
    let (&name, params) = tokens
        .split_first()
        .ok_or_else(|| parse_error(line, "missing segment kind"))?;
    let kind = match name {
        "power" => {
            let [coefficient, exponent] = fixed(params, line, name)?;
            SegmentKind::Power { coefficient, exponent }
        }
        "exp" | "exponential" => {
            let [coefficient, rate] = fixed(params, line, name)?;
            SegmentKind::Exponential { coefficient, rate }
        }
        "linear" => {
            let [slope] = fixed(params, line, name)?;
            SegmentKind::Linear { slope }
        }
        "const" | "constant" => {
            let [value] = fixed(params, line, name)?;
            SegmentKind::Constant { value }
        }
        "sinh" => {
            let [coefficient, rate] = fixed(params, line, name)?;
            SegmentKind::Sinh { coefficient, rate }
        }
        "poly" => {
            let v = numbers(params, line, name)?;
            if v.len() < 2 {
                return Err(parse_error(line, "'poly' needs an origin and at least one coefficient"));
            }
            SegmentKind::Polynomial {
                origin: v[0],
                coefficients: v[1..].to_vec(),
            }
        }
        "tabulated" => {
            let v = numbers(params, line, name)?;
            if v.len() % 2 != 0 {
                return Err(parse_error(line, "'tabulated' needs (t, value) pairs"));
            }
            let (xs, ys) = v.chunks(2).map(|c| (c[0], c[1])).unzip();
            SegmentKind::Tabulated(MonotoneCubic::new(xs, ys).map_err(|m| parse_error(line, m))?)
        }
        "blend" => {
            let split = params
                .iter()
                .position(|&t| t == "/")
                .ok_or_else(|| parse_error(line, "'blend' needs two kinds separated by '/'"))?;
            SegmentKind::Blend {
                from: Box::new(parse_kind(&params[..split], line)?),
                to: Box::new(parse_kind(&params[split + 1..], line)?),
            }
        }
        "alternating" => {
            let [beta, slope, width] = fixed(params, line, name)?;
            SegmentKind::Alternating(AlternatingPattern { beta, slope, width })
        }
        other => return Err(parse_error(line, format!("unknown segment kind '{other}'"))),
    };
    Ok(kind)
}

/// Parses one segment line (with or without the leading `segment` keyword).
pub fn parse_segment_line(text: &str, line: usize) -> Result<Segment, ProfileError> {
    let text = text.split('#').next().unwrap_or("").trim();
    let text = text.strip_prefix("segment").map(str::trim_start).unwrap_or(text);
    if let Some((head, interval)) = text.split_once(" on ") {
        let interval = interval.trim();
        let inner = interval
            .strip_prefix(['(', '['])
            .and_then(|s| s.strip_suffix([')', ']']))
            .ok_or_else(|| parse_error(line, format!("malformed interval '{interval}'")))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| parse_error(line, format!("malformed interval '{interval}'")))?;
        let tokens: Vec<&str> = head.split_whitespace().collect();
        return Ok(Segment::new(
            parse_kind(&tokens, line)?,
            number(lo.trim(), line, "lower end")?,
            number(hi.trim(), line, "upper end")?,
        ));
    }
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() < 3 {
        return Err(parse_error(line, "segment needs a kind, parameters and an interval"));
    }
    let (kind, ends) = tokens.split_at(tokens.len() - 2);
    Ok(Segment::new(
        parse_kind(kind, line)?,
        number(ends[0], line, "lower end")?,
        number(ends[1], line, "upper end")?,
    ))
}

/// Segment lines of `text`, skipping blanks and `#` comments. Every other
/// line must be a segment.
pub fn parse_segment_lines(text: &str) -> Result<Vec<Segment>, ProfileError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        out.push(parse_segment_line(body, i + 1)?);
    }
    Ok(out)
}

pub fn parse_warping(text: &str) -> Result<WarpingProfile, ProfileError> {
    WarpingProfile::new(parse_segment_lines(text)?)
}

pub fn parse_radial(text: &str) -> Result<RadialProfile, ProfileError> {
    RadialProfile::new(parse_segment_lines(text)?)
}

fn render_kind(kind: &SegmentKind, out: &mut String) {
    let _ = match kind {
        SegmentKind::Power { coefficient, exponent } => write!(out, "power {coefficient} {exponent}"),
        SegmentKind::Exponential { coefficient, rate } => write!(out, "exp {coefficient} {rate}"),
        SegmentKind::Linear { slope } => write!(out, "linear {slope}"),
        SegmentKind::Constant { value } => write!(out, "const {value}"),
        SegmentKind::Sinh { coefficient, rate } => write!(out, "sinh {coefficient} {rate}"),
        SegmentKind::Polynomial { origin, coefficients } => {
            let _ = write!(out, "poly {origin}");
            for c in coefficients {
                let _ = write!(out, " {c}");
            }
            Ok(())
        }
        SegmentKind::Tabulated(m) => {
            out.push_str("tabulated");
            for (t, v) in m.samples() {
                let _ = write!(out, " {t} {v}");
            }
            Ok(())
        }
        SegmentKind::Blend { from, to } => {
            out.push_str("blend ");
            render_kind(from, out);
            out.push_str(" / ");
            render_kind(to, out);
            Ok(())
        }
        SegmentKind::Alternating(p) => write!(out, "alternating {} {} {}", p.beta, p.slope, p.width),
    };
}

/// One `segment ...` line per segment; [`parse_segment_lines`] reads it back
/// exactly.
pub fn render(segments: &[Segment]) -> String {
    let mut out = String::new();
    for seg in segments {
        out.push_str("segment ");
        render_kind(&seg.kind, &mut out);
        let hi = if seg.hi.is_infinite() {
            "inf".to_string()
        } else {
            seg.hi.to_string()
        };
        let _ = writeln!(out, " {} {hi}", seg.lo);
    }
    out
}
