use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use super::Expr;
use crate::fpn::{Dyadic, Sign};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("division is not supported (column {column})")]
    Division { column: usize },
    #[error("constant `{literal}` at column {column} is not a finite binary64")]
    ConstantOutOfRange { column: usize, literal: String },
    #[error("placeholder _{missing} is missing (highest placeholder is _{max})")]
    PlaceholderGap { missing: usize, max: usize },
}

/// Parses the infix expression grammar: `+ - *` with the usual precedence,
/// parentheses, placeholders `_k` (k ≥ 1) and decimal or C99 hexadecimal
/// floating constants. Decimal constants are rounded once to binary64.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.unexpected());
    }
    e.arity()?;
    Ok(e)
}

/// Parses a single decimal or hexadecimal floating literal, optionally signed.
pub fn parse_f64_literal(text: &str) -> Result<f64, ParseError> {
    let mut p = Parser {
        src: text.trim().as_bytes(),
        pos: 0,
    };
    let negative = p.eat(b'-');
    if !negative {
        p.eat(b'+');
    }
    let start = p.pos;
    let v = p.number(negative)?;
    if p.pos < p.src.len() {
        return Err(ParseError::Syntax {
            column: start + 1,
            message: format!("trailing characters in literal `{}`", text.trim()),
        });
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self) -> ParseError {
        let message = match self.src.get(self.pos) {
            None => "unexpected end of input".to_string(),
            Some(c) => format!("unexpected character `{}`", *c as char),
        };
        ParseError::Syntax {
            column: self.pos + 1,
            message,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = lhs * self.factor()?;
                }
                Some(b'/') => return Err(ParseError::Division { column: self.pos + 1 }),
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.unexpected());
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'_') => {
                let column = self.pos + 1;
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match digits.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(Expr::Input(k)),
                    _ => Err(ParseError::Syntax {
                        column,
                        message: "placeholders are `_1`, `_2`, ...".to_string(),
                    }),
                }
            }
            Some(b'-') => {
                self.pos += 1;
                self.skip_ws();
                Ok(Expr::Constant(self.number(true)?))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Constant(self.number(false)?)),
            _ => Err(self.unexpected()),
        }
    }

    fn number(&mut self, negative: bool) -> Result<f64, ParseError> {
        let start = self.pos;
        let hex = self.src[self.pos..].starts_with(b"0x") || self.src[self.pos..].starts_with(b"0X");
        let value = if hex {
            self.pos += 2;
            self.hex_number(start, negative)?
        } else {
            self.decimal_number(start, negative)?
        };
        if !value.is_finite() {
            return Err(ParseError::ConstantOutOfRange {
                column: start + 1,
                literal: String::from_utf8_lossy(&self.src[start..self.pos]).into_owned(),
            });
        }
        Ok(value)
    }

    fn digits(&mut self, pred: fn(&u8) -> bool) -> usize {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(pred) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn decimal_number(&mut self, start: usize, negative: bool) -> Result<f64, ParseError> {
        let mut n = self.digits(u8::is_ascii_digit);
        if self.eat(b'.') {
            n += self.digits(u8::is_ascii_digit);
        }
        if n == 0 {
            return Err(ParseError::Syntax {
                column: start + 1,
                message: "expected a number".to_string(),
            });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            self.pos += 1;
            if !self.eat(b'+') {
                self.eat(b'-');
            }
            if self.digits(u8::is_ascii_digit) == 0 {
                return Err(ParseError::Syntax {
                    column: self.pos + 1,
                    message: "missing exponent digits".to_string(),
                });
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
            column: start + 1,
            message: format!("malformed number `{text}`"),
        })?;
        Ok(if negative { -v } else { v })
    }

    fn hex_number(&mut self, start: usize, negative: bool) -> Result<f64, ParseError> {
        let mut mantissa = BigUint::zero();
        let mut frac_digits = 0i64;
        let mut n = 0;
        let mut seen_point = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c == b'.' && !seen_point {
                seen_point = true;
            } else if let Some(d) = (c as char).to_digit(16) {
                mantissa = mantissa * 16u32 + d;
                n += 1;
                if seen_point {
                    frac_digits += 1;
                }
            } else {
                break;
            }
            self.pos += 1;
        }
        if n == 0 || !matches!(self.src.get(self.pos), Some(b'p' | b'P')) {
            return Err(ParseError::Syntax {
                column: start + 1,
                message: "hexadecimal constants need digits and a `p` exponent".to_string(),
            });
        }
        self.pos += 1;
        let exp_start = self.pos;
        if !self.eat(b'+') {
            self.eat(b'-');
        }
        if self.digits(u8::is_ascii_digit) == 0 {
            return Err(ParseError::Syntax {
                column: self.pos + 1,
                message: "missing exponent digits".to_string(),
            });
        }
        let exp_text = std::str::from_utf8(&self.src[exp_start..self.pos]).unwrap();
        let exp: i64 = exp_text.parse().map_err(|_| ParseError::ConstantOutOfRange {
            column: start + 1,
            literal: String::from_utf8_lossy(&self.src[start..self.pos]).into_owned(),
        })?;
        let sign = if negative { Sign::Negative } else { Sign::Positive };
        let v = Dyadic::from_parts(sign, mantissa, exp - 4 * frac_digits).to_f64();
        Ok(if negative && v == 0.0 { -0.0 } else { v })
    }
}

/// Formats a binary64 exactly as a C99 hexadecimal floating literal.
pub fn format_hex_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 { (0, -1022) } else { (1, biased - 1023) };
    let digits = format!("{frac:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpn::pow2;
    use crate::predicates::Builtin;
    use proptest::prelude::*;

    fn x(i: usize) -> Expr {
        Expr::input(i)
    }

    #[test]
    fn parses_orient2d_listing() {
        let e = parse_expr("(_1 - _5)*(_4 - _6) - (_3 - _5)*(_2 - _6)").unwrap();
        assert_eq!(e, Builtin::Orient2d.expr());
        assert_eq!(e.arity().unwrap(), 6);
    }

    #[test]
    fn parses_single_placeholder() {
        assert_eq!(parse_expr("_1").unwrap(), x(1));
        assert_eq!(parse_expr("  ( _1 )\n").unwrap(), x(1));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse_expr("_1 - _2 - _3").unwrap(),
            (x(1) - x(2)) - x(3)
        );
        assert_eq!(
            parse_expr("_1 + _2 * _3").unwrap(),
            x(1) + x(2) * x(3)
        );
        assert_eq!(
            parse_expr("_1 * -2.5").unwrap(),
            x(1) * Expr::constant(-2.5)
        );
    }

    #[test]
    fn rejects_gap() {
        assert_eq!(
            parse_expr("_1 + _3"),
            Err(ParseError::PlaceholderGap { missing: 2, max: 3 })
        );
    }

    #[test]
    fn rejects_division_and_garbage() {
        assert_eq!(parse_expr("_1 / _2"), Err(ParseError::Division { column: 4 }));
        assert!(matches!(parse_expr("_1 +"), Err(ParseError::Syntax { column: 5, .. })));
        assert!(matches!(parse_expr("_0"), Err(ParseError::Syntax { column: 1, .. })));
        assert!(matches!(parse_expr("(_1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_expr("_1 _2"), Err(ParseError::Syntax { column: 4, .. })));
        assert!(matches!(parse_expr("0x1.8"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn rejects_non_finite_constants() {
        assert!(matches!(
            parse_expr("_1 * 1e400"),
            Err(ParseError::ConstantOutOfRange { column: 6, .. })
        ));
        assert!(matches!(
            parse_expr("0x1p1024"),
            Err(ParseError::ConstantOutOfRange { .. })
        ));
    }

    #[test]
    fn hex_literals() {
        assert_eq!(parse_f64_literal("0x1p-1074").unwrap(), pow2(-1074));
        assert_eq!(parse_f64_literal("0x1.8p1").unwrap(), 3.0);
        assert_eq!(parse_f64_literal("-0x.8p0").unwrap(), -0.5);
        assert_eq!(parse_f64_literal("0X1P+800").unwrap(), pow2(800));
        assert_eq!(parse_f64_literal("0.1").unwrap(), 0.1);
        // Rounds to nearest: 1 + 2^-53 is a tie that goes to 1.
        assert_eq!(parse_f64_literal("0x1.00000000000008p0").unwrap(), 1.0);
        assert!(parse_f64_literal("0.1x").is_err());
    }

    #[test]
    fn hex_formatting() {
        assert_eq!(format_hex_f64(1.0), "0x1p+0");
        assert_eq!(format_hex_f64(-3.0), "-0x1.8p+1");
        assert_eq!(format_hex_f64(pow2(-1074)), "0x0.0000000000001p-1022");
        assert_eq!(format_hex_f64(0.0), "0x0p+0");
    }

    #[test]
    fn builtins_round_trip() {
        for b in Builtin::ALL {
            let e = b.expr();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{b:?}");
        }
    }

    proptest! {
        #[test]
        fn hex_round_trip(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back = parse_f64_literal(&format_hex_f64(v)).unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }

        #[test]
        fn constants_round_trip(v in -1e300f64..1e300) {
            let e = x(1) * Expr::constant(v) - Expr::constant(-v);
            prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
        }
    }
}
