use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

/// A signed real stored as `sign · 2^log2`, for magnitudes far outside the
/// range of `f64` (products of many `2^|T|` factors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogReal {
    sign: i8,
    log2: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        log2: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal { sign: 1, log2: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: if v > 0.0 { 1 } else { -1 },
                log2: v.abs().log2(),
            }
        }
    }

    /// `2^e`.
    pub fn pow2(e: f64) -> Self {
        LogReal { sign: 1, log2: e }
    }

    /// `|base|^e` for `e ≥ 0`, with `0^0 = 1`.
    pub fn powi(base: f64, e: u64) -> Self {
        if e == 0 {
            LogReal::ONE
        } else if base == 0.0 {
            LogReal::ZERO
        } else {
            let sign = if base < 0.0 && e % 2 == 1 { -1 } else { 1 };
            LogReal {
                sign,
                log2: base.abs().log2() * e as f64,
            }
        }
    }

    pub fn signum(self) -> i8 {
        self.sign
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// `log2 |self|`; `-inf` for zero.
    pub fn log2_abs(self) -> f64 {
        self.log2
    }

    /// The value as `f64`; `±inf` when it does not fit.
    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log2.exp2()
        }
    }

    pub fn abs(self) -> Self {
        LogReal {
            sign: self.sign.abs(),
            log2: self.log2,
        }
    }

    /// Square root of a non-negative value.
    pub fn sqrt(self) -> Self {
        assert!(self.sign >= 0, "square root of a negative LogReal");
        if self.sign == 0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: 1,
                log2: self.log2 / 2.0,
            }
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl std::ops::Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            log2: self.log2,
        }
    }
}

impl std::ops::Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: self.sign * rhs.sign,
                log2: self.log2 + rhs.log2,
            }
        }
    }
}

impl std::ops::Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        assert!(rhs.sign != 0, "division by zero");
        if self.sign == 0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: self.sign * rhs.sign,
                log2: self.log2 - rhs.log2,
            }
        }
    }
}

impl std::ops::Add for LogReal {
    type Output = LogReal;
    fn add(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log2 >= rhs.log2 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let t = (small.log2 - big.log2).exp2();
        if big.sign == small.sign {
            LogReal {
                sign: big.sign,
                log2: big.log2 + t.ln_1p() / std::f64::consts::LN_2,
            }
        } else if t >= 1.0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: big.sign,
                log2: big.log2 + (-t).ln_1p() / std::f64::consts::LN_2,
            }
        }
    }
}

impl std::ops::Sub for LogReal {
    type Output = LogReal;
    fn sub(self, rhs: LogReal) -> LogReal {
        self + (-rhs)
    }
}

impl std::iter::Sum for LogReal {
    fn sum<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        iter.fold(LogReal::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log2.partial_cmp(&other.log2),
                _ => other.log2.partial_cmp(&self.log2),
            },
            o => Some(o),
        }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() {
            write!(f, "{v}")
        } else {
            let s = if self.sign < 0 { "-" } else { "" };
            write!(f, "{s}2^{:.3}", self.log2)
        }
    }
}

/// Serialized as the `f64` value (`null` when out of range).
impl Serialize for LogReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.to_f64();
        if v.is_finite() {
            s.serialize_f64(v)
        } else {
            s.serialize_none()
        }
    }
}
