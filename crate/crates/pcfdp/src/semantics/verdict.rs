use std::fmt;

/// Three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

/// A truth value plus a flag recording whether its computation involved a
/// truncated quantifier domain or consumed fuel. A clear (unbounded)
/// True or False is trustworthy; a bounded one is best-effort.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub truth: Truth,
    pub bounded: bool,
}

impl Verdict {
    pub const TRUE: Verdict = Verdict { truth: Truth::True, bounded: false };
    pub const FALSE: Verdict = Verdict { truth: Truth::False, bounded: false };

    pub fn of(truth: Truth, bounded: bool) -> Verdict {
        Verdict { truth, bounded }
    }

    pub fn unknown() -> Verdict {
        Verdict { truth: Truth::Unknown, bounded: true }
    }

    pub fn is_clear_true(&self) -> bool {
        self.truth == Truth::True && !self.bounded
    }

    pub fn is_clear_false(&self) -> bool {
        self.truth == Truth::False && !self.bounded
    }

    pub fn is_true(&self) -> bool {
        self.truth == Truth::True
    }

    pub fn is_false(&self) -> bool {
        self.truth == Truth::False
    }

    pub fn mark_bounded(self) -> Verdict {
        Verdict { bounded: true, ..self }
    }

    /// Kleene negation.
    pub fn negate(self) -> Verdict {
        let truth = match self.truth {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        };
        Verdict { truth, ..self }
    }

    /// Kleene conjunction. A decisive False wins outright and keeps only
    /// its own bounded flag: False-and-anything is False.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self.truth, other.truth) {
            (Truth::False, _) => self,
            (_, Truth::False) => other,
            (Truth::True, Truth::True) => {
                Verdict { truth: Truth::True, bounded: self.bounded || other.bounded }
            }
            _ => Verdict { truth: Truth::Unknown, bounded: self.bounded || other.bounded },
        }
    }

    /// Kleene disjunction; dual to `and`.
    pub fn or(self, other: Verdict) -> Verdict {
        self.negate().and(other.negate()).negate()
    }

    pub fn implies(self, other: Verdict) -> Verdict {
        self.negate().or(other)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = match self.truth {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Unknown => "unknown",
        };
        if self.bounded {
            write!(f, "{} (bounded)", word)
        } else {
            write!(f, "{}", word)
        }
    }
}
