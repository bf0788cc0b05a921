//! Exact power-sum inequalities behind the variable-shrinking bounds:
//!
//! ```text
//! (1)  (n+1) S_n(t)                 <= t (t+1)^n
//! (2)  (n+1) S_n(t)                 >= (t+1)^{n+1} - (n+1)^2/(2n+1) (t+1)^n
//! (3)  (2n+1) t S_{2n}(t)           <= (n+1)^2 S_n(t)^2
//! ```
//!
//! with `S_n(t) = sum_{k=1}^t k^n`. Everything is evaluated in exact
//! rational arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{pow, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub relation: Relation,
}

impl Inequality {
    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Le => self.lhs <= self.rhs,
            Relation::Ge => self.lhs >= self.rhs,
        }
    }

    /// `rhs - lhs` for `<=`, `lhs - rhs` for `>=`; non-negative iff it holds.
    pub fn slack(&self) -> BigRational {
        match self.relation {
            Relation::Le => &self.rhs - &self.lhs,
            Relation::Ge => &self.lhs - &self.rhs,
        }
    }

    pub fn lhs_f64(&self) -> f64 {
        self.lhs.to_f64().unwrap_or(f64::NAN)
    }

    pub fn rhs_f64(&self) -> f64 {
        self.rhs.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub n: u32,
    pub t: u64,
    pub lemma1: Inequality,
    pub lemma2: Inequality,
    pub lemma3: Inequality,
}

impl LemmaCheck {
    pub fn all_hold(&self) -> bool {
        self.lemma1.holds() && self.lemma2.holds() && self.lemma3.holds()
    }
}

fn int(x: u64) -> BigInt {
    BigInt::from(x)
}

fn assemble(n: u32, t: u64, sum_n: &BigInt, sum_2n: &BigInt) -> LemmaCheck {
    let n1 = int(u64::from(n) + 1);
    let n2 = int(2 * u64::from(n) + 1);
    let tp1_n = pow(int(t + 1), n as usize);
    let whole = |x: BigInt| BigRational::from_integer(x);

    let lemma1 = Inequality {
        lhs: whole(&n1 * sum_n),
        rhs: whole(int(t) * &tp1_n),
        relation: Relation::Le,
    };
    let lemma2 = Inequality {
        lhs: whole(&n1 * sum_n),
        rhs: whole(&tp1_n * int(t + 1)) - BigRational::new(&n1 * &n1 * &tp1_n, n2.clone()),
        relation: Relation::Ge,
    };
    let lemma3 = Inequality {
        lhs: whole(&n2 * int(t) * sum_2n),
        rhs: whole(&n1 * &n1 * sum_n * sum_n),
        relation: Relation::Le,
    };
    LemmaCheck {
        n,
        t,
        lemma1,
        lemma2,
        lemma3,
    }
}

/// Both sides of the three inequalities at `(n, t)`, by direct summation.
pub fn lemma_check(n: u32, t: u64) -> LemmaCheck {
    let mut sum_n = BigInt::zero();
    let mut sum_2n = BigInt::zero();
    for k in 1..=t {
        sum_n += pow(int(k), n as usize);
        sum_2n += pow(int(k), 2 * n as usize);
    }
    assemble(n, t, &sum_n, &sum_2n)
}

/// [`lemma_check`] for `t = 1..=t_max` at fixed `n`, extending the sums one
/// term at a time.
pub fn lemma_sweep(n: u32, t_max: u64) -> Vec<LemmaCheck> {
    let mut sum_n = BigInt::zero();
    let mut sum_2n = BigInt::zero();
    (1..=t_max)
        .map(|t| {
            let kn = pow(int(t), n as usize);
            sum_2n += &kn * &kn;
            sum_n += kn;
            assemble(n, t, &sum_n, &sum_2n)
        })
        .collect()
}
