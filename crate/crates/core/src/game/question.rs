use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GameError, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Add,
    Sub,
    Mul,
    Div,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::Add, Operator::Sub, Operator::Mul, Operator::Div];

    pub fn symbol(self) -> char {
        match self {
            Operator::Add => '+',
            Operator::Sub => '-',
            Operator::Mul => '×',
            Operator::Div => '÷',
        }
    }

    /// Operators offered at `level`.
    pub fn available(level: Level) -> &'static [Operator] {
        if level == Level::ONE {
            &Operator::ALL[..2]
        } else {
            &Operator::ALL
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::Add => "add",
            Operator::Sub => "sub",
            Operator::Mul => "mul",
            Operator::Div => "div",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Question {
    pub id: u64,
    pub level: Level,
    pub operator: Operator,
    /// Minuend for subtraction, dividend for division.
    pub left: i64,
    pub right: i64,
    pub answer: i64,
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.operator.symbol(), self.right)
    }
}

/// Draws an operator uniformly from those offered at `level`, then the
/// operands for it.
pub fn generate_question<R: Rng + ?Sized>(level: Level, rng: &mut R) -> Question {
    let ops = Operator::available(level);
    let op = ops[rng.random_range(0..ops.len())];
    generate_for(level, op, rng).expect("operator offered at level")
}

pub fn generate_for<R: Rng + ?Sized>(level: Level, op: Operator, rng: &mut R) -> Result<Question, GameError> {
    let (left, right, answer) = match (level.get(), op) {
        (1, Operator::Add) => sum(rng, 0, 10),
        (1, Operator::Sub) => ordered_difference(rng, 0, 10),
        (1, _) => return Err(GameError::OperatorUnavailable { level, op }),
        (2, Operator::Add) => sum(rng, 0, 50),
        (2, Operator::Sub) => ordered_difference(rng, 0, 50),
        (2, Operator::Mul) => product(rng, 0, 10),
        (2, Operator::Div) => {
            let right = rng.random_range(1..=10);
            let answer = rng.random_range(0..=10 / right);
            (right * answer, right, answer)
        }
        (_, Operator::Add) => sum(rng, -100, 100),
        (_, Operator::Sub) => {
            let (l, r) = (rng.random_range(-100..=100), rng.random_range(-100..=100));
            (l, r, l - r)
        }
        (_, Operator::Mul) => product(rng, -10, 10),
        (_, Operator::Div) => {
            let right = loop {
                let r: i64 = rng.random_range(-100..=100);
                if r != 0 {
                    break r;
                }
            };
            let bound = 100 / right.abs();
            let answer = rng.random_range(-bound..=bound);
            (right * answer, right, answer)
        }
    };
    Ok(Question {
        id: rng.random(),
        level,
        operator: op,
        left,
        right,
        answer,
    })
}

fn sum<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> (i64, i64, i64) {
    let (l, r) = (rng.random_range(lo..=hi), rng.random_range(lo..=hi));
    (l, r, l + r)
}

fn product<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> (i64, i64, i64) {
    let (l, r) = (rng.random_range(lo..=hi), rng.random_range(lo..=hi));
    (l, r, l * r)
}

/// Uniform over pairs with `left > right`.
fn ordered_difference<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> (i64, i64, i64) {
    loop {
        let (l, r) = (rng.random_range(lo..=hi), rng.random_range(lo..=hi));
        if l > r {
            return (l, r, l - r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn level_one_has_no_mul_or_div() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..2000 {
            let q = generate_question(Level::ONE, &mut rng);
            assert!(matches!(q.operator, Operator::Add | Operator::Sub));
        }
        assert!(generate_for(Level::ONE, Operator::Div, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_questions() {
        let a: Vec<Question> = {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            (0..50).map(|_| generate_question(Level::THREE, &mut rng)).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b: Vec<Question> = (0..50).map(|_| generate_question(Level::THREE, &mut rng)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn every_operator_appears_at_upper_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for level in [Level::TWO, Level::THREE] {
            let seen: std::collections::HashSet<Operator> =
                (0..400).map(|_| generate_question(level, &mut rng).operator).collect();
            assert_eq!(seen.len(), 4);
        }
    }
}
