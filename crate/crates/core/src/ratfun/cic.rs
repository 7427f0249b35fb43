//! Expressions over the two generators `f(s) = 1/s` and `g(s) = 1` built by
//! positive scaling, summation and inversion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rational::{Rational, RationalMatrixFunction};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "kebab-case")]
pub enum CicNode {
    /// `1/s`, lifted to `(1/s) I_m`.
    GeneratorF,
    /// `1`, lifted to `I_m`.
    GeneratorG,
    Leaf {
        function: RationalMatrixFunction,
    },
    Scale {
        factor: f64,
        child: Box<CicNode>,
    },
    Sum {
        children: Vec<CicNode>,
    },
    Inverse {
        child: Box<CicNode>,
    },
}

impl CicNode {
    pub fn f() -> Self {
        Self::GeneratorF
    }

    pub fn g() -> Self {
        Self::GeneratorG
    }

    pub fn leaf(function: RationalMatrixFunction) -> Self {
        Self::Leaf { function }
    }

    pub fn scale(factor: f64, child: CicNode) -> Self {
        Self::Scale {
            factor,
            child: Box::new(child),
        }
    }

    pub fn sum(children: Vec<CicNode>) -> Self {
        Self::Sum { children }
    }

    pub fn inverse(child: CicNode) -> Self {
        Self::Inverse {
            child: Box::new(child),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::GeneratorF | Self::GeneratorG | Self::Leaf { .. } => 0,
            Self::Scale { child, .. } | Self::Inverse { child } => 1 + child.depth(),
            Self::Sum { children } => 1 + children.iter().map(Self::depth).max().unwrap_or(0),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::GeneratorF | Self::GeneratorG | Self::Leaf { .. } => Ok(()),
            Self::Scale { factor, child } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "scale factor must be positive, got {factor}"
                    )));
                }
                child.validate()
            }
            Self::Sum { children } => {
                if children.is_empty() {
                    return Err(Error::InvalidArgument("empty sum".into()));
                }
                children.iter().try_for_each(Self::validate)
            }
            Self::Inverse { child } => child.validate(),
        }
    }
}

/// Expression tree together with the matrix size generators are lifted to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CicExpression {
    pub size: usize,
    pub root: CicNode,
}

impl CicExpression {
    pub fn new(size: usize, root: CicNode) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("size must be at least 1".into()));
        }
        root.validate()?;
        Ok(Self { size, root })
    }

    pub fn scalar(root: CicNode) -> Result<Self> {
        Self::new(1, root)
    }
}

pub fn cic_eval(expr: &CicExpression) -> Result<RationalMatrixFunction> {
    expr.root.validate()?;
    eval_node(&expr.root, expr.size)
}

fn eval_node(node: &CicNode, m: usize) -> Result<RationalMatrixFunction> {
    match node {
        CicNode::GeneratorF => Ok(RationalMatrixFunction::scalar_identity(
            &Rational::one_over_s(),
            m,
        )),
        CicNode::GeneratorG => Ok(RationalMatrixFunction::identity(m)),
        CicNode::Leaf { function } => {
            if function.size() != m {
                return Err(Error::Shape(format!(
                    "leaf of size {} in a size-{m} expression",
                    function.size()
                )));
            }
            Ok(function.clone())
        }
        CicNode::Scale { factor, child } => Ok(eval_node(child, m)?.scale(*factor)),
        CicNode::Sum { children } => {
            let mut it = children.iter();
            let first = it
                .next()
                .ok_or_else(|| Error::InvalidArgument("empty sum".into()))?;
            it.try_fold(eval_node(first, m)?, |acc, c| acc.add(&eval_node(c, m)?))
        }
        CicNode::Inverse { child } => eval_node(child, m)?.inverse(),
    }
}

/// Seeded random expression of depth at most `depth`; scale factors are
/// log-uniform on `[1e-2, 1e2]`.
pub fn cic_sample(depth: usize, seed: u64, m: usize) -> Result<CicExpression> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CicExpression::new(m, sample_node(depth, &mut rng))
}

fn sample_generator<R: Rng>(rng: &mut R) -> CicNode {
    if rng.random_bool(0.5) {
        CicNode::f()
    } else {
        CicNode::g()
    }
}

fn sample_node<R: Rng>(depth: usize, rng: &mut R) -> CicNode {
    if depth == 0 {
        return sample_generator(rng);
    }
    match rng.random_range(0..4) {
        0 => sample_generator(rng),
        1 => {
            let factor = 10f64.powf(rng.random_range(-2.0..=2.0));
            CicNode::scale(factor, sample_node(depth - 1, rng))
        }
        2 => CicNode::sum(vec![
            sample_node(depth - 1, rng),
            sample_node(depth - 1, rng),
        ]),
        _ => CicNode::inverse(sample_node(depth - 1, rng)),
    }
}
