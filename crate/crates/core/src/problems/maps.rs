use crate::numerics::{Matrix, Scalar, Vector};

/// Smooth single-valued part `f` with analytic first and second derivatives.
///
/// `second_directional(x, h)` is the matrix of `v ↦ f''(x)(h, v)`; it must be
/// linear in `h` and symmetric in the sense
/// `second_directional(x, h1)·h2 = second_directional(x, h2)·h1`.
pub trait SmoothMap: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &Vector) -> Vector;
    fn jacobian(&self, x: &Vector) -> Matrix;
    fn second_directional(&self, x: &Vector, h: &Vector) -> Matrix;
}

fn one_by_one(v: Scalar) -> Matrix {
    Matrix::new(1, 1, vec![v]).expect("1x1")
}

/// `f(x) = sinh(x) + shift` on the real line.
#[derive(Clone, Debug)]
pub struct ShiftedSinh {
    pub shift: Scalar,
}

impl SmoothMap for ShiftedSinh {
    fn dim_in(&self) -> usize {
        1
    }

    fn dim_out(&self) -> usize {
        1
    }

    fn eval(&self, x: &Vector) -> Vector {
        Vector::new(vec![x[0].sinh() + &self.shift])
    }

    fn jacobian(&self, x: &Vector) -> Matrix {
        one_by_one(x[0].cosh())
    }

    fn second_directional(&self, x: &Vector, h: &Vector) -> Matrix {
        one_by_one(x[0].sinh() * &h[0])
    }
}

/// `f(x1, x2) = (exp(x1 - x2 - p) - q1, exp(x1 + x2 - p) - q2)`.
#[derive(Clone, Debug)]
pub struct ExpPair {
    pub p: Scalar,
    pub q1: Scalar,
    pub q2: Scalar,
}

impl ExpPair {
    fn exps(&self, x: &Vector) -> (Scalar, Scalar) {
        let e1 = (&x[0] - &x[1] - &self.p).exp();
        let e2 = (&x[0] + &x[1] - &self.p).exp();
        (e1, e2)
    }
}

impl SmoothMap for ExpPair {
    fn dim_in(&self) -> usize {
        2
    }

    fn dim_out(&self) -> usize {
        2
    }

    fn eval(&self, x: &Vector) -> Vector {
        let (e1, e2) = self.exps(x);
        Vector::new(vec![e1 - &self.q1, e2 - &self.q2])
    }

    fn jacobian(&self, x: &Vector) -> Matrix {
        let (e1, e2) = self.exps(x);
        Matrix::from_rows(vec![vec![e1.clone(), -e1], vec![e2.clone(), e2]]).expect("2x2")
    }

    fn second_directional(&self, x: &Vector, h: &Vector) -> Matrix {
        // f1'' = e1 (1,-1)ᵀ(1,-1), f2'' = e2 (1,1)ᵀ(1,1)
        let (e1, e2) = self.exps(x);
        let a = e1 * (&h[0] - &h[1]);
        let b = e2 * (&h[0] + &h[1]);
        Matrix::from_rows(vec![vec![a.clone(), -a], vec![b.clone(), b]]).expect("2x2")
    }
}

type EvalFn = dyn Fn(&Vector) -> Vector + Send + Sync;
type JacFn = dyn Fn(&Vector) -> Matrix + Send + Sync;
type SecondFn = dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync;

/// A smooth map assembled from user closures.
pub struct ClosureMap {
    dim: usize,
    eval: Box<EvalFn>,
    jacobian: Box<JacFn>,
    second: Box<SecondFn>,
}

impl ClosureMap {
    pub fn new(
        dim: usize,
        eval: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        jacobian: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
        second: impl Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        ClosureMap {
            dim,
            eval: Box::new(eval),
            jacobian: Box::new(jacobian),
            second: Box::new(second),
        }
    }

    /// Scalar map from `f`, `f'`, `f''`.
    pub fn scalar(
        f: impl Fn(&Scalar) -> Scalar + Send + Sync + 'static,
        df: impl Fn(&Scalar) -> Scalar + Send + Sync + 'static,
        d2f: impl Fn(&Scalar) -> Scalar + Send + Sync + 'static,
    ) -> Self {
        ClosureMap::new(
            1,
            move |x| Vector::new(vec![f(&x[0])]),
            move |x| one_by_one(df(&x[0])),
            move |x, h| one_by_one(d2f(&x[0]) * &h[0]),
        )
    }

    /// `f(x) = slope·x + offset`.
    pub fn affine_1d(slope: Scalar, offset: Scalar) -> Self {
        let s1 = slope.clone();
        let zero = Scalar::from_float(rug::Float::new(slope.prec()));
        ClosureMap::scalar(
            move |x| &s1 * x + &offset,
            move |_| slope.clone(),
            move |_| zero.clone(),
        )
    }
}

impl SmoothMap for ClosureMap {
    fn dim_in(&self) -> usize {
        self.dim
    }

    fn dim_out(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> Vector {
        (self.eval)(x)
    }

    fn jacobian(&self, x: &Vector) -> Matrix {
        (self.jacobian)(x)
    }

    fn second_directional(&self, x: &Vector, h: &Vector) -> Matrix {
        (self.second)(x, h)
    }
}
