//! Exact solution of the partially linearized inclusions
//! `0 ∈ c + B(x - base) + F(x)` by enumerating branch patterns.
//!
//! For every legal assignment of a branch to each coordinate the inclusion
//! reduces to a linear system: coordinates on a `Zero` branch are pinned to an
//! exact 0 and the remaining ones solve `g_J = target_J` with
//! `g = c + B(x - base)`. A candidate is kept when its strict sign constraints
//! and interval constraints hold. Among feasible candidates the one nearest
//! to `base` wins; ties go to the lexicographically first pattern.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{euclidean_norm, solve_linear, Matrix, PrecisionContext, Scalar, Vector};
use crate::problems::{BranchKind, ProblemInstance, SetValuedMap};

/// Branch chosen for one coordinate. Ordering is the tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BranchState {
    Neg,
    Zero,
    Pos,
    Free,
}

impl BranchState {
    fn legal_for(kind: BranchKind) -> &'static [BranchState] {
        match kind {
            BranchKind::ZeroMap => &[BranchState::Free],
            BranchKind::F1 => &[BranchState::Zero, BranchState::Pos],
            BranchKind::F2 => &[BranchState::Neg, BranchState::Zero, BranchState::Pos],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchPattern(pub Vec<BranchState>);

impl BranchPattern {
    /// Every legal pattern for `set_map`, in lexicographic order.
    pub fn enumerate(set_map: &SetValuedMap) -> Vec<BranchPattern> {
        let mut patterns = vec![Vec::with_capacity(set_map.dim())];
        for &kind in set_map.coords() {
            patterns = patterns
                .into_iter()
                .flat_map(|prefix| {
                    BranchState::legal_for(kind).iter().map(move |&s| {
                        let mut p = prefix.clone();
                        p.push(s);
                        p
                    })
                })
                .collect();
        }
        patterns.into_iter().map(BranchPattern).collect()
    }
}

impl fmt::Display for BranchPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self
            .0
            .iter()
            .map(|s| match s {
                BranchState::Neg => "NEG",
                BranchState::Zero => "ZERO",
                BranchState::Pos => "POS",
                BranchState::Free => "FREE",
            })
            .collect();
        f.write_str(&names.join(","))
    }
}

/// The inclusion `0 ∈ c + B(x - base) + F(x)`.
#[derive(Clone, Debug)]
pub struct SubproblemSpec {
    pub c: Vector,
    pub b: Matrix,
    pub base: Vector,
    pub set_map: SetValuedMap,
    pub ctx: PrecisionContext,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemSolution {
    pub x: Vector,
    pub pattern: BranchPattern,
    pub verified_residual: Scalar,
}

impl SubproblemSpec {
    fn check_dims(&self) -> Result<usize> {
        let n = self.set_map.dim();
        for found in [self.c.dim(), self.base.dim(), self.b.rows(), self.b.cols()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(n)
    }

    /// `c + B(x - base)`.
    pub fn linearization(&self, x: &Vector) -> Vector {
        let step = x.sub(&self.base);
        self.c.add(&self.b.mul_vec(&step).expect("dimension checked"))
    }

    /// Tolerance on the equality rows: `10^(50 - digits)·(1 + ‖c‖)`, with the
    /// exponent capped at `-ceil(digits/2)` so low precisions stay meaningful.
    pub fn equality_tolerance(&self) -> Scalar {
        let d = self.ctx.digits() as i32;
        let exp = (50 - d).min(-(d + 1) / 2);
        self.ctx.pow10(exp) * (self.ctx.one() + euclidean_norm(&self.c))
    }

    /// Checks `x` against `pattern` and returns the residual norm when every
    /// branch constraint holds.
    pub fn verify(&self, x: &Vector, pattern: &BranchPattern) -> Option<Scalar> {
        let g = self.linearization(x);
        let tol = self.equality_tolerance();
        let one = self.ctx.one();
        let mut dists = Vec::with_capacity(x.dim());
        for (i, (&kind, &state)) in self.set_map.coords().iter().zip(&pattern.0).enumerate() {
            let gi = &g[i];
            let xi = &x[i];
            let d = match (kind, state) {
                (BranchKind::ZeroMap, BranchState::Free) => gi.abs(),
                (BranchKind::F1, BranchState::Pos) | (BranchKind::F2, BranchState::Pos) if !xi.is_positive() => {
                    return None
                }
                (BranchKind::F2, BranchState::Neg) if !xi.is_negative() => return None,
                (_, BranchState::Zero) if !xi.is_zero() => return None,
                (BranchKind::F1, BranchState::Pos) => gi.abs(),
                (BranchKind::F1, BranchState::Zero) => {
                    if *gi > tol {
                        return None;
                    }
                    gi.max(&self.ctx.zero())
                }
                (BranchKind::F2, BranchState::Neg) => (gi - &one).abs(),
                (BranchKind::F2, BranchState::Pos) => (gi + &one).abs(),
                (BranchKind::F2, BranchState::Zero) => {
                    let excess = gi.abs() - &one;
                    if excess > tol {
                        return None;
                    }
                    excess.max(&self.ctx.zero())
                }
                _ => return None,
            };
            if d > tol {
                return None;
            }
            dists.push(d);
        }
        Some(euclidean_norm(&Vector::new(dists)))
    }

    /// Candidate point for one pattern, or `None` when its reduced system is
    /// singular.
    fn candidate(&self, pattern: &BranchPattern) -> Result<Option<Vector>> {
        let n = self.set_map.dim();
        let ctx = &self.ctx;
        let free: Vec<usize> = (0..n).filter(|&i| pattern.0[i] != BranchState::Zero).collect();
        let pinned: Vec<usize> = (0..n).filter(|&i| pattern.0[i] == BranchState::Zero).collect();

        let mut x = self.base.clone();
        for &i in &pinned {
            x[i] = ctx.zero();
        }
        if free.is_empty() {
            return Ok(Some(x));
        }

        // B_JJ d_J = target_J - c_J - B_JZ d_Z with d = x - base
        let rhs = Vector::new(
            free.iter()
                .map(|&i| {
                    let target = match pattern.0[i] {
                        BranchState::Neg => ctx.one(),
                        BranchState::Pos if self.set_map.coords()[i] == BranchKind::F2 => -ctx.one(),
                        _ => ctx.zero(),
                    };
                    let mut r = target - &self.c[i];
                    for &j in &pinned {
                        r = r + &self.b[(i, j)] * &self.base[j];
                    }
                    r
                })
                .collect(),
        );
        let reduced = self.b.select(&free, &free);
        let step = match solve_linear(&reduced, &rhs, ctx) {
            Ok(step) => step,
            Err(Error::SingularMatrix) => return Ok(None),
            Err(e) => return Err(e),
        };
        for (k, &i) in free.iter().enumerate() {
            x[i] = &self.base[i] + &step[k];
        }
        Ok(Some(x))
    }
}

/// Solves the inclusion by exhaustive branch-pattern enumeration.
pub fn solve_inclusion(spec: &SubproblemSpec) -> Result<SubproblemSolution> {
    spec.check_dims()?;
    if !spec.c.is_finite() || !spec.b.is_finite() || !spec.base.is_finite() {
        return Err(Error::NonFinite("subproblem data"));
    }
    let mut best: Option<(Scalar, SubproblemSolution)> = None;
    for pattern in BranchPattern::enumerate(&spec.set_map) {
        let Some(x) = spec.candidate(&pattern)? else { continue };
        if !x.is_finite() {
            continue;
        }
        let Some(residual) = spec.verify(&x, &pattern) else {
            continue;
        };
        let dist = euclidean_norm(&x.sub(&spec.base));
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((
                dist,
                SubproblemSolution {
                    x,
                    pattern,
                    verified_residual: residual,
                },
            ));
        }
    }
    best.map(|(_, s)| s).ok_or(Error::NoSolution)
}

/// Josephy–Newton inclusion at `x_k`: `c = f(x_k)`, `B = f'(x_k)`.
pub fn newton_operator(problem: &ProblemInstance, x_k: &Vector) -> SubproblemSpec {
    SubproblemSpec {
        c: problem.f.eval(x_k),
        b: problem.f.jacobian(x_k),
        base: x_k.clone(),
        set_map: problem.set_map.clone(),
        ctx: problem.ctx,
    }
}

/// Halley corrector inclusion: `B = f'(x_k) + ½ f''(x_k)(u_next - x_k)`.
pub fn halley_operator(problem: &ProblemInstance, x_k: &Vector, u_next: &Vector) -> SubproblemSpec {
    let half = problem.ctx.ratio(1, 2);
    let direction = u_next.sub(x_k);
    let jac = problem.f.jacobian(x_k);
    let second = problem.f.second_directional(x_k, &direction);
    let b = jac.add(&second.scale(&half)).expect("same shape");
    SubproblemSpec {
        c: problem.f.eval(x_k),
        b,
        base: x_k.clone(),
        set_map: problem.set_map.clone(),
        ctx: problem.ctx,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::builtin;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(100).unwrap()
    }

    fn spec_1d(kind: BranchKind, c: i64, b: i64, base: i64) -> SubproblemSpec {
        let ctx = ctx();
        SubproblemSpec {
            c: Vector::new(vec![ctx.int(c)]),
            b: Matrix::new(1, 1, vec![ctx.int(b)]).unwrap(),
            base: Vector::new(vec![ctx.int(base)]),
            set_map: SetValuedMap::new(vec![kind]),
            ctx,
        }
    }

    #[test]
    fn pattern_enumeration_order() {
        let pats = BranchPattern::enumerate(&SetValuedMap::new(vec![BranchKind::F2, BranchKind::F1]));
        let shown: Vec<String> = pats.iter().map(ToString::to_string).collect();
        assert_eq!(
            shown,
            ["NEG,ZERO", "NEG,POS", "ZERO,ZERO", "ZERO,POS", "POS,ZERO", "POS,POS"]
        );
        assert!(pats.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(BranchPattern::enumerate(&SetValuedMap::zero(3)).len(), 1);
    }

    #[test]
    fn f2_neg_branch() {
        let s = solve_inclusion(&spec_1d(BranchKind::F2, 2, 1, 0)).unwrap();
        assert_eq!(s.x[0], ctx().int(-1));
        assert_eq!(s.pattern, BranchPattern(vec![BranchState::Neg]));
    }

    #[test]
    fn f1_pos_branch() {
        // x = 3 solves the POS branch, but x = 0 is feasible too and sits on the base
        let spec = spec_1d(BranchKind::F1, -3, 1, 0);
        let pos = BranchPattern(vec![BranchState::Pos]);
        let three = Vector::new(vec![ctx().int(3)]);
        assert!(spec.verify(&three, &pos).unwrap().is_zero());
        let s = solve_inclusion(&spec).unwrap();
        assert!(s.x[0].is_zero());
        // from base 2 the POS root is nearer
        let s = solve_inclusion(&spec_1d(BranchKind::F1, -1, 1, 2)).unwrap();
        assert_eq!(s.x[0], ctx().int(3));
        assert_eq!(s.pattern, pos);
        assert!(s.verified_residual.is_zero());
    }

    #[test]
    fn f1_infeasible() {
        assert_eq!(
            solve_inclusion(&spec_1d(BranchKind::F1, 3, 1, 0)),
            Err(Error::NoSolution)
        );
    }

    #[test]
    fn f1_prefers_nearest_feasible_candidate() {
        // POS gives x = 5 (distance 1 from base 4); ZERO gives x = 0 with g = -1 - 4 <= 0
        let s = solve_inclusion(&spec_1d(BranchKind::F1, -1, 1, 4)).unwrap();
        assert_eq!(s.x[0], ctx().int(5));
        // from base 1: POS x = 2 (distance 1) vs ZERO (distance 1): tie goes to ZERO
        let s = solve_inclusion(&spec_1d(BranchKind::F1, -1, 1, 1)).unwrap();
        assert_eq!(s.pattern, BranchPattern(vec![BranchState::Zero]));
        assert!(s.x[0].is_zero());
    }

    #[test]
    fn f2_zero_branch_is_exact_zero() {
        let s = solve_inclusion(&spec_1d(BranchKind::F2, 0, 3, 0)).unwrap();
        assert!(s.x[0].is_zero());
        assert_eq!(s.pattern, BranchPattern(vec![BranchState::Zero]));
    }

    #[test]
    fn singular_everywhere_is_no_solution() {
        assert_eq!(
            solve_inclusion(&spec_1d(BranchKind::ZeroMap, 1, 0, 0)),
            Err(Error::NoSolution)
        );
    }

    #[test]
    fn dimension_and_finiteness_checks() {
        let mut s = spec_1d(BranchKind::F2, 2, 1, 0);
        s.base = Vector::new(vec![ctx().one(), ctx().one()]);
        assert!(matches!(solve_inclusion(&s), Err(Error::DimensionMismatch { .. })));
        let mut s = spec_1d(BranchKind::F2, 2, 1, 0);
        s.c = Vector::new(vec![ctx().infinity()]);
        assert_eq!(solve_inclusion(&s), Err(Error::NonFinite("subproblem data")));
    }

    #[test]
    fn newton_operator_fields() {
        let c = ctx();
        let p = builtin("ex1i", c).unwrap();
        let six = c.int(6);
        let spec = newton_operator(&p, &Vector::new(vec![six.clone()]));
        assert_eq!(spec.c[0], six.sinh() - c.ratio(3, 8));
        assert_eq!(spec.b[(0, 0)], six.cosh());
        assert_eq!(spec.base[0], six);

        let p = builtin("ex2i", c).unwrap();
        let x = Vector::new(vec![c.int(1), c.int(-1)]);
        let spec = newton_operator(&p, &x);
        assert_eq!(spec.c, p.f.eval(&x));
        assert_eq!(spec.b, p.f.jacobian(&x));
    }

    #[test]
    fn halley_operator_degenerates_and_scales() {
        let c = ctx();
        let p = builtin("ex2i", c).unwrap();
        let x = Vector::new(vec![c.int(1), c.int(-1)]);
        assert_eq!(halley_operator(&p, &x, &x).b, p.f.jacobian(&x));

        let u = Vector::new(vec![c.ratio(3, 2), c.ratio(-1, 4)]);
        let half_u = x.add(&u.sub(&x).scale(&c.ratio(1, 2)));
        let jac = p.f.jacobian(&x);
        let full = halley_operator(&p, &x, &u).b;
        let half = halley_operator(&p, &x, &half_u).b;
        for i in 0..2 {
            for j in 0..2 {
                let d_full = &full[(i, j)] - &jac[(i, j)];
                let d_half = &half[(i, j)] - &jac[(i, j)];
                let gap = (d_full - d_half * c.int(2)).abs();
                assert!(gap < c.pow10(-95));
            }
        }
    }

    #[test]
    fn halley_operator_matches_sinh_formula() {
        let c = ctx();
        let p = builtin("ex1i", c).unwrap();
        let x = Vector::new(vec![c.int(6)]);
        let u = solve_inclusion(&newton_operator(&p, &x)).unwrap().x;
        let b = halley_operator(&p, &x, &u).b[(0, 0)].clone();
        let expected = c.int(6).cosh() + c.ratio(1, 2) * c.int(6).sinh() * (&u[0] - c.int(6));
        assert!((b - expected).abs() < c.pow10(-95));
    }

    #[test]
    fn deterministic() {
        let c = ctx();
        let p = builtin("ex2ii", c).unwrap();
        let x = Vector::new(vec![c.ratio(1, 3), c.ratio(-2, 7)]);
        let a = solve_inclusion(&newton_operator(&p, &x)).unwrap();
        let b = solve_inclusion(&newton_operator(&p, &x)).unwrap();
        assert_eq!(a.pattern, b.pattern);
        for i in 0..2 {
            assert_eq!(
                a.x[i].as_float().to_string_radix(16, None),
                b.x[i].as_float().to_string_radix(16, None)
            );
        }
    }
}
