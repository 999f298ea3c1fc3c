//! Univariate polynomial helpers: exact Sturm-sequence root isolation over
//! the rationals and bracketed bisection on the float path.
//!
//! Restrictions of the cubic to a line produce degree <= 3 polynomials, so
//! everything here stays small and dense.

use num::{BigRational, One, Signed, Zero};

use crate::scalar::ratio_i64;

/// Dense polynomial over the rationals, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct RatPoly {
    pub coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly::new(vec![])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn derivative(&self) -> RatPoly {
        if self.degree() == 0 {
            return RatPoly::zero();
        }
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * ratio_i64(i as i64, 1))
                .collect(),
        )
    }

    fn neg(&self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Remainder of self divided by other (other nonzero); the result has
    /// degree strictly below the divisor's.
    fn rem(&self, other: &RatPoly) -> RatPoly {
        assert!(!other.is_zero());
        let d = other.degree();
        if d == 0 {
            return RatPoly::zero();
        }
        let lead = &other.coeffs[d];
        let mut r = self.coeffs.clone();
        let trim = |r: &mut Vec<BigRational>| {
            while r.len() > 1 && r.last().map_or(false, |c| c.is_zero()) {
                r.pop();
            }
        };
        trim(&mut r);
        while r.len() >= d + 1 && !(r.len() == 1 && r[0].is_zero()) {
            let k = r.len() - 1;
            let q = &r[k] / lead;
            for i in 0..=d {
                let idx = k - d + i;
                let delta = &q * &other.coeffs[i];
                r[idx] = &r[idx] - delta;
            }
            r.pop();
            trim(&mut r);
        }
        RatPoly::new(r)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.coeffs.last().unwrap().clone();
        RatPoly::new(a.coeffs.iter().map(|c| c / &lead).collect())
    }

    /// Sturm chain of the polynomial.
    fn sturm_chain(&self) -> Vec<RatPoly> {
        let mut chain = vec![self.clone(), self.derivative()];
        while !chain.last().unwrap().is_zero() {
            let n = chain.len();
            let r = chain[n - 2].rem(&chain[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        chain
    }

    fn sign_variations_at(chain: &[RatPoly], t: &BigRational) -> usize {
        let mut vars = 0;
        let mut last = 0i8;
        for p in chain {
            let v = p.eval(t);
            let s = if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            };
            if s != 0 {
                if last != 0 && s != last {
                    vars += 1;
                }
                last = s;
            }
        }
        vars
    }

    /// Cauchy bound on the absolute value of the real roots.
    fn root_bound(&self) -> BigRational {
        let lead = self.coeffs.last().unwrap();
        let mut m = BigRational::zero();
        for c in &self.coeffs[..self.degree()] {
            let q = (c / lead).abs();
            if q > m {
                m = q;
            }
        }
        m + BigRational::one()
    }

    /// Number of distinct real roots in the half-open interval (lo, hi].
    pub fn count_roots_between(&self, lo: &BigRational, hi: &BigRational) -> usize {
        if self.is_zero() || self.degree() == 0 {
            return 0;
        }
        let square_free = self.square_free();
        let chain = square_free.sturm_chain();
        Self::sign_variations_at(&chain, lo).saturating_sub(Self::sign_variations_at(&chain, hi))
    }

    /// Divide out repeated factors.
    pub fn square_free(&self) -> RatPoly {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        self.div_exact(&g)
    }

    /// Exact division, assuming other divides self.
    pub fn div_exact(&self, other: &RatPoly) -> RatPoly {
        let mut r = self.coeffs.clone();
        let d = other.degree();
        let lead = other.coeffs[d].clone();
        let mut q = vec![BigRational::zero(); self.degree() - d + 1];
        for k in (0..q.len()).rev() {
            let c = r[k + d].clone() / lead.clone();
            q[k] = c.clone();
            for i in 0..=d {
                let delta = &c * &other.coeffs[i];
                r[k + i] = &r[k + i] - delta;
            }
        }
        RatPoly::new(q)
    }

    /// Isolate and refine all distinct real roots to intervals shorter than
    /// `limit`, returning the interval midpoints in ascending order together
    /// with each root's multiplicity in the original polynomial.
    pub fn real_roots(&self, limit: &BigRational) -> Vec<(BigRational, usize)> {
        if self.is_zero() || self.degree() == 0 {
            return vec![];
        }
        let sf = self.square_free();
        let chain = sf.sturm_chain();
        let bound = sf.root_bound();
        let mut intervals = vec![(-bound.clone(), bound.clone())];
        let mut isolated: Vec<(BigRational, BigRational)> = vec![];
        while let Some((lo, hi)) = intervals.pop() {
            let n = Self::sign_variations_at(&chain, &lo)
                .saturating_sub(Self::sign_variations_at(&chain, &hi));
            if n == 0 {
                continue;
            }
            if n == 1 && (&hi - &lo) < *limit {
                isolated.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / ratio_i64(2, 1);
            if n == 1 {
                // Keep the half that contains the root.
                let left = Self::sign_variations_at(&chain, &lo)
                    .saturating_sub(Self::sign_variations_at(&chain, &mid));
                if left == 1 {
                    intervals.push((lo, mid));
                } else {
                    intervals.push((mid, hi));
                }
            } else {
                if sf.eval(&mid).is_zero() {
                    // Exact hit; nudge the split point into both halves.
                    isolated.push((mid.clone(), mid.clone()));
                    let eps = (&hi - &lo) / ratio_i64(1_000_000, 1);
                    intervals.push((lo, &mid - &eps));
                    intervals.push((&mid + &eps, hi));
                } else {
                    intervals.push((lo, mid.clone()));
                    intervals.push((mid, hi));
                }
            }
        }
        isolated.sort_by(|a, b| a.0.cmp(&b.0));
        let mult_of = |root_box: &(BigRational, BigRational)| -> usize {
            // Multiplicity from the gcd chain: count how many derivatives
            // still vanish on the isolating interval.
            let mid = (&root_box.0 + &root_box.1) / ratio_i64(2, 1);
            if root_box.0 == root_box.1 {
                let mut m = 0;
                let mut p = self.clone();
                while !p.is_zero() && p.eval(&mid).is_zero() {
                    m += 1;
                    p = p.derivative();
                }
                return m.max(1);
            }
            let mut m = 1;
            let mut p = self.derivative();
            while !p.is_zero() && p.degree() >= 1 && p.count_roots_between(&root_box.0, &root_box.1) > 0 {
                // A simple root of the square-free part that is also a root
                // of successive derivatives has higher multiplicity.
                let g = self.gcd(&p);
                if g.degree() == 0 || g.count_roots_between(&root_box.0, &root_box.1) == 0 {
                    break;
                }
                m += 1;
                p = p.derivative();
            }
            m
        };
        isolated
            .iter()
            .map(|iv| ((&iv.0 + &iv.1) / ratio_i64(2, 1), mult_of(iv)))
            .collect()
    }
}

/// Real roots of a low-degree float polynomial on a bracketed sweep.
///
/// Scans `[lo, hi]` at `steps` points and bisects every sign change to the
/// requested tolerance. Double roots that do not change sign are recovered by
/// scanning the derivative and testing near-zero values of the polynomial.
pub fn float_roots_in(
    coeffs: &[f64],
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
) -> Vec<f64> {
    let eval = |t: f64| -> f64 {
        let mut acc = 0.0;
        for c in coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    };
    let mut roots = vec![];
    let mut prev_t = lo;
    let mut prev_v = eval(lo);
    if prev_v == 0.0 {
        roots.push(lo);
    }
    for i in 1..=steps {
        let t = lo + (hi - lo) * (i as f64) / (steps as f64);
        let v = eval(t);
        if v == 0.0 {
            roots.push(t);
        } else if prev_v != 0.0 && prev_v.signum() != v.signum() {
            let (mut a, mut b) = (prev_t, t);
            let mut fa = prev_v;
            while b - a > tol {
                let m = 0.5 * (a + b);
                let fm = eval(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa.signum() == fm.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_t = t;
        prev_v = v;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < tol * 4.0);
    roots
}
