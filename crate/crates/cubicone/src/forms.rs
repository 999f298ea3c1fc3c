//! Exact evaluation of ternary cubics, polar quadratic forms, Hessians and
//! signatures.
//!
//! The central objects are a symmetric trilinear form `mu` on a rank-3 lattice
//! (the cubic is `D -> mu(D,D,D)`) and the one-parameter family
//!
//! ```text
//! F_k(x, y, z) = -x^3 - y^3 - (z - x - y)^3 + 3k * x * y * (z - x - y)
//! ```
//!
//! whose triangle of reference has vertices (0,0), (1,0), (0,1) in the affine
//! plane z = 1. The Hessian of `F_k` satisfies the duality
//! `H_k = -54 k^2 F_{k'}` with `k' = (4 - k^3) / (3 k^2)`, and the polar
//! matrix `M(A)` with entries `mu(A, e_i, e_j)` is one sixth of the Hessian
//! matrix of second partials, so `216 det M(A) = H(A)` identically.

use std::fmt;

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::{Scalar, SignClass, DEFAULT_EPS};

/// Point of the lattice tensored with the reals; also used for points of the
/// real projective plane, represented by any nonzero vector on the ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: Scalar,
    pub y: Scalar,
    pub z: Scalar,
}

impl Vec3 {
    pub fn new(x: impl Into<Scalar>, y: impl Into<Scalar>, z: impl Into<Scalar>) -> Self {
        Vec3 {
            x: x.into(),
            y: y.into(),
            z: z.into(),
        }
    }

    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Vec3::new(x, y, z)
    }

    /// Affine point (a, b, 1).
    pub fn affine(a: impl Into<Scalar>, b: impl Into<Scalar>) -> Self {
        Vec3::new(a, b, 1i64)
    }

    pub fn coord(&self, i: usize) -> &Scalar {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("coordinate index out of range"),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero_value() && self.y.is_zero_value() && self.z.is_zero_value()
    }

    pub fn is_exact(&self) -> bool {
        self.x.is_exact() && self.y.is_exact() && self.z.is_exact()
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.x.to_f64(), self.y.to_f64(), self.z.to_f64()]
    }

    pub fn neg(&self) -> Vec3 {
        Vec3::new(-&self.x, -&self.y, -&self.z)
    }

    pub fn scale(&self, s: &Scalar) -> Vec3 {
        Vec3::new(&self.x * s, &self.y * s, &self.z * s)
    }

    pub fn add(&self, other: &Vec3) -> Vec3 {
        Vec3::new(&self.x + &other.x, &self.y + &other.y, &self.z + &other.z)
    }

    pub fn sub(&self, other: &Vec3) -> Vec3 {
        Vec3::new(&self.x - &other.x, &self.y - &other.y, &self.z - &other.z)
    }

    /// Scale so that the first nonzero coordinate is positive and the largest
    /// coordinate magnitude is one (exact path: first nonzero becomes one).
    pub fn projective_normalize(&self) -> Vec3 {
        assert!(!self.is_zero(), "cannot normalize the zero vector");
        if self.is_exact() {
            let first = [&self.x, &self.y, &self.z]
                .into_iter()
                .find(|c| !c.is_zero_value())
                .unwrap()
                .clone();
            self.scale(&first.recip())
        } else {
            let [x, y, z] = self.to_f64();
            let m = x.abs().max(y.abs()).max(z.abs());
            let first = [x, y, z].into_iter().find(|c| *c != 0.0).unwrap();
            let s = Scalar::Float(first.signum() / m);
            Vec3::new(x, y, z).scale(&s)
        }
    }

    /// Rescale an exact point to integer homogeneous coordinates (positive
    /// multiple of the same ray). No-op on float points.
    pub fn clear_denominators(&self) -> Vec3 {
        if !self.is_exact() {
            return self.clone();
        }
        use num::Integer;
        let dens: Vec<_> = [&self.x, &self.y, &self.z]
            .into_iter()
            .map(|c| c.as_exact().unwrap().denom().clone())
            .collect();
        let l = dens[0].lcm(&dens[1]).lcm(&dens[2]);
        self.scale(&Scalar::Exact(BigRational::from_integer(l)))
    }

    /// Scale to the affine representative (z = 1) when z is nonzero, else
    /// fall back to projective normalization.
    pub fn affine_normalize(&self) -> Vec3 {
        if self.z.is_zero_value() {
            self.projective_normalize()
        } else {
            self.scale(&self.z.recip())
        }
    }

    /// Distance between the rays spanned by two nonzero vectors, measured as
    /// the sine of the angle between the lines through the origin.
    pub fn projective_distance(&self, other: &Vec3) -> f64 {
        let a = self.to_f64();
        let b = other.to_f64();
        let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if na == 0.0 || nb == 0.0 {
            return f64::NAN;
        }
        let cx = a[1] * b[2] - a[2] * b[1];
        let cy = a[2] * b[0] - a[0] * b[2];
        let cz = a[0] * b[1] - a[1] * b[0];
        (cx * cx + cy * cy + cz * cz).sqrt() / (na * nb)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Index map for the ten symmetric coefficients `mu_{ijk}` with i <= j <= k.
///
/// Order: 111, 112, 113, 122, 123, 133, 222, 223, 233, 333.
const MU_INDEX: [(usize, usize, usize); 10] = [
    (0, 0, 0),
    (0, 0, 1),
    (0, 0, 2),
    (0, 1, 1),
    (0, 1, 2),
    (0, 2, 2),
    (1, 1, 1),
    (1, 1, 2),
    (1, 2, 2),
    (2, 2, 2),
];

fn mu_slot(mut i: usize, mut j: usize, mut k: usize) -> usize {
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    if j > k {
        std::mem::swap(&mut j, &mut k);
    }
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    MU_INDEX
        .iter()
        .position(|&t| t == (i, j, k))
        .expect("sorted triple is in the table")
}

/// Number of distinct permutations of the exponent triple: 1 for a pure cube,
/// 3 for a square times a different variable, 6 for three distinct variables.
fn multinomial(i: usize, j: usize, k: usize) -> i64 {
    if i == j && j == k {
        1
    } else if i == j || j == k || i == k {
        3
    } else {
        6
    }
}

/// Symmetric integer or rational trilinear form on a rank-3 lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearForm {
    mu: [Scalar; 10],
    integral: bool,
}

impl TrilinearForm {
    /// Build from the ten symmetric values `mu_{ijk}` in the order
    /// 111, 112, 113, 122, 123, 133, 222, 223, 233, 333.
    pub fn from_mu(mu: [Scalar; 10]) -> Self {
        let integral = mu.iter().all(|m| m.is_exact() && m.is_integer());
        TrilinearForm { mu, integral }
    }

    pub fn zero() -> Self {
        TrilinearForm::from_mu(std::array::from_fn(|_| Scalar::zero()))
    }

    /// Build from the coefficients of the cubic polynomial, dividing out the
    /// multinomial factors (3 for `x_i^2 x_j` terms, 6 for `xyz`).
    ///
    /// Coefficient order matches [`TrilinearForm::mu_values`] slot order:
    /// x^3, x^2 y, x^2 z, x y^2, x y z, x z^2, y^3, y^2 z, y z^2, z^3.
    pub fn from_cubic_coeffs(coeffs: &[Scalar; 10]) -> Self {
        let mu = std::array::from_fn(|s| {
            let (i, j, k) = MU_INDEX[s];
            &coeffs[s] / &Scalar::int(multinomial(i, j, k))
        });
        TrilinearForm::from_mu(mu)
    }

    /// As [`from_cubic_coeffs`](Self::from_cubic_coeffs), but fail unless
    /// every resulting `mu` value is an integer. The error lists the
    /// offending polynomial coefficients.
    pub fn integral_from_cubic_coeffs(coeffs: &[Scalar; 10]) -> Result<Self, Error> {
        let form = TrilinearForm::from_cubic_coeffs(coeffs);
        if form.integral {
            Ok(form)
        } else {
            let names = [
                "x^3", "x^2y", "x^2z", "xy^2", "xyz", "xz^2", "y^3", "y^2z", "yz^2", "z^3",
            ];
            let offending = form
                .mu
                .iter()
                .enumerate()
                .filter(|(_, m)| !(m.is_exact() && m.is_integer()))
                .map(|(s, m)| format!("{} (mu = {})", names[s], m))
                .collect();
            Err(Error::IntegralityError { offending })
        }
    }

    pub fn mu_values(&self) -> &[Scalar; 10] {
        &self.mu
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn mu_at(&self, i: usize, j: usize, k: usize) -> &Scalar {
        &self.mu[mu_slot(i, j, k)]
    }

    /// Polynomial coefficient of the monomial with sorted exponent slot.
    pub fn cubic_coeff(&self, i: usize, j: usize, k: usize) -> Scalar {
        self.mu_at(i, j, k) * Scalar::int(multinomial(i, j, k))
    }

    pub fn scale(&self, s: &Scalar) -> TrilinearForm {
        TrilinearForm::from_mu(std::array::from_fn(|t| &self.mu[t] * s))
    }

    /// Full trilinear contraction `mu(a, b, c)`.
    pub fn contract(&self, a: &Vec3, b: &Vec3, c: &Vec3) -> Scalar {
        let mut acc = Scalar::zero();
        for (s, &(i, j, k)) in MU_INDEX.iter().enumerate() {
            if self.mu[s].is_zero_value() {
                continue;
            }
            // Sum of a_p b_q c_r over the distinct permutations (p,q,r) of (i,j,k).
            let mut sym = a.coord(i) * b.coord(j) * c.coord(k);
            if i == j && j == k {
                // single term
            } else if i == j {
                sym = sym + a.coord(i) * b.coord(k) * c.coord(j) + a.coord(k) * b.coord(i) * c.coord(j);
            } else if j == k {
                sym = sym + a.coord(j) * b.coord(i) * c.coord(j) + a.coord(j) * b.coord(j) * c.coord(i);
            } else {
                sym = sym
                    + a.coord(i) * b.coord(k) * c.coord(j)
                    + a.coord(j) * b.coord(i) * c.coord(k)
                    + a.coord(j) * b.coord(k) * c.coord(i)
                    + a.coord(k) * b.coord(i) * c.coord(j)
                    + a.coord(k) * b.coord(j) * c.coord(i);
            }
            acc = acc + &self.mu[s] * sym;
        }
        acc
    }
}

/// Quadratic form matrix `M(A)` with entries `mu(A, e_i, e_j)`, stored as the
/// six upper-triangle entries m11, m12, m13, m22, m23, m33.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMat3 {
    pub m: [Scalar; 6],
}

impl SymMat3 {
    pub fn new(m11: Scalar, m12: Scalar, m13: Scalar, m22: Scalar, m23: Scalar, m33: Scalar) -> Self {
        SymMat3 {
            m: [m11, m12, m13, m22, m23, m33],
        }
    }

    pub fn zero() -> Self {
        SymMat3 {
            m: std::array::from_fn(|_| Scalar::zero()),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        match (i, j) {
            (0, 0) => &self.m[0],
            (0, 1) => &self.m[1],
            (0, 2) => &self.m[2],
            (1, 1) => &self.m[3],
            (1, 2) => &self.m[4],
            (2, 2) => &self.m[5],
            _ => panic!("index out of range"),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.m.iter().all(|e| e.is_exact())
    }

    pub fn det(&self) -> Scalar {
        let [a, b, c, d, e, f] = &self.m;
        // | a b c |
        // | b d e |
        // | c e f |
        a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
    }

    pub fn trace(&self) -> Scalar {
        &self.m[0] + &self.m[3] + &self.m[5]
    }

    /// Sum of the three principal 2x2 minors.
    pub fn minor2_sum(&self) -> Scalar {
        let [a, b, c, d, e, f] = &self.m;
        (a * d - b * b) + (a * f - c * c) + (d * f - e * e)
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        Vec3::new(
            self.entry(0, 0) * &v.x + self.entry(0, 1) * &v.y + self.entry(0, 2) * &v.z,
            self.entry(0, 1) * &v.x + self.entry(1, 1) * &v.y + self.entry(1, 2) * &v.z,
            self.entry(0, 2) * &v.x + self.entry(1, 2) * &v.y + self.entry(2, 2) * &v.z,
        )
    }

    /// Evaluate the quadratic form `D^T M D`.
    pub fn quad(&self, d: &Vec3) -> Scalar {
        let two = Scalar::int(2);
        self.entry(0, 0) * &d.x * &d.x
            + self.entry(1, 1) * &d.y * &d.y
            + self.entry(2, 2) * &d.z * &d.z
            + &two * self.entry(0, 1) * &d.x * &d.y
            + &two * self.entry(0, 2) * &d.x * &d.z
            + &two * self.entry(1, 2) * &d.y * &d.z
    }

    /// Adjugate matrix columns; for a rank-2 symmetric matrix any nonzero
    /// column spans the null space.
    pub fn adjugate_columns(&self) -> [Vec3; 3] {
        let [a, b, c, d, e, f] = &self.m;
        // Cofactor matrix of a symmetric matrix is symmetric, so columns are
        // (C11, C12, C13), (C12, C22, C23), (C13, C23, C33).
        let c11 = d * f - e * e;
        let c12 = -(b * f - e * c);
        let c13 = b * e - d * c;
        let c22 = a * f - c * c;
        let c23 = -(a * e - b * c);
        let c33 = a * d - b * b;
        [
            Vec3::new(c11.clone(), c12.clone(), c13.clone()),
            Vec3::new(c12, c22, c23.clone()),
            Vec3::new(c13, c23, c33),
        ]
    }

    pub fn to_f64_rows(&self) -> [[f64; 3]; 3] {
        let g = |i, j| self.entry(i, j).to_f64();
        [
            [g(0, 0), g(0, 1), g(0, 2)],
            [g(1, 0), g(1, 1), g(1, 2)],
            [g(2, 0), g(2, 1), g(2, 2)],
        ]
    }
}

/// Inertia of a real symmetric 3x3 matrix: counts of positive, negative and
/// zero eigenvalues. An index statement "(p, q)" corresponds to
/// `pos = p`, `neg = q`, `zero = 3 - p - q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub pos: u8,
    pub neg: u8,
    pub zero: u8,
}

impl Signature {
    pub fn new(pos: u8, neg: u8, zero: u8) -> Self {
        debug_assert_eq!(pos + neg + zero, 3);
        Signature { pos, neg, zero }
    }

    pub fn is(&self, pos: u8, neg: u8, zero: u8) -> bool {
        *self == Signature::new(pos, neg, zero)
    }

    /// Signature of `-M`.
    pub fn flipped(&self) -> Signature {
        Signature::new(self.neg, self.pos, self.zero)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.pos, self.neg, self.zero)
    }
}

/// Partition of the parameter line by the qualitative behaviour of the curve
/// `F_k = 0` and its Hessian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// k > 1: smooth curve with a bounded oval and an unbounded component.
    TwoComponents,
    /// 0 < k < 1: one smooth component; Hessian has two components.
    OneComponentHigh,
    /// -2 < k < 0: one smooth component; Hessian oval sits above its
    /// diagonal tangent line.
    OneComponentMid,
    /// k < -2: one smooth component; Hessian oval sits below its diagonal
    /// tangent line and carries a further positive index cone component.
    OneComponentLow,
    /// k = 1: the cubic degenerates into a line and two complex lines.
    DegenerateCubic,
    /// k = 0: the Hessian degenerates into three real lines.
    DegenerateHessianFermat,
    /// k = -2: the Hessian degenerates into one real and two complex lines.
    DegenerateHessianLines,
}

impl Regime {
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Regime::DegenerateCubic | Regime::DegenerateHessianFermat | Regime::DegenerateHessianLines
        )
    }

    /// Number of connected components of the real cubic (smooth regimes).
    pub fn cubic_components(&self) -> Option<u8> {
        match self {
            Regime::TwoComponents => Some(2),
            Regime::OneComponentHigh | Regime::OneComponentMid | Regime::OneComponentLow => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::TwoComponents => "TwoComponents",
            Regime::OneComponentHigh => "OneComponentHigh",
            Regime::OneComponentMid => "OneComponentMid",
            Regime::OneComponentLow => "OneComponentLow",
            Regime::DegenerateCubic => "DegenerateCubic",
            Regime::DegenerateHessianFermat => "DegenerateHessianFermat",
            Regime::DegenerateHessianLines => "DegenerateHessianLines",
        };
        f.write_str(s)
    }
}

/// Classify the parameter into its regime.
pub fn regime_of(k: &Scalar) -> Regime {
    let one = Scalar::int(1);
    let zero = Scalar::zero();
    let minus_two = Scalar::int(-2);
    if *k == one {
        Regime::DegenerateCubic
    } else if *k == zero {
        Regime::DegenerateHessianFermat
    } else if *k == minus_two {
        Regime::DegenerateHessianLines
    } else if *k > one {
        Regime::TwoComponents
    } else if *k > zero {
        Regime::OneComponentHigh
    } else if *k > minus_two {
        Regime::OneComponentMid
    } else {
        Regime::OneComponentLow
    }
}

/// Member of the one-parameter cubic family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamCubic {
    k: Scalar,
    form: TrilinearForm,
}

impl ParamCubic {
    pub fn new(k: impl Into<Scalar>) -> Self {
        let k = k.into();
        let form = Self::expand(&k);
        ParamCubic { k, form }
    }

    pub fn k(&self) -> &Scalar {
        &self.k
    }

    pub fn regime(&self) -> Regime {
        regime_of(&self.k)
    }

    /// Expanded polynomial:
    /// -z^3 + 3xz^2 + 3yz^2 - 3x^2 z - 3y^2 z
    /// + 3(1-k) x^2 y + 3(1-k) x y^2 + (3k-6) xyz.
    fn expand(k: &Scalar) -> TrilinearForm {
        let one_minus_k = Scalar::one() - k;
        let mut mu: [Scalar; 10] = std::array::from_fn(|_| Scalar::zero());
        mu[mu_slot(0, 0, 1)] = one_minus_k.clone(); // mu_112
        mu[mu_slot(0, 1, 1)] = one_minus_k; // mu_122
        mu[mu_slot(0, 0, 2)] = Scalar::int(-1); // mu_113
        mu[mu_slot(0, 2, 2)] = Scalar::one(); // mu_133
        mu[mu_slot(1, 1, 2)] = Scalar::int(-1); // mu_223
        mu[mu_slot(1, 2, 2)] = Scalar::one(); // mu_233
        mu[mu_slot(2, 2, 2)] = Scalar::int(-1); // mu_333
        mu[mu_slot(0, 1, 2)] = (k - Scalar::int(2)) / Scalar::int(2); // mu_123
        TrilinearForm::from_mu(mu)
    }

    pub fn form(&self) -> &TrilinearForm {
        &self.form
    }

    /// Direct evaluation of the defining expression, independent of the
    /// expanded trilinear coefficients.
    pub fn eval_direct(&self, d: &Vec3) -> Scalar {
        let w = &d.z - &d.x - &d.y;
        let cube = |s: &Scalar| s * s * s;
        -cube(&d.x) - cube(&d.y) - cube(&w) + Scalar::int(3) * &self.k * &d.x * &d.y * &w
    }

    /// Closed-form Hessian determinant
    /// `27 (2k^2 (x^3 + y^3 + w^3) - (8 - 2k^3) x y w)` with `w = z - x - y`.
    pub fn hessian_direct(&self, a: &Vec3) -> Scalar {
        let w = &a.z - &a.x - &a.y;
        let cube = |s: &Scalar| s * s * s;
        let k2 = &self.k * &self.k;
        let k3 = &k2 * &self.k;
        let sum_cubes = cube(&a.x) + cube(&a.y) + cube(&w);
        Scalar::int(27)
            * (Scalar::int(2) * k2 * sum_cubes - (Scalar::int(8) - Scalar::int(2) * k3) * &a.x * &a.y * &w)
    }

    /// Dual parameter `k' = (4 - k^3) / (3 k^2)`; the Hessian of this cubic
    /// is `-54 k^2` times the family member at `k'`.
    pub fn dual_k(&self) -> Result<Scalar, Error> {
        hesse_param_dual(&self.k)
    }

    /// The Hessian locus as a trilinear form (scaled family member at the
    /// dual parameter; three real lines for k = 0).
    pub fn hessian_form(&self) -> TrilinearForm {
        if self.k.is_zero_value() {
            // -216 x y (z - x - y) = 216 x^2 y + 216 x y^2 - 216 xyz
            let mut coeffs: [Scalar; 10] = std::array::from_fn(|_| Scalar::zero());
            coeffs[mu_slot(0, 0, 1)] = Scalar::int(216);
            coeffs[mu_slot(0, 1, 1)] = Scalar::int(216);
            coeffs[mu_slot(0, 1, 2)] = Scalar::int(-216);
            return TrilinearForm::from_cubic_coeffs(&coeffs);
        }
        let kp = self.dual_k().expect("nonzero k");
        let scale = Scalar::int(-54) * &self.k * &self.k;
        ParamCubic::new(kp).form().scale(&scale)
    }
}

/// `k' = (4 - k^3) / (3 k^2)`; errors on k = 0.
pub fn hesse_param_dual(k: &Scalar) -> Result<Scalar, Error> {
    if k.is_zero_value() {
        return Err(Error::DegenerateParameter {
            k: k.to_string(),
            context: "dual parameter undefined; the Hessian is three real lines".into(),
        });
    }
    let k2 = k * k;
    let k3 = &k2 * k;
    Ok((Scalar::int(4) - k3) / (Scalar::int(3) * k2))
}

/// Cubic curve data used by the geometric layers: either a raw trilinear form
/// or a family member (which also knows its closed-form Hessian).
pub trait Cubic {
    fn form_ref(&self) -> &TrilinearForm;

    /// `mu(D, D, D)`.
    fn eval(&self, d: &Vec3) -> Scalar {
        self.form_ref().contract(d, d, d)
    }

    /// Polar quadratic form matrix `M(A)` with `M_ij = mu(A, e_i, e_j)`.
    fn polar_matrix(&self, a: &Vec3) -> SymMat3 {
        let form = self.form_ref();
        let entry = |i: usize, j: usize| -> Scalar {
            (0..3)
                .map(|c| form.mu_at(i, j, c) * a.coord(c))
                .fold(Scalar::zero(), |acc, t| acc + t)
        };
        SymMat3::new(
            entry(0, 0),
            entry(0, 1),
            entry(0, 2),
            entry(1, 1),
            entry(1, 2),
            entry(2, 2),
        )
    }

    /// Determinant of the matrix of second partials at A. Satisfies
    /// `hessian_value(A) = 216 det M(A)` exactly.
    fn hessian_value(&self, a: &Vec3) -> Scalar {
        Scalar::int(216) * self.polar_matrix(a).det()
    }

    /// Gradient of the cubic at P: `3 M(P) P`.
    fn gradient(&self, p: &Vec3) -> Vec3 {
        self.polar_matrix(p).mul_vec(p).scale(&Scalar::int(3))
    }
}

impl Cubic for TrilinearForm {
    fn form_ref(&self) -> &TrilinearForm {
        self
    }
}

impl Cubic for ParamCubic {
    fn form_ref(&self) -> &TrilinearForm {
        &self.form
    }

    fn eval(&self, d: &Vec3) -> Scalar {
        self.eval_direct(d)
    }

    fn hessian_value(&self, a: &Vec3) -> Scalar {
        self.hessian_direct(a)
    }
}

/// `mu(D, D, D)` for any cubic source.
pub fn eval_cubic<C: Cubic + ?Sized>(cubic: &C, d: &Vec3) -> Scalar {
    cubic.eval(d)
}

/// Polar matrix `M(A)`.
pub fn polar_matrix<C: Cubic + ?Sized>(cubic: &C, a: &Vec3) -> SymMat3 {
    cubic.polar_matrix(a)
}

/// Hessian determinant at A.
pub fn hessian_value<C: Cubic + ?Sized>(cubic: &C, a: &Vec3) -> Scalar {
    cubic.hessian_value(a)
}

/// Polar quadratic `G_A(D) = D^T M(A) D = mu(A, D, D)`.
pub fn eval_polar_quadratic<C: Cubic + ?Sized>(cubic: &C, a: &Vec3, d: &Vec3) -> Scalar {
    cubic.polar_matrix(a).quad(d)
}

/// Inertia of a symmetric 3x3 matrix.
///
/// Exact entries: sign analysis of the characteristic polynomial
/// `t^3 - tr t^2 + s t - det`. All roots are real, so Descartes' rule counts
/// positive eigenvalues exactly, and the zero multiplicity is read from
/// trailing coefficients. Float entries: analytic eigenvalues with signs
/// thresholded at `eps` times the matrix scale.
pub fn signature_with_eps(m: &SymMat3, eps: f64) -> Signature {
    if m.is_exact() {
        let c2 = m.trace();
        let c1 = m.minor2_sum();
        let c0 = m.det();
        return signature_from_charpoly_exact(
            c2.as_exact().unwrap(),
            c1.as_exact().unwrap(),
            c0.as_exact().unwrap(),
        );
    }
    let rows = m.to_f64_rows();
    let scale = rows
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let eig = sym3_eigenvalues(&rows);
    let mut pos = 0;
    let mut neg = 0;
    let mut zero = 0;
    for e in eig {
        if e.abs() <= eps * scale {
            zero += 1;
        } else if e > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Signature::new(pos, neg, zero)
}

/// Inertia with the default epsilon.
pub fn signature(m: &SymMat3) -> Signature {
    signature_with_eps(m, DEFAULT_EPS)
}

fn signature_from_charpoly_exact(c2: &BigRational, c1: &BigRational, c0: &BigRational) -> Signature {
    use num::Zero;
    // charpoly(t) = t^3 - c2 t^2 + c1 t - c0, all roots real.
    let zero = if !c0.is_zero() {
        0
    } else if !c1.is_zero() {
        1
    } else if !c2.is_zero() {
        2
    } else {
        3
    };
    // Descartes on [1, -c2, c1, -c0] is exact when all roots are real.
    let signs: Vec<i8> = [
        BigRational::from_integer(1.into()),
        -c2.clone(),
        c1.clone(),
        -c0.clone(),
    ]
    .iter()
    .map(|c| {
        if c.is_zero() {
            0
        } else if *c > BigRational::zero() {
            1
        } else {
            -1
        }
    })
    .collect();
    let mut pos = 0u8;
    let mut last = 1i8; // leading coefficient
    for &s in &signs[1..] {
        if s != 0 {
            if s != last {
                pos += 1;
            }
            last = s;
        }
    }
    Signature::new(pos, 3 - pos - zero, zero)
}

/// Eigenvalues of a symmetric 3x3 matrix by the trigonometric method.
pub(crate) fn sym3_eigenvalues(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        return [m[0][0], m[1][1], m[2][2]];
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let inv_p = 1.0 / p;
    let b = [
        [
            (m[0][0] - q) * inv_p,
            m[0][1] * inv_p,
            m[0][2] * inv_p,
        ],
        [
            m[0][1] * inv_p,
            (m[1][1] - q) * inv_p,
            m[1][2] * inv_p,
        ],
        [
            m[0][2] * inv_p,
            m[1][2] * inv_p,
            (m[2][2] - q) * inv_p,
        ],
    ];
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3 * 2.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// Membership in the positive index cone: `mu(L,L,L) > 0` and the polar form
/// at L has inertia (1, 2, 0).
pub fn positive_index_member<C: Cubic + ?Sized>(cubic: &C, l: &Vec3, eps: f64) -> Result<bool, Error> {
    let cube_sign = cubic.eval(l).sign_with(eps)?;
    if cube_sign != SignClass::Positive {
        return Ok(false);
    }
    let m = cubic.polar_matrix(l);
    if !m.is_exact() {
        // Guard against eigenvalues inside the band being silently zeroed.
        let rows = m.to_f64_rows();
        let scale = rows
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1.0);
        if sym3_eigenvalues(&rows).iter().any(|e| e.abs() <= eps * scale) {
            return Err(Error::Indeterminate {
                context: "polar form eigenvalue inside the epsilon band".into(),
            });
        }
    }
    Ok(signature_with_eps(&m, eps).is(1, 2, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio_i64;

    fn k5() -> ParamCubic {
        ParamCubic::new(Scalar::int(5))
    }

    /// Independent oracle: full polarization identity, using only cubic
    /// evaluations.
    /// 6 mu(a,b,c) = F(a+b+c) - F(a+b) - F(b+c) - F(a+c) + F(a) + F(b) + F(c).
    fn polarization_oracle(form: &TrilinearForm, a: &Vec3, b: &Vec3, c: &Vec3) -> Scalar {
        let f = |v: &Vec3| form.contract(v, v, v);
        let abc = a.add(b).add(c);
        let ab = a.add(b);
        let bc = b.add(c);
        let ac = a.add(c);
        (f(&abc) - f(&ab) - f(&bc) - f(&ac) + f(a) + f(b) + f(c)) / Scalar::int(6)
    }

    #[test]
    fn family_normalization_point() {
        for k in [-7i64, -3, -2, -1, 0, 1, 2, 5, 11] {
            let c = ParamCubic::new(Scalar::int(k));
            assert_eq!(c.eval(&Vec3::new(0, 0, 1)), Scalar::int(-1));
        }
    }

    #[test]
    fn eval_cubic_examples() {
        let c = k5();
        assert_eq!(c.eval(&Vec3::new(0, 0, 0)), Scalar::zero());
        // Centroid value is (k - 1) / 9.
        let centroid = Vec3::new(Scalar::ratio(1, 3), Scalar::ratio(1, 3), Scalar::one());
        assert_eq!(c.eval(&centroid), Scalar::ratio(4, 9));
        for k in [-5i64, -2, 0, 2, 7] {
            let ck = ParamCubic::new(Scalar::int(k));
            assert_eq!(ck.eval(&centroid), Scalar::Exact(ratio_i64(k - 1, 9)));
        }
    }

    #[test]
    fn direct_eval_matches_contraction() {
        let c = ParamCubic::new(Scalar::ratio(-7, 3));
        for (x, y, z) in [(1i64, 2i64, 3i64), (-4, 5, 1), (0, -2, 7), (3, 3, -1)] {
            let d = Vec3::new(x, y, z);
            assert_eq!(c.eval_direct(&d), c.form().contract(&d, &d, &d));
        }
    }

    #[test]
    fn polar_matrix_at_unit_z() {
        // Quadratic -(z-x-y)^2 + 5xy: entries m11=m22=m33=-1, m13=m23=1, m12=3/2.
        let m = k5().polar_matrix(&Vec3::new(0, 0, 1));
        assert_eq!(m.entry(0, 0), &Scalar::int(-1));
        assert_eq!(m.entry(1, 1), &Scalar::int(-1));
        assert_eq!(m.entry(2, 2), &Scalar::int(-1));
        assert_eq!(m.entry(0, 2), &Scalar::one());
        assert_eq!(m.entry(1, 2), &Scalar::one());
        assert_eq!(m.entry(0, 1), &Scalar::ratio(3, 2));
    }

    #[test]
    fn polar_matrix_zero_point() {
        let m = k5().polar_matrix(&Vec3::new(0, 0, 0));
        assert_eq!(m, SymMat3::zero());
    }

    #[test]
    fn polar_matrix_matches_polarization_oracle() {
        let c = k5();
        let e = [Vec3::new(1, 0, 0), Vec3::new(0, 1, 0), Vec3::new(0, 0, 1)];
        for a in [Vec3::new(1, 0, 0), Vec3::new(2, -3, 5), Vec3::new(1, 1, 1)] {
            let m = c.polar_matrix(&a);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(
                        m.entry(i, j),
                        &polarization_oracle(c.form(), &a, &e[i], &e[j]),
                        "entry ({i},{j}) at {a}"
                    );
                }
            }
        }
    }

    #[test]
    fn polar_display_expansion_at_affine_points() {
        // -a x^2 - b y^2 - (1-a-b) w^2 + k a y w + k b x w + k (1-a-b) x y,
        // with w = z - x - y, evaluated against the matrix quadratic.
        let c = ParamCubic::new(Scalar::int(5));
        let k = Scalar::int(5);
        let pts = [(1i64, 2i64), (-3, 1), (0, 0), (2, -5)];
        let dirs = [(1i64, 0i64, 0i64), (0, 1, 0), (0, 0, 1), (1, 1, 1), (2, -1, 3)];
        for (a, b) in pts {
            let aa = Vec3::new(a, b, 1);
            let m = c.polar_matrix(&aa);
            let (a, b) = (Scalar::int(a), Scalar::int(b));
            let one_ab = Scalar::one() - &a - &b;
            for (x, y, z) in dirs {
                let d = Vec3::new(x, y, z);
                let (x, y, z) = (Scalar::int(x), Scalar::int(y), Scalar::int(z));
                let w = &z - &x - &y;
                let display = -&a * &x * &x - &b * &y * &y - &one_ab * &w * &w
                    + &k * &a * &y * &w
                    + &k * &b * &x * &w
                    + &k * &one_ab * &x * &y;
                assert_eq!(m.quad(&d), display);
            }
        }
    }

    #[test]
    fn hessian_det_identity_216() {
        let c = ParamCubic::new(Scalar::ratio(7, 2));
        for (x, y, z) in [(1i64, 2, 1), (0, 0, 1), (-3, 5, 2), (1, -1, 0)] {
            let a = Vec3::new(x, y, z);
            let lhs = Scalar::int(216) * c.polar_matrix(&a).det();
            assert_eq!(lhs, c.hessian_direct(&a));
        }
    }

    #[test]
    fn hessian_positive_at_unit_z() {
        for k in [5i64, 2, -1, -3, 1] {
            let c = ParamCubic::new(Scalar::int(k));
            let h = c.hessian_value(&Vec3::new(0, 0, 1));
            assert_eq!(h.sign_with(0.0).unwrap(), SignClass::Positive, "k = {k}");
        }
        // k = 0: Hessian is -216 x y (z-x-y); it vanishes at (0,0,1).
        let c0 = ParamCubic::new(Scalar::zero());
        assert!(c0.hessian_value(&Vec3::new(0, 0, 1)).is_zero_value());
    }

    #[test]
    fn hessian_for_fermat_is_line_triple() {
        let c0 = ParamCubic::new(Scalar::zero());
        // -216 x y (z - x - y), checked on and off the three lines.
        for (x, y, z, expect_zero) in [
            (0i64, 3, 7, true),
            (2, 0, 5, true),
            (1, 2, 3, true), // z = x + y
            (1, 1, 3, false),
        ] {
            let v = Vec3::new(x, y, z);
            assert_eq!(c0.hessian_value(&v).is_zero_value(), expect_zero);
            let expected = Scalar::int(-216) * Scalar::int(x) * Scalar::int(y) * Scalar::int(z - x - y);
            assert_eq!(c0.hessian_value(&v), expected);
        }
    }

    #[test]
    fn hessian_duality_scaled_family() {
        let c = k5();
        let kp = c.dual_k().unwrap();
        assert_eq!(kp, Scalar::ratio(-121, 75));
        let dual = ParamCubic::new(kp);
        let factor = Scalar::int(-54 * 25);
        for (x, y, z) in [(1i64, 2, 3), (0, 1, 4), (-2, -2, 1), (5, -1, 2)] {
            let a = Vec3::new(x, y, z);
            assert_eq!(c.hessian_value(&a), &factor * dual.eval(&a));
        }
        // hessian_form agrees with the scaled dual expansion.
        assert_eq!(c.hessian_form(), dual.form().scale(&factor));
    }

    #[test]
    fn dual_parameter_values() {
        assert_eq!(hesse_param_dual(&Scalar::int(1)).unwrap(), Scalar::one());
        assert_eq!(hesse_param_dual(&Scalar::int(-2)).unwrap(), Scalar::one());
        assert!(hesse_param_dual(&Scalar::zero()).is_err());
        // k > 1 lands strictly below 1.
        for k in [2i64, 3, 5, 17] {
            let kp = hesse_param_dual(&Scalar::int(k)).unwrap();
            assert!(kp < Scalar::one());
        }
    }

    #[test]
    fn signature_examples() {
        let c = k5();
        let s = signature(&c.polar_matrix(&Vec3::new(0, 0, 1)));
        assert!(s.is(1, 2, 0));
        let far = Vec3::new(100, 100, 1);
        assert!(signature(&c.polar_matrix(&far)).is(2, 1, 0));
        assert!(signature(&SymMat3::zero()).is(0, 0, 3));
    }

    #[test]
    fn signature_sturm_cross_check() {
        // Independent root-count oracle: Sturm-like count via explicit
        // eigenvalue computation on exactly representable matrices.
        let c = k5();
        let pts = [
            Vec3::new(0, 0, 1),
            Vec3::new(100, 100, 1),
            Vec3::new(-1, -1, 1),
            Vec3::new(1, -1, 0),
            Vec3::new(3, 2, 1),
        ];
        for p in pts {
            let m = c.polar_matrix(&p);
            let exact = signature(&m);
            let eig = sym3_eigenvalues(&m.to_f64_rows());
            let scale = eig.iter().fold(1.0f64, |a, e| a.max(e.abs()));
            let pos = eig.iter().filter(|e| **e > 1e-9 * scale).count() as u8;
            let neg = eig.iter().filter(|e| **e < -1e-9 * scale).count() as u8;
            if pos + neg == 3 {
                assert_eq!(exact, Signature::new(pos, neg, 0), "at {p}");
            }
        }
    }

    #[test]
    fn signature_scaling_and_negation() {
        let c = k5();
        let a = Vec3::new(-2, 7, 1);
        let m = c.polar_matrix(&a);
        let m_scaled = c.polar_matrix(&a.scale(&Scalar::int(3)));
        assert_eq!(signature(&m), signature(&m_scaled));
        let m_neg = c.polar_matrix(&a.neg());
        assert_eq!(signature(&m_neg), signature(&m).flipped());
    }

    #[test]
    fn signature_centroid_by_regime() {
        let centroid = Vec3::new(Scalar::ratio(1, 3), Scalar::ratio(1, 3), Scalar::one());
        for k in [Scalar::ratio(-1, 2), Scalar::ratio(1, 2), Scalar::int(-1), Scalar::ratio(9, 10)] {
            let c = ParamCubic::new(k.clone());
            assert!(
                signature(&c.polar_matrix(&centroid)).is(0, 3, 0),
                "centroid signature for k = {k:?}"
            );
        }
        for k in [Scalar::int(-3), Scalar::int(-10)] {
            let c = ParamCubic::new(k.clone());
            assert!(
                signature(&c.polar_matrix(&centroid)).is(2, 1, 0),
                "centroid signature for k = {k:?}"
            );
        }
    }

    #[test]
    fn float_signature_thresholding() {
        let m = SymMat3::new(
            Scalar::Float(1.0),
            Scalar::Float(0.0),
            Scalar::Float(0.0),
            Scalar::Float(1e-15),
            Scalar::Float(0.0),
            Scalar::Float(-2.0),
        );
        assert!(signature(&m).is(1, 1, 1));
    }

    #[test]
    fn polar_quadratic_examples() {
        let c = k5();
        // G_A(A) = mu(A,A,A).
        for a in [Vec3::new(1, 2, 3), Vec3::new(-1, 0, 2)] {
            assert_eq!(eval_polar_quadratic(&c, &a, &a), c.eval(&a));
        }
        let g = eval_polar_quadratic(&c, &Vec3::new(0, 0, 1), &Vec3::new(1, 1, 0));
        assert_eq!(g, Scalar::one());
    }

    #[test]
    fn trilinear_from_coeffs_family() {
        // F_5 has xyz coefficient 3k-6 = 9, so mu_123 = 3/2 and the form is
        // not integral; 12 F_5 is integral with mu_123 = 18.
        let c = k5();
        assert!(!c.form().is_integral());
        assert_eq!(c.form().mu_at(0, 1, 2), &Scalar::ratio(3, 2));
        assert_eq!(c.form().cubic_coeff(0, 1, 2), Scalar::int(9));
        let scaled = c.form().scale(&Scalar::int(12));
        assert!(scaled.is_integral());
        assert_eq!(scaled.mu_at(0, 1, 2), &Scalar::int(18));
        assert!(TrilinearForm::zero().is_integral());

        let mut coeffs: [Scalar; 10] = std::array::from_fn(|_| Scalar::zero());
        for (slot, &(i, j, k)) in MU_INDEX.iter().enumerate() {
            coeffs[slot] = c.form().cubic_coeff(i, j, k);
        }
        let rebuilt = TrilinearForm::from_cubic_coeffs(&coeffs);
        assert_eq!(&rebuilt, c.form());
        let err = TrilinearForm::integral_from_cubic_coeffs(&coeffs).unwrap_err();
        match err {
            Error::IntegralityError { offending } => {
                assert!(offending.iter().any(|s| s.contains("xyz")), "{offending:?}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn regime_partition() {
        assert_eq!(regime_of(&Scalar::int(5)), Regime::TwoComponents);
        assert_eq!(regime_of(&Scalar::zero()), Regime::DegenerateHessianFermat);
        assert_eq!(regime_of(&Scalar::int(-3)), Regime::OneComponentLow);
        assert_eq!(regime_of(&Scalar::int(1)), Regime::DegenerateCubic);
        assert_eq!(regime_of(&Scalar::int(-2)), Regime::DegenerateHessianLines);
        assert_eq!(regime_of(&Scalar::ratio(1, 2)), Regime::OneComponentHigh);
        assert_eq!(regime_of(&Scalar::ratio(-1, 2)), Regime::OneComponentMid);
        assert_eq!(regime_of(&Scalar::Float(1.1)), Regime::TwoComponents);
    }

    #[test]
    fn positive_index_member_examples() {
        let c = k5();
        let centroid = Vec3::new(Scalar::ratio(1, 3), Scalar::ratio(1, 3), Scalar::one());
        assert!(positive_index_member(&c, &centroid, DEFAULT_EPS).unwrap());
        assert!(!positive_index_member(&c, &Vec3::new(0, 0, 1), DEFAULT_EPS).unwrap());
        // Deep in the region where F < 0 and H < 0, the negative ray is in
        // the cone.
        let far = Vec3::new(100, 100, 1);
        assert!(!positive_index_member(&c, &far, DEFAULT_EPS).unwrap());
        assert!(positive_index_member(&c, &far.neg(), DEFAULT_EPS).unwrap());
    }

    #[test]
    fn gradient_matches_finite_difference_direction() {
        let c = k5();
        let p = Vec3::new(2, -1, 3);
        let g = c.gradient(&p);
        // Directional derivative along e_i equals 3 mu(P, P, e_i).
        for i in 0..3 {
            let e = Vec3::new((i == 0) as i64, (i == 1) as i64, (i == 2) as i64);
            let expected = Scalar::int(3) * c.form().contract(&p, &p, &e);
            assert_eq!(g.coord(i), &expected);
        }
    }
}
