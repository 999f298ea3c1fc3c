//! Brute-force verification layer: exact sign/signature grids over an affine
//! window, flood-fill component counts, and positive-index-cone component
//! counts on the sphere.
//!
//! These scans are deliberately dumb. They validate the analytic
//! classification paths before those are trusted anywhere else.

use num::BigInt;
use serde::{Deserialize, Serialize};

use crate::curve::{icosphere, UnionFind};
use crate::error::Error;
use crate::forms::{signature_with_eps, Cubic, ParamCubic, Signature, Vec3};
use crate::scalar::{Scalar, SignClass};

/// Affine window `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn square(half: f64) -> Self {
        Window {
            x0: -half,
            x1: half,
            y0: -half,
            y1: half,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.x1 > self.x0 && self.y1 > self.y0)
    }
}

/// Record for one grid cell, evaluated at the cell center.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CellRecord {
    pub sign_f: SignClassRepr,
    pub sign_h: SignClassRepr,
    pub signature: Signature,
    /// Within epsilon of either curve; excluded from sign statistics.
    pub boundary: bool,
}

/// Serializable sign representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignClassRepr {
    Neg,
    Zero,
    Pos,
}

impl From<SignClass> for SignClassRepr {
    fn from(s: SignClass) -> Self {
        match s {
            SignClass::Negative => SignClassRepr::Neg,
            SignClass::Zero => SignClassRepr::Zero,
            SignClass::Positive => SignClassRepr::Pos,
        }
    }
}

/// Exact sign/signature scan over an n-by-n grid of cell centers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanGrid {
    pub window: Window,
    pub n: usize,
    pub cells: Vec<CellRecord>,
}

impl ScanGrid {
    pub fn cell(&self, i: usize, j: usize) -> &CellRecord {
        &self.cells[j * self.n + i]
    }

    /// Cell center in affine coordinates.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let dx = (self.window.x1 - self.window.x0) / self.n as f64;
        let dy = (self.window.y1 - self.window.y0) / self.n as f64;
        (
            self.window.x0 + (i as f64 + 0.5) * dx,
            self.window.y0 + (j as f64 + 0.5) * dy,
        )
    }

    /// CSV export: `a,b,sign_f,sign_h,pos,neg,zero,boundary` per cell.
    pub fn to_csv(&self, k: &Scalar) -> String {
        let mut s = format!(
            "# grid scan k={} window=[{},{}]x[{},{}] n={}\n",
            k, self.window.x0, self.window.x1, self.window.y0, self.window.y1, self.n
        );
        s.push_str("a,b,sign_f,sign_h,pos,neg,zero,boundary\n");
        let fmt_sign = |v: SignClassRepr| match v {
            SignClassRepr::Neg => "-1",
            SignClassRepr::Zero => "0",
            SignClassRepr::Pos => "1",
        };
        for j in 0..self.n {
            for i in 0..self.n {
                let (a, b) = self.center(i, j);
                let c = self.cell(i, j);
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    a,
                    b,
                    fmt_sign(c.sign_f),
                    fmt_sign(c.sign_h),
                    c.signature.pos,
                    c.signature.neg,
                    c.signature.zero,
                    c.boundary as u8
                ));
            }
        }
        s
    }
}

/// Scan the window at n-by-n cell centers, evaluating the cubic, its Hessian
/// and the polar signature exactly (integer homogeneous coordinates) when k
/// is rational.
pub fn grid_scan(k: &Scalar, window: Window, n: usize, eps: f64) -> Result<ScanGrid, Error> {
    if n < 2 {
        return Err(Error::invalid("grid resolution must be at least 2"));
    }
    if window.is_degenerate() {
        return Err(Error::invalid("degenerate scan window"));
    }
    let cubic = ParamCubic::new(k.clone());
    let mut cells = Vec::with_capacity(n * n);
    let dx = (window.x1 - window.x0) / n as f64;
    let dy = (window.y1 - window.y0) / n as f64;
    // Exact path: build cell centers with small denominators straight from
    // the window rationals, then clear denominators so every evaluation runs
    // on integer homogeneous coordinates.
    let exact_centers = if k.is_exact() {
        let x0 = Scalar::exact_from_f64(window.x0);
        let x1 = Scalar::exact_from_f64(window.x1);
        let y0 = Scalar::exact_from_f64(window.y0);
        let y1 = Scalar::exact_from_f64(window.y1);
        match (x0, x1, y0, y1) {
            (Some(x0), Some(x1), Some(y0), Some(y1)) => {
                let nn = Scalar::int(n as i64);
                let dxr = (&x1 - &x0) / &nn;
                let dyr = (&y1 - &y0) / &nn;
                Some((x0, y0, dxr, dyr))
            }
            _ => None,
        }
    } else {
        None
    };
    for j in 0..n {
        for i in 0..n {
            let a = window.x0 + (i as f64 + 0.5) * dx;
            let b = window.y0 + (j as f64 + 0.5) * dy;
            let p = if let Some((x0, y0, dxr, dyr)) = &exact_centers {
                let half = Scalar::ratio(1, 2);
                let cx = x0 + (Scalar::int(i as i64) + &half) * dxr;
                let cy = y0 + (Scalar::int(j as i64) + &half) * dyr;
                Vec3::new(cx, cy, Scalar::one()).clear_denominators()
            } else {
                Vec3::from_f64(a, b, 1.0)
            };
            let f = cubic.eval(&p);
            let h = cubic.hessian_value(&p);
            // Boundary detection on the affine representative, where the
            // scale is meaningful; signs come from the exact values.
            let scale = (a.abs().max(b.abs()).max(1.0)).powi(3) * (1.0 + k.to_f64().abs());
            let f_aff = cubic.eval_direct_f64(a, b, 1.0);
            let h_aff = cubic.hessian_direct_f64(a, b, 1.0);
            let boundary = f_aff.abs() <= eps * scale
                || h_aff.abs() <= eps * scale * 54.0 * k.to_f64().powi(2).max(1.0) * 8.0;
            let signature = signature_with_eps(&cubic.polar_matrix(&p), eps);
            cells.push(CellRecord {
                sign_f: f.sign_thresholded(0.0).into(),
                sign_h: h.sign_thresholded(0.0).into(),
                signature,
                boundary,
            });
        }
    }
    Ok(ScanGrid { window, n, cells })
}

/// Number of 4-connected components of the cells satisfying the predicate.
pub fn flood_components(grid: &ScanGrid, predicate: impl Fn(&CellRecord) -> bool) -> usize {
    let n = grid.n;
    let mask: Vec<bool> = grid.cells.iter().map(&predicate).collect();
    let mut uf = UnionFind::new(n * n);
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            if !mask[idx] {
                continue;
            }
            if i + 1 < n && mask[idx + 1] {
                uf.union(idx, idx + 1);
            }
            if j + 1 < n && mask[idx + n] {
                uf.union(idx, idx + n);
            }
        }
    }
    let mut roots = std::collections::HashSet::new();
    for (idx, m) in mask.iter().enumerate() {
        if *m {
            roots.insert(uf.find(idx));
        }
    }
    roots.len()
}

/// Result of a sphere scan: component count plus a deterministic digest of
/// the per-vertex membership mask (a machine-checkable witness).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereScan {
    pub depth: usize,
    pub vertices: usize,
    pub members: usize,
    pub components: usize,
    pub mask_sha256: String,
}

/// Count the connected components of the positive index cone
/// `{ L : F(L) > 0, polar signature (1,2,0) }` on the unit sphere.
///
/// No antipodal identification: the cone is odd under negation, so its trace
/// on the sphere already separates the components of the cone in R^3 minus
/// the origin.
pub fn sphere_scan(k: &Scalar, depth: usize) -> Result<SphereScan, Error> {
    if depth > 8 {
        return Err(Error::invalid("sphere depth capped at 8"));
    }
    let cubic = ParamCubic::new(k.clone());
    let kf = k.to_f64();
    let (verts, faces) = icosphere(depth);
    let member: Vec<bool> = verts
        .iter()
        .map(|v| {
            let p = Vec3::from_f64(v[0], v[1], v[2]);
            let f = cubic.eval_direct_f64(v[0], v[1], v[2]);
            // Strict membership with a resolution-independent guard band.
            if f <= 1e-12 * (1.0 + kf.abs()) {
                return false;
            }
            signature_with_eps(&cubic.polar_matrix(&p), 1e-12).is(1, 2, 0)
        })
        .collect();
    let mut uf = UnionFind::new(verts.len());
    for f in &faces {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            if member[a] && member[b] {
                uf.union(a, b);
            }
        }
    }
    let mut roots = std::collections::HashSet::new();
    for (i, m) in member.iter().enumerate() {
        if *m {
            roots.insert(uf.find(i));
        }
    }
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    let mut byte = 0u8;
    let mut nbits = 0;
    for m in &member {
        byte = (byte << 1) | (*m as u8);
        nbits += 1;
        if nbits == 8 {
            hasher.update([byte]);
            byte = 0;
            nbits = 0;
        }
    }
    if nbits > 0 {
        hasher.update([byte << (8 - nbits)]);
    }
    Ok(SphereScan {
        depth,
        vertices: verts.len(),
        members: member.iter().filter(|m| **m).count(),
        components: roots.len(),
        mask_sha256: format!("{:x}", hasher.finalize()),
    })
}

/// Component count of the positive index cone on the sphere.
pub fn sphere_component_count(k: &Scalar, depth: usize) -> Result<usize, Error> {
    Ok(sphere_scan(k, depth)?.components)
}

impl ParamCubic {
    /// Fast float evaluation used by the sphere scan.
    pub(crate) fn eval_direct_f64(&self, x: f64, y: f64, z: f64) -> f64 {
        let kf = self.k().to_f64();
        let w = z - x - y;
        -x * x * x - y * y * y - w * w * w + 3.0 * kf * x * y * w
    }

    /// Fast float Hessian evaluation.
    pub(crate) fn hessian_direct_f64(&self, x: f64, y: f64, z: f64) -> f64 {
        let kf = self.k().to_f64();
        let w = z - x - y;
        let k2 = kf * kf;
        27.0 * (2.0 * k2 * (x * x * x + y * y * y + w * w * w) - (8.0 - 2.0 * k2 * kf) * x * y * w)
    }
}

/// Integer-homogeneous exact scan record used by the signature trichotomy
/// checks: returns (sign F, sign H, signature) for the scaled integral point
/// `(i, j, d)` with d the common denominator.
pub fn exact_cell(k: &Scalar, i: i64, j: i64, d: i64) -> (SignClass, SignClass, Signature) {
    let cubic = ParamCubic::new(k.clone());
    let p = Vec3::new(
        Scalar::Exact(BigInt::from(i).into()),
        Scalar::Exact(BigInt::from(j).into()),
        Scalar::Exact(BigInt::from(d).into()),
    );
    let f = cubic.eval(&p).sign_thresholded(0.0);
    let h = cubic.hessian_value(&p).sign_thresholded(0.0);
    let s = signature_with_eps(&cubic.polar_matrix(&p), 0.0);
    (f, h, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DEFAULT_EPS;

    #[test]
    fn grid_scan_trichotomy_small() {
        // Signature is (1,2,0) where H > 0 and (2,1,0) where H < 0 for k > 1,
        // away from the curves.
        let grid = grid_scan(&Scalar::int(5), Window::square(3.0), 40, DEFAULT_EPS).unwrap();
        for c in grid.cells.iter().filter(|c| !c.boundary) {
            match c.sign_h {
                SignClassRepr::Pos => assert!(c.signature.is(1, 2, 0), "{c:?}"),
                SignClassRepr::Neg => assert!(c.signature.is(2, 1, 0), "{c:?}"),
                SignClassRepr::Zero => {}
            }
        }
    }

    #[test]
    fn grid_scan_one_component_positive_side() {
        // For 0 < k < 1, cells with F > 0 have H > 0 and signature (1,2,0).
        let grid = grid_scan(&Scalar::ratio(1, 2), Window::square(4.0), 40, DEFAULT_EPS).unwrap();
        for c in grid.cells.iter().filter(|c| !c.boundary) {
            if c.sign_f == SignClassRepr::Pos {
                assert_eq!(c.sign_h, SignClassRepr::Pos);
                assert!(c.signature.is(1, 2, 0));
            }
        }
    }

    #[test]
    fn flood_fill_window_counts_for_k5() {
        // Both-positive regions: bounded oval plus three hybrid pieces
        // clipped by the window.
        let grid = grid_scan(&Scalar::int(5), Window::square(4.0), 160, DEFAULT_EPS).unwrap();
        let pos = flood_components(&grid, |c| {
            !c.boundary && c.sign_f == SignClassRepr::Pos && c.sign_h == SignClassRepr::Pos
        });
        assert_eq!(pos, 4);
        let neg = flood_components(&grid, |c| {
            !c.boundary && c.sign_f == SignClassRepr::Neg && c.sign_h == SignClassRepr::Neg
        });
        assert_eq!(neg, 3);
        assert_eq!(flood_components(&grid, |_| false), 0);
    }

    #[test]
    fn sphere_counts_by_regime() {
        assert_eq!(sphere_component_count(&Scalar::int(5), 5).unwrap(), 4);
        assert_eq!(sphere_component_count(&Scalar::ratio(1, 2), 5).unwrap(), 3);
        assert_eq!(sphere_component_count(&Scalar::int(-1), 5).unwrap(), 3);
        assert_eq!(sphere_component_count(&Scalar::int(-3), 5).unwrap(), 4);
    }

    #[test]
    fn sphere_scan_is_deterministic() {
        let a = sphere_scan(&Scalar::int(5), 4).unwrap();
        let b = sphere_scan(&Scalar::int(5), 4).unwrap();
        assert_eq!(a.mask_sha256, b.mask_sha256);
        assert_eq!(a.components, b.components);
    }

    #[test]
    fn exact_cell_matches_grid() {
        let (f, h, s) = exact_cell(&Scalar::int(5), 1, 1, 3);
        // (1/3, 1/3, 1): F = 4/9 > 0, inside the oval.
        assert_eq!(f, SignClass::Positive);
        assert_eq!(h, SignClass::Positive);
        assert!(s.is(1, 2, 0));
    }
}
