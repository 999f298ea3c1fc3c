use cubicone::curve::*;
use cubicone::Scalar;
fn main() {
    for (branch, name) in [(BranchId::c1(), "c1"), (BranchId::c2(), "c2"),
        (BranchId::new(CurveKind::Hessian, BranchLabel::Arc23), "h23")] {
        match trace_branch(&Scalar::int(5), branch, 512) {
            Ok(t) => {
                let pts = t.affine_points();
                println!("{name}: kappa={} n={} first={:?} last={:?} sd={:?} ed={:?}",
                    t.kappa, pts.len(), pts.first(), pts.last(), t.start_direction(), t.end_direction());
            }
            Err(e) => println!("{name}: ERR {e}"),
        }
    }
}
