//! Gram systems, nodal interpolation, the power function and exact RKHS
//! algebra for finite kernel combinations.

mod function;
pub mod gram;

pub use function::{rkhs_inner, rkhs_norm, sample_unit_ball, sample_unit_ball_with, sup_error, RkhsFunction};
pub use gram::{GramSystem, JitterPolicy, DEFAULT_MAX_NODES};


/// Anything that can be evaluated pointwise on `[0,1]^d`.
pub trait Evaluable: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

/// Evaluation traces `(x, f(x), Pf(x), power(x))` as CSV.
pub fn write_trace<T: crate::kernels::KernelScalar>(
    path: &std::path::Path,
    f: &RkhsFunction<T>,
    pf: &RkhsFunction<T>,
    system: &GramSystem<T>,
    eval_set: &crate::geometry::PointSet,
) -> crate::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let d = eval_set.dim();
    let mut header: Vec<String> = if d == 1 {
        vec!["x".into()]
    } else {
        (0..d).map(|k| format!("x{k}")).collect()
    };
    header.extend(["f", "Pf", "power"].map(String::from));
    w.write_record(&header)?;
    for x in eval_set.iter() {
        let mut row: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
        row.push(format!("{:e}", crate::numeric::Real::to_f64(f.eval_t(x))));
        row.push(format!("{:e}", crate::numeric::Real::to_f64(pf.eval_t(x))));
        row.push(format!("{:e}", system.power_function(x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
