//! Stable and unstable semigroups of a mixed spectrum and the smoothing scan.

use bistable::semigroup::{apply_semigroup, dyadic_grid, sharp_bound_scan, smoothing_constant, SemigroupQuery};
use bistable::spectral::{HVec, SpectrumSpec, SubspaceTag};

fn main() -> Result<(), bistable::error::Error> {
    let spec = SpectrumSpec::new(vec![1.0, -0.5, 0.25, 0.0, -2.0, 0.125])?;
    println!(
        "stable {} unstable {} center {}",
        spec.count(SubspaceTag::Stable),
        spec.count(SubspaceTag::Unstable),
        spec.count(SubspaceTag::Center)
    );

    let h = HVec(vec![1.0; spec.dim()]);
    for t in [0.0, 0.5, 1.0, 4.0] {
        let s = apply_semigroup(&spec, SemigroupQuery::stable(t), &h)?;
        let u = apply_semigroup(&spec, SemigroupQuery::unstable(-t), &h)?;
        println!("t = {t:4}: |T_s(t)h| = {:.6}  |T_u(-t)h| = {:.6}", s.norm(), u.norm());
    }

    let ladder = SpectrumSpec::geometric(40, 0.5)?;
    println!("\nsup |A|^-1 T_s(t) against C t^-1, C = {:.6}", smoothing_constant(1.0));
    for row in sharp_bound_scan(&ladder, 1.0, &dyadic_grid(-10, -2))? {
        println!("t = {:.3e}  sup = {:.6e}  ratio = {:.4}", row.t, row.sup_norm, row.ratio);
    }
    Ok(())
}
