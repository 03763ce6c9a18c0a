use super::{left_singular_basis, mode_product, unfold, Matrix, Tensor};
use crate::error::{Error, Result};

/// Full Tucker decomposition `t = core x_0 U_0 x_1 U_1 ... x_{N-1} U_{N-1}`.
#[derive(Clone, Debug)]
pub struct HosvdDecomposition {
    pub core: Tensor,
    /// One square orthonormal factor per mode.
    pub factors: Vec<Matrix>,
}

/// Factor `i` is the left singular basis of the mode-`i` unfolding; the core
/// is `t` projected onto all factors.
pub fn hosvd(t: &Tensor) -> Result<HosvdDecomposition> {
    if t.order() < 2 {
        return Err(Error::invalid("hosvd needs a tensor of order >= 2"));
    }
    let factors = (0..t.order())
        .map(|mode| {
            if t.dims()[mode] == 1 {
                Ok(Matrix::identity(1, 1))
            } else {
                left_singular_basis(&unfold(t, mode)?)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut core = t.clone();
    for (mode, u) in factors.iter().enumerate() {
        core = mode_product(&core, &u.transpose(), mode)?;
    }
    Ok(HosvdDecomposition { core, factors })
}

/// Chains the factor products back onto the core. Factors may have fewer
/// columns than rows (truncated), as long as each matches the core extent.
pub fn hosvd_reconstruct(d: &HosvdDecomposition) -> Result<Tensor> {
    if d.factors.len() != d.core.order() {
        return Err(Error::invalid(format!(
            "{} factors for an order-{} core",
            d.factors.len(),
            d.core.order()
        )));
    }
    let mut t = d.core.clone();
    for (mode, u) in d.factors.iter().enumerate() {
        t = mode_product(&t, u, mode)?;
    }
    Ok(t)
}
