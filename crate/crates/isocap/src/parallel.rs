//! Rayon versions of the cell-wise convolution. Each output cell uses the
//! same fixed-order summation as the serial path, so results are bitwise
//! identical whatever the thread count.

use isocap_core::{Result, ZonalConvolver, ZonalFunction};
use rayon::prelude::*;

pub fn convolve(convolver: &ZonalConvolver, f: &ZonalFunction) -> Result<ZonalFunction> {
    let values = (0..convolver.grid().len())
        .into_par_iter()
        .map(|j| convolver.cell(f, j))
        .collect::<Result<Vec<f64>>>()?;
    ZonalFunction::new(convolver.grid().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use isocap_core::{LatitudeGrid, MonotoneKernel, Sphere};

    #[test]
    fn matches_the_serial_convolution_bitwise() {
        let g = LatitudeGrid::new(Sphere::unit(9).unwrap(), 200).unwrap();
        let f = ZonalFunction::from_fn(g.clone(), |phi| (3.0 * phi).sin().abs()).unwrap();
        for k in [
            MonotoneKernel::indicator_angle(0.8).unwrap(),
            MonotoneKernel::piecewise_linear(vec![-0.5, 0.5], vec![0.0, 1.0]).unwrap(),
        ] {
            let c = ZonalConvolver::new(k, g.clone()).unwrap();
            assert_eq!(convolve(&c, &f).unwrap().values(), c.convolve(&f).unwrap().values());
        }
    }
}
