//! Four-point Gauss–Legendre quadrature along straight segments.

use crate::scalar::{czero, Cx, Real};

const NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// `∫_a^b f(z) dz` along the segment, split into `panels` equal pieces.
pub fn gauss_legendre_segment<T: Real, E>(
    f: &impl Fn(Cx<T>) -> Result<Cx<T>, E>,
    a: Cx<T>,
    b: Cx<T>,
    panels: usize,
) -> Result<Cx<T>, E> {
    let panels = panels.max(1);
    let dz = (b - a) / T::of_usize(panels);
    let half = dz * T::lit(0.5);
    let mut sum: Cx<T> = czero();
    for p in 0..panels {
        let mid = a + dz * (T::of_usize(p) + T::lit(0.5));
        let mut acc: Cx<T> = czero();
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            acc += f(mid + half * T::lit(*x))? * T::lit(w);
        }
        sum += acc * half;
    }
    Ok(sum)
}
