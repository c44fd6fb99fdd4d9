use crate::error::{Error, Result};

pub const MAX_HERMITE_ORDER: usize = 60;

/// Physicists' Hermite polynomial `H_m(z)` by the three-term recurrence.
pub fn hermite(m: usize, z: f64) -> Result<f64> {
    if m > MAX_HERMITE_ORDER {
        return Err(Error::UnsupportedHermiteOrder {
            m,
            max: MAX_HERMITE_ORDER,
        });
    }
    let (mut h0, mut h1) = (1.0, 2.0 * z);
    if m == 0 {
        return Ok(h0);
    }
    for k in 1..m {
        let h2 = 2.0 * z * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    Ok(h1)
}
