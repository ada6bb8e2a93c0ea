//! Float helpers routed through `libm` so the crate stays `no_std`.

pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `x * log2(x)` with the `0 log 0 = 0` convention.
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * log2(x)
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * log2(p) - (1.0 - p) * log2(1.0 - p)
    }
}

/// Euclidean distance between coordinate slices of equal length.
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        s += (x - y) * (x - y);
    }
    sqrt(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn xlog2x_zero_convention() {
        assert_eq!(xlog2x(0.0), 0.0);
        assert!((xlog2x(0.5) + 0.5).abs() < 1e-15);
    }
}
