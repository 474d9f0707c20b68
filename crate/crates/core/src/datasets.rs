//! Single carbon fibre tensile strengths (GPa), Badar and Priest (1982).
//!
//! Both sets are usually analysed after subtracting [`SHIFT`] from every
//! value.

/// Gauge length 20 mm, 69 fibres.
pub const GAUGE_20MM: [f64; 69] = [
    1.312, 1.314, 1.479, 1.552, 1.700, 1.803, 1.861, 1.865, 1.944, 1.958, //
    1.966, 1.997, 2.006, 2.021, 2.027, 2.055, 2.063, 2.098, 2.140, 2.179, //
    2.224, 2.240, 2.253, 2.270, 2.272, 2.274, 2.301, 2.301, 2.359, 2.382, //
    2.382, 2.426, 2.434, 2.435, 2.478, 2.490, 2.511, 2.514, 2.535, 2.554, //
    2.566, 2.570, 2.586, 2.629, 2.633, 2.642, 2.648, 2.684, 2.697, 2.726, //
    2.770, 2.773, 2.800, 2.809, 2.818, 2.821, 2.848, 2.880, 2.954, 3.012, //
    3.067, 3.084, 3.090, 3.096, 3.128, 3.233, 3.433, 3.585, 3.585,
];

/// Gauge length 10 mm, 63 fibres.
pub const GAUGE_10MM: [f64; 63] = [
    1.901, 2.132, 2.203, 2.228, 2.257, 2.350, 2.361, 2.396, 2.397, 2.445, //
    2.454, 2.474, 2.518, 2.522, 2.525, 2.532, 2.575, 2.614, 2.616, 2.618, //
    2.624, 2.659, 2.675, 2.738, 2.740, 2.856, 2.917, 2.928, 2.937, 2.937, //
    2.977, 2.996, 3.030, 3.125, 3.139, 3.145, 3.220, 3.223, 3.235, 3.243, //
    3.264, 3.272, 3.294, 3.332, 3.346, 3.377, 3.408, 3.435, 3.493, 3.501, //
    3.537, 3.554, 3.562, 3.628, 3.852, 3.871, 3.886, 3.971, 4.024, 4.027, //
    4.225, 4.395, 5.020,
];

/// Location shift removed before fitting a two-parameter Weibull.
pub const SHIFT: f64 = 0.75;

/// The 20 mm set (strength, `X`) with [`SHIFT`] removed.
pub fn strength_shifted() -> Vec<f64> {
    GAUGE_20MM.iter().map(|v| v - SHIFT).collect()
}

/// The 10 mm set (stress, `Y`) with [`SHIFT`] removed.
pub fn stress_shifted() -> Vec<f64> {
    GAUGE_10MM.iter().map(|v| v - SHIFT).collect()
}
