//! Reference tables shared by the special-function tests (see data/gen_oracles.py).

#![allow(clippy::excessive_precision)]

/// `(z, P(Z ≥ z))`
pub const UPPER_TAIL: &[(f64, f64)] = &[
    (-38.0, 1.0),
    (-8.0, 0.999_999_999_999_999_38),
    (-3.0, 0.998_650_101_968_369_91),
    (-1.0, 0.841_344_746_068_542_95),
    (-0.5, 0.691_462_461_274_013_1),
    (0.0, 0.5),
    (0.25, 0.401_293_674_317_076_28),
    (1.0, 0.158_655_253_931_457_05),
    (2.0, 0.022_750_131_948_179_207),
    (3.0, 0.001_349_898_031_630_094_5),
    (5.0, 2.866_515_718_791_939_1e-7),
    (8.0, 6.220_960_574_271_784_1e-16),
    (10.0, 7.619_853_024_160_526_1e-24),
    (15.0, 3.670_966_199_312_750_9e-51),
    (20.0, 2.753_624_118_606_233_7e-89),
    (25.0, 3.056_696_706_382_560_9e-138),
    (30.0, 4.906_713_927_148_187_1e-198),
    (35.0, 1.124_910_706_472_406_2e-268),
    (37.5, 4.605_353_009_581_954_8e-308),
];

/// `(t, z)` with `P(Z ≥ z) = t`, `t` being the f64 nearest the literal.
pub const QUANTILES: &[(f64, f64)] = &[
    (1e-300, 37.047_096_299_361_199),
    (1e-200, 30.205_594_179_579_643),
    (1e-100, 21.273_453_560_965_324),
    (1e-50, 14.933_337_534_788_489),
    (1e-20, 9.262_340_089_798_407_6),
    (1e-10, 6.361_340_902_404_056_2),
    (1e-5, 4.264_890_793_922_824_6),
    (0.001, 3.090_232_306_167_813_5),
    (0.025, 1.959_963_984_540_054_2),
    (0.05, 1.644_853_626_951_472_7),
    (0.158_655_253_931_457, 1.000_000_000_000_000_2),
    (0.3, 0.524_400_512_708_040_82),
    (0.5, 0.0),
    (0.7, -0.524_400_512_708_040_66),
    (0.95, -1.644_853_626_951_472_3),
    (0.999, -3.090_232_306_167_813_3),
    (0.999_999, -4.753_424_308_817_087_8),
    (0.999_999_999_9, -6.361_340_889_697_421_9),
    (0.999_999_999_999_99, -7.650_730_905_155_643),
    (0.999_999_999_999_999_9, -8.209_536_151_601_386_9),
];
