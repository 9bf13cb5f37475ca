//! Published reference values for the boundary-tuned 20- and 60-node chains.
//!
//! Line parameters are quoted to about five decimals (Families I and II) or
//! four significant figures (Family III). Every entry is either purely real
//! or purely imaginary.

use num_complex::Complex64;

use crate::receiver::ParamKey::{self, *};

/// Tuned boundary couplings, registration time and end-to-end amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunedChain {
    pub n_nodes: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub t0: f64,
    pub amplitude: f64,
}

pub const TUNED_20: TunedChain = TunedChain {
    n_nodes: 20,
    delta1: 0.550,
    delta2: 0.817,
    t0: 26.441,
    amplitude: 0.99606,
};

pub const TUNED_60: TunedChain = TunedChain {
    n_nodes: 60,
    delta1: 0.414,
    delta2: 0.720,
    t0: 70.203,
    amplitude: 0.99223,
};

pub fn tuned(n_nodes: usize) -> Option<TunedChain> {
    match n_nodes {
        20 => Some(TUNED_20),
        60 => Some(TUNED_60),
        _ => None,
    }
}

/// A quoted value: real or imaginary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quoted {
    Re(f64),
    Im(f64),
}

impl Quoted {
    pub fn value(self) -> Complex64 {
        match self {
            Quoted::Re(x) => Complex64::new(x, 0.0),
            Quoted::Im(x) => Complex64::new(0.0, x),
        }
    }
}

use Quoted::{Im, Re};

/// Family I with values for N = 20 and N = 60.
pub const FAMILY_I_VALUES: [(ParamKey, Quoted, Quoted); 13] = [
    (SingleNm1(2), Im(0.96743), Im(0.91422)),
    (SingleN(1), Im(0.99606), Im(0.99223)),
    (Pair((1, 2)), Re(0.96361), Re(0.90711)),
    (CrossNm1(3, (2, 3)), Im(0.96707), Im(0.91238)),
    (CrossNm1(4, (2, 4)), Im(0.96741), Im(0.91422)),
    (CrossN(3, (1, 3)), Im(0.99601), Im(0.99220)),
    (CrossN(4, (1, 4)), Im(0.98812), Im(0.94575)),
    (NN((1, 3), (1, 3)), Re(0.99246), Re(0.98649)),
    (NN((1, 4), (1, 4)), Re(0.98424), Re(0.93841)),
    (Mm((2, 3), (2, 3)), Re(0.93561), Re(0.83415)),
    (Mm((2, 4), (2, 4)), Re(0.94387), Re(0.88263)),
    (MN((2, 3), (1, 3)), Re(0.96361), Re(0.90711)),
    (MN((2, 4), (1, 4)), Re(0.96361), Re(0.90711)),
];

/// Family II with values for N = 20 and N = 60.
pub const FAMILY_II_VALUES: [(ParamKey, Quoted, Quoted); 14] = [
    (SingleNm1(4), Im(-0.08929), Im(-0.21641)),
    (Pair((1, 4)), Re(-0.08894), Re(-0.21473)),
    (CrossNm1(2, (2, 4)), Im(0.08929), Im(0.21641)),
    (CrossNm1(3, (3, 4)), Im(0.08925), Im(0.21598)),
    (CrossN(2, (1, 2)), Im(0.06384), Im(0.16292)),
    (CrossN(4, (1, 2)), Im(0.08604), Im(0.19631)),
    (CrossN(2, (1, 4)), Im(0.08604), Im(0.19631)),
    (NN((1, 2), (1, 2)), Re(0.06358), Re(0.16166)),
    (NN((1, 4), (1, 2)), Re(0.08570), Re(0.19479)),
    (NN((1, 2), (1, 4)), Re(0.08570), Re(0.19479)),
    (Mm((3, 4), (2, 3)), Re(0.08635), Re(0.19745)),
    (Mm((2, 3), (3, 4)), Re(0.08635), Re(0.19745)),
    (MN((2, 4), (1, 2)), Re(0.08894), Re(0.21473)),
    (MN((3, 4), (1, 3)), Re(0.08894), Re(0.21473)),
];

/// Quoted magnitude windows `(lo, hi)` of families I and II for N = 20 and
/// N = 60, and the upper bound of family III.
pub const FAMILY_I_WINDOW: [(f64, f64); 2] = [(0.9356, 0.9961), (0.8341, 0.9923)];
pub const FAMILY_II_WINDOW: [(f64, f64); 2] = [(0.0635, 0.0893), (0.1616, 0.2165)];
pub const FAMILY_III_BOUND: [f64; 2] = [0.0193, 0.0468];

/// The 99 listed family-III entries of the 20-node chain.
pub const FAMILY_III_N20: [(ParamKey, Quoted); 99] = [
    (SingleNm1(1), Re(-1.007e-4)),
    (SingleNm1(3), Re(-7.168e-3)),
    (SingleN(2), Re(-1.007e-4)),
    (SingleN(3), Im(-1.928e-2)),
    (SingleN(4), Re(-3.860e-3)),
    (Pair((1, 3)), Im(7.142e-3)),
    (Pair((2, 3)), Re(1.865e-2)),
    (Pair((2, 4)), Im(-3.743e-3)),
    (Pair((3, 4)), Re(1.749e-3)),
    (CrossNm1(1, (1, 2)), Im(-7.606e-3)),
    (CrossNm1(2, (1, 2)), Re(3.665e-6)),
    (CrossNm1(3, (1, 2)), Im(-1.858e-2)),
    (CrossNm1(4, (1, 2)), Re(-3.720e-3)),
    (CrossNm1(1, (1, 3)), Re(-5.442e-5)),
    (CrossNm1(2, (1, 3)), Im(7.194e-7)),
    (CrossNm1(3, (1, 3)), Re(-3.695e-5)),
    (CrossNm1(4, (1, 3)), Im(2.757e-5)),
    (CrossNm1(1, (1, 4)), Im(7.023e-4)),
    (CrossNm1(2, (1, 4)), Re(8.958e-6)),
    (CrossNm1(3, (1, 4)), Im(1.714e-3)),
    (CrossNm1(4, (1, 4)), Re(4.440e-4)),
    (CrossNm1(1, (2, 3)), Im(1.858e-2)),
    (CrossNm1(2, (2, 3)), Re(-7.170e-3)),
    (CrossNm1(4, (2, 3)), Re(-7.199e-5)),
    (CrossNm1(1, (2, 4)), Re(-3.729e-3)),
    (CrossNm1(3, (2, 4)), Re(7.216e-5)),
    (CrossNm1(1, (3, 4)), Im(1.742e-3)),
    (CrossNm1(2, (3, 4)), Re(-1.762e-7)),
    (CrossNm1(4, (3, 4)), Re(7.161e-3)),
    (CrossN(1, (1, 2)), Re(-3.665e-6)),
    (CrossN(3, (1, 2)), Re(6.907e-3)),
    (CrossN(1, (1, 3)), Im(1.928e-2)),
    (CrossN(2, (1, 3)), Re(-6.909e-3)),
    (CrossN(4, (1, 3)), Re(6.377e-4)),
    (CrossN(1, (1, 4)), Re(-3.869e-3)),
    (CrossN(3, (1, 4)), Re(-6.375e-4)),
    (CrossN(1, (2, 3)), Re(1.878e-6)),
    (CrossN(2, (2, 3)), Im(1.236e-3)),
    (CrossN(3, (2, 3)), Re(2.344e-4)),
    (CrossN(4, (2, 3)), Im(1.665e-3)),
    (CrossN(1, (2, 4)), Im(3.771e-7)),
    (CrossN(2, (2, 4)), Re(-2.387e-4)),
    (CrossN(3, (2, 4)), Im(2.683e-5)),
    (CrossN(4, (2, 4)), Re(-2.335e-4)),
    (CrossN(1, (3, 4)), Re(1.762e-7)),
    (CrossN(2, (3, 4)), Im(-1.692e-3)),
    (CrossN(3, (3, 4)), Re(-3.848e-3)),
    (CrossN(4, (3, 4)), Im(-1.912e-2)),
    (NN((1, 2), (1, 3)), Im(6.880e-3)),
    (NN((1, 3), (1, 4)), Im(7.096e-4)),
    (NN((1, 2), (2, 3)), Re(1.231e-3)),
    (NN((1, 3), (2, 3)), Im(-2.335e-4)),
    (NN((1, 4), (2, 3)), Re(1.659e-3)),
    (NN((2, 3), (2, 3)), Re(2.385e-5)),
    (NN((1, 2), (2, 4)), Im(2.377e-4)),
    (NN((1, 3), (2, 4)), Re(2.673e-5)),
    (NN((1, 4), (2, 4)), Im(2.326e-4)),
    (NN((2, 3), (2, 4)), Im(4.604e-6)),
    (NN((2, 4), (2, 4)), Re(8.978e-7)),
    (NN((1, 2), (3, 4)), Re(-1.685e-3)),
    (NN((1, 3), (3, 4)), Im(3.832e-3)),
    (NN((1, 4), (3, 4)), Re(-1.905e-2)),
    (NN((2, 3), (3, 4)), Re(-3.300e-5)),
    (NN((2, 4), (3, 4)), Im(4.605e-6)),
    (NN((3, 4), (3, 4)), Re(3.835e-4)),
    (Mm((1, 2), (1, 2)), Re(7.358e-3)),
    (Mm((1, 2), (1, 3)), Im(-5.265e-5)),
    (Mm((1, 3), (1, 3)), Re(3.864e-7)),
    (Mm((1, 2), (1, 4)), Re(-6.795e-4)),
    (Mm((1, 3), (1, 4)), Im(-4.862e-6)),
    (Mm((1, 4), (1, 4)), Re(6.275e-5)),
    (Mm((1, 2), (2, 3)), Re(-1.797e-2)),
    (Mm((1, 3), (2, 3)), Im(-3.574e-5)),
    (Mm((1, 4), (2, 3)), Re(1.659e-3)),
    (Mm((1, 2), (2, 4)), Im(-3.598e-3)),
    (Mm((1, 3), (2, 4)), Re(2.673e-5)),
    (Mm((1, 4), (2, 4)), Im(4.304e-4)),
    (Mm((2, 3), (2, 4)), Im(-7.098e-4)),
    (Mm((1, 2), (3, 4)), Re(-1.685e-3)),
    (Mm((1, 3), (3, 4)), Im(-3.497e-6)),
    (Mm((1, 4), (3, 4)), Re(1.563e-4)),
    (Mm((2, 4), (3, 4)), Im(-6.928e-3)),
    (Mm((3, 4), (3, 4)), Re(8.021e-3)),
    (MN((1, 2), (1, 2)), Im(2.884e-6)),
    (MN((1, 3), (1, 3)), Im(-3.785e-5)),
    (MN((1, 4), (1, 4)), Im(4.450e-4)),
    (MN((2, 3), (2, 3)), Im(-2.356e-4)),
    (MN((2, 4), (2, 4)), Im(2.472e-4)),
    (MN((3, 4), (3, 4)), Im(2.065e-4)),
    (MN((1, 3), (1, 2)), Re(7.220e-7)),
    (MN((1, 4), (1, 2)), Im(8.994e-6)),
    (MN((2, 3), (1, 2)), Im(-7.140e-3)),
    (MN((1, 2), (1, 3)), Re(-1.865e-2)),
    (MN((1, 4), (1, 3)), Re(1.721e-3)),
    (MN((1, 2), (1, 4)), Im(-3.734e-3)),
    (MN((1, 3), (1, 4)), Re(2.767e-5)),
    (MN((1, 2), (2, 3)), Im(1.942e-6)),
    (MN((1, 3), (2, 3)), Re(1.015e-8)),
    (MN((1, 2), (2, 4)), Re(-3.888e-7)),
];

/// Werner-state controls `(p, [a12, a13, a14, a23, a24, a34], discrepancy)`
/// solved against the full parameter table.
pub const WERNER_FULL: [(f64, [f64; 6], f64); 9] = [
    (
        0.0,
        [0.53233, 0.42337, 0.20146, 0.21791, -0.44593, 0.50046],
        4.235e-5,
    ),
    (
        0.1,
        [0.52208, 0.24658, 0.41283, 0.38198, -0.34211, 0.48296],
        2.641e-5,
    ),
    (
        0.2,
        [0.49965, 0.14204, 0.48397, 0.42820, -0.32433, 0.45540],
        1.532e-5,
    ),
    (
        0.3,
        [0.47309, 0.07861, 0.52371, 0.44462, -0.34473, 0.42334],
        3.883e-5,
    ),
    (
        0.4,
        [0.44366, 0.03642, 0.55344, 0.44645, -0.38257, 0.38713],
        1.744e-6,
    ),
    (
        0.5,
        [0.41131, 0.01047, 0.57913, 0.43460, -0.43236, 0.34571],
        2.066e-5,
    ),
    (
        0.6,
        [0.37550, 0.00361, 0.60326, 0.40331, -0.49433, 0.29673],
        2.347e-5,
    ),
    (
        0.7,
        [0.33507, 0.02962, 0.62617, 0.33516, -0.57203, 0.23496],
        6.332e-6,
    ),
    (
        0.8,
        [0.28714, 0.13374, 0.63657, 0.17462, -0.66556, 0.14487],
        1.604e-5,
    ),
];

/// Werner-state controls solved with family III set to zero.
pub const WERNER_NO_FAMILY_III: [(f64, [f64; 6], f64); 9] = [
    (
        0.0,
        [0.55924, 0.00127, 0.43728, 0.47083, -0.00135, 0.52378],
        2.906e-2,
    ),
    (
        0.1,
        [0.53510, -0.04674, 0.46417, 0.49567, -0.05174, 0.49766],
        2.893e-2,
    ),
    (
        0.2,
        [0.50894, -0.09432, 0.48584, 0.51641, -0.09569, 0.46926],
        2.760e-2,
    ),
    (
        0.3,
        [0.48066, -0.13718, 0.50409, 0.53327, -0.14033, 0.43815],
        2.540e-2,
    ),
    (
        0.4,
        [0.44449, -0.30614, 0.46113, 0.57393, -0.04057, 0.40624],
        2.234e-2,
    ),
    (
        0.5,
        [0.41591, -0.22160, 0.53091, 0.55857, -0.22518, 0.36516],
        1.964e-2,
    ),
    (
        0.6,
        [0.37799, -0.26409, 0.53974, 0.56726, -0.26749, 0.32050],
        1.648e-2,
    ),
    (
        0.7,
        [0.33452, -0.30791, 0.54518, 0.57314, -0.31105, 0.26614],
        1.317e-2,
    ),
    (
        0.8,
        [0.28247, -0.35464, 0.54622, 0.57594, -0.35749, 0.19123],
        9.600e-3,
    ),
];

/// Largest creatable Werner parameter on the tuned 20-node chain.
pub const WERNER_BOUNDARY: f64 = 0.8744;

/// Upper bounds on the mean Werner discrepancy under bulk disorder
/// `(epsilon, bound)`.
pub const DISORDER_BOUNDS: [(f64, f64); 2] = [(0.025, 0.02), (0.05, 0.05)];
