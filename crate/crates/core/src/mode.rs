use std::fmt;
use std::ops::{Add, Neg};

use serde::{Deserialize, Serialize};

/// Integer wave numbers `(m1, m2)` of the torus mode `exp(2πi(m1·x + m2·ξ))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct FourierMode {
    pub m1: i64,
    pub m2: i64,
}

impl FourierMode {
    pub const ZERO: FourierMode = FourierMode { m1: 0, m2: 0 };

    pub const fn new(m1: i64, m2: i64) -> Self {
        FourierMode { m1, m2 }
    }

    pub fn is_zero(self) -> bool {
        self.m1 == 0 && self.m2 == 0
    }

    pub fn sup_norm(self) -> i64 {
        self.m1.abs().max(self.m2.abs())
    }

    /// Euclidean length, the `‖m‖` of the resonance and equidistribution bounds.
    pub fn norm(self) -> f64 {
        (self.m1 as f64).hypot(self.m2 as f64)
    }

    pub fn squared_norm(self) -> f64 {
        let (x, y) = (self.m1 as f64, self.m2 as f64);
        x * x + y * y
    }

    /// All modes with `‖m‖∞ ≤ radius`, in lexicographic order.
    pub fn square(radius: i64) -> impl Iterator<Item = FourierMode> {
        (-radius..=radius).flat_map(move |m1| (-radius..=radius).map(move |m2| FourierMode { m1, m2 }))
    }
}

impl Add for FourierMode {
    type Output = FourierMode;

    fn add(self, rhs: FourierMode) -> FourierMode {
        FourierMode::new(self.m1 + rhs.m1, self.m2 + rhs.m2)
    }
}

impl Neg for FourierMode {
    type Output = FourierMode;

    fn neg(self) -> FourierMode {
        FourierMode::new(-self.m1, -self.m2)
    }
}

impl From<(i64, i64)> for FourierMode {
    fn from((m1, m2): (i64, i64)) -> Self {
        FourierMode { m1, m2 }
    }
}

impl fmt::Display for FourierMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m1, self.m2)
    }
}
