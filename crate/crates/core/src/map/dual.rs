use std::ops::{Add, Div, Mul, Neg, Sub};

/// Forward-mode dual number `value + deriv·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub const fn new(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    /// The independent variable at `x`.
    pub const fn variable(x: f64) -> Self {
        Self::new(x, 1.0)
    }

    pub fn sin(self) -> Self {
        Self::new(self.value.sin(), self.deriv * self.value.cos())
    }

    pub fn cos(self) -> Self {
        Self::new(self.value.cos(), -self.deriv * self.value.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, self.deriv * e)
    }

    pub fn tanh(self) -> Self {
        let t = self.value.tanh();
        Self::new(t, self.deriv * (1.0 - t * t))
    }

    /// Right-hand derivative at zero.
    pub fn abs(self) -> Self {
        if self.value >= 0.0 {
            self
        } else {
            -self
        }
    }

    /// Integer power. `x^0 = 1` everywhere, including `x = 0`.
    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let lower = self.value.powi(n - 1);
        Self::new(lower * self.value, n as f64 * lower * self.deriv)
    }
}

impl Add for Dual {
    type Output = Dual;

    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;

    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;

    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.value * rhs.deriv + self.deriv * rhs.value,
        )
    }
}

impl Div for Dual {
    type Output = Dual;

    fn div(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value / rhs.value,
            (self.deriv * rhs.value - self.value * rhs.deriv) / (rhs.value * rhs.value),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;

    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}
