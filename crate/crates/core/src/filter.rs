//! Low-pass filter for the process variable and setpoint.
//!
//! Two cascaded first-order Tustin stages in incremental form, so changes of
//! `tf` or `dt` between steps never make the output jump.

/// Filter order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterOrder {
    First,
    #[default]
    Second,
}

/// Per-stage gain `a = dt / (tf + dt/2)`. Only meaningful for `tf > 0`.
pub fn filter_coefficient(tf: f64, dt: f64) -> f64 {
    dt / (tf + dt / 2.0)
}

/// State of one filtered signal. Every signal owns its own instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub xf1: f64,
    pub xf2: f64,
    /// Time constant in seconds; `0` bypasses the filter.
    pub tf: f64,
    pub order: FilterOrder,
}

impl FilterState {
    pub fn new(tf: f64) -> Self {
        assert!(
            tf >= 0.0 && tf.is_finite(),
            "filter time constant must be >= 0"
        );
        FilterState {
            xf1: 0.0,
            xf2: 0.0,
            tf,
            order: FilterOrder::Second,
        }
    }

    pub fn first_order(tf: f64) -> Self {
        FilterState {
            order: FilterOrder::First,
            ..FilterState::new(tf)
        }
    }

    /// Loads both stages with the latest available measurement.
    pub fn init(&mut self, y0: f64) {
        self.xf1 = y0;
        self.xf2 = y0;
    }

    pub fn set_time_constant(&mut self, tf: f64) {
        assert!(
            tf >= 0.0 && tf.is_finite(),
            "filter time constant must be >= 0"
        );
        self.tf = tf;
    }

    pub fn output(&self) -> f64 {
        match self.order {
            FilterOrder::First => self.xf1,
            FilterOrder::Second => self.xf2,
        }
    }

    /// Advances the filter by `dt` and returns the filtered value.
    pub fn step(&mut self, y: f64, dt: f64) -> f64 {
        debug_assert!(dt > 0.0);
        if self.tf == 0.0 {
            self.xf1 = y;
            self.xf2 = y;
            return y;
        }
        let a = filter_coefficient(self.tf, dt);
        self.xf1 += a * (y - self.xf1);
        if self.order == FilterOrder::Second {
            self.xf2 += a * (self.xf1 - self.xf2);
        } else {
            self.xf2 = self.xf1;
        }
        self.output()
    }
}
