/// Gaussian-envelope laser pulse `E cos(w (t - t_c)) exp(-((t - t_c)/tau)^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub amplitude: f64,
    pub carrier: f64,
    pub center: f64,
    pub width: f64,
}

impl Pulse {
    pub fn envelope(&self, t: f64) -> f64 {
        let s = (t - self.center) / self.width;
        self.amplitude * (-s * s).exp()
    }

    pub fn value(&self, t: f64) -> f64 {
        self.envelope(t) * (self.carrier * (t - self.center)).cos()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PulseSet {
    pub pulses: Vec<Pulse>,
}

impl PulseSet {
    pub fn new(pulses: Vec<Pulse>) -> Self {
        Self { pulses }
    }

    /// Largest envelope value reached anywhere, a bound on `|E(t)|`.
    pub fn peak_bound(&self) -> f64 {
        self.pulses.iter().map(|p| p.amplitude.abs()).sum()
    }
}

pub fn field_amplitude(t: f64, pulses: &PulseSet) -> f64 {
    pulses.pulses.iter().map(|p| p.value(t)).sum()
}
