use super::Scenario;
use crate::error::{Error, Result};

const TEST1A: &str = "\
[scenario]
name = test1a
equation = boltzmann
solver = MM

[grid]
nx = 100
x_min = 0
x_max = 1
bc = periodic
dim = 2
lv = 8.4
nv = 32

[time]
dt_factor = 0.05
t_end = 0.2
snapshots = 0.2

[knudsen]
profile = constant
eps = 1e-3

[initial]
kind = double-peak
omega = 6.283185307179586
u1 = 0.2

[scheme]
penalty = choice1
";

const TEST1B: &str = "\
[scenario]
name = test1b
equation = boltzmann
solver = MM

[grid]
nx = 100
x_min = 0
x_max = 1
bc = periodic
dim = 2
lv = 6
nv = 32

[time]
dt_factor = 0.05
t_end = 0.2
snapshots = 0.2

[knudsen]
profile = tanh
eps = 1e-2

[initial]
kind = double-peak
omega = 6.283185307179586
u1 = 0.2

[scheme]
penalty = choice1
";

const TEST1C: &str = "\
[scenario]
name = test1c
equation = boltzmann
solver = MM

[grid]
nx = 100
x_min = 0
x_max = 1
bc = free-flow
dim = 2
lv = 8.4
nv = 32

[time]
dt_factor = 0.05
t_end = 0.2
snapshots = 0.2

[knudsen]
profile = constant
eps = 1e-4

[initial]
kind = riemann
x0 = 0.5
rho_l = 1
u_l = 0
t_l = 1
rho_r = 0.125
u_r = 0
t_r = 0.25
";

const TEST2A: &str = "\
[scenario]
name = test2a
equation = landau
solver = MM

[grid]
nx = 100
x_min = -1
x_max = 1
bc = periodic
dim = 2
lv = 6
nv = 32

[time]
dt_factor = 0.05
t_end = 0.25
snapshots = 0.25

[knudsen]
profile = constant
eps = 1

[initial]
kind = double-peak
omega = 3.141592653589793
u1 = 0.2

[scheme]
landau_predictor = true
";

const TEST2B: &str = "\
[scenario]
name = test2b
equation = landau
solver = MM

[grid]
nx = 100
x_min = -0.5
x_max = 0.5
bc = free-flow
dim = 2
lv = 6
nv = 32

[time]
dt_factor = 0.05
t_end = 0.2
snapshots = 0.2

[knudsen]
profile = constant
eps = 1e-3

[initial]
kind = riemann
x0 = 0
rho_l = 1
u_l = 0
t_l = 1
rho_r = 0.125
u_r = 0
t_r = 0.25

[scheme]
landau_predictor = true
";

const TEST3: &str = "\
[scenario]
name = test3
equation = vlasov-ampere

[grid]
nx = 200
x_min = 0
x_max = 3.141592653589793
bc = periodic
dim = 1
lv = 6.283185307179586
nv = 64

[time]
dt_factor = 0.05
t_end = 10
snapshots = 0.5, 10

[initial]
kind = plasma
amplitude = 1
wavenumber = 2

[plasma]
field = ampere
background = 1
";

const TEST3_VAB: &str = "\
[scenario]
name = test3-vab
equation = vab

[grid]
nx = 100
x_min = 0
x_max = 3.141592653589793
bc = periodic
dim = 2
lv = 6.283185307179586
nv = 32

[time]
dt_factor = 0.05
t_end = 0.1
snapshots = 0.1

[knudsen]
profile = constant
eps = 0.05

[initial]
kind = plasma
amplitude = 1
wavenumber = 2

[plasma]
field = ampere
background = 1
";

const PRESETS: &[(&str, &str)] = &[
    ("test1a", TEST1A),
    ("test1b", TEST1B),
    ("test1c", TEST1C),
    ("test2a", TEST2A),
    ("test2b", TEST2B),
    ("test3", TEST3),
    ("test3-vab", TEST3_VAB),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let known: Vec<_> = preset_names().collect();
            Error::config(
                None,
                None,
                format!("unknown preset `{name}` (known: {})", known.join(", ")),
            )
        })
}

pub fn preset(name: &str) -> Result<Scenario> {
    Scenario::parse(preset_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryCondition;
    use crate::harness::{Equation, Initial, Knudsen};
    use std::f64::consts::PI;

    #[test]
    fn every_preset_resolves() {
        for n in preset_names() {
            let s = preset(n).unwrap();
            assert_eq!(s.name, n);
            assert!(s.base_dt() > 0.0);
        }
        assert!(preset("test9").is_err());
    }

    #[test]
    fn test1a_values() {
        let s = preset("test1a").unwrap();
        assert_eq!((s.nx, s.nv, s.lv, s.dim), (100, 32, 8.4, 2));
        assert_eq!(s.dt_factor, 0.05);
        assert_eq!(s.bc, BoundaryCondition::Periodic);
        assert_eq!(
            s.initial,
            Initial::DoublePeak {
                omega: 2.0 * PI,
                u1: 0.2
            }
        );
    }

    #[test]
    fn test1c_values() {
        let s = preset("test1c").unwrap();
        assert_eq!(s.bc, BoundaryCondition::FreeFlow);
        assert_eq!(s.knudsen, Knudsen::Constant(1e-4));
        match s.initial {
            Initial::Riemann { left, right, x0 } => {
                assert_eq!(
                    (left.rho, left.t, right.rho, right.t, x0),
                    (1.0, 1.0, 0.125, 0.25, 0.5)
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn test3_values() {
        let s = preset("test3").unwrap();
        assert_eq!(s.equation, Equation::VlasovAmpere);
        assert_eq!((s.nx, s.nv, s.dim), (200, 64, 1));
        assert_eq!((s.x_min, s.x_max, s.lv), (0.0, PI, 2.0 * PI));
        assert_eq!(
            s.initial,
            Initial::Plasma {
                amplitude: 1.0,
                wavenumber: 2.0
            }
        );
        assert_eq!(s.background, 1.0);
    }
}
