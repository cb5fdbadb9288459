//! Named experiment configs. Sizes are desk scale; each description says
//! what was shrunk.

pub struct Preset {
    pub name: &'static str,
    pub about: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "ising-fig2-left",
        about: "Ising chain at lambda = 0.8: optimized LE, Qxx and Monte Carlo against distance (N = 14 exact instead of N = 80)",
        toml: r#"
[model]
family = "ising"
n_sites = 14
boundary = "periodic"
lambda = 0.8
max_bond = 16

[task]
kind = "le_exact"
n_min = 1
n_max = 7
strategy = "optimize"
correlations = true
with_mc = true

[mc]
sweeps = 20000
chains = 1
seed = 0
"#,
    },
    Preset {
        name: "ising-fig2-right",
        about: "critical Ising chain: standard-basis LE and Qxx against distance (N = 16 exact instead of N = 80)",
        toml: r#"
[model]
family = "ising"
n_sites = 16
boundary = "periodic"
lambda = 1.0

[task]
kind = "le_exact"
n_min = 1
n_max = 8
strategy = "standard"
correlations = true
"#,
    },
    Preset {
        name: "ising-fig3-fluct-n1",
        about: "entanglement fluctuations of nearest neighbours against lambda, N = 16",
        toml: r#"
[model]
family = "ising"
n_sites = 16
boundary = "periodic"
lambda = 1.0

[task]
kind = "sweep"
n_min = 1
n_max = 1
strategy = "standard"

[sweep]
axis = "model.lambda"
start = 0.6
stop = 1.4
step = 0.02
task = "fluctuations"
"#,
    },
    Preset {
        name: "ising-fig3-fluct-n4",
        about: "entanglement fluctuations at distance 4 against lambda, N = 16",
        toml: r#"
[model]
family = "ising"
n_sites = 16
boundary = "periodic"
lambda = 1.0

[task]
kind = "sweep"
n_min = 4
n_max = 4
strategy = "standard"

[sweep]
axis = "model.lambda"
start = 0.6
stop = 1.4
step = 0.02
task = "fluctuations"
"#,
    },
    Preset {
        name: "xxz-fig5",
        about: "XXZ chain at Delta = 0.5: LE, assistance bound and correlations at distance 4 against the field (N = 12 instead of N = 16)",
        toml: r#"
[model]
family = "xxz"
n_sites = 12
boundary = "periodic"
delta = 0.5
h = 0.0

[task]
kind = "sweep"
n_min = 4
n_max = 4
strategy = "optimize"
correlations = true

[sweep]
axis = "model.h"
start = 0.0
stop = 4.0
step = 0.25
task = "le_exact"
"#,
    },
    Preset {
        name: "xxx-cusp",
        about: "zero-field XXZ chain: nearest-neighbour LE and correlations across Delta = -1, N = 10",
        toml: r#"
[model]
family = "xxz"
n_sites = 10
boundary = "periodic"
delta = -1.0
h = 0.0

[task]
kind = "sweep"
n_min = 1
n_max = 1
strategy = "optimize"
correlations = true

[sweep]
axis = "model.delta"
start = -1.5
stop = -0.5
step = 0.05
task = "le_exact"
"#,
    },
    Preset {
        name: "xxx-saturation",
        about: "XXZ chain on the Delta = -1 line: LE at distance 6 against the field, vanishing past saturation, N = 12",
        toml: r#"
[model]
family = "xxz"
n_sites = 12
boundary = "periodic"
delta = -1.0
h = 0.0

[task]
kind = "sweep"
n_min = 6
n_max = 6
strategy = "optimize"

[sweep]
axis = "model.h"
start = 0.0
stop = 5.0
step = 0.25
task = "le_exact"
"#,
    },
    Preset {
        name: "heisenberg-fig7",
        about: "open spin-1 Heisenberg chain: entropy LE in the U-basis against distance (N = 8 exact instead of an N = 80 MPS)",
        toml: r#"
[model]
family = "heisenberg"
n_sites = 8
boundary = "open"
beta = 0.0

[task]
kind = "le_exact"
n_min = 1
n_max = 7
measure = "entropy"
strategy = "u_basis"
"#,
    },
    Preset {
        name: "aklt-end-to-end",
        about: "AKLT MPS with qubit ends: end-to-end LE in the U-basis, exact and from the transfer matrix, for growing chains",
        toml: r#"
[model]
family = "mps"
state = "aklt"
n_sites = 2

[task]
kind = "sweep"
ends = true
strategy = "u_basis"

[sweep]
axis = "model.n_sites"
values = [2, 4, 6, 8]
task = "le_exact"
"#,
    },
    Preset {
        name: "heisenberg-caps",
        about: "spin-1 Heisenberg chain with spin-1/2 caps: optimized LE between the caps, up to 6 spin-1 sites",
        toml: r#"
[model]
family = "heisenberg"
n_sites = 2
boundary = "open"
end_spins = true
beta = 0.0

[task]
kind = "sweep"
ends = true
strategy = "optimize"

[sweep]
axis = "model.n_sites"
values = [2, 4, 6]
task = "le_exact"
"#,
    },
    Preset {
        name: "aklt-thermal",
        about: "thermal AKLT chain, 6 spin-1 sites plus caps: negativity LE of centred pairs against temperature (instead of N = 50 by Monte Carlo)",
        toml: r#"
[model]
family = "aklt"
n_sites = 6
boundary = "open"
end_spins = true

[task]
kind = "thermal"
n_min = 1
n_max = 5
centered = true
measure = "negativity"
strategy = "u_between"
temperatures = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
"#,
    },
    Preset {
        name: "string-order-aklt",
        about: "AKLT MPS: string correlation between qubit ends from the transfer matrix, and its limit",
        toml: r#"
[model]
family = "mps"
state = "aklt"
n_sites = 20

[task]
kind = "string_order"
n_min = 1
n_max = 20
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn every_preset_validates() {
        for p in PRESETS {
            let doc: toml::Value = p.toml.parse().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            ExperimentConfig::from_value(doc).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), PRESETS.len());
    }
}
