//! Built-in configurations for the standard comparison scenarios.

use crate::config::{parse_config, SimConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2a",
        description: "throughput, M_q=4 N_T=2 n_RF=2 N=M=2 N_R=2",
        toml: r#"[system]
N = 2
M = 2
N_R = 2

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 2

[[scheme]]
kind = "otfs-sm"
M_q = 4
N_T = 2

[[scheme]]
kind = "otfs"
M_q = 4

[sweep]
snr_db = { start = 0, stop = 30, step = 5 }
"#,
    },
    Preset {
        name: "fig2b",
        description: "throughput, M_q=4 N_T=2 n_RF=2 N=M=2 N_R=6",
        toml: r#"[system]
N = 2
M = 2
N_R = 6

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 2

[[scheme]]
kind = "otfs-sm"
M_q = 4
N_T = 2

[[scheme]]
kind = "otfs"
M_q = 4

[sweep]
snr_db = { start = 0, stop = 30, step = 5 }
"#,
    },
    Preset {
        name: "fig3a",
        description: "spectral efficiency, M_q=4 N_T=2 n_RF=2 N=M=2",
        toml: r#"[system]
N = 2
M = 2
N_R = 1

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 2

[[scheme]]
kind = "otfs-sm"
M_q = 4
N_T = 2

[[scheme]]
kind = "otfs"
M_q = 4
"#,
    },
    Preset {
        name: "fig3b",
        description: "spectral efficiency, M_q=8 N_T=4 n_RF=4 N=M=2",
        toml: r#"[system]
N = 2
M = 2
N_R = 1

[[scheme]]
kind = "otfs-mbm"
M_q = 8
n_RF = 4

[[scheme]]
kind = "otfs-sm"
M_q = 8
N_T = 4

[[scheme]]
kind = "otfs"
M_q = 8
"#,
    },
    Preset {
        name: "fig4a",
        description: "energy saving, M_q=4 N_T=4 n_RF=4 N=M=2",
        toml: r#"[system]
N = 2
M = 2
N_R = 1

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 4

[[scheme]]
kind = "otfs-sm"
M_q = 4
N_T = 4

[[scheme]]
kind = "otfs"
M_q = 4
"#,
    },
    Preset {
        name: "fig4b",
        description: "energy saving, M_q=8 N_T=16 n_RF=16 N=M=4 (analysis only)",
        toml: r#"[system]
N = 4
M = 4
N_R = 1

[[scheme]]
kind = "otfs-mbm"
M_q = 8
n_RF = 16

[[scheme]]
kind = "otfs-sm"
M_q = 8
N_T = 16

[[scheme]]
kind = "otfs"
M_q = 8
"#,
    },
    Preset {
        name: "fig5",
        description: "equal-rate BER (80 bits/frame), N=M=4 N_R=3",
        toml: r#"[system]
N = 4
M = 4
N_R = 3

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 3

[[scheme]]
kind = "otfs-sm"
M_q = 8
N_T = 4

[[scheme]]
kind = "otfs"
M_q = 32

[sweep]
snr_db = { start = 0, stop = 30, step = 5 }
"#,
    },
    Preset {
        name: "fig6",
        description: "equal-rate BER (80 bits/frame), N=M=4 N_R=5",
        toml: r#"[system]
N = 4
M = 4
N_R = 5

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 3

[[scheme]]
kind = "otfs-sm"
M_q = 8
N_T = 4

[[scheme]]
kind = "otfs"
M_q = 32

[sweep]
snr_db = { start = 0, stop = 30, step = 5 }
"#,
    },
    Preset {
        name: "fig7",
        description: "OTFS-MBM BER vs M_q in {4,8,16,32}, n_RF=2 N_R=4 N=M=4",
        toml: r#"[system]
N = 4
M = 4
N_R = 4

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 2

[[scheme]]
kind = "otfs-mbm"
M_q = 8
n_RF = 2

[[scheme]]
kind = "otfs-mbm"
M_q = 16
n_RF = 2

[[scheme]]
kind = "otfs-mbm"
M_q = 32
n_RF = 2

[sweep]
snr_db = { start = 0, stop = 30, step = 5 }
"#,
    },
    Preset {
        name: "fig8",
        description: "OTFS-MBM BER vs n_RF in {2,3,4,5}, M_q=4 N_R=4 N=M=4",
        toml: r#"[system]
N = 4
M = 4
N_R = 4

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 2

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 3

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 4

[[scheme]]
kind = "otfs-mbm"
M_q = 4
n_RF = 5

[sweep]
snr_db = { start = 0, stop = 30, step = 5 }
"#,
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        Error::param("preset", format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

pub fn load(name: &str) -> Result<SimConfig> {
    parse_config(find(name)?.toml)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::FrameParams;

    /// (scheme, M_q, n_RF, N_T)
    type SchemeRow = (&'static str, usize, u32, usize);

    /// (preset, N, M, N_R, schemes), kept separate from the TOML above.
    const EXPECTED: &[(&str, usize, usize, usize, &[SchemeRow])] = &[
        ("fig2a", 2, 2, 2, &[("otfs-mbm", 4, 2, 1), ("otfs-sm", 4, 0, 2), ("otfs", 4, 0, 1)]),
        ("fig2b", 2, 2, 6, &[("otfs-mbm", 4, 2, 1), ("otfs-sm", 4, 0, 2), ("otfs", 4, 0, 1)]),
        ("fig3a", 2, 2, 1, &[("otfs-mbm", 4, 2, 1), ("otfs-sm", 4, 0, 2), ("otfs", 4, 0, 1)]),
        ("fig3b", 2, 2, 1, &[("otfs-mbm", 8, 4, 1), ("otfs-sm", 8, 0, 4), ("otfs", 8, 0, 1)]),
        ("fig4a", 2, 2, 1, &[("otfs-mbm", 4, 4, 1), ("otfs-sm", 4, 0, 4), ("otfs", 4, 0, 1)]),
        ("fig4b", 4, 4, 1, &[("otfs-mbm", 8, 16, 1), ("otfs-sm", 8, 0, 16), ("otfs", 8, 0, 1)]),
        ("fig5", 4, 4, 3, &[("otfs-mbm", 4, 3, 1), ("otfs-sm", 8, 0, 4), ("otfs", 32, 0, 1)]),
        ("fig6", 4, 4, 5, &[("otfs-mbm", 4, 3, 1), ("otfs-sm", 8, 0, 4), ("otfs", 32, 0, 1)]),
        (
            "fig7",
            4,
            4,
            4,
            &[("otfs-mbm", 4, 2, 1), ("otfs-mbm", 8, 2, 1), ("otfs-mbm", 16, 2, 1), ("otfs-mbm", 32, 2, 1)],
        ),
        (
            "fig8",
            4,
            4,
            4,
            &[("otfs-mbm", 4, 2, 1), ("otfs-mbm", 4, 3, 1), ("otfs-mbm", 4, 4, 1), ("otfs-mbm", 4, 5, 1)],
        ),
    ];

    #[test]
    fn presets_match_expected_parameters() {
        assert_eq!(PRESETS.len(), EXPECTED.len());
        for &(name, n, m, n_r, schemes) in EXPECTED {
            let cfg = load(name).unwrap();
            let expected: Vec<FrameParams> = schemes
                .iter()
                .map(|&(kind, mq, nrf, nt)| FrameParams {
                    n,
                    m,
                    mod_order: mq,
                    n_rf: nrf,
                    n_t: nt,
                    n_r,
                    scheme: kind.parse().unwrap(),
                })
                .collect();
            assert_eq!(cfg.schemes, expected, "{name}");
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(find("fig9").unwrap_err().to_string().contains("fig5"));
    }
}
