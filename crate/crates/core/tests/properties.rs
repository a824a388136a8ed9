use proptest::prelude::*;

use otfs_mbm::channel::{sample_realization, ChannelConfig};
use otfs_mbm::detectors::detect_per_grid;
use otfs_mbm::mapping::{map_bits, stack_choices, unmap_choices};
use otfs_mbm::transform::{isfft, sfft, DDGridSignal, TransformConvention};
use otfs_mbm::{Complex, Constellation, FrameParams, Normalization, RngStream};

fn params() -> impl Strategy<Value = FrameParams> {
    let grid = (1usize..=3, 1usize..=3, 2u32..=6, 1usize..=3);
    prop_oneof![
        (grid.clone(), 1u32..=4).prop_map(|((n, m, q, nr), rf)| FrameParams::mbm(n, m, 1 << q, rf, nr).unwrap()),
        (grid.clone(), 0u32..=3).prop_map(|((n, m, q, nr), t)| FrameParams::sm(n, m, 1 << q, 1 << t, nr).unwrap()),
        grid.prop_map(|(n, m, q, nr)| FrameParams::otfs(n, m, 1 << q, nr).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mapping_round_trips(p in params(), seed in any::<u64>()) {
        let c = Constellation::qam(p.mod_order, Normalization::UnitEnergy).unwrap();
        let bits = RngStream::new(seed, 0).bits(p.bits_per_frame());
        let choices = map_bits(&bits, &p, &c).unwrap();
        prop_assert_eq!(unmap_choices(&choices, &p, &c).unwrap(), bits);
        let s = stack_choices(&choices, &c, &p).unwrap();
        prop_assert_eq!(s.iter().filter(|x| **x != Complex::new(0.0, 0.0)).count(), p.grid_points());
    }

    #[test]
    fn transform_round_trips(n in 1usize..=8, m in 1usize..=8, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 1);
        let data: Vec<Complex> = (0..n * m).map(|_| Complex::new(rng.standard_normal(), rng.standard_normal())).collect();
        let back = sfft(&isfft(&DDGridSignal::new(n, m, data.clone()).unwrap()));
        for (a, b) in back.data.iter().zip(&data) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn flat_noiseless_frames_detect_exactly(p in params(), seed in any::<u64>()) {
        let c = Constellation::qam(p.mod_order, Normalization::UnitEnergy).unwrap();
        let mut s = RngStream::new(seed, 2);
        let r = sample_realization(&ChannelConfig::flat(), &mut s, &p, TransformConvention::Unitary).unwrap();
        let bits = s.bits(p.bits_per_frame());
        let tx = map_bits(&bits, &p, &c).unwrap();
        let y = r.h_eff().mul_vec(&stack_choices(&tx, &c, &p).unwrap()).unwrap();
        prop_assert_eq!(detect_per_grid(&y, r.h_eff(), &c, &p).unwrap().bits, bits);
    }
}
