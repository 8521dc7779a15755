use gaborface::fiducial::{landmarks, FiducialConfig, Role};
use gaborface::toyset::ChipSpec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn landmarks_are_mirror_equivariant(seed in any::<u64>()) {
        let spec = ChipSpec::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let chip = spec.render();
        let cfg = FiducialConfig::default();
        let original = landmarks(&chip, &cfg).unwrap();
        let flipped = landmarks(&chip.flip_horizontal(), &cfg).unwrap();
        let expected = original.mirrored(chip.width());
        for role in Role::ALL {
            let (a, b) = (flipped.get(role), expected.get(role));
            prop_assert!(a.distance(b) <= 1.0, "{role}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn random_chips_match_their_closed_form(seed in any::<u64>()) {
        let spec = ChipSpec::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let found = landmarks(&spec.render(), &FiducialConfig::default()).unwrap();
        let expected = spec.expected_landmarks().unwrap();
        for role in Role::ALL {
            prop_assert!(found.get(role).distance(expected.get(role)) <= 1.0, "{role}");
        }
    }
}
