mod common;

use num_rational::Rational64;
use proptest::prelude::*;

use mpath::capacity::{
    evaluate, feasible_z, rate, rate_grid, read_csv, regime, write_csv, CapacityError, CapacityProfile, Regime, Scenario,
};
use mpath::channel::AdversaryVector;
use mpath::harness::default_golden_path;

use common::table_oracle;

#[test]
fn golden_rows_match_the_hand_typed_table() {
    let rows = read_csv(std::fs::File::open(default_golden_path()).unwrap()).unwrap();
    assert_eq!(rows.len(), 5928);
    for r in &rows {
        let c: i64 = r.c_or_profile.parse().unwrap();
        let (reg, want) = table_oracle(&r.scenario, c, r.z_rw as i64, r.z_ro as i64, r.z_wo as i64);
        assert_eq!(r.rate, want.to_string(), "{} C={c} z={}", r.scenario, r.z());
        assert_eq!(r.regime.to_string(), reg, "{} C={c} z={}", r.scenario, r.z());
    }
}

#[test]
fn grid_round_trips_through_csv() {
    let rows = rate_grid(1..=3).unwrap();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("scenario,causality,model,feedback,secrecy,C_or_profile,z_rw,z_ro,z_wo,regime,rate"));
    assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
}

#[test]
fn worked_examples() {
    let cases = [
        ("noncausal-nofb-additive-reliable", 3, (1, 0, 0), 2),
        ("causal-nofb-additive-reliable", 3, (1, 2, 0), 2),
        ("causal-fb-additive-reliable", 2, (1, 0, 0), 1),
        ("causal-fb-additive-secret", 2, (0, 1, 1), 1),
        ("causal-nofb-additive-reliable", 3, (2, 0, 0), 0),
        ("causal-nofb-additive-reliable", 7, (1, 2, 1), 5),
    ];
    for (s, c, (rw, ro, wo), want) in cases {
        let row = evaluate(&CapacityProfile::Equal(c), &AdversaryVector::new(rw, ro, wo), &s.parse().unwrap()).unwrap();
        assert_eq!(row.rate, want.to_string(), "{s}");
    }
}

#[test]
fn unequal_profile_uses_heaviest_links() {
    let p: CapacityProfile = "3;1;1".parse().unwrap();
    let s: Scenario = "causal-nofb-additive-reliable".parse().unwrap();
    // One write-only link can take the 3-capacity link.
    assert_eq!(rate(&p, &AdversaryVector::new(0, 0, 1), &s).unwrap(), Rational64::from(2));
    let secret = s.with_secrecy(true);
    assert!(matches!(
        rate(&p, &AdversaryVector::new(0, 0, 1), &secret),
        Err(CapacityError::UnequalSecrecy)
    ));
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (0..12usize).prop_map(|i| Scenario::all()[i])
}

fn point() -> impl Strategy<Value = (usize, AdversaryVector)> {
    (1..=10usize).prop_flat_map(|c| {
        let zs = feasible_z(c);
        (Just(c), 0..zs.len()).prop_map(move |(c, i)| (c, zs[i]))
    })
}

proptest! {
    #[test]
    fn rate_never_grows_with_the_adversary((c, z) in point(), s in scenario(), which in 0..3usize) {
        let mut bigger = z;
        match which {
            0 => bigger.rw += 1,
            1 => bigger.ro += 1,
            _ => bigger.wo += 1,
        }
        prop_assume!(bigger.total() <= c);
        let p = CapacityProfile::Equal(c);
        prop_assert!(rate(&p, &bigger, &s).unwrap() <= rate(&p, &z, &s).unwrap());
    }

    #[test]
    fn secrecy_never_beats_reliability((c, z) in point(), s in scenario()) {
        let p = CapacityProfile::Equal(c);
        prop_assert!(rate(&p, &z, &s.with_secrecy(true)).unwrap() <= rate(&p, &z, &s.with_secrecy(false)).unwrap());
    }

    #[test]
    fn rate_within_cut_set((c, z) in point(), s in scenario()) {
        let r = rate(&CapacityProfile::Equal(c), &z, &s).unwrap();
        prop_assert!(r >= Rational64::from(0));
        prop_assert!(r <= Rational64::from((c - z.z_w()) as i64));
    }

    #[test]
    fn strong_regime_matches_oracle((c, z) in point(), s in scenario()) {
        let p = CapacityProfile::Equal(c);
        let (reg, want) = table_oracle(&s.id(), c as i64, z.rw as i64, z.ro as i64, z.wo as i64);
        let got = regime(&p, &z, &s).unwrap();
        prop_assert_eq!(got == Regime::Strong, reg == "strong");
        prop_assert_eq!(rate(&p, &z, &s).unwrap(), Rational64::from(want));
    }
}
