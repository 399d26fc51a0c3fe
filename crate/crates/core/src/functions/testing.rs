//! Shared fixtures for unit tests.

use super::{Alphabet, EpFn, Family, Func, Member};
use crate::indexing::Regime;

pub fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

pub fn abc() -> Alphabet {
    Alphabet::new(["a", "b", "c"]).unwrap()
}

pub fn ep(x: &Alphabet, prefix: &str, period: &str) -> EpFn {
    EpFn::new(x.parse_word(prefix).unwrap(), x.parse_word(period).unwrap()).unwrap()
}

pub fn pf(x: &Alphabet, prefix: &str, period: &str) -> Func {
    Func::Periodic(ep(x, prefix, period))
}

pub fn omega_family(x: &Alphabet, fns: &[(&str, &str, &str)]) -> Family {
    let members = fns
        .iter()
        .map(|(n, pre, per)| Member {
            name: n.to_string(),
            func: pf(x, pre, per),
        })
        .collect();
    Family::new(x.clone(), Regime::Omega, members).unwrap()
}

/// `{c_a, c_b, par}` over `{a, b}`.
pub fn s1() -> Family {
    omega_family(
        &ab(),
        &[("c_a", "", "a"), ("c_b", "", "b"), ("par", "", "ab")],
    )
}

pub fn bundled_like_families() -> Vec<Family> {
    vec![
        omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")]),
        s1(),
        omega_family(
            &abc(),
            &[
                ("c_a", "", "a"),
                ("bab", "", "bab"),
                ("aab", "a", "aab"),
                ("top", "b", "abc"),
            ],
        ),
        omega_family(
            &ab(),
            &[
                ("c_a", "", "a"),
                ("c_b", "", "b"),
                ("t", "a", "ab"),
                ("t_sw", "b", "ba"),
            ],
        ),
    ]
}

/// Two table functions over the four-element diamond order.
pub fn diamond_family() -> Family {
    use super::Symbol;
    use crate::indexing::FiniteOrder;
    let order = FiniteOrder::new_directed(
        &["bot", "a", "b", "top"],
        &[
            ("bot", "a"),
            ("bot", "b"),
            ("a", "top"),
            ("b", "top"),
            ("bot", "top"),
        ],
    )
    .unwrap();
    let members = vec![
        Member {
            name: "f".into(),
            func: Func::Table(vec![Symbol(0), Symbol(1), Symbol(0), Symbol(1)]),
        },
        Member {
            name: "g".into(),
            func: Func::Table(vec![Symbol(0); 4]),
        },
    ];
    Family::new(ab(), Regime::Finite(order), members).unwrap()
}
