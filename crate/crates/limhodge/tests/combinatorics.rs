use limhodge::combinatorics::*;
use limhodge::{Field, Q};

/// All partitions of `n` letters into `k` nonempty consecutive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    (1..=n)
        .flat_map(|first| compositions(n - first, k - 1).into_iter().map(move |rest| [vec![first], rest].concat()))
        .collect()
}

/// Every assignment of letters to parts, not only consecutive ones.
fn assignments(n: usize, k: usize) -> Vec<Vec<u32>> {
    let total = k.pow(n as u32);
    (0..total)
        .filter_map(|mut code| {
            let mut parts = vec![0u32; k];
            for l in 0..n {
                parts[code % k] |= 1 << l;
                code /= k;
            }
            parts.iter().all(|&p| p != 0).then_some(parts)
        })
        .collect()
}

fn basis(s: u32) -> Exterior<Q> {
    Exterior::from([(s, Q::from_i64(1))])
}

fn negate(v: &Exterior<Q>) -> Exterior<Q> {
    v.iter().map(|(&s, c)| (s, -c.clone())).collect()
}

#[test]
fn chibar_graded_commutativity() {
    for n in 1..=5 {
        for k in 1..=3.min(n) {
            for parts in assignments(n, k) {
                for a in 0..(1u32 << n) {
                    for b in 0..(1u32 << n) {
                        let p = a.count_ones() as i64;
                        let q = b.count_ones() as i64;
                        let vw = chibar_ext(&parts, &basis(a), &basis(b));
                        let wv = chibar_ext(&parts, &basis(b), &basis(a));
                        let expected = if ((p - k as i64) * (q - k as i64)).rem_euclid(2) == 0 { vw } else { negate(&vw) };
                        assert_eq!(wv, expected, "n={n} parts={parts:?} a={a:b} b={b:b}");
                    }
                }
            }
        }
    }
}

#[test]
fn chibar_commutes_with_restriction() {
    for n in 1..=4 {
        for k in 1..=3.min(n) {
            for parts in assignments(n, k) {
                for gamma in 0..(1u32 << n) {
                    let sub: Vec<u32> = parts.iter().map(|p| p & gamma).collect();
                    for a in 0..(1u32 << n) {
                        for b in 0..(1u32 << n) {
                            let top = restrict(&chibar_ext(&parts, &basis(a), &basis(b)), gamma);
                            let bottom = chibar_ext(&sub, &restrict(&basis(a), gamma), &restrict(&basis(b), gamma));
                            assert_eq!(top, bottom, "parts={parts:?} gamma={gamma:b} a={a:b} b={b:b}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn koszul_stalk_operators() {
    for n in 1..=4 {
        for k in 1..=n.min(3) {
            for sizes in compositions(n, k) {
                let st = KoszulStalk::new(PartitionedAlphabet::with_sizes(&sizes).unwrap());
                for i in 0..k {
                    let ti = st.t::<Q>(i);
                    for j in 0..k {
                        let tj = st.t::<Q>(j);
                        assert!((&(&ti * &tj) + &(&tj * &ti)).is_zero());
                    }
                    for dirs in 0..(1u32 << k) {
                        let w = st.w::<Q>(dirs);
                        let raise = if dirs & (1 << i) != 0 { -1 } else { 0 };
                        // Increasing W_m ↦ W_{m+raise'} is a decreasing shift by -raise'.
                        assert!(w.maps_into(&ti, &w, raise));
                        if raise == -1 {
                            assert!(!w.maps_into(&ti, &w, 0) || ti.is_zero());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn local_a_invariants_and_convolution() {
    for n in 1..=4 {
        for k in 1..=n.min(3) {
            for sizes in compositions(n, k) {
                let alpha = PartitionedAlphabet::with_sizes(&sizes).unwrap();
                let a = LocalComplexA::<Q>::build(&alpha).unwrap();
                assert!(a.check_commutation(), "{sizes:?}");
                assert!(a.check_nu_shifts(), "{sizes:?}");
                for dirs in 0..(1u32 << k) {
                    assert!(a.verify_convolution_identity(dirs), "{sizes:?} I={dirs:b}");
                }
            }
        }
    }
}

#[test]
fn graded_residue_isomorphisms() {
    for n in 1..=4 {
        for k in 1..=n.min(3) {
            for sizes in compositions(n, k) {
                let alpha = PartitionedAlphabet::with_sizes(&sizes).unwrap();
                for q in a_exponents(&alpha) {
                    for dirs in 0..(1u32 << k) {
                        for m in 0..=n {
                            assert!(graded_residue_isomorphism::<Q>(&alpha, &q, dirs, m), "{sizes:?} q={q:?} I={dirs:b} m={m}");
                        }
                    }
                }
            }
        }
    }
}
