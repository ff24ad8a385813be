use num_bigint::BigInt;
use proptest::prelude::*;
use tf_cli::doc::{
    self, BasisDoc, BundleDoc, Document, HomDoc, Int, LinkingFormDoc, ManifoldDoc, QuadraticFunctionDoc,
    QuadraticLinkingDoc,
};
use tf_core::manifolds::{ManifoldDescriptor, SphereBundle};
use tf_core::torsion::{all_linking_forms, refinements};
use tf_core::{FinAbGroup, GroupHom, IntMatrix, QuadraticFunction};

fn symmetric(entries: &[i64], n: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0; n]; n];
    let mut it = entries.iter().cycle();
    for i in 0..n {
        for j in i..n {
            let v = *it.next().unwrap_or(&0);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

fn round_trip<D: Document>(v: &D::Value) -> D::Value {
    doc::load::<D>(&doc::emit::<D>(v), "emitted").expect("emitted documents parse")
}

proptest! {
    #[test]
    fn quadratic_function(n in 0usize..5, entries in prop::collection::vec(-50i64..50, 15), alpha in prop::collection::vec(-50i64..50, 5)) {
        let k = QuadraticFunction::from_i64(&symmetric(&entries, n), &alpha[..n]);
        prop_assert_eq!(round_trip::<QuadraticFunctionDoc>(&k), k);
    }

    #[test]
    fn big_entries(x in any::<i64>(), shift in 0u32..100) {
        let big = BigInt::from(x) << shift;
        let gram = IntMatrix::from_vec(1, 1, vec![big.clone()]).unwrap();
        let k = QuadraticFunction::new(gram, vec![big * 3]).unwrap();
        prop_assert_eq!(round_trip::<QuadraticFunctionDoc>(&k), k);
    }

    #[test]
    fn manifold(d in 0usize..3, entries in prop::collection::vec(-9i64..9, 6), spread in prop::collection::vec(-3i64..3, 3), exotic: bool) {
        let g = symmetric(&entries, d + 1);
        let alpha: Vec<i64> = (0..=d).map(|i| g[i][i].rem_euclid(2) + 2 * spread[i]).collect();
        let k = QuadraticFunction::from_i64(&g, &alpha);
        let p = ManifoldDescriptor::new(if exotic { 15 } else { 7 }, k, exotic).unwrap();
        prop_assert_eq!(round_trip::<ManifoldDoc>(&p), p);
    }

    #[test]
    fn bundle(m in any::<i64>(), n in any::<i64>()) {
        let b = SphereBundle { m, n };
        prop_assert_eq!(round_trip::<BundleDoc>(&b), b);
    }

    #[test]
    fn basis(rows in 1usize..4, cols in 0usize..4, entries in prop::collection::vec(-20i64..20, 16)) {
        let data = entries[..rows * cols].iter().map(|&x| BigInt::from(x)).collect();
        let m = IntMatrix::from_vec(rows, cols, data).unwrap();
        let text = serde_json::to_string(&BasisDoc::from_matrix(&m)).unwrap();
        let back = doc::parse::<BasisDoc>(&text, "emitted").unwrap().to_matrix(rows).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn every_form_and_refinement_on_small_groups() {
    let mut checked = 0;
    for orders in [vec![2u64], vec![4], vec![8], vec![3], vec![9], vec![2, 2], vec![2, 4], vec![2, 3], vec![2, 2, 2]] {
        let g = FinAbGroup::new(orders, 0).unwrap();
        for b in all_linking_forms(&g, 4096).unwrap() {
            assert_eq!(round_trip::<LinkingFormDoc>(&b), b);
            for q in refinements(&b, 4096).unwrap() {
                assert_eq!(round_trip::<QuadraticLinkingDoc>(&q), q);
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn homomorphisms() {
    let g = FinAbGroup::new(vec![2, 4, 3], 0).unwrap();
    let h = GroupHom::from_images(g.clone(), g.clone(), &[vec![1, 2, 0], vec![0, 3, 0], vec![0, 0, 2]]).unwrap();
    let text = serde_json::to_string(&HomDoc::from_hom(&h)).unwrap();
    assert_eq!(doc::parse::<HomDoc>(&text, "emitted").unwrap().to_hom(&g, &g).unwrap(), h);
}

#[test]
fn emitted_text_is_a_fixed_point() {
    let inputs = [
        r#"{"gram": [[2, -1], [-1, 2]], "alpha": [0, 2]}"#,
        r#"{"orders": [2, 4], "b": [["1/2", "0"], ["0", "3/4"]]}"#,
        r#"{"orders": [8], "b": [["13/8"]], "q": ["-3/16"]}"#,
        r#"{"dim": 15, "presentation": {"gram": [[1]], "alpha": [1]}, "sigma_p_exotic": true}"#,
    ];
    fn fixed<D: Document>(s: &str) {
        let once = doc::emit::<D>(&doc::load::<D>(s, "input").unwrap());
        let twice = doc::emit::<D>(&doc::load::<D>(&once, "emitted").unwrap());
        assert_eq!(once, twice);
    }
    fixed::<QuadraticFunctionDoc>(inputs[0]);
    fixed::<LinkingFormDoc>(inputs[1]);
    fixed::<QuadraticLinkingDoc>(inputs[2]);
    fixed::<ManifoldDoc>(inputs[3]);
}

#[test]
fn composite_orders_are_rewritten_on_primary_generators() {
    let b = doc::load::<LinkingFormDoc>(r#"{"orders": [6], "b": [["1/6"]]}"#, "input").unwrap();
    assert_eq!(b.group().orders(), &[2, 3]);
    let emitted: LinkingFormDoc = serde_json::from_str(&doc::emit::<LinkingFormDoc>(&b)).unwrap();
    assert_eq!(emitted.orders, vec![2, 3]);
}

#[test]
fn integers_past_i64_are_strings() {
    let big = BigInt::from(i64::MAX) * BigInt::from(4);
    let s = serde_json::to_string(&Int(big.clone())).unwrap();
    assert_eq!(s, format!("\"{big}\""));
    assert_eq!(serde_json::to_string(&Int(BigInt::from(-7))).unwrap(), "-7");
}

#[test]
fn diagnostics_name_the_field() {
    let e = doc::load::<QuadraticFunctionDoc>(r#"{"gram": [[1, 2], [3, 1]], "alpha": [1, 1]}"#, "f.json").unwrap_err();
    assert!(e.to_string().contains("field `gram`") && e.to_string().contains("symmetric"), "{e}");
    let e = doc::load::<QuadraticLinkingDoc>(r#"{"orders": [4], "b": [["1/4"]], "q": [0.5]}"#, "f.json").unwrap_err();
    assert!(e.to_string().contains("q[0]") && e.to_string().contains("line 1"), "{e}");
    let e = doc::load::<LinkingFormDoc>(r#"{"orders": [4], "b": [["1/4"]], "c": 1}"#, "f.json").unwrap_err();
    assert!(e.to_string().contains("unknown field"), "{e}");
    let e = doc::load::<ManifoldDoc>(r#"{"dim": 7, "presentation": {"gram": [[2]], "alpha": [1]}}"#, "f.json")
        .unwrap_err();
    assert!(e.to_string().contains("presentation"), "{e}");
    let e = doc::load::<QuadraticLinkingDoc>(r#"{"orders": [4], "b": [["1/4"]], "q": ["1/4"]}"#, "f.json").unwrap_err();
    assert!(e.to_string().contains("field `q`"), "{e}");
}
