//! Canonical renderings parse back to the same form.

use std::collections::HashMap;

use g2het::exterior::{Coframe, Form};
use g2het::ring::{rat, ParamSet};
use g2het_cli::expr::{parse_form, Context};
use proptest::prelude::*;
use proptest::sample::subsequence;

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn render_then_parse_is_the_identity(
        k in 1usize..=4,
        terms in prop::collection::vec((subsequence((0..7).collect::<Vec<_>>(), 4), -9i64..=9, 1i64..=5, 0u32..=2, 0u32..=1), 1..6),
    ) {
        let params = ParamSet::builder().free("x").free("y").build().unwrap();
        let (x, y) = (params.var("x").unwrap(), params.var("y").unwrap());
        let cf = Coframe::standard(7);
        let f = terms.iter().fold(Form::zero(7), |acc, (idx, n, d, px, py)| {
            let c = x.pow(*px) * y.pow(*py);
            acc + Form::mono(7, &idx[..k]).scale(&c.scale(&rat(*n, *d)))
        });
        prop_assume!(!f.is_zero());
        let forms = HashMap::new();
        let ctx = Context { coframe: &cf, params: &params, forms: &forms };
        let back = parse_form(&f.render(&cf), &ctx, Some(k)).unwrap();
        prop_assert_eq!(back, f);
    }
}
