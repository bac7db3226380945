//! Full-scale lift: the largest code size exercised by the simulation
//! profiles.  Slow (~35 s in an optimized test build) but a direct check that
//! the edge-placement loop scales to production dimensions.

use jscc::lifting::{measure_girth, peg_lift};
use jscc::protomatrix::Protomatrix;

#[test]
fn full_scale_lift_dimensions_and_girth() {
    let b = Protomatrix::new(
        vec![
            vec![1, 1, 2, 0, 0],
            vec![0, 1, 2, 1, 1],
            vec![0, 2, 1, 1, 1],
        ],
        2,
        1,
    )
    .unwrap();
    let code = peg_lift(&b, 6400, 1).unwrap();
    assert_eq!(code.rows(), 19_200);
    assert_eq!(code.cols(), 32_000);
    assert_eq!(code.source_cols(), 12_800);
    let g = measure_girth(&code).expect("cycles exist at this density");
    assert!(g >= 6, "full-scale lift left a 4-cycle");
    assert_eq!(code.girth(), Some(g));
}
