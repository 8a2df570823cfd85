//! Native checks of the browser operations. Only success paths run here:
//! building a `JsError` needs a JavaScript host.

use fracheat_web::{kernel_split, renorm_table, sample_sheet};

#[test]
fn sheet_is_pinned_on_the_time_axis() {
    let Ok(v) = sample_sheet(0.5, 0.8, 3, 7, 9, 5) else { panic!("sample failed") };
    assert_eq!(v.len(), 45);
    // first row is t = 0
    assert!(v[..5].iter().all(|&x| x == 0.0));
    assert!(v.iter().any(|&x| x != 0.0));
}

#[test]
fn kernel_split_adds_up() {
    let Ok(v) = kernel_split(0.05, 1.5, 41) else { panic!("split failed") };
    assert_eq!(v.len(), 123);
    for p in v.chunks(3) {
        assert!((p[0] - p[1] - p[2]).abs() <= 1e-12 * (1.0 + p[0].abs()));
    }
}

#[test]
fn renorm_table_increases_and_ends_with_the_limit() {
    let Ok(v) = renorm_table(0.5, 0.8, 5) else { panic!("table failed") };
    assert_eq!(v.len(), 6);
    assert!(v[..5].windows(2).all(|w| w[1] > w[0]));
    assert!((v[5] - 0.3022046265).abs() < 1e-8);
}
