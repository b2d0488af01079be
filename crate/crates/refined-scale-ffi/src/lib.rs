//! C ABI surface (probe).

#[no_mangle]
pub extern "C" fn rs_iterated_log(level: usize, t: f64) -> f64 {
    refined_scale::slowly_varying::iterated_log(level, t)
}
