use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64;

fn main() {
    let m = Array2::<Complex64>::eye(4);
    let (_, s, _) = m.svd(true, true).expect("svd");
    println!("probe ok: {:?}", s);
}
