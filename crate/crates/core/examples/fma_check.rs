fn main() {
    let a = 1.1f64;
    let b = 1.3f64;
    let p = a * b;
    let e = a.mul_add(b, -p);
    println!("p = {p:.20e}, e = {e:.3e} (exact fma iff e is the rounding error, ~1e-17)");
    // known: 1.1*1.3 true = 1.4300000000000001815... ; f64 product 1.4300000000000001overflow..
    let x = 4.0f64 / 3.0;  // 1.3333... with known error
    let p2 = x * x;
    let e2 = x.mul_add(x, -p2);
    println!("x*x: p = {p2:.20e}, e = {e2:.3e}");
}
