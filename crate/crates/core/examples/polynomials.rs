//! Parse, print, evaluate and differentiate complex polynomials.

use linkfold::polynomial::I;
use linkfold::{ComplexPoly, Point, PolyJet};
use num_complex::Complex64;

fn main() -> linkfold::Result<()> {
    let f = ComplexPoly::parse("z1^2 + z2^2 + z3^2", 3)?;
    let g = ComplexPoly::parse("z1 + 0.5i*z2", 3)?;
    println!("f = {f}");
    println!("g = {g}");
    println!("deg f = {:?}, homogeneous degree of g = {:?}", f.degree(), g.homogeneous_degree());

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = Point::new(vec![Complex64::new(s, 0.0), -I * s, Complex64::new(0.0, 0.0)]);
    println!("f(q) = {}", f.eval(&q)?);
    println!("g(q) = {}", g.eval(&q)?);
    println!("∂f/∂z2 = {}", f.wirtinger_partial(2)?);
    println!("grad̄f(q) = {:?}", f.conj_gradient(&q)?.0);

    let jet = PolyJet::new(g);
    let v = Point::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    println!("dg_q(e2) = {}", jet.differential(&q, &v));

    match ComplexPoly::parse("z1 + * z2", 3) {
        Err(e) => println!("parse error: {e}"),
        Ok(p) => println!("unexpected: {p}"),
    }
    Ok(())
}
