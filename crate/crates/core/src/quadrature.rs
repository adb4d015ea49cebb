//! Quadrature rules on triangles and edges.
//!
//! Volume stiffness and divergence integrands are cellwise constant, so the
//! one-point centroid rule is exact for them. Load and boundary-data terms
//! use degree-4 rules (six-point triangle rule, three-point Gauss per edge)
//! which keep quadrature error well below discretization error for the
//! trigonometric data used in the convergence studies.

/// Six-point triangle rule, exact for polynomials of total degree 4.
/// Entries are (lambda0, lambda1, lambda2, weight); weights sum to 1 and are
/// relative to the triangle area.
pub const TRI_DEGREE4: [(f64, f64, f64, f64); 6] = [
    (
        0.445948490915965,
        0.445948490915965,
        0.108103018168070,
        0.223381589678011,
    ),
    (
        0.445948490915965,
        0.108103018168070,
        0.445948490915965,
        0.223381589678011,
    ),
    (
        0.108103018168070,
        0.445948490915965,
        0.445948490915965,
        0.223381589678011,
    ),
    (
        0.091576213509771,
        0.091576213509771,
        0.816847572980459,
        0.109951743655322,
    ),
    (
        0.091576213509771,
        0.816847572980459,
        0.091576213509771,
        0.109951743655322,
    ),
    (
        0.816847572980459,
        0.091576213509771,
        0.091576213509771,
        0.109951743655322,
    ),
];

/// Three-point Gauss-Legendre rule on [0, 1], exact for degree 5.
/// Entries are (parameter, weight); weights sum to 1 and are relative to the
/// edge length.
pub fn edge_gauss3() -> [(f64, f64); 2 + 1] {
    let s = (0.6_f64).sqrt(); // sqrt(3/5)
    [
        (0.5 * (1.0 - s), 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 * (1.0 + s), 5.0 / 18.0),
    ]
}

/// Maps the degree-4 triangle rule to physical coordinates of the triangle
/// with vertices `p0`, `p1`, `p2`, returning (point, weight) pairs whose
/// weights include the triangle area.
pub fn triangle_points_deg4(
    p0: [f64; 2],
    p1: [f64; 2],
    p2: [f64; 2],
    area: f64,
) -> [([f64; 2], f64); 6] {
    let mut out = [([0.0; 2], 0.0); 6];
    for (k, &(l0, l1, l2, w)) in TRI_DEGREE4.iter().enumerate() {
        let x = l0 * p0[0] + l1 * p1[0] + l2 * p2[0];
        let y = l0 * p0[1] + l1 * p1[1] + l2 * p2[1];
        out[k] = ([x, y], w * area);
    }
    out
}

/// Maps the three-point Gauss rule to the physical segment from `a` to `b`,
/// returning (point, weight) pairs whose weights include the segment length.
pub fn edge_points_gauss3(a: [f64; 2], b: [f64; 2], length: f64) -> [([f64; 2], f64); 3] {
    let mut out = [([0.0; 2], 0.0); 3];
    for (k, &(t, w)) in edge_gauss3().iter().enumerate() {
        let x = a[0] + t * (b[0] - a[0]);
        let y = a[1] + t * (b[1] - a[1]);
        out[k] = ([x, y], w * length);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_tri(f: impl Fn(f64, f64) -> f64) -> f64 {
        // reference triangle (0,0), (1,0), (0,1)
        triangle_points_deg4([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], 0.5)
            .iter()
            .map(|&([x, y], w)| w * f(x, y))
            .sum()
    }

    #[test]
    fn triangle_rule_exact_to_degree_4() {
        // exact monomial integrals on the reference triangle:
        // int x^a y^b = a! b! / (a+b+2)!
        let fact = |n: u64| -> f64 { (1..=n).product::<u64>() as f64 };
        for a in 0..=4u64 {
            for b in 0..=(4 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let got = integrate_tri(|x, y| x.powi(a as i32) * y.powi(b as i32));
                assert!(
                    (got - exact).abs() < 1e-15,
                    "x^{a} y^{b}: got {got}, exact {exact}"
                );
            }
        }
    }

    #[test]
    fn edge_rule_exact_to_degree_5() {
        for n in 0..=5u32 {
            let exact = 1.0 / (n as f64 + 1.0);
            let got: f64 = edge_points_gauss3([0.0, 0.0], [1.0, 0.0], 1.0)
                .iter()
                .map(|&([x, _], w)| w * x.powi(n as i32))
                .sum();
            assert!((got - exact).abs() < 1e-15, "x^{n}: got {got}");
        }
    }

    #[test]
    fn mapped_edge_rule_carries_length() {
        // int over segment (0,0)-(3,4) of 1 = 5
        let got: f64 = edge_points_gauss3([0.0, 0.0], [3.0, 4.0], 5.0)
            .iter()
            .map(|&(_, w)| w)
            .sum();
        assert!((got - 5.0).abs() < 1e-14);
    }
}
