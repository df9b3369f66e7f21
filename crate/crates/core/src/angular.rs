//! Clebsch-Gordan coefficients from the Racah closed form.
//!
//! Angular momenta are passed doubled (`2j`, `2m`) so half-integers stay
//! exact integers.

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `⟨j1 m1; j2 m2 | j m⟩` in the Condon-Shortley phase convention.
/// All arguments are twice the physical quantum number.
pub fn clebsch_gordan(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tm1 + tm2 != tm {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 {
        return 0.0;
    }
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    // Integer arguments of the factorials.
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tj2 + tj) / 2;
    let c = (-tj1 + tj2 + tj) / 2;
    let d = (tj1 + tj2 + tj) / 2 + 1;
    let pre = ((tj + 1) as f64 * factorial(a) * factorial(b) * factorial(c) / factorial(d)).sqrt()
        * (factorial((tj + tm) / 2)
            * factorial((tj - tm) / 2)
            * factorial((tj1 - tm1) / 2)
            * factorial((tj1 + tm1) / 2)
            * factorial((tj2 - tm2) / 2)
            * factorial((tj2 + tm2) / 2))
        .sqrt();
    let mut sum = 0.0;
    for k in 0..=d {
        let terms = [
            k,
            a - k,
            (tj1 - tm1) / 2 - k,
            (tj2 + tm2) / 2 - k,
            (tj - tj2 + tm1) / 2 + k,
            (tj - tj1 - tm2) / 2 + k,
        ];
        if terms.iter().any(|&t| t < 0) {
            continue;
        }
        let denom: f64 = terms.iter().map(|&t| factorial(t)).product();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    pre * sum
}
