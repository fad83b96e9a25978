pub mod quad;
pub mod special;
pub mod sum;

/// Formats a float with 17 significant digits, the canonical form used in
/// every file and CSV this crate writes.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // keeps the sign of negative zero out of the output
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_float_round_trips() {
        for x in [1.0, 0.1, std::f64::consts::PI, 1e-300, -2.5e17, 123456.789] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(-0.0), fmt_f64(0.0));
    }
}
