//! Plain-text export helpers shared by the trajectory writers.

use std::fmt::Write;

/// Fixed scientific formatting with 17 significant digits, which round-trips
/// every finite `f64` exactly.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a CSV table with a header row and 17-digit numbers.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line = row.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{line}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 2.0 / 3.0, -1e-300, 6.02214076e23, 0.0, f64::MIN_POSITIVE] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn table_layout() {
        let s = csv_table(&["a", "b"], vec![vec![1.0, 2.0]]);
        assert_eq!(s, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
