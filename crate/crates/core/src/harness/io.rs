/// Fixed 12-significant-digit scientific notation used by every export.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}
