//! Number and table formatting: six significant digits for display
//! tables, seventeen for machine CSVs.

/// Fixed-point rendering with six significant digits, the precision the
/// reference tables are quoted at.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let decimals = (5 - x.abs().log10().floor() as i64).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

/// Full-precision CSV cell (17 significant digits).
pub fn csv17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Plain aligned text table: every column padded to its widest cell,
/// header separated by a rule.
pub fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let columns = header.len();
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String]| -> String {
        cells
            .iter()
            .enumerate()
            .map(|(i, cell)| format!("{cell:>width$}", width = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
    };
    out.push_str(&render_row(header));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (columns - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&render_row(row));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits_across_scales() {
        assert_eq!(sig6(0.431987), "0.431987");
        assert_eq!(sig6(2.481648), "2.48165");
        assert_eq!(sig6(-0.0739984), "-0.0739984");
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(123456.78), "123457");
    }

    #[test]
    fn csv_cells_carry_full_precision() {
        assert_eq!(csv17(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn table_columns_align() {
        let header = vec!["mu".to_string(), "J".to_string()];
        let rows = vec![
            vec!["1.0".to_string(), "0.431987".to_string()],
            vec!["0.9".to_string(), "0.403422".to_string()],
        ];
        let text = render_table(&header, &rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
    }
}
