use proptest::prelude::*;
use strip_spectra::io::{fmt_f64, table_from_csv, table_to_csv, table_to_dat};
use strip_spectra_core::experiments::Table;

proptest! {
    #[test]
    fn csv_round_trip_is_bit_identical(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 3), 0..20)) {
        let table = Table { name: "t".into(), columns: vec!["a".into(), "b".into(), "c".into()], rows };
        let back = table_from_csv("t", &table_to_csv(&table).unwrap()).unwrap();
        prop_assert_eq!(back.columns, table.columns.clone());
        prop_assert_eq!(back.rows.len(), table.rows.len());
        for (r, s) in back.rows.iter().zip(&table.rows) {
            for (x, y) in r.iter().zip(s) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn seventeen_significant_digits(x in any::<f64>().prop_filter("finite nonzero", |x| x.is_finite() && *x != 0.0)) {
        let s = fmt_f64(x);
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
        prop_assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
    }
}

#[test]
fn dat_has_header_and_columns() {
    let mut t = Table::new("x", &["s", "v"]);
    t.push(vec![0.5, -1.0]);
    let text = String::from_utf8(table_to_dat(&t)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# s v"));
    let row: Vec<f64> = lines.next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row, vec![0.5, -1.0]);
}
