//! dBm / mW conversions. Everything inside the crate works in mW.

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        assert!((dbm_to_mw(-101.0) - 10f64.powf(-10.1)).abs() < 1e-24);
        assert!((mw_to_dbm(dbm_to_mw(-81.0)) + 81.0).abs() < 1e-12);
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((linear_to_db(2.0) - 3.010299956639812).abs() < 1e-12);
    }
}
