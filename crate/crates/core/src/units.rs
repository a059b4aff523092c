//! Conversions between the human-readable config units (dBW, dBm, MHz, ms,
//! MB, nodes/km²) and the SI quantities (W, Hz, s, bits, m, nodes/m²) used
//! by every other module. All internal math is linear-domain SI; decibels
//! only appear at the config boundary.

/// Decibels to a linear ratio: 10^(x/10).
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear ratio to decibels. Inverse of [`db_to_linear`] for positive input.
pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// dBW to watts (dBW is referenced to 1 W).
pub fn dbw_to_watts(dbw: f64) -> f64 {
    db_to_linear(dbw)
}

/// dBm to watts (dBm is referenced to 1 mW).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) / 1e3
}

pub fn watts_to_dbw(watts: f64) -> f64 {
    linear_to_db(watts)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts * 1e3)
}

pub fn mhz_to_hz(mhz: f64) -> f64 {
    mhz * 1e6
}

pub fn ms_to_seconds(ms: f64) -> f64 {
    ms * 1e-3
}

pub fn seconds_to_ms(s: f64) -> f64 {
    s * 1e3
}

/// SI megabytes (10^6 bytes) to bits.
pub fn megabytes_to_bits(mb: f64) -> f64 {
    mb * 8e6
}

pub fn per_km2_to_per_m2(density: f64) -> f64 {
    density * 1e-6
}

pub fn per_m2_to_per_km2(density: f64) -> f64 {
    density * 1e6
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn db_identity_and_known_points() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(20.0) - 100.0).abs() < 1e-10);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn dbm_path_divides_by_thousand() {
        // -120 dBm = 10^-12 mW = 10^-15 W
        let w = dbm_to_watts(-120.0);
        assert!((w - 1e-15).abs() / 1e-15 < 1e-12, "got {w:e}");
    }

    #[test]
    fn dbw_known_point() {
        assert!((dbw_to_watts(20.0) - 100.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn db_round_trip(db in -200.0f64..200.0) {
            let back = linear_to_db(db_to_linear(db));
            let scale = db.abs().max(1.0);
            prop_assert!((back - db).abs() / scale < 1e-12);
        }
    }
}
