//! Published reference values used as golden data.

use num_bigint::BigUint;

use crate::table::CountTable;

/// Taxi-walk counts `c_1 ..= c_60`.
pub const TAXI_WALK_COUNTS: [u64; 60] = [
    2, 4, 6, 10, 16, 26,
    42, 68, 110, 178, 288, 460,
    740, 1192, 1918, 3064, 4910, 7872,
    12620, 20114, 32150, 51396, 82160, 130730,
    208506, 332616, 530588, 843222, 1342662, 2138280,
    3405346, 5406522, 8597632, 13674278, 21748530, 34501460,
    54807754, 87077354, 138346766, 219324398, 348109128, 552582790,
    877163942, 1389806294, 2204289314, 3496483316, 5546212122, 8783360626,
    13922238632, 22069957494, 34986181158, 55383388278, 87740467384, 139014623272,
    220254102104, 348536652664, 551914140382, 874039817792, 1384184997874, 2189670407434,
];

/// Number of bridges of length 60.
pub const BRIDGES_60: u64 = 80_312_795_498;

/// Taxi polygons of length at most 44 and at most 48.
pub const POLYGONS_UP_TO_44: usize = 1_721_326;
pub const POLYGONS_UP_TO_48: usize = 8_009_144;

/// Two documented taxi polygons (length 12 and length 20).
pub const POLYGON_EXAMPLES: [&str; 2] = ["sstsstsstss", "tstsstsssstsssstsst"];

/// Published bound digit strings.
pub const SUBADDITIVE_UPPER_60: &str = "1.60574";
pub const SUBADDITIVE_LAMBDA_60: &str = "5.6482";
pub const ALM_UPPER_20_60: &str = "1.58834";
pub const ALM_LAMBDA_20_60: &str = "5.3646";
pub const GJ_UPPER_802: &str = "1.58746";
pub const GJ_LAMBDA_802: &str = "5.3506";
pub const BRIDGE_LOWER_60: &str = "1.51965";
pub const BRIDGE_LAMBDA_60: &str = "4.3330";
pub const IRREDUCIBLE_LOWER_60: &str = "1.55701";
pub const IRREDUCIBLE_LAMBDA_60: &str = "4.8771";

/// Upper bound from the Fibonacci argument, `(1 + sqrt 5) / 2` rounded up.
pub const GOLDEN_RATIO_UPPER: &str = "1.61804";

/// The published count table, including `c_0 = 1`.
pub fn taxi_walk_table() -> CountTable {
    let mut t = CountTable::new("taxi_walks");
    t.insert(0, BigUint::from(1u32));
    for (i, &c) in TAXI_WALK_COUNTS.iter().enumerate() {
        t.insert(i + 1, BigUint::from(c));
    }
    t
}
