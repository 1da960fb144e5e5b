pub mod arith;
pub mod cfrac;
pub mod certify;
pub mod pell;
pub mod cubic;
pub mod search;
