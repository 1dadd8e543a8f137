pub mod backtest;
pub mod fit;
pub mod risk;
pub mod simulate;
