pub mod distributions;
pub mod quadrature;
pub mod seed;
pub mod specfun;
pub mod entropy;
pub mod estimation;
pub mod stats;
pub mod backtest;
pub mod simulate;
