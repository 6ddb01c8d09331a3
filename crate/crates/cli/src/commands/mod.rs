pub mod asymptotics;
pub mod bo;
pub mod generate;
pub mod nll;
pub mod plot;
pub mod pretrain;
