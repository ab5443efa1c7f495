pub mod detect;
pub mod evaluate;
pub mod simulate;
pub mod trend;
pub mod windows;
