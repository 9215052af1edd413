pub mod bench;
pub mod bound;
pub mod budget;
pub mod execsim;
pub mod netmodel;
pub mod optimizer;
pub mod oracle;
pub mod p2p;
pub mod plan;
pub mod planner;
pub mod rational;
pub mod scheduler;
pub mod transfer;
pub mod workload;
