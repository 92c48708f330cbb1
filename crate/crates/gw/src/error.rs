use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GwError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qfb_core::Error),
    #[error("rank deficient: controllability {rank_c}/12, observability {rank_o}/12")]
    RankDeficient { rank_c: usize, rank_o: usize },
    #[error("{which} CARE: {detail}")]
    Care { which: &'static str, detail: String },
    #[error("closed loop unstable: max Re eig(A_tot) = {0}")]
    Unstable(f64),
}

pub type GwResult<T> = std::result::Result<T, GwError>;
