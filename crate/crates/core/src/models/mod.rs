//! Elementary and downstream predictive models.

pub mod elastic_net;
pub mod knn;
pub mod linear;
pub mod mrmr;

pub use elastic_net::{fit_elastic_net, fit_elastic_net_with, ElasticNetConfig, ElasticNetFit, SolverOptions};
pub use knn::knn_regress;
pub use linear::{fit_ols, predict, LinearModel, OlsFit};
pub use mrmr::{mrmr_select, MrmrSelection};
