"""F-statistic embedding loss, disentanglement metrics, and training tools."""

from fstat_embed._core import (
    AdamState,
    DisentanglementReport,
    EncoderModel,
    Episode,
    EpochStats,
    FactorialDataset,
    FLossConfig,
    GoldenCode,
    LabeledEmbeddingBatch,
    LossKind,
    OracleKind,
    SeparationPair,
    SeparationTable,
    TrainConfig,
    TrainResult,
    ValMetricKind,
    adam_step,
    build_separation_table,
    conjunction_labels,
    discretize_code,
    evaluate_dataset_codes,
    evaluate_disentanglement,
    explicitness_auc,
    f_cdf,
    f_loss,
    f_loss_grad,
    f_statistic_per_dim,
    forward,
    generate_factorial,
    generate_golden_code,
    log_beta,
    log_gamma,
    modularity_score,
    mutual_information,
    recall_at_k,
    recall_at_k_loo,
    reg_inc_beta,
    reg_inc_beta_dx,
    sample_class_episode,
    sample_factor_episode,
    select_dimensions,
    separation_probability,
    train,
    triplet_loss,
    triplet_loss_grad,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
