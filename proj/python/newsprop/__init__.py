"""Propagation-graph fake-news classification toolkit."""

from newsprop._core import (
    AblationReport,
    Checkpoint,
    CheckError,
    DataError,
    EpochLog,
    EvalReport,
    GradCheckCase,
    GradCheckReport,
    GraphDataset,
    PropagationGraph,
    SynthConfig,
    TopoSummary,
    TrainConfig,
    TrainResult,
    UsageError,
    augment_features,
    average_degree,
    clustering_oracle,
    degree_centrality,
    evaluate_checkpoint,
    gaussian_features,
    generate,
    graph_density,
    load_checkpoint,
    load_dataset,
    local_clustering,
    mix_seed,
    randomize_edges,
    randomize_edges_preserve_degrees,
    report_json,
    resume_training,
    run_ablation,
    run_standard_grad_checks,
    save_checkpoint,
    save_dataset,
    summarize,
    train,
)

__all__ = [
    "AblationReport",
    "Checkpoint",
    "CheckError",
    "DataError",
    "EpochLog",
    "EvalReport",
    "GradCheckCase",
    "GradCheckReport",
    "GraphDataset",
    "PropagationGraph",
    "SynthConfig",
    "TopoSummary",
    "TrainConfig",
    "TrainResult",
    "UsageError",
    "augment_features",
    "average_degree",
    "clustering_oracle",
    "degree_centrality",
    "evaluate_checkpoint",
    "gaussian_features",
    "generate",
    "graph_density",
    "load_checkpoint",
    "load_dataset",
    "local_clustering",
    "mix_seed",
    "randomize_edges",
    "randomize_edges_preserve_degrees",
    "report_json",
    "resume_training",
    "run_ablation",
    "run_standard_grad_checks",
    "save_checkpoint",
    "save_dataset",
    "summarize",
    "train",
]
