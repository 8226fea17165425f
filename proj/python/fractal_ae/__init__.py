"""Linear fractal autoencoders for unsupervised feature selection."""

from ._core import (
    NumericalError,
    ParseError,
    __version__,
    accuracy,
    extra_trees_predict,
    fae_gradients,
    fae_objective,
    hierarchical_masks,
    linear_recon_error,
    load_checkpoint,
    load_csv,
    load_idx,
    save_checkpoint,
    split_indices,
    synth_blocks,
    topk_mask,
    train,
)

__all__ = [
    "NumericalError",
    "ParseError",
    "__version__",
    "accuracy",
    "extra_trees_predict",
    "fae_gradients",
    "fae_objective",
    "hierarchical_masks",
    "linear_recon_error",
    "load_checkpoint",
    "load_csv",
    "load_idx",
    "save_checkpoint",
    "split_indices",
    "synth_blocks",
    "topk_mask",
    "train",
]
