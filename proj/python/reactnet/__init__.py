from ._core import (
    Network,
    binarize_weights,
    binary_conv2d,
    compute_scale,
    count_ops,
    distributional_loss,
    distributional_loss_backward,
    grad_check,
    load_network,
    rprelu,
    rprelu_backward,
    rsign,
    rsign_backward,
)

__all__ = [
    "Network",
    "binarize_weights",
    "binary_conv2d",
    "compute_scale",
    "count_ops",
    "distributional_loss",
    "distributional_loss_backward",
    "grad_check",
    "load_network",
    "rprelu",
    "rprelu_backward",
    "rsign",
    "rsign_backward",
]
