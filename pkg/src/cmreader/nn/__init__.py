from .tensor import (
    Tensor,
    as_tensor,
    backward,
    concat,
    cross_entropy,
    cross_entropy_rows,
    dropout,
    layer_norm,
    log_softmax,
    masked_softmax,
    parameter,
    relu,
    softmax,
    take_rows,
)
from .layers import (
    Embedding,
    FeedForward,
    LayerNorm,
    Linear,
    MultiHeadSelfAttention,
    TransformerLayer,
)
from .optim import Adam, OptimizerState, lr_schedule
from .checkpoint import FORMAT_VERSION, load_checkpoint, save_checkpoint

__all__ = [
    "Tensor", "as_tensor", "backward", "concat", "cross_entropy",
    "cross_entropy_rows", "dropout", "layer_norm", "log_softmax",
    "masked_softmax", "parameter", "relu", "softmax", "take_rows",
    "Embedding", "FeedForward", "LayerNorm", "Linear",
    "MultiHeadSelfAttention", "TransformerLayer",
    "Adam", "OptimizerState", "lr_schedule",
    "FORMAT_VERSION", "load_checkpoint", "save_checkpoint",
]
