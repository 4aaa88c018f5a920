"""Numpy implementation of the two-branch ConvLSTM illuminant network."""

from .convlstm import ConvLstmParams, ConvLstmState, conv_lstm_step
from .model import (
    TccNetConfig,
    desk,
    init_params,
    model_g,
    small,
    tcc_net_backward,
    tcc_net_forward,
    tiny,
)
from .zoom import pseudo_zoom_sequence

__all__ = [
    "ConvLstmParams",
    "ConvLstmState",
    "TccNetConfig",
    "conv_lstm_step",
    "desk",
    "init_params",
    "model_g",
    "pseudo_zoom_sequence",
    "small",
    "tcc_net_backward",
    "tcc_net_forward",
    "tiny",
]
