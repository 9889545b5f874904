"""
Numerical core: float64 numpy tensors, layer kernels with reverse passes,
parameter storage, Adam and gradient verification.
"""
from hydrodeep.engine.functional import (
    bidirectional_lstm_forward,
    conv1d_forward,
    dense_forward,
    dropout_forward,
    gru_cell_step,
    lstm_cell_step,
    lstm_layer_forward,
    maxpool1d_forward,
    mse_grad,
    mse_loss,
)
from hydrodeep.engine.gradcheck import grad_check, randomize_parameters, relative_errors
from hydrodeep.engine.graph import ModelGraph, Tape, backward
from hydrodeep.engine.optim import adam_step
from hydrodeep.engine.params import ParamEntry, ParamStore
