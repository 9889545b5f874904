"""
Pydantic schemas for network, optimizer and training configuration.
"""
from typing import List, Optional

from pydantic import BaseModel, Extra, Field, root_validator

from hydrodeep.utils.enums import Arch


class AdamConfig(BaseModel):
    """
    Adam optimizer settings.

    Attributes:
        learning_rate (float): Step size; 0 turns updates into no-ops.
        beta1 (float): First-moment decay in (0, 1).
        beta2 (float): Second-moment decay in (0, 1).
        epsilon (float): Denominator guard, positive.
    """
    learning_rate: float = Field(1e-3, ge=0.0)
    beta1: float = Field(0.9, gt=0.0, lt=1.0)
    beta2: float = Field(0.999, gt=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)

    class Config:
        extra = Extra.forbid


class ModelHyperparams(BaseModel):
    """
    Architecture-independent network sizes.

    Attributes:
        conv_layers (int): Number of stacked 1D convolutions.
        conv_filters (int): Filters per convolution.
        kernel_width (int): Convolution kernel width in days.
        pool_size (int): Max-pooling window.
        lstm_layers (int): Number of stacked recurrent layers.
        lstm_units (int): Hidden units per recurrent layer.
        dropout_rate (float): Dropout after the last recurrent layer.
        dense_units (int): Width of the relu dense layer in the head.
        adapter_units (int): Width Input 1 is projected to per day.
        aux_units (int): Width Input 2 is projected to.
    """
    conv_layers: int = Field(2, ge=1)
    conv_filters: int = Field(64, ge=1)
    kernel_width: int = Field(3, ge=1)
    pool_size: int = Field(2, ge=1)
    lstm_layers: int = Field(4, ge=1)
    lstm_units: int = Field(50, ge=1)
    dropout_rate: float = Field(0.2, ge=0.0, lt=1.0)
    dense_units: int = Field(64, ge=1)
    adapter_units: int = Field(32, ge=1)
    aux_units: int = Field(16, ge=1)

    class Config:
        extra = Extra.forbid


class ModelConfig(ModelHyperparams):
    """
    Full configuration of one network.

    Attributes:
        arch (Arch): Architecture name.
        lag (int): Look-back window in days.
        grid_count (int): Number of grids L of the watershed.
        use_runoff_inputs (bool): Feed process-based runoff; forced off for dl_ablation.
        seed (int): Seed for weight initialisation and dropout.
    """
    arch: Arch = Arch.HYDRODEEP
    lag: int = Field(7, ge=1)
    grid_count: int = Field(..., ge=1)
    use_runoff_inputs: bool = True
    seed: int = 0

    @root_validator(skip_on_failure=True)
    def ablation_drops_runoff(cls, values):
        if values["arch"] == Arch.DL_ABLATION:
            values["use_runoff_inputs"] = False
        return values

    @property
    def input1_width(self) -> int:
        """Per-day width of Input 1: weighted precip, runoff and past discharge."""
        return (2 if self.use_runoff_inputs else 1) * self.grid_count + 1

    @property
    def input2_width(self) -> int:
        """Width of Input 2: day-t weighted precip and runoff."""
        return (2 if self.use_runoff_inputs else 1) * self.grid_count


class TrainConfig(BaseModel):
    """
    Training loop settings.

    Attributes:
        epochs (int): Passes over the training split.
        batch_size (int): Minibatch size.
        adam (AdamConfig): Optimizer settings.
        seed (int): Seed for batch shuffling and dropout masks.
        patience (Optional[int]): Early-stopping patience on validation loss.
        shuffle (bool): Shuffle sample order each epoch.
    """
    epochs: int = Field(100, ge=0)
    batch_size: int = Field(32, ge=1)
    adam: AdamConfig = AdamConfig()
    seed: int = 0
    patience: Optional[int] = Field(None, ge=1)
    shuffle: bool = True

    class Config:
        extra = Extra.forbid


class EpochRecord(BaseModel):
    """Losses after one epoch, in normalized units."""
    epoch: int
    train_loss: float
    val_loss: Optional[float] = None


class TrainHistory(BaseModel):
    """
    Outcome of one training run.

    Attributes:
        initial_train_loss (float): Eval-mode training loss before the first update.
        epochs (List[EpochRecord]): One record per completed epoch.
        best_epoch (Optional[int]): Epoch whose parameters were kept under early stopping.
        stopped_early (bool): Whether patience ran out.
    """
    initial_train_loss: float
    epochs: List[EpochRecord] = []
    best_epoch: Optional[int] = None
    stopped_early: bool = False

    @property
    def train_losses(self) -> List[float]:
        return [r.train_loss for r in self.epochs]
