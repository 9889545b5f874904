"""
Pydantic schemas for layer-freezing transfer.
"""
from pathlib import Path
from typing import FrozenSet, List

from pydantic import BaseModel, Extra, Field, root_validator

from hydrodeep.utils.enums import LayerGroup, PolicyName


class FreezePolicy(BaseModel):
    """
    Which layer groups stay trainable while finetuning on a target.

    Attributes:
        name (PolicyName): T1..T4.
        trainable_groups (FrozenSet[LayerGroup]): Groups updated during finetuning.
        strict (bool): Zero-training T1 that also keeps the source input adapter;
            only valid when source and target grid counts match.
    """
    name: PolicyName
    trainable_groups: FrozenSet[LayerGroup]
    strict: bool = False

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def adapter_trainable(cls, values):
        if not values["strict"] and LayerGroup.INPUT_ADAPTER not in values["trainable_groups"]:
            raise ValueError("the input adapter must stay trainable")
        return values

    @classmethod
    def of(cls, name) -> "FreezePolicy":
        """Standard policy for ``name``."""
        name = PolicyName(name)
        return cls(name=name, trainable_groups=name.trainable_groups)

    @classmethod
    def strict_t1(cls) -> "FreezePolicy":
        """T1 with nothing trainable."""
        return cls(name=PolicyName.T1, trainable_groups=frozenset(), strict=True)

    @property
    def frozen_groups(self) -> FrozenSet[LayerGroup]:
        return frozenset(LayerGroup) - self.trainable_groups


class TransferPlan(BaseModel):
    """
    One source-to-target finetuning run.

    Attributes:
        source_watershed (str): Source identifier.
        source_checkpoint (Path): Trained source model.
        target_watershed (str): Target identifier.
        target_data (Path): Directory holding the target series.csv and grid.csv.
        policy (PolicyName): Freeze policy.
        budget_epochs (int): Epochs of finetuning on the target training split.
        seed (int): Seed for the new input adapter, shuffling and dropout.
        strict_t1 (bool): Use the zero-training T1 variant.
    """
    source_watershed: str = "source"
    source_checkpoint: Path
    target_watershed: str
    target_data: Path
    policy: PolicyName = PolicyName.T2
    budget_epochs: int = Field(20, ge=0)
    seed: int = 0
    strict_t1: bool = False

    class Config:
        extra = Extra.forbid

    @property
    def freeze_policy(self) -> FreezePolicy:
        if self.strict_t1:
            return FreezePolicy.strict_t1()
        return FreezePolicy.of(self.policy)


class TransferSettings(BaseModel):
    """
    Transfer section of a run config.

    Attributes:
        budget_epochs (int): Finetuning budget per target.
        strict_t1 (bool): Also use zero-training T1 where grid counts match.
        full_scratch_epochs (int): Epochs of the fully trained scratch row; 0 skips it.
        seeds (List[int]): Seeds repeated for every target and approach.
    """
    budget_epochs: int = Field(20, ge=0)
    strict_t1: bool = False
    full_scratch_epochs: int = Field(0, ge=0)
    seeds: List[int] = [0]

    class Config:
        extra = Extra.forbid
