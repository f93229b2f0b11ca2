"""The recorded parameters of a CLI run.

``run_config.json`` holds everything that decides a run's output bytes and
nothing else: the output directory and the worker count are left out, so
two runs that differ only in those produce identical manifests.
"""
from __future__ import annotations

import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..analysis import Cohort, GroupBy
from ..em_driver import EmConfig
from ..imports import DEFAULT_COVERAGE, FORMAT_VERSION
from ..model_core import GridRange
from ..simulate import SimSpec

Command = Literal["fit", "subsample", "simulate", "moment-surface"]
DatasetFormat = Literal["wide", "long"]


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    format_version: str = FORMAT_VERSION
    command: Command

    # dataset input
    input: Optional[str] = None
    format: DatasetFormat = "wide"
    labels: Optional[tuple[str, ...]] = None
    drop_classes: tuple[str, ...] = ()

    # fit
    em: Optional[EmConfig] = None
    group_by: GroupBy = "majority"
    coverage: float = Field(default=DEFAULT_COVERAGE, gt=0, lt=1)
    pca_scale: bool = False
    save_draws: bool = False

    # subsample
    cohorts: tuple[Cohort, ...] = ()
    seed: Optional[int] = Field(default=None, ge=0)

    # simulate
    sim: Optional[SimSpec] = None
    output_format: DatasetFormat = "wide"

    # moment-surface
    z1: Optional[GridRange] = None
    z2: Optional[GridRange] = None

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json", exclude_none=True), indent=2, sort_keys=True)
