# Per-run configuration: what to load, which anchors and assigners to use,
# which analyses to run and where to write. Loaded from JSON or TOML; CLI
# flags are applied on top with apply_overrides.

import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config.settings import settings
from src.models.anchors import AnchorConfig
from src.models.assignment import AssignerSpec
from src.models.reports import BenchCase
from src.utils.errors import InputError

logger = logging.getLogger(__name__)

##############################################################################
# Config Sections
##############################################################################


class AnalysisSelection(BaseModel):
    bins: int = Field(default_factory=lambda: settings.ANALYSIS.DEFAULT_BINS, ge=1)
    mob: bool = True
    joint: bool = True

    model_config = ConfigDict(extra="forbid")


class BenchSelection(BaseModel):
    grids: List[int] = Field(default_factory=lambda: [8, 550])
    anchors: List[int] = Field(default_factory=lambda: [1, 6416])
    gts: List[int] = Field(default_factory=lambda: [1, 8])
    repetitions: int = Field(5, ge=1)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def validate_cases(self):
        if not (len(self.grids) == len(self.anchors) == len(self.gts)):
            raise ValueError(
                f"bench grids, anchors and gts must have the same length, "
                f"got {len(self.grids)}, {len(self.anchors)}, {len(self.gts)}"
            )
        if not self.grids:
            raise ValueError("bench needs at least one case")
        # validates every value
        self.cases()
        return self

    def cases(self) -> List[BenchCase]:
        return [BenchCase(grid=g, anchors=a, gts=n) for g, a, n in zip(self.grids, self.anchors, self.gts)]


class RunConfig(BaseModel):
    """One reproducible run; the effective copy is written next to the outputs"""
    dataset: Optional[Path] = None
    anchors: AnchorConfig = Field(default_factory=AnchorConfig)
    assigners: List[AssignerSpec] = Field(default_factory=lambda: [AssignerSpec()])
    analysis: AnalysisSelection = Field(default_factory=AnalysisSelection)
    bench: BenchSelection = Field(default_factory=BenchSelection)
    out: Path = Path("out")
    seed: int = 0
    workers: int = Field(1, ge=1)
    include_crowd: bool = False

    model_config = ConfigDict(extra="forbid")

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


##############################################################################
# Loading
##############################################################################


def _read_mapping(path: Path) -> Dict[str, Any]:
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise InputError(path, "no such file") from None
    except OSError as e:
        raise InputError(path, f"cannot read file: {e}") from e

    if path.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(raw.decode("utf-8"))
        except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
            raise InputError(path, f"malformed TOML: {e}") from e
    else:
        try:
            data = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as e:
            raise InputError(path, f"malformed JSON: {e.msg}", line=e.lineno, column=e.colno) from e
        except UnicodeDecodeError as e:
            raise InputError(path, f"not UTF-8: {e}") from e
    if not isinstance(data, dict):
        raise InputError(path, "config must be a JSON object or TOML table")
    return data


def load_run_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    Load a RunConfig from a .json or .toml file; no path gives the defaults.

    Validation errors propagate as pydantic ValidationError.
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    data = _read_mapping(path)
    logger.debug(f"Loaded run config from {path}")
    return RunConfig.model_validate(data)


def apply_overrides(cfg: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """
    Return a revalidated copy of cfg with overrides applied. None values are
    ignored; nested sections take dotted keys such as "analysis.bins".
    """
    data = cfg.model_dump()
    for key, value in overrides.items():
        if value is None:
            continue
        target = data
        *parents, leaf = key.split(".")
        for part in parents:
            target = target[part]
        target[leaf] = value
    return RunConfig.model_validate(data)
