from .schemas import RunConfig
from .datasets import load_dataset, write_dataset
from .outputs import load_fit, write_manifest, write_outputs
from .cli import build_parser, main, run_recorded

__all__ = [
    "RunConfig", "load_dataset", "write_dataset", "load_fit", "write_manifest",
    "write_outputs", "build_parser", "main", "run_recorded",
]
