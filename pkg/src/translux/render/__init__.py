from .config import PathConfig
from .dataset import (
    Dataset,
    DatasetError,
    gen_training_data,
    read_dataset,
    record_split_labels,
    write_dataset,
)
from .reference import (
    RenderResult,
    free_flight,
    free_flight_distances,
    render_reference,
    transmittance,
)

__all__ = [
    "Dataset",
    "DatasetError",
    "PathConfig",
    "RenderResult",
    "free_flight",
    "free_flight_distances",
    "gen_training_data",
    "read_dataset",
    "record_split_labels",
    "render_reference",
    "transmittance",
    "write_dataset",
]
