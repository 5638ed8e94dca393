"""Video saliency by manifold ranking over supervoxel graphs."""

import json

from ._salgraph import (
    ConfigError,
    DataError,
    Error,
    RuntimeFailure,
    __version__,
    adjacency,
    affinity_weights,
    compute_seed,
    fuse_maps,
    load_frames,
    load_ground_truth,
    normalize_map,
    nss,
    pool_features,
    read_fvol,
    read_lvol,
    rgb_to_lab,
    roc_auc,
    segment_video,
    solve,
    stationarity_residual,
    write_fvol,
    write_lvol,
    write_synthetic_clip,
)
from ._salgraph import run_pipeline as _run_pipeline


def run_pipeline(**options):
    """Run every stage and return the manifest as a dict.

    Keys are the same as in the config file (input_dir, output_dir, mu, ...).
    """
    return json.loads(_run_pipeline({k: _text(v) for k, v in options.items()}))


def _text(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "RuntimeFailure",
    "adjacency",
    "affinity_weights",
    "compute_seed",
    "fuse_maps",
    "load_frames",
    "load_ground_truth",
    "normalize_map",
    "nss",
    "pool_features",
    "read_fvol",
    "read_lvol",
    "rgb_to_lab",
    "roc_auc",
    "run_pipeline",
    "segment_video",
    "solve",
    "stationarity_residual",
    "write_fvol",
    "write_lvol",
    "write_synthetic_clip",
]
