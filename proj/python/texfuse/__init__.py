"""Handcrafted texture descriptors, SVM scoring and sum-rule fusion."""

import json as _json

from ._texfuse import (
    BoundsError,
    ConfigError,
    ContractError,
    DecodeError,
    DimensionError,
    Error,
    IngestionError,
    ManifestError,
    ParameterError,
    StateError,
    ahp,
    alpha_lbp,
    arcslbp,
    bilinear_sample,
    circular_neighbors,
    convolve,
    descriptor_types,
    dlbp,
    dlbp_patch,
    gaussian_second_derivative_kernels,
    gradient_magnitude,
    hasc,
    hessian_magnitude,
    kmeans,
    lbp,
    lcvmsp,
    load_image,
    ltp,
    mqc,
    run_cli,
    save_png,
    sclbp_encode,
    sum_rule,
    svm_scores,
    znorm,
)
from ._texfuse import extract as _extract


def extract(descriptor_type, images, **params):
    """Feature matrix (one row per image) for a registry descriptor type."""
    return _extract(descriptor_type, _json.dumps(params), list(images))


__all__ = [name for name in dir() if not name.startswith("_")]
