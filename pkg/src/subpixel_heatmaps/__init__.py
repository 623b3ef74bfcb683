"""Sub-pixel heatmap encoding and decoding for 2D keypoints."""

from .decoder import (
    DecodeResult,
    DecoderConfig,
    EmptyHeatmapError,
    argmax2d,
    decode_stack,
    global_softargmax_decode,
    heuristic_decode,
    local_softargmax_decode,
    local_softargmax_jacobian,
    softmax2d,
)
from .encoder import EncoderConfig, GridSpec, encode_landmarks, render_gaussian, scale_coords
from .geometry import AffineTransform, BBox, LandmarkSet, Point2

__version__ = "0.1.0"

__all__ = [
    "AffineTransform",
    "BBox",
    "DecodeResult",
    "DecoderConfig",
    "EmptyHeatmapError",
    "EncoderConfig",
    "GridSpec",
    "LandmarkSet",
    "Point2",
    "argmax2d",
    "decode_stack",
    "encode_landmarks",
    "global_softargmax_decode",
    "heuristic_decode",
    "local_softargmax_decode",
    "local_softargmax_jacobian",
    "render_gaussian",
    "scale_coords",
    "softmax2d",
]
