"""Points, landmark sets, bounding boxes and 2D affine transforms.

Coordinates follow the image convention used throughout the package: pixel
centers sit on integer coordinates, the origin is top-left, ``x`` grows to the
right and ``y`` grows downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "AffineTransform",
    "BBox",
    "GeometryError",
    "LandmarkSet",
    "Point2",
    "apply_landmarks",
    "apply_point",
    "bbox_from_landmarks",
    "compose",
    "identity",
    "invert",
    "make_flip",
    "make_rotation",
    "make_scale",
    "make_translation",
    "normalization_distance",
]

DEFAULT_IC_INDICES = (36, 45)


class GeometryError(ValueError):
    """Raised for degenerate geometry (singular transforms, empty boxes, ...)."""


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True, eq=False)
class LandmarkSet:
    """K ordered 2D points plus a boolean visibility mask.

    ``points`` is stored as a read-only ``(K, 2)`` float array of ``(x, y)``.
    Invisible points may hold NaN coordinates (e.g. failed decodes).
    """

    points: NDArray[np.float64]
    visibility: NDArray[np.bool_] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 2)
        if pts.shape[0] < 1:
            raise GeometryError("a landmark set needs at least one point")
        if self.visibility is None:
            vis = np.ones(pts.shape[0], dtype=bool)
        else:
            vis = np.array(self.visibility, dtype=bool).reshape(-1)
        if vis.shape[0] != pts.shape[0]:
            raise GeometryError(
                f"visibility has {vis.shape[0]} entries for {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(pts[vis])):
            raise GeometryError("visible landmarks must have finite coordinates")
        pts.setflags(write=False)
        vis.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "visibility", vis)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], visibility=None) -> LandmarkSet:
        return cls(np.asarray(list(points), dtype=np.float64), visibility)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __getitem__(self, k: int) -> Point2:
        return Point2(float(self.points[k, 0]), float(self.points[k, 1]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LandmarkSet):
            return NotImplemented
        return (
            np.array_equal(self.visibility, other.visibility)
            and np.array_equal(self.points, other.points, equal_nan=True)
        )

    __hash__ = None  # type: ignore[assignment]

    def with_points(self, points: ArrayLike) -> LandmarkSet:
        return LandmarkSet(np.asarray(points, dtype=np.float64), self.visibility)


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    width: float
    height: float

    def validate(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise GeometryError(
                f"bounding box must have positive extent, got {self.width}x{self.height}"
            )


@dataclass(frozen=True, eq=False)
class AffineTransform:
    """A 2x3 matrix ``[[a, b, tx], [c, d, ty]]`` acting on column vectors."""

    matrix: NDArray[np.float64]

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (2, 3):
            raise GeometryError(f"affine matrix must be 2x3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise GeometryError("affine matrix must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def linear(self) -> NDArray[np.float64]:
        return self.matrix[:, :2]

    @property
    def translation(self) -> NDArray[np.float64]:
        return self.matrix[:, 2]

    @property
    def det(self) -> float:
        (a, b), (c, d) = self.linear
        return float(a * d - b * c)

    def homogeneous(self) -> NDArray[np.float64]:
        return np.vstack([self.matrix, [0.0, 0.0, 1.0]])

    def apply(self, xy: ArrayLike) -> NDArray[np.float64]:
        """Map an ``(..., 2)`` array of points."""
        xy = np.asarray(xy, dtype=np.float64)
        m = self.matrix
        x = xy[..., 0]
        y = xy[..., 1]
        return np.stack(
            [m[0, 0] * x + m[0, 1] * y + m[0, 2], m[1, 0] * x + m[1, 1] * y + m[1, 2]],
            axis=-1,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AffineTransform):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    __hash__ = None  # type: ignore[assignment]

    def allclose(self, other: AffineTransform, atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol))


def identity() -> AffineTransform:
    return AffineTransform(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))


def _about_center(linear: NDArray[np.float64], center: Point2 | Sequence[float]) -> AffineTransform:
    cx, cy = center
    c = np.array([cx, cy], dtype=np.float64)
    t = c - linear @ c
    return AffineTransform(np.column_stack([linear, t]))


def make_rotation(angle: float, center: Point2 | Sequence[float] = (0.0, 0.0)) -> AffineTransform:
    """Rotation by ``angle`` degrees about ``center``.

    Positive angles map the +x axis onto +y, so with y pointing down a 90 degree
    rotation sends ``(cx + 1, cy)`` to ``(cx, cy + 1)``.
    """
    if not math.isfinite(angle):
        raise GeometryError(f"rotation angle must be finite, got {angle}")
    if angle == 0:
        return identity()
    theta = math.radians(angle)
    c, s = math.cos(theta), math.sin(theta)
    return _about_center(np.array([[c, -s], [s, c]]), center)


def make_scale(sx: float, sy: float | None = None, center: Point2 | Sequence[float] = (0.0, 0.0)) -> AffineTransform:
    if sy is None:
        sy = sx
    if sx == 0 or sy == 0 or not (math.isfinite(sx) and math.isfinite(sy)):
        raise GeometryError(f"scale factors must be finite and non-zero, got ({sx}, {sy})")
    return _about_center(np.diag([float(sx), float(sy)]), center)


def make_flip(width: float) -> AffineTransform:
    """Horizontal mirror of an image ``width`` pixels wide: ``x -> width - 1 - x``."""
    if not width > 0:
        raise GeometryError(f"flip width must be positive, got {width}")
    return AffineTransform(np.array([[-1.0, 0.0, width - 1.0], [0.0, 1.0, 0.0]]))


def make_translation(tx: float, ty: float) -> AffineTransform:
    return AffineTransform(np.array([[1.0, 0.0, tx], [0.0, 1.0, ty]]))


def compose(t_a: AffineTransform, t_b: AffineTransform) -> AffineTransform:
    """Return the transform that applies ``t_b`` first, then ``t_a``."""
    la, lb = t_a.linear, t_b.linear
    return AffineTransform(np.column_stack([la @ lb, la @ t_b.translation + t_a.translation]))


def invert(t: AffineTransform) -> AffineTransform:
    (a, b), (c, d) = t.linear
    det = a * d - b * c
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if det == 0 or abs(det) <= 1e-14 * scale * scale:
        raise GeometryError("cannot invert a singular affine transform")
    inv = np.array([[d, -b], [-c, a]]) / det
    return AffineTransform(np.column_stack([inv, -inv @ t.translation]))


def apply_point(t: AffineTransform, p: Point2 | Sequence[float]) -> Point2:
    x, y = t.apply(np.asarray(tuple(p), dtype=np.float64))
    return Point2(float(x), float(y))


def apply_landmarks(t: AffineTransform, landmarks: LandmarkSet) -> LandmarkSet:
    return landmarks.with_points(t.apply(landmarks.points))


def bbox_from_landmarks(landmarks: LandmarkSet) -> BBox:
    """Tight axis-aligned box over the visible points.

    A single visible point yields a zero-area box; it only fails once it is
    used as a normalizer.
    """
    pts = landmarks.points[landmarks.visibility]
    if pts.shape[0] == 0:
        raise GeometryError("no visible landmarks to bound")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return BBox(float(lo[0]), float(lo[1]), float(hi[0] - lo[0]), float(hi[1] - lo[1]))


NormKind = Literal["ic", "box", "diag"]


def normalization_distance(
    kind: NormKind,
    gt: LandmarkSet,
    bbox: BBox | None = None,
    ic_indices: tuple[int, int] = DEFAULT_IC_INDICES,
) -> float:
    """Distance used to normalize point errors for NME.

    ``box`` is the geometric mean of the box sides, ``diag`` the box diagonal
    and ``ic`` the distance between the two landmarks in ``ic_indices``
    (outer eye corners of the 68-point layout by default). When ``bbox`` is
    omitted it is derived from the visible ground-truth points.
    """
    if kind == "ic":
        i, j = ic_indices
        k = len(gt)
        if not (0 <= i < k and 0 <= j < k):
            raise GeometryError(f"ic_indices {ic_indices} out of range for {k} landmarks")
        if not (gt.visibility[i] and gt.visibility[j]):
            raise GeometryError(f"ic landmarks {ic_indices} must both be visible")
        dist = float(np.hypot(*(gt.points[i] - gt.points[j])))
    elif kind in ("box", "diag"):
        box = bbox if bbox is not None else bbox_from_landmarks(gt)
        box.validate()
        if kind == "box":
            dist = math.sqrt(box.width * box.height)
        else:
            dist = math.hypot(box.width, box.height)
    else:
        raise GeometryError(f"unknown normalization kind {kind!r}")
    if not dist > 0:
        raise GeometryError(f"{kind} normalization distance is zero")
    return dist
