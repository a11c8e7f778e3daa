"""
Deterministic grid world standing in for the physical robot.

Cells are wall or free, the robot occupies one free cell and faces one of
four headings. Two sensor models produce [0,1] observation vectors:

- ring16: 16 range readings at 22.5 degree spacing, clockwise from straight
  ahead, saturating at `max_range` cells.
- image8x8: an occupancy image (wall=0, free=1) of the 16x16-cell window in
  front of the robot, bilinearly downsampled and rotated so that "up" is
  the heading.
"""
from __future__ import annotations
from dataclasses import dataclass
from enum import IntEnum
from typing import List
import math

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import InvalidConfig, InvalidPose, MalformedGrid, MissingStart, OpenBoundary
from .transitions import Action

RAY_STEP = 0.1


class Heading(IntEnum):
    N = 0
    E = 1
    S = 2
    W = 3

    def left(self) -> "Heading":
        return Heading((self - 1) % 4)

    def right(self) -> "Heading":
        return Heading((self + 1) % 4)


# (row, col) offsets of one forward move
_FORWARD = {Heading.N: (-1, 0), Heading.E: (0, 1), Heading.S: (1, 0), Heading.W: (0, -1)}


@dataclass(frozen=True)
class Pose:
    row: int
    col: int
    heading: Heading = Heading.N

    def to_dict(self) -> dict:
        return {"row": self.row, "col": self.col, "heading": self.heading.name}

    @classmethod
    def parse(cls, text: str) -> "Pose":
        """'ROW,COL,HEADING' such as '3,4,E'."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) not in (2, 3):
            raise ValueError(f"pose must look like ROW,COL[,HEADING], got {text!r}")
        heading = Heading[parts[2].upper()] if len(parts) == 3 else Heading.N
        return cls(int(parts[0]), int(parts[1]), heading)


@dataclass(frozen=True)
class SensorModel:
    kind: str = "ring16"
    image_size: int = 8

    def __post_init__(self):
        if self.kind not in ("ring16", "image8x8"):
            raise InvalidConfig(f"unknown sensor kind {self.kind!r}")
        if self.image_size < 1:
            raise InvalidConfig("image_size must be positive")

    @property
    def dim(self) -> int:
        return 16 if self.kind == "ring16" else self.image_size * self.image_size


class GridWorld:
    def __init__(self, walls: np.ndarray, start: Pose, max_range: float = 8.0):
        self.walls = np.asarray(walls, dtype=bool)
        self.start = start
        self.max_range = float(max_range)
        if self.max_range <= 0:
            raise InvalidConfig("max_range must be positive")

    @property
    def shape(self):
        return self.walls.shape

    def is_free(self, row: int, col: int) -> bool:
        h, w = self.walls.shape
        return 0 <= row < h and 0 <= col < w and not self.walls[row, col]

    def free_poses(self) -> List[Pose]:
        rows, cols = np.nonzero(~self.walls)
        return [Pose(int(r), int(c), h) for r, c in zip(rows, cols) for h in Heading]

    def random_pose(self, rng: np.random.Generator) -> Pose:
        poses = self.free_poses()
        return poses[int(rng.integers(len(poses)))]

    def render_text(self, pose: Pose | None = None) -> str:
        arrows = {Heading.N: "^", Heading.E: ">", Heading.S: "v", Heading.W: "<"}
        lines = []
        for r, row in enumerate(self.walls):
            chars = ["#" if wall else "." for wall in row]
            if pose is not None and pose.row == r:
                chars[pose.col] = arrows[pose.heading]
            lines.append("".join(chars))
        return "\n".join(lines)

    def __repr__(self) -> str:
        h, w = self.walls.shape
        return f"GridWorld({h}x{w}, max_range={self.max_range})"


def load_world(text: str, max_range: float = 8.0) -> GridWorld:
    """Parse '#' (wall), '.' (free) and exactly one 'S' (free, start facing N)."""
    lines = text.replace("\r\n", "\n").rstrip("\n").split("\n")
    if not lines or lines == [""]:
        raise MalformedGrid("world text is empty")
    width = len(lines[0])
    for i, line in enumerate(lines):
        if len(line) != width:
            raise MalformedGrid(f"row {i} has {len(line)} cells, expected {width}")
        bad = set(line) - {"#", ".", "S"}
        if bad:
            raise MalformedGrid(f"row {i} contains unexpected characters {sorted(bad)}")
    starts = [(r, c) for r, line in enumerate(lines) for c, ch in enumerate(line) if ch == "S"]
    if len(starts) != 1:
        raise MissingStart(f"expected exactly one 'S', found {len(starts)}")
    grid = np.array([[ch == "#" for ch in line] for line in lines], dtype=bool)
    border = np.concatenate([grid[0], grid[-1], grid[:, 0], grid[:, -1]])
    if not border.all():
        raise OpenBoundary("the outer boundary must be entirely '#'")
    return GridWorld(grid, Pose(starts[0][0], starts[0][1], Heading.N), max_range)


def _check_pose(world: GridWorld, pose: Pose):
    if not isinstance(pose.heading, Heading) or not world.is_free(pose.row, pose.col):
        raise InvalidPose(f"{pose} is not a free cell with a valid heading")


def apply_action(world: GridWorld, pose: Pose, action: Action) -> Pose:
    _check_pose(world, pose)
    action = Action.parse(action)
    if action == Action.FORWARD:
        dr, dc = _FORWARD[pose.heading]
        if world.is_free(pose.row + dr, pose.col + dc):
            return Pose(pose.row + dr, pose.col + dc, pose.heading)
        return pose
    if action == Action.SPIN_LEFT:
        return Pose(pose.row, pose.col, pose.heading.left())
    if action == Action.SPIN_RIGHT:
        return Pose(pose.row, pose.col, pose.heading.right())
    return pose


def _ray_directions() -> np.ndarray:
    """16 unit (drow, dcol) vectors clockwise from north. The last three
    quadrants are exact 90 degree rotations of the first."""
    quadrant = []
    for k in range(4):
        theta = math.radians(22.5 * k)
        quadrant.append((-math.cos(theta), math.sin(theta)))
    dirs = list(quadrant)
    for _ in range(3):
        # clockwise quarter turn in (row, col): (dr, dc) -> (dc, -dr)
        quadrant = [(dc, -dr) for dr, dc in quadrant]
        dirs.extend(quadrant)
    return np.array(dirs)


_RAYS = _ray_directions()


def _absolute_ring(world: GridWorld, row: int, col: int) -> np.ndarray:
    """Ranges along the 16 world-frame rays, index 0 pointing north."""
    max_range = world.max_range
    # samples sit mid-step so axis-aligned rays never land on a cell edge
    ts = np.arange(RAY_STEP / 2, max_range, RAY_STEP)
    origin = np.array([row + 0.5, col + 0.5])
    points = origin[None, None, :] + ts[:, None, None] * _RAYS[None, :, :]
    cells = np.floor(points).astype(int)
    h, w = world.walls.shape
    inside = (cells[..., 0] >= 0) & (cells[..., 0] < h) & (cells[..., 1] >= 0) & (cells[..., 1] < w)
    rr = np.clip(cells[..., 0], 0, h - 1)
    cc = np.clip(cells[..., 1], 0, w - 1)
    hit = world.walls[rr, cc] | ~inside
    first = np.argmax(hit, axis=0)
    ranges = np.full(len(_RAYS), max_range)
    for k in np.nonzero(hit.any(axis=0))[0]:
        wr, wc = cells[first[k], k]
        # range is measured centre to centre: robot cell to the first wall cell
        ranges[k] = min(math.hypot(wr - row, wc - col), max_range)
    return ranges / max_range


def _ring16(world: GridWorld, pose: Pose) -> np.ndarray:
    ring = _absolute_ring(world, pose.row, pose.col)
    # heading h starts the clockwise sweep at absolute ray 4*h
    return np.roll(ring, -4 * int(pose.heading))


def _forward_image(world: GridWorld, pose: Pose, size: int) -> np.ndarray:
    window = 2 * size
    free = (~world.walls).astype(float)
    padded = np.pad(free, window, constant_values=0.0)
    r, c = pose.row + window, pose.col + window
    # rotate the map counter-clockwise by the heading so the heading points up
    k = int(pose.heading)
    rotated = np.rot90(padded, k)
    H, W = padded.shape
    for _ in range(k):
        r, c = W - 1 - c, r
        H, W = W, H
    half = window // 2
    patch = rotated[r - window + 1:r + 1, c - half:c + half]
    # bilinear samples at the centre of every 2x2 block
    grid = np.arange(size) * 2 + 0.5
    rows, cols = np.meshgrid(grid, grid, indexing="ij")
    img = map_coordinates(patch, [rows.ravel(), cols.ravel()], order=1, mode="nearest")
    return np.clip(img, 0.0, 1.0)


def sense(world: GridWorld, pose: Pose, model: SensorModel | str = "ring16") -> np.ndarray:
    _check_pose(world, pose)
    if isinstance(model, str):
        model = SensorModel(model)
    if model.kind == "ring16":
        return _ring16(world, pose)
    return _forward_image(world, pose, model.image_size)
