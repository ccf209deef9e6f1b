"""
Dataset persistence (.fnds) and ingestion of externally produced α grids.
"""

from __future__ import annotations

import logging
import math
import struct
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import polars as pl

from .constants import DATASET_MAGIC, DATASET_VERSION, FRACTION_SLACK
from .datagen import Dataset
from .errors import FormatError, InterfaceFnoError, ParseError
from .fields import Grid2D, ScalarField2D
from .interface import RdfParams, alpha_to_rdf

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# magic, version, n, c_in, c_out, H, W, epsilon
_HEADER = struct.Struct("<4sIQIIIId")
_LENGTH = struct.Struct("<I")
_F64 = np.dtype("<f8")


def dataset_nbytes(n: int, height: int, width: int, provenance: str = "") -> int:
    """Exact size of a dataset file."""
    cells = height * width
    return _HEADER.size + n * 3 * cells * 8 + _LENGTH.size + len(provenance.encode("utf-8"))


def encode_dataset(dataset: Dataset) -> bytes:
    """Serialise a dataset to the .fnds byte layout."""
    provenance = dataset.provenance.encode("utf-8")
    header = _HEADER.pack(
        DATASET_MAGIC,
        DATASET_VERSION,
        dataset.n,
        2,
        1,
        dataset.grid.height,
        dataset.grid.width,
        float(dataset.epsilon),
    )
    return b"".join(
        [
            header,
            dataset.inputs.astype(_F64).tobytes(order="C"),
            dataset.targets.astype(_F64).tobytes(order="C"),
            _LENGTH.pack(len(provenance)),
            provenance,
        ]
    )


def write_dataset(dataset: Dataset, path: PathLike) -> Path:
    """
    Write a dataset file.

    Returns:
        The written path.
    """

    path = Path(path)
    path.write_bytes(encode_dataset(dataset))
    logger.info("Wrote dataset with %d samples to %s.", dataset.n, path)
    return path


def decode_dataset(data: bytes) -> Dataset:
    """
    Parse .fnds bytes.

    Raises:
        FormatError: On bad magic, unsupported version, inconsistent header,
            truncation, trailing bytes or undecodable content.
    """

    if len(data) < _HEADER.size:
        raise FormatError(f"File is {len(data)} bytes, shorter than the {_HEADER.size}-byte header", len(data))
    magic, version, n, c_in, c_out, height, width, epsilon = _HEADER.unpack_from(data, 0)
    if magic != DATASET_MAGIC:
        raise FormatError(f"Bad magic {magic!r}, expected {DATASET_MAGIC!r}", 0)
    if version != DATASET_VERSION:
        raise FormatError(f"Unsupported dataset version {version}", 4)
    if n == 0:
        raise FormatError("Dataset declares zero samples", 8)
    if c_in != 2 or c_out != 1:
        raise FormatError(f"Unsupported channel layout c_in={c_in}, c_out={c_out}", 16)
    if height < 4 or width < 4:
        raise FormatError(f"Grid {height}x{width} is smaller than 4x4", 24)
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise FormatError(f"Invalid epsilon {epsilon}", 32)

    cells = height * width
    inputs_end = _HEADER.size + n * 2 * cells * 8
    targets_end = inputs_end + n * cells * 8
    if len(data) < targets_end + _LENGTH.size:
        raise FormatError(
            f"File truncated: {len(data)} bytes, arrays need {targets_end + _LENGTH.size}",
            len(data),
        )
    (length,) = _LENGTH.unpack_from(data, targets_end)
    end = targets_end + _LENGTH.size + length
    if len(data) != end:
        raise FormatError(f"File is {len(data)} bytes, header implies {end}", min(len(data), end))
    try:
        provenance = data[targets_end + _LENGTH.size : end].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("Provenance is not valid UTF-8", targets_end + _LENGTH.size + exc.start) from exc

    inputs = np.frombuffer(data, dtype=_F64, count=n * 2 * cells, offset=_HEADER.size)
    targets = np.frombuffer(data, dtype=_F64, count=n * cells, offset=inputs_end)
    for name, block, start in (("inputs", inputs, _HEADER.size), ("targets", targets, inputs_end)):
        bad = np.flatnonzero(~np.isfinite(block))
        if bad.size:
            raise FormatError(f"Non-finite value in {name}", start + int(bad[0]) * 8)
    try:
        return Dataset(
            Grid2D(height, width),
            inputs.reshape(n, 2, height, width).astype(np.float64),
            targets.reshape(n, 1, height, width).astype(np.float64),
            float(epsilon),
            provenance,
        )
    except InterfaceFnoError as exc:
        raise FormatError(f"Inconsistent dataset content: {exc}", _HEADER.size) from exc


def read_dataset(path: PathLike) -> Dataset:
    """Read a dataset file written by write_dataset."""
    dataset = decode_dataset(Path(path).read_bytes())
    logger.info("Read dataset with %d samples from %s.", dataset.n, path)
    return dataset


def _validated_alpha(values: np.ndarray, lines: List[int]) -> np.ndarray:
    for value, line in zip(values, lines):
        if not (-FRACTION_SLACK <= value <= 1.0 + FRACTION_SLACK):
            raise ParseError(f"volume fraction {value!r} outside [0, 1]", line)
    return values


def parse_grid_text(text: str, fraction: bool = True) -> np.ndarray:
    """
    Parse the text-grid format: a "H W" header, then H*W row-major values.

    Args:
        text: File contents.
        fraction: Require every value to be a volume fraction in [0, 1].
            Pass False for ζ grids such as predict output.

    Returns:
        Float64 array [H, W].

    Raises:
        ParseError: On a bad header, non-numeric or non-finite tokens, values
            outside [0, 1] when fraction is set, or a value count that does
            not match the header.
    """

    lines = text.splitlines()
    header_index = next((i for i, line in enumerate(lines) if line.strip()), None)
    if header_index is None:
        raise ParseError("empty grid file", 1)
    header = lines[header_index].split()
    try:
        height, width = (int(token) for token in header)
    except ValueError:
        raise ParseError(f"header must be two integers 'H W', got {lines[header_index]!r}", header_index + 1)
    if height < 1 or width < 1:
        raise ParseError(f"grid dimensions must be positive, got {height}x{width}", header_index + 1)

    values: List[float] = []
    origins: List[int] = []
    for index in range(header_index + 1, len(lines)):
        for token in lines[index].split():
            try:
                value = float(token)
            except ValueError:
                raise ParseError(f"non-numeric token {token!r}", index + 1)
            if not math.isfinite(value):
                raise ParseError(f"non-finite value {token!r}", index + 1)
            values.append(value)
            origins.append(index + 1)
    expected = height * width
    if len(values) != expected:
        line = origins[expected] if len(values) > expected else len(lines)
        raise ParseError(f"expected {expected} values for a {height}x{width} grid, found {len(values)}", line)
    grid = np.asarray(values, dtype=np.float64)
    if fraction:
        _validated_alpha(grid, origins)
    return grid.reshape(height, width)


def import_grid_text(path: PathLike, epsilon: float = 1.0) -> ScalarField2D:
    """
    Read an α grid in text format and convert it to ζ.

    Args:
        path: Text-grid file.
        epsilon: RDF smoothing length in grid cells.

    Returns:
        ζ on a unit-spacing grid.
    """

    alpha = parse_grid_text(Path(path).read_text(encoding="utf-8"))
    grid = Grid2D(*alpha.shape)
    return alpha_to_rdf(ScalarField2D(grid, alpha), RdfParams(epsilon=epsilon))


def import_grid_xlsx(path: PathLike, epsilon: float = 1.0, sheet_name: Optional[str] = None) -> ScalarField2D:
    """
    Read an α grid from a worksheet (no header row, one grid row per sheet row).

    Raises:
        ParseError: On non-numeric or out-of-range cells; the line is the sheet row.
    """

    if sheet_name is None:
        frame = pl.read_excel(source=path, sheet_id=1, engine="openpyxl", has_header=False)
    else:
        frame = pl.read_excel(source=path, sheet_name=sheet_name, engine="openpyxl", has_header=False)
    rows = frame.rows()
    if not rows:
        raise ParseError("worksheet is empty", 1)
    values = np.empty((len(rows), len(rows[0])))
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            try:
                value = float(cell)
            except (TypeError, ValueError):
                raise ParseError(f"non-numeric cell {cell!r} in column {j + 1}", i + 1)
            if not math.isfinite(value):
                raise ParseError(f"non-finite cell in column {j + 1}", i + 1)
            values[i, j] = value
    _validated_alpha(values.reshape(-1), [i + 1 for i in range(len(rows)) for _ in rows[0]])
    return alpha_to_rdf(ScalarField2D(Grid2D(*values.shape), values), RdfParams(epsilon=epsilon))


def format_grid_text(values: np.ndarray) -> str:
    """Render a 2-D array in the text-grid format with round-trip exact decimals."""
    height, width = values.shape
    lines = [f"{height} {width}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in values)
    return "\n".join(lines) + "\n"


def export_grid_text(field: ScalarField2D, path: PathLike) -> Path:
    """Write a field in the text-grid format."""
    path = Path(path)
    path.write_text(format_grid_text(field.values), encoding="utf-8")
    return path


def read_field_text(path: PathLike) -> ScalarField2D:
    """Read a field written by export_grid_text, without fraction checks."""
    values = parse_grid_text(Path(path).read_text(encoding="utf-8"), fraction=False)
    return ScalarField2D(Grid2D(*values.shape), values)
