"""Trace file reader and writer.

Two formats are supported and detected automatically on read.

Binary (little-endian)::

    offset 0   4 bytes  magic "HITR"
    offset 4   u16      version (1)
    offset 6   u8       dtype (0 = f32, 1 = f64)
    offset 7   u8       reserved (0)
    offset 8   u32      T
    offset 12  u32      D
    offset 16  T*D      values, row-major, rows in descending t

Timesteps are implicit: T, T-1, ..., 1.

CSV: header ``t,f0,f1,...,f{D-1}`` followed by one row per timestep, floats printed as the
shortest decimal that round-trips.
"""

import csv
import io
import struct
from enum import Enum
from logging import Logger
from pathlib import Path
from typing import Union

import numpy as np

from hicache.errors import ConfigurationError, InvalidFeatureError, TraceFormatError
from hicache.sim.trajectory import Trajectory
from hicache.utils import atomic_write_bytes, format_float, get_logger

LOGGER: Logger = get_logger()

MAGIC: bytes = b"HITR"
VERSION: int = 1
HEADER = struct.Struct("<4sHBBII")
DTYPES: dict[int, np.dtype] = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
DTYPE_CODES: dict[str, int] = {"f32": 0, "f64": 1}


class TraceFormat(str, Enum):
    """On-disk trace formats."""

    BINARY = "binary"
    CSV = "csv"


def encode_binary(trajectory: Trajectory, precision: str = "f64") -> bytes:
    """Serializes a trajectory on the ``T .. 1`` grid into the binary format."""
    if precision not in DTYPE_CODES:
        raise ConfigurationError(f"precision must be one of {sorted(DTYPE_CODES)}")
    if not trajectory.has_unit_grid:
        raise ConfigurationError(
            "The binary format stores implicit timesteps T..1; use CSV for other grids"
        )
    code = DTYPE_CODES[precision]
    header = HEADER.pack(MAGIC, VERSION, code, 0, trajectory.total_steps, trajectory.dim)
    return header + trajectory.values.astype(DTYPES[code]).tobytes(order="C")


def encode_csv(trajectory: Trajectory) -> bytes:
    """Serializes a trajectory into the CSV format."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t"] + [f"f{index}" for index in range(trajectory.dim)])
    for t, feature in trajectory.steps():
        writer.writerow([t] + [format_float(value) for value in feature])
    return buffer.getvalue().encode("utf-8")


def write_trace(
    trajectory: Trajectory,
    path: Union[str, Path],
    trace_format: Union[TraceFormat, str] = TraceFormat.BINARY,
    precision: str = "f64",
) -> Path:
    """Writes ``trajectory`` to ``path`` atomically.

    Args:
        trajectory (Trajectory): The trajectory to store.
        path (str | Path): Destination file.
        trace_format (TraceFormat | str): ``binary`` or ``csv``.
        precision (str): ``f64`` (default) or ``f32``, binary format only.

    Returns:
        Path: The written path.
    """
    trace_format = TraceFormat(trace_format)
    if trace_format is TraceFormat.BINARY:
        payload = encode_binary(trajectory, precision)
    else:
        payload = encode_csv(trajectory)
    LOGGER.debug(
        f"Writing {trace_format.value} trace T={trajectory.total_steps} D={trajectory.dim} "
        f"to {path}"
    )
    return atomic_write_bytes(path, payload)


def decode_binary(data: bytes) -> Trajectory:
    """Parses the binary format.

    Raises:
        TraceFormatError: On bad magic, unsupported header fields or a payload size mismatch.
    """
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise TraceFormatError("Bad magic, expected 'HITR'", position=0)
    if len(data) < HEADER.size:
        raise TraceFormatError("Truncated header", position=len(data))

    _, version, dtype_code, reserved, total, dim = HEADER.unpack_from(data)
    if version != VERSION:
        raise TraceFormatError(f"Unsupported version {version}", position=4)
    if dtype_code not in DTYPES:
        raise TraceFormatError(f"Unknown dtype code {dtype_code}", position=6)
    if reserved != 0:
        raise TraceFormatError(f"Reserved byte must be 0, got {reserved}", position=7)
    if total == 0 or dim == 0:
        raise TraceFormatError(f"Empty trace dimensions T={total}, D={dim}", position=8)

    dtype = DTYPES[dtype_code]
    expected = HEADER.size + total * dim * dtype.itemsize
    if len(data) < expected:
        raise TraceFormatError(
            f"Truncated payload: expected {expected} bytes, got {len(data)}", position=len(data)
        )
    if len(data) > expected:
        raise TraceFormatError("Unexpected trailing bytes after the payload", position=expected)

    values = np.frombuffer(data, dtype=dtype, count=total * dim, offset=HEADER.size)
    values = values.astype(np.float64).reshape(total, dim)
    try:
        return Trajectory.from_values(values)
    except InvalidFeatureError as exc:
        raise TraceFormatError(f"Invalid trace content: {exc}", position=HEADER.size) from exc


def decode_csv(text: str) -> Trajectory:
    """Parses the CSV format.

    Raises:
        TraceFormatError: On a malformed header, inconsistent rows or unparsable numbers;
            the position is the 1-based line number.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise TraceFormatError("Empty CSV trace", position=1, unit="line")

    header = rows[0]
    dim = len(header) - 1
    if header[0] != "t" or dim < 1 or header[1:] != [f"f{index}" for index in range(dim)]:
        raise TraceFormatError("CSV header must be 't,f0,f1,...'", position=1, unit="line")

    times: list[int] = []
    values: list[list[float]] = []
    for line_number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != dim + 1:
            raise TraceFormatError(
                f"Expected {dim + 1} fields, got {len(row)}", position=line_number, unit="line"
            )
        try:
            t = int(row[0])
            feature = [float(field) for field in row[1:]]
        except ValueError as exc:
            raise TraceFormatError(
                f"Unparsable value: {exc}", position=line_number, unit="line"
            ) from exc
        if times and t >= times[-1]:
            raise TraceFormatError(
                f"Timesteps must descend strictly, got {t} after {times[-1]}",
                position=line_number,
                unit="line",
            )
        if not all(np.isfinite(feature)):
            raise TraceFormatError("Non-finite value", position=line_number, unit="line")
        times.append(t)
        values.append(feature)

    if not times:
        raise TraceFormatError("CSV trace has no data rows", position=2, unit="line")
    return Trajectory(times=np.array(times), values=np.array(values))


def read_trace(path: Union[str, Path]) -> Trajectory:
    """Reads a trace file, detecting the format from its first bytes.

    Args:
        path (str | Path): The trace file.

    Returns:
        Trajectory: The stored trajectory.

    Raises:
        TraceFormatError: If the file is neither a valid binary nor a valid CSV trace.
    """
    data = Path(path).read_bytes()
    if data.startswith(MAGIC):
        trajectory = decode_binary(data)
    elif data.startswith(b"t,"):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TraceFormatError("CSV trace is not valid UTF-8", position=exc.start) from exc
        trajectory = decode_csv(text)
    else:
        raise TraceFormatError("Bad magic, expected 'HITR' or a 't,' CSV header", position=0)
    LOGGER.debug(f"Read trace {path}: T={trajectory.total_steps} D={trajectory.dim}")
    return trajectory
