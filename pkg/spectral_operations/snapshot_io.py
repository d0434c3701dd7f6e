# spectral_operations/snapshot_io.py
"""
Snapshot v1: a line-oriented text file

    version 1
    p <int>
    ell <hex float>
    t <hex float>
    params <alpha> <beta> <gamma> <delta>     (hex floats)
    coeffs <2p>
    <one hex float per line>
    end

Hex floats make the roundtrip bit-exact.
"""

import logging
import os
import tempfile
from typing import List, Optional, Tuple

import attrs
import numpy as np
from numpy.typing import NDArray

from spectral_operations.errors import SnapshotFormatError, UnsupportedVersionError
from spectral_operations.operators import ModelParams

logger = logging.getLogger(__name__)

SNAPSHOT_VERSION = 1


def _coeff_array(values) -> NDArray[np.float64]:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@attrs.frozen(eq=False)
class Snapshot:
    p: int
    ell: float
    t: float
    params: ModelParams
    coeffs: NDArray[np.float64] = attrs.field(converter=_coeff_array)
    version: int = SNAPSHOT_VERSION

    def __attrs_post_init__(self):
        if self.coeffs.shape != (2 * self.p,):
            raise SnapshotFormatError(f"snapshot holds {self.coeffs.size} coefficients, expected {2 * self.p}")

    def same_as(self, other: "Snapshot") -> bool:
        return (
            self.version == other.version
            and self.p == other.p
            and float(self.ell).hex() == float(other.ell).hex()
            and float(self.t).hex() == float(other.t).hex()
            and self.params == other.params
            and self.coeffs.tobytes() == other.coeffs.tobytes()
        )


def dumps(snap: Snapshot) -> str:
    pr = snap.params
    lines = [
        f"version {snap.version}",
        f"p {snap.p}",
        f"ell {float(snap.ell).hex()}",
        f"t {float(snap.t).hex()}",
        "params " + " ".join(float(v).hex() for v in (pr.alpha, pr.beta, pr.gamma, pr.delta)),
        f"coeffs {snap.coeffs.size}",
    ]
    lines.extend(float(c).hex() for c in snap.coeffs)
    lines.append("end")
    return "\n".join(lines) + "\n"


def _field(lines: List[str], index: int, name: str) -> List[str]:
    if index >= len(lines):
        raise SnapshotFormatError(f"snapshot truncated before '{name}'")
    parts = lines[index].split()
    if not parts or parts[0] != name:
        raise SnapshotFormatError(f"line {index + 1}: expected '{name}', got {lines[index]!r}")
    return parts[1:]


def _hex(token: str, where: str) -> float:
    try:
        return float.fromhex(token)
    except (ValueError, OverflowError) as exc:
        raise SnapshotFormatError(f"{where}: not a hex float: {token!r}") from exc


def _header_version(lines: List[str]) -> Optional[int]:
    values = _field(lines, 0, "version")
    try:
        return int(values[0])
    except (IndexError, ValueError):
        raise SnapshotFormatError(f"malformed version line: {lines[0]!r}")


def loads(text: str) -> Snapshot:
    lines = text.splitlines()
    if not lines:
        raise SnapshotFormatError("empty snapshot")
    version = _header_version(lines)
    if version != SNAPSHOT_VERSION:
        raise UnsupportedVersionError(version)

    try:
        p = int(_field(lines, 1, "p")[0])
        ell = _hex(_field(lines, 2, "ell")[0], "ell")
        t = _hex(_field(lines, 3, "t")[0], "t")
        raw_params = _field(lines, 4, "params")
        count = int(_field(lines, 5, "coeffs")[0])
    except IndexError as exc:
        raise SnapshotFormatError("snapshot header field without value") from exc
    except ValueError as exc:
        raise SnapshotFormatError(f"malformed snapshot header: {exc}") from exc
    if len(raw_params) != 4:
        raise SnapshotFormatError(f"params line needs 4 values, got {len(raw_params)}")
    alpha, beta, gamma, delta = (_hex(tok, "params") for tok in raw_params)

    body = lines[6:6 + count]
    if len(body) != count or len(lines) < 7 + count or lines[6 + count].strip() != "end":
        raise SnapshotFormatError(f"snapshot truncated: expected {count} coefficients and an end marker")
    coeffs = [_hex(tok.strip(), f"coefficient {i}") for i, tok in enumerate(body)]

    return Snapshot(
        p=p,
        ell=ell,
        t=t,
        params=ModelParams(alpha=alpha, beta=beta, gamma=gamma, delta=delta),
        coeffs=coeffs,
        version=version,
    )


def write_snapshot(snap: Snapshot, path: str) -> None:
    """Write to a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".snapshot-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w") as f:
            f.write(dumps(snap))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.debug("wrote snapshot t=%.6g to %s", snap.t, path)


def read_snapshot(path: str) -> Snapshot:
    with open(path, "r") as f:
        return loads(f.read())


def snapshot_roundtrip(snap: Snapshot) -> Snapshot:
    return loads(dumps(snap))


def snapshot_name(index: int) -> str:
    return f"snapshot_{index:06d}.txt"


def list_snapshots(directory: str) -> List[Tuple[str, Snapshot]]:
    names = sorted(n for n in os.listdir(directory) if n.startswith("snapshot_") and n.endswith(".txt"))
    return [(n, read_snapshot(os.path.join(directory, n))) for n in names]
