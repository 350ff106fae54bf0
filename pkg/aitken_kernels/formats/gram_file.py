"""
Gram matrix files.

One JSON document holding the header and either the base64 encoding of the
little-endian float64 values (row-major, point-major layout) or the name of
a binary sidecar next to it. Both files are written atomically and carry
no timestamps, so equal inputs give byte-identical artifacts.
"""
import base64
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import structlog

from ..config import get_settings
from ..domain.matrices import POINT_MAJOR, BlockGram, SpectralReport
from ..domain.reports import jsonable
from ..errors import SchemaError

logger = structlog.get_logger()

GRAM_FILE_VERSION = 1
DTYPE = "<f8"


def atomic_write(path: Path, data: bytes) -> None:
    """Write to a temporary file in the target directory, then rename over the target."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_gram_file(
    path: Union[str, Path],
    gram: BlockGram,
    spec_hash: str,
    seed: int,
    report: SpectralReport,
    sidecar_threshold: Optional[int] = None,
) -> Dict[str, Any]:
    """Write the Gram file (and sidecar when N·p exceeds the threshold); returns the header."""
    path = Path(path)
    threshold = sidecar_threshold or get_settings().runtime.sidecar_threshold
    payload = np.ascontiguousarray(gram.flattened.entries, dtype=DTYPE).tobytes()
    size = gram.n_points * gram.p

    header: Dict[str, Any] = {
        "version": GRAM_FILE_VERSION,
        "spec_hash": spec_hash,
        "layout": gram.layout,
        "p": gram.p,
        "N": gram.n_points,
        "dtype": "f64",
        "provenance": jsonable(gram.provenance),
        "seed": seed,
        "report": report.to_dict(),
    }
    if size > threshold:
        sidecar = path.with_name(path.name + ".bin")
        atomic_write(sidecar, payload)
        header.update({
            "encoding": "sidecar",
            "sidecar": sidecar.name,
            "sha256": hashlib.sha256(payload).hexdigest(),
        })
    else:
        header.update({"encoding": "base64", "values": base64.b64encode(payload).decode("ascii")})

    atomic_write(path, (json.dumps(header, sort_keys=True, indent=2) + "\n").encode("utf-8"))
    logger.info("gram_file_written", path=str(path), encoding=header["encoding"], size=size)
    return header


def read_gram_file(path: Union[str, Path]) -> Tuple[Dict[str, Any], np.ndarray]:
    """Header and the (N·p, N·p) matrix."""
    path = Path(path)
    try:
        header = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"gram file is not JSON: line {e.lineno}, column {e.colno}") from e

    if header.get("version") != GRAM_FILE_VERSION or header.get("dtype") != "f64":
        raise SchemaError(f"unsupported gram file version/dtype: {header.get('version')}/{header.get('dtype')}")
    if header.get("layout") != POINT_MAJOR:
        raise SchemaError(f"unsupported layout: {header.get('layout')!r}")

    if header.get("encoding") == "base64":
        payload = base64.b64decode(header["values"])
    elif header.get("encoding") == "sidecar":
        payload = (path.parent / header["sidecar"]).read_bytes()
        if hashlib.sha256(payload).hexdigest() != header.get("sha256"):
            raise SchemaError(f"sidecar {header['sidecar']} does not match its checksum")
    else:
        raise SchemaError(f"unknown encoding: {header.get('encoding')!r}")

    dim = header["N"] * header["p"]
    values = np.frombuffer(payload, dtype=DTYPE)
    if values.size != dim * dim:
        raise SchemaError(f"gram file holds {values.size} values, expected {dim * dim}")
    return header, values.reshape(dim, dim).astype(float)
