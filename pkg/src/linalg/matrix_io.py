"""
URM1 Matrix Files
=================
Binary dump format for snapshot matrices, bases and field vectors.

    dense:  b"URM1" | u64 rows | u64 cols | f64 values, row-major
    sparse: b"URM1" | u64 rows | u64 cols | u64 nnz | u64 indptr[rows+1]
            | u64 indices[nnz] | f64 data[nnz]

All integers and floats little-endian. Vectors are stored as dense (n, 1).
"""

from pathlib import Path
from typing import Union

import numpy as np
import scipy.sparse as sp

from src.utils.errors import InvalidArgumentError

MAGIC = b"URM1"
_HEADER = len(MAGIC) + 16


def write_matrix(path, matrix) -> Path:
    """Write a dense array (1D or 2D) or a scipy sparse matrix"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if sp.issparse(matrix):
        csr = sp.csr_matrix(matrix, dtype=np.float64)
        csr.sort_indices()
        rows, cols = csr.shape
        parts = [
            MAGIC,
            np.array([rows, cols, csr.nnz], dtype='<u8').tobytes(),
            csr.indptr.astype('<u8').tobytes(),
            csr.indices.astype('<u8').tobytes(),
            csr.data.astype('<f8').tobytes(),
        ]
    else:
        arr = np.asarray(matrix, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise InvalidArgumentError(f"only 1D/2D arrays can be written, got ndim={arr.ndim}")
        rows, cols = arr.shape
        parts = [
            MAGIC,
            np.array([rows, cols], dtype='<u8').tobytes(),
            np.ascontiguousarray(arr, dtype='<f8').tobytes(),
        ]
    with open(path, 'wb') as fh:
        for part in parts:
            fh.write(part)
    return path


def read_matrix(path, kind: str = 'auto') -> Union[np.ndarray, sp.csr_matrix]:
    """
    Read a URM1 file

    Args:
        kind: 'dense', 'sparse', or 'auto' (dense when the file size matches the
            dense layout exactly, sparse otherwise)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"matrix file not found: {path}")
    raw = path.read_bytes()
    if raw[:4] != MAGIC or len(raw) < _HEADER:
        raise InvalidArgumentError(f"{path} is not a URM1 file")
    rows, cols = (int(v) for v in np.frombuffer(raw, dtype='<u8', count=2, offset=4))

    if kind == 'auto':
        kind = 'dense' if len(raw) == _HEADER + 8 * rows * cols else 'sparse'

    if kind == 'dense':
        if len(raw) != _HEADER + 8 * rows * cols:
            raise InvalidArgumentError(f"{path}: size does not match a dense {rows}x{cols} payload")
        values = np.frombuffer(raw, dtype='<f8', count=rows * cols, offset=_HEADER)
        return values.reshape(rows, cols).astype(np.float64)

    if kind != 'sparse':
        raise InvalidArgumentError(f"unknown matrix kind {kind!r}")
    nnz = int(np.frombuffer(raw, dtype='<u8', count=1, offset=_HEADER)[0])
    offset = _HEADER + 8
    expected = offset + 8 * (rows + 1) + 16 * nnz
    if len(raw) != expected:
        raise InvalidArgumentError(f"{path}: size does not match a sparse {rows}x{cols} payload")
    indptr = np.frombuffer(raw, dtype='<u8', count=rows + 1, offset=offset).astype(np.int64)
    offset += 8 * (rows + 1)
    indices = np.frombuffer(raw, dtype='<u8', count=nnz, offset=offset).astype(np.int64)
    offset += 8 * nnz
    data = np.frombuffer(raw, dtype='<f8', count=nnz, offset=offset).astype(np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(rows, cols))


def read_vector(path) -> np.ndarray:
    """Dense URM1 file holding a single column"""
    arr = read_matrix(path, kind='dense')
    if arr.shape[1] != 1:
        raise InvalidArgumentError(f"{path} holds a {arr.shape} matrix, not a vector")
    return arr[:, 0]
