"""JSON codecs: complex numbers as [re, im], deterministic dumps."""

import json

import numpy as np


def cnum(z):
    """Complex scalar -> [re, im]."""
    z = complex(z)
    return [z.real, z.imag]


def cnum_from(v):
    return complex(v[0], v[1])


def cvec(z):
    """1-d complex array -> list of [re, im]."""
    return [cnum(x) for x in np.asarray(z).ravel()]


def cvec_from(v):
    return np.array([cnum_from(x) for x in v], dtype=complex)


def cmat(m):
    m = np.asarray(m)
    return [[cnum(x) for x in row] for row in m]


def cmat_from(v):
    return np.array([[cnum_from(x) for x in row] for row in v], dtype=complex)


def dumps(obj):
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def dump_file(obj, path):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def load_file(path):
    with open(path) as fh:
        return json.load(fh)
