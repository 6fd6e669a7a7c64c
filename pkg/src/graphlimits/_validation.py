"""Input validation helpers used across the package."""

import numbers

import numpy as np

from .errors import ValidationError

MEASURE_TOL = 1e-12


def frozen_array(values, dtype=float, ndim=None, name="array"):
    """Copy ``values`` into a read-only ndarray, optionally checking ndim."""
    try:
        arr = np.array(values, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: cannot convert to {np.dtype(dtype).name} array") from exc
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: entries must be finite")
    arr.setflags(write=False)
    return arr


def check_measures(measures):
    """Validate a vector of class measures: positive and summing to one."""
    m = frozen_array(measures, ndim=1, name="measures")
    if m.size == 0:
        raise ValidationError("measures: partition needs at least one class")
    if np.any(m <= 0):
        raise ValidationError("measures: every class measure must be > 0")
    if abs(float(m.sum()) - 1.0) > MEASURE_TOL:
        raise ValidationError(f"measures: sum is {m.sum()!r}, expected 1 within {MEASURE_TOL}")
    return m


def check_square(values, name="matrix"):
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name}: expected a square matrix, got shape {arr.shape}")
    return arr


def check_symmetric(values, name="matrix"):
    """Exact (entrywise) symmetry check for square matrices or stacks of them."""
    arr = np.asarray(values)
    if not np.array_equal(arr, np.swapaxes(arr, 0, 1)):
        raise ValidationError(f"{name}: must be exactly symmetric")
    return arr


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name}: expected an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name}: must be >= {minimum}, got {value}")
    return int(value)


def check_probability_vector(p, name="witness", tol=MEASURE_TOL):
    arr = frozen_array(p, ndim=None, name=name)
    if np.any(arr < 0):
        raise ValidationError(f"{name}: entries must be >= 0")
    sums = arr.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > tol):
        raise ValidationError(f"{name}: must sum to 1 within {tol}")
    return arr


def check_random_state(seed, *stream):
    """Return a counter-based (Philox) generator.

    ``seed`` may be an int, a ``SeedSequence`` or an existing ``Generator``
    (returned unchanged). Extra integers in ``stream`` select an independent
    substream, so ``check_random_state(7, n, trial)`` is reproducible and
    never overlaps ``check_random_state(7, n, trial + 1)``.
    """
    if isinstance(seed, np.random.Generator):
        if stream:
            raise ValidationError("cannot derive a substream from an existing Generator")
        return seed
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(stream))
    else:
        if seed is None or isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or seed < 0:
            raise ValidationError(f"seed must be a non-negative int, got {seed!r}")
        ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))
