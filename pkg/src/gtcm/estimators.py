"""Estimator-style wrappers around the encoder, decoder, search and interleaver.

Hyperparameters are constructor arguments (so ``get_params``/``set_params``
and ``clone`` work); anything learned or resolved lives in trailing-underscore
attributes set by ``fit``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import constellation
from .code import CodeSpec, Validity, encode, parse_generator, validate
from .interleave import DEFAULT_BLOCK_SIZE, interleave_stream, is_prime
from .search import SearchSpec, default_trials, random_search
from .viterbi import decode


def check_bits(bits) -> np.ndarray:
    """Flatten to a uint8 vector and reject anything other than 0/1."""
    arr = np.asarray(bits).ravel()
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("bit sequences may only contain 0 and 1")
    return arr.astype(np.uint8)


def check_samples(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.complex128).ravel()
    if arr.size == 0:
        raise ValueError("no samples")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples contain NaN or infinity")
    return arr


def check_code(code, k=None, n=None) -> CodeSpec:
    """Accept a CodeSpec or an octal generator string."""
    if isinstance(code, CodeSpec):
        return code
    if isinstance(code, str):
        return parse_generator(code, k, n)
    raise TypeError(f"expected CodeSpec or octal string, got {type(code).__name__}")


def check_modulation(mod):
    return mod if isinstance(mod, constellation.Modulation) else constellation.build(mod)


class TrellisEncoder(TransformerMixin, BaseEstimator):
    """Bits in, target-constellation samples (or symbol indices) out."""

    def __init__(self, code="(1 3)", target="QPSK", terminate=True, output="samples"):
        self.code = code
        self.target = target
        self.terminate = terminate
        self.output = output

    def fit(self, X=None, y=None):
        self.code_ = check_code(self.code)
        self.modulation_ = check_modulation(self.target)
        if self.modulation_.bits_per_symbol != self.code_.n:
            raise ValueError(f"{self.modulation_.name} does not match code with n={self.code_.n}")
        if self.output not in ("samples", "symbols"):
            raise ValueError(f"output must be 'samples' or 'symbols', not {self.output!r}")
        self.validity_ = validate(self.code_)
        return self

    def transform(self, X):
        check_is_fitted(self, "code_")
        sym = encode(self.code_, check_bits(X), terminate=self.terminate)
        return sym if self.output == "symbols" else self.modulation_.points[sym]


class ViterbiDecoder(BaseEstimator):
    """Samples in, ML bit decisions out."""

    def __init__(self, code="(1 3)", target="QPSK", terminated=True, traceback_depth=None):
        self.code = code
        self.target = target
        self.terminated = terminated
        self.traceback_depth = traceback_depth

    def fit(self, X=None, y=None):
        self.code_ = check_code(self.code)
        self.modulation_ = check_modulation(self.target)
        if self.modulation_.bits_per_symbol != self.code_.n:
            raise ValueError(f"{self.modulation_.name} does not match code with n={self.code_.n}")
        return self

    def predict(self, X):
        check_is_fitted(self, "code_")
        return decode(self.code_, self.modulation_, check_samples(X), self.terminated,
                      self.traceback_depth)


class RandomCodeSearch(BaseEstimator):
    """Random search for the best valid code of a given shape.

    ``fit`` ignores its arguments; the search is fully described by the
    hyperparameters.
    """

    def __init__(self, k=1, n=2, v=2, target="QPSK", trials=None, seed=None, prune=True):
        self.k = k
        self.n = n
        self.v = v
        self.target = target
        self.trials = trials
        self.seed = seed
        self.prune = prune

    def fit(self, X=None, y=None):
        trials = default_trials(self.v) if self.trials is None else int(self.trials)
        spec = SearchSpec.from_total(self.k, self.n, self.v, check_modulation(self.target),
                                     trials, self.seed)
        res = random_search(spec, prune=self.prune)
        self.result_ = res
        self.best_code_ = res.best_code
        self.d_sq_free_ = res.d_sq_free
        self.beta_db_ = res.beta_db
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "result_")
        return self.beta_db_


class CryptoInterleaver(TransformerMixin, BaseEstimator):
    """Keyed per-block interleaving of a packet of whole blocks."""

    def __init__(self, key=b"", packet_number=0, block_size=DEFAULT_BLOCK_SIZE):
        self.key = key
        self.packet_number = packet_number
        self.block_size = block_size

    def fit(self, X=None, y=None):
        if not is_prime(self.block_size):
            raise ValueError(f"block size {self.block_size} is not prime")
        self.key_ = self.key.encode() if isinstance(self.key, str) else bytes(self.key)
        return self

    def transform(self, X):
        check_is_fitted(self, "key_")
        return interleave_stream(self.key_, self.packet_number, np.asarray(X), self.block_size)

    def inverse_transform(self, X):
        check_is_fitted(self, "key_")
        return interleave_stream(self.key_, self.packet_number, np.asarray(X), self.block_size,
                                 inverse=True)


__all__ = [
    "TrellisEncoder", "ViterbiDecoder", "RandomCodeSearch", "CryptoInterleaver",
    "check_bits", "check_samples", "check_code", "check_modulation", "Validity",
]
