import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from gtcm.estimators import (CryptoInterleaver, RandomCodeSearch, TrellisEncoder, ViterbiDecoder,
                             check_bits, check_samples)


def test_encoder_decoder_round_trip():
    bits = np.random.default_rng(0).integers(0, 2, 600)
    enc = TrellisEncoder(code="(0 5 0 2) (7 2 2 7)", target="QAM16").fit()
    dec = ViterbiDecoder(code="(0 5 0 2) (7 2 2 7)", target="QAM16").fit()
    assert np.array_equal(dec.predict(enc.transform(bits)), bits)


def test_params_and_clone():
    enc = TrellisEncoder(code="(2 7)", target="QPSK", output="symbols")
    assert enc.get_params() == {"code": "(2 7)", "target": "QPSK", "terminate": True, "output": "symbols"}
    other = clone(enc).set_params(terminate=False)
    assert other.terminate is False and enc.terminate is True
    assert list(enc.fit().transform([1, 1, 0, 0])) == [2, 1, 1, 2, 0, 0]


def test_not_fitted():
    with pytest.raises(NotFittedError):
        TrellisEncoder().transform([1, 0])
    with pytest.raises(NotFittedError):
        ViterbiDecoder().predict([1 + 0j])


def test_validation_helpers():
    with pytest.raises(ValueError):
        check_bits([0, 2, 1])
    with pytest.raises(ValueError):
        check_samples([])
    with pytest.raises(ValueError):
        check_samples([np.nan])
    with pytest.raises(ValueError):
        TrellisEncoder(code="(1 3)", target="PSK8").fit()
    with pytest.raises(ValueError):
        TrellisEncoder(output="bits").fit()


def test_random_code_search_estimator():
    est = RandomCodeSearch(k=1, n=2, v=2, target="QPSK", trials=2000, seed=1).fit()
    assert round(est.beta_db_, 2) == 3.98 and est.score() == est.beta_db_
    assert est.best_code_ is not None and abs(est.d_sq_free_ - 10.0) < 1e-9


def test_interleaver_transformer_in_pipeline():
    sym = np.arange(502) % 16
    il = CryptoInterleaver(key="k", packet_number=1).fit()
    mixed = il.transform(sym)
    assert not np.array_equal(mixed, sym)
    assert np.array_equal(il.inverse_transform(mixed), sym)
    pipe = make_pipeline(CryptoInterleaver(key="k", packet_number=1))
    assert np.array_equal(pipe.fit_transform(sym), mixed)
    with pytest.raises(ValueError):
        CryptoInterleaver(block_size=250).fit()
