"""General trellis-coded modulation: code search, free distance, decoding and rate concealing."""
from .code import CodeSpec, Validity, encode, parse_generator, validate
from .constellation import Modulation, build as modulation
from .distance import compute_distance, coding_gain_db
from .estimators import CryptoInterleaver, RandomCodeSearch, TrellisEncoder, ViterbiDecoder
from .frame import FrameHeader, build_frame, parse_frame
from .interleave import InterleaveContext, LinearInterleaver, derive, inverse_permute, permute
from .search import SearchSpec, full_search, random_search
from .viterbi import decode

__version__ = "0.1.0"
