from __future__ import annotations

from vacqrng.extractor.dimensions import (
    EPS_EXP_CONVENTION,
    ToeplitzDims,
    check_dimensions,
    choose_dimensions,
    eps_exp,
    ratio_condition,
)
from vacqrng.extractor.packing import (
    BitBlock,
    bits_to_bytes,
    bits_to_samples,
    bytes_to_bits,
    samples_to_bits,
)
from vacqrng.extractor.seed import derive_seed_bits, os_entropy_seed, read_seed_file, write_seed_file
from vacqrng.extractor.toeplitz import (
    ToeplitzSpec,
    extract_stream,
    naive_hash,
    toeplitz_hash,
    toeplitz_matrix,
)

__all__ = [
    "EPS_EXP_CONVENTION",
    "BitBlock",
    "ToeplitzDims",
    "ToeplitzSpec",
    "bits_to_bytes",
    "bits_to_samples",
    "bytes_to_bits",
    "check_dimensions",
    "choose_dimensions",
    "derive_seed_bits",
    "eps_exp",
    "extract_stream",
    "naive_hash",
    "os_entropy_seed",
    "ratio_condition",
    "read_seed_file",
    "samples_to_bits",
    "toeplitz_hash",
    "toeplitz_matrix",
    "write_seed_file",
]
