# app/core/fixtures.py

import logging
from typing import Tuple

from app.core.matrix_core import ComplexMatrix, as_matrix
from app.models.matrix import FixtureName

logger = logging.getLogger(__name__)

# 6x5 matrix with Ind(AW) = Ind(WA) = 3 against the 5x6 weight below.
FIXTURE_A = as_matrix([
    [1 + 1j, 1,      1,  0,      0],
    [0,      0,      1j, 1 + 1j, 0],
    [0,      0,      0,  1 + 1j, 0],
    [0,      0,      0,  1j,     0],
    [1 + 1j, 1 + 1j, 1,  0,      0],
    [0,      0,      0,  0,      0],
])

FIXTURE_W = as_matrix([
    [1j,     1j, 1j,     1j, 1,      0],
    [1 + 1j, 0,  0,      0,  1 + 1j, 0],
    [1j,     0,  1 + 1j, 1j, 1j,     0],
    [0,      0,  0,      0,  0,      0],
    [0,      0,  0,      0,  0,      0],
])


def load_fixture(name: FixtureName) -> Tuple[ComplexMatrix, ComplexMatrix]:
    if name is FixtureName.EX41:
        logger.info("loaded fixture %s (A %s, W %s)", name.value, FIXTURE_A.shape, FIXTURE_W.shape)
        return FIXTURE_A, FIXTURE_W
    raise KeyError(name)
