"""Reference values computed independently of the library and frozen here."""
import math

import numpy as np
import pytest
from scipy.special import jn_zeros

from steinerflow import BallConstants, bfnt_upper, polya_coeff
from steinerflow.diagram import J0
from steinerflow.shapes import disk64

# torsional rigidity of the unit square from the double sine series
T_SQUARE = 0.03514425373836069
LAMBDA_SQUARE = 2 * math.pi ** 2
J0_SQ = 5.783185962946783
BFNT_AT_1 = 1.1793868019688794
BFNT_AT_HALF = 0.6366197059244797
POLYA_2D = 1.3833205522451597
DISK64_AREA = 3.1365484905459393


def test_square_torsion_double_series():
    m = np.arange(1, 2001, 2, dtype=float)
    M, N = np.meshgrid(m, m)
    t = 64 / math.pi ** 6 * np.sum(1 / (M ** 2 * N ** 2 * (M ** 2 + N ** 2)))
    assert t == pytest.approx(T_SQUARE, rel=1e-8)


def test_square_torsion_single_series_agrees():
    k = np.arange(1, 401, 2, dtype=float)
    t = 1 / 12 - 16 / math.pi ** 5 * np.sum(np.tanh(k * math.pi / 2) / k ** 5)
    assert t == pytest.approx(T_SQUARE, rel=1e-12)


def test_bessel_zero():
    assert J0 == pytest.approx(jn_zeros(0, 1)[0], rel=1e-15)
    assert J0 ** 2 == pytest.approx(J0_SQ, rel=1e-15)
    assert BallConstants.for_dimension(2).lambda_ball == pytest.approx(J0_SQ, rel=1e-15)


def test_ball_constants_2d_3d():
    c2 = BallConstants.for_dimension(2)
    assert c2.torsion_ball == pytest.approx(math.pi / 8, rel=1e-15)
    assert c2.volume_ball == pytest.approx(math.pi, rel=1e-15)
    c3 = BallConstants.for_dimension(3)
    assert c3.lambda_ball == pytest.approx(math.pi ** 2, rel=1e-15)
    assert c3.volume_ball == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert c3.torsion_ball == pytest.approx(4 * math.pi / 45, rel=1e-15)


def test_closed_form_bound_values():
    assert bfnt_upper(1.0) == pytest.approx(BFNT_AT_1, rel=1e-14)
    assert bfnt_upper(0.5) == pytest.approx(BFNT_AT_HALF, rel=1e-14)
    assert polya_coeff() == pytest.approx(POLYA_2D, rel=1e-14)


def test_disk64_area():
    from steinerflow import area

    assert area(disk64()) == pytest.approx(DISK64_AREA, rel=1e-14)
    assert abs(DISK64_AREA - math.pi) / math.pi < 2e-3
