"""Reference trend statistics checked against the engine's counting rules.

Each column lists (#trends, #(2-3-2), P(pass P2 after 2-3-2), E(movements)).
With every trend breaking once and each trend contributing one movement
plus one per 2-3-2, the probability is 1 - #trends/#(2-3-2) and the mean
movement count is 1 + #(2-3-2)/#trends. The rounded table values agree.
"""

import pytest

EURUSD_FDAX = [  # 1d, 1h, 10min for EUR-USD then DAX future
    (33, 69, 0.52, 3.09), (59, 104, 0.43, 2.76), (299, 472, 0.37, 2.58),
    (18, 32, 0.44, 2.78), (93, 187, 0.50, 3.01), (286, 495, 0.42, 2.73),
]
GOLD_OIL = [
    (33, 61, 0.46, 2.85), (136, 252, 0.46, 2.85), (258, 435, 0.41, 2.69),
    (20, 38, 0.47, 2.90), (170, 302, 0.44, 2.78), (458, 720, 0.36, 2.57),
]


@pytest.mark.parametrize("trends, n232, p_pass, movements", EURUSD_FDAX + GOLD_OIL)
def test_pass_probability_and_movements(trends, n232, p_pass, movements):
    assert round(1 - trends / n232, 2) == pytest.approx(p_pass, abs=0.006)
    assert round(1 + n232 / trends, 2) == pytest.approx(movements, abs=0.006)
