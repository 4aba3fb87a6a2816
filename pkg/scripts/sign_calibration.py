"""Run the sign calibration on every group, then show which triples survive.

Every one of the eight sign triples is tried on the full catalogue of shipped
spaces; only the frozen one should pass everywhere.
"""
import itertools

import numpy as np

from qhdef import fusion as fu
from qhdef import liegroup as lg
from qhdef import spaces as sp
from qhdef.axioms import CheckConfig, SignConvention, calibrate_signs, check_space

ELEMENTS = {"su2": [0.7, 0.3, 0.2], "so3": [0.7, 0.3, 0.2], "t2": [0.7, 0.3], "sl2r": [0.3, 0.2, 0.1]}


def catalogue(m):
    x = m.matrix(np.array(ELEMENTS[m.name]))
    return [
        sp.double_space(m),
        sp.conj_class_space(m, lg.exp(m, x)),
        sp.tstar_space(m),
        sp.orbit_space(m, x),
        fu.moduli_qh(m, 1, 1),
        fu.moduli_ham(m, 1, 1),
    ]


def main():
    for name in ("su2", "so3", "t2", "sl2r"):
        print(f"{name}: calibrated {calibrate_signs(lg.get_model(name))}")
    print()
    for signs in itertools.product((1, -1), repeat=3):
        conv = SignConvention(*signs)
        cfg = CheckConfig(samples=4, sign_convention=conv)
        failed = [
            f"{s.name}"
            for name in ("su2", "so3", "sl2r")
            for s in catalogue(lg.get_model(name))
            if not check_space(s, cfg).passed
        ]
        verdict = "all pass" if not failed else f"{len(failed)} failures, e.g. {failed[0]}"
        print(f"(qh={signs[0]:+d}, ham={signs[1]:+d}, chi={signs[2]:+d}): {verdict}")


if __name__ == "__main__":
    main()
