"""Qutrit under global depolarizing noise: I depends on the sign of lambda."""
import numpy as np

from qincompat import estimation, holevo
from qincompat.model import GeneratorSet, NoiseSpec, StatisticalModel, encode, pure_state

H1 = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]])
H2 = np.diag([1.0 + 0j, -1.0, 0.0])
probe = pure_state(np.array([1, -1, 0]) / np.sqrt(2))


def incompat(lam):
    model = StatisticalModel(probe, GeneratorSet((H1, H2)), NoiseSpec.global_(lam))
    return holevo.r_figure(encode(model), include_identity_bound=False).incompat


for lam in (-0.12, -0.05, 0.05, 0.125, 0.5, 1.0):
    print(f"lambda={lam:+.3f}  I={incompat(lam):.8f}  3|l|/(2+l)={3 * abs(lam) / (2 + lam):.8f}")
print(f"I(1/8)={incompat(1 / 8):.8f} (3/17={3 / 17:.8f})  I(-1/8)={incompat(-1 / 8):.8f} (1/5)")
print(f"kappa*(1/8) = {estimation.kappa_star(3, 1 / 8):.10f}")
