"""Qubit models: SDP incompatibility against the closed form sqrt(2 Tr rho^2 - 1) |lambda|."""
import numpy as np

from qincompat import estimation, holevo
from qincompat.model import GeneratorSet, NoiseSpec, StatisticalModel, encode

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0 + 0j, -1.0])

rng = np.random.default_rng(1)
gens = GeneratorSet((SY, SZ))
print(f"{'purity':>8} {'lambda':>8} {'I (SDP)':>10} {'closed':>10} {'I*':>10}")
for _ in range(8):
    n = rng.normal(size=3)
    r = rng.uniform(0.2, 1.0) * n / np.linalg.norm(n)
    rho = (np.eye(2) + r[0] * SX + r[1] * SY + r[2] * SZ) / 2
    lam = rng.uniform(-1 / 3, 1)
    model = StatisticalModel(rho, gens, NoiseSpec.global_(lam), rng.uniform(-1, 1, 2))
    rep = holevo.r_figure(encode(model), include_identity_bound=False)
    purity = np.trace(rho @ rho).real
    closed = estimation.qubit_closed_form(purity, lam)
    print(f"{purity:8.4f} {lam:8.4f} {rep.incompat:10.7f} {closed:10.7f} {rep.istar:10.7f}")
