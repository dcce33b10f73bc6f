"""Reference problems used by the tests, the acceptance run and the benchmark.

Every problem is small enough that the definitional partition sums reach
``T = 30 / min(psi)`` under the default enumeration cap.
"""
import math

from .induced import InducedProblem
from .potentials import LocallyConstantPotential as Pot
from .sft import Sft

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


def golden_parry():
    g = Sft.golden_mean()
    return InducedProblem(g, Pot.constant(g, 0.0), Pot.constant(g, 1.0), "golden-parry")


def bernoulli():
    f = Sft.full_shift(2)
    phi = Pot.from_values(f, [math.log(0.3), math.log(0.7)])
    return InducedProblem(f, phi, Pot.constant(f, 2.0), "bernoulli")


def moran_scaled():
    f = Sft.full_shift(2)
    psi = Pot.from_values(f, [math.log(4), math.log(16)])
    return InducedProblem(f, Pot.constant(f, 0.0), psi, "moran-scaled")


def golden_memory2():
    g = Sft.golden_mean()
    phi = Pot(g, 2, {(1, 1): 0.5, (1, 2): -0.25, (2, 1): 1.0})
    psi = Pot(g, 2, {(1, 1): 1.0, (1, 2): 1.5, (2, 1): 2.0})
    return InducedProblem(g, phi, psi, "golden-memory2")


def three_symbol():
    s = Sft(((1, 1, 0), (1, 0, 1), (1, 1, 1)))
    phi = Pot.from_values(s, [0.3, -0.2, 0.1])
    psi = Pot.from_values(s, [1.5, 2.0, 2.5])
    return InducedProblem(s, phi, psi, "three-symbol")


def full2_memory3():
    f = Sft.full_shift(2)
    vals = [0.2, -0.1, 0.4, 0.0, -0.3, 0.5, 0.1, -0.2]
    phi = Pot.from_function(f, 3, lambda w: vals[4 * (w[0] - 1) + 2 * (w[1] - 1) + (w[2] - 1)])
    psi = Pot.from_values(f, [1.5, 2.5])
    return InducedProblem(f, phi, psi, "full2-memory3")


def period_two():
    s = Sft(((0, 1), (1, 0)))
    phi = Pot.from_values(s, [0.4, -0.1])
    psi = Pot.from_values(s, [1.0, 2.0])
    return InducedProblem(s, phi, psi, "period-two")


def standard_suite():
    return [
        golden_parry(),
        bernoulli(),
        moran_scaled(),
        golden_memory2(),
        three_symbol(),
        full2_memory3(),
        period_two(),
    ]


def mixing_suite():
    from .sft import is_mixing

    return [p for p in standard_suite() if is_mixing(p.sft)]
