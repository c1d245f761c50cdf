"""Hypothesis strategies for random measures, weights and problems on (0, 1) with dyadic data."""

from hypothesis import strategies as st

from characterize import Direction, ProblemSpec
from measure import Measure
from stepfn import StepFunction


DYADIC = tuple(k / 16 for k in range(1, 16))
LEVELS = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
POSITIVE_LEVELS = (0.25, 0.5, 1.0, 2.0, 4.0)
MASSES = (0.25, 0.5, 1.0, 2.0)

PAIRS = {
    'QleP': ((1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (4.0, 2.0), (4.0, 1.0), (4.0, 4.0),
             (float('inf'), 1.0), (float('inf'), 2.0), (float('inf'), float('inf'))),
    'PltQfin': ((1.0, 2.0), (1.0, 4.0), (2.0, 4.0)),
    'QisInf': ((1.0, float('inf')), (2.0, float('inf')), (4.0, float('inf'))),
}


@st.composite
def breakpoints(draw, max_inner=4):
    inner = draw(st.lists(st.sampled_from(DYADIC), max_size=max_inner, unique=True))
    return tuple([0.0] + sorted(inner) + [1.0])


@st.composite
def measures(draw, atoms=True, positive_start=False):
    breaks = draw(breakpoints())
    density = [draw(st.sampled_from(LEVELS)) for _ in breaks[1:]]
    if positive_start and density[0] == 0:
        density[0] = 1.0
    positions = draw(st.lists(st.sampled_from(DYADIC), max_size=3, unique=True)) if atoms else []
    masses = [draw(st.sampled_from(MASSES)) for _ in positions]
    pairs = sorted(zip(positions, masses))
    return Measure(breaks, tuple(density), tuple(s for s, _ in pairs), tuple(m for _, m in pairs))


@st.composite
def step_functions(draw, positive_start=False, positive=False):
    breaks = draw(breakpoints())
    levels = POSITIVE_LEVELS if positive else LEVELS
    values = [draw(st.sampled_from(levels)) for _ in breaks[1:]]
    if positive_start and values[0] == 0:
        values[0] = 1.0
    return StepFunction(breaks, tuple(values))


@st.composite
def specs(draw, kind=None, nu_atoms=True, direction=Direction.FORWARD):
    """
    Admissible problems whose phi grows from 0 right after a, so the
    vanishing condition is never violated.
    """
    kind = kind or draw(st.sampled_from(sorted(PAIRS)))
    p, q = draw(st.sampled_from(PAIRS[kind]))
    return ProblemSpec(
        a=0.0,
        b=1.0,
        p=p,
        q=q,
        direction=direction,
        mu=draw(measures()),
        nu=draw(measures(atoms=nu_atoms, positive_start=True)),
        u=draw(step_functions(positive_start=True)),
        w=draw(step_functions()),
    )


def lebesgue_spec(p, q, direction=Direction.FORWARD, u=1.0, w=1.0) -> ProblemSpec:
    return ProblemSpec(
        a=0.0,
        b=1.0,
        p=p,
        q=q,
        direction=direction,
        mu=Measure.lebesgue(0.0, 1.0),
        nu=Measure.lebesgue(0.0, 1.0),
        u=StepFunction.constant(0.0, 1.0, u),
        w=StepFunction.constant(0.0, 1.0, w),
    )
