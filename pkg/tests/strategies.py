"""Hypothesis strategies shared by the test modules."""
from hypothesis import strategies as st

from scottrank.ordinal import Ordinal, parse

EXPONENTS = [parse(x) for x in ["0", "1", "2", "3", "w", "w+1", "w*2", "w^2"]]


@st.composite
def ordinals(draw, max_terms: int = 3) -> Ordinal:
    exps = draw(st.lists(st.sampled_from(EXPONENTS), max_size=max_terms, unique=True))
    exps.sort(reverse=True)
    return Ordinal([(e, draw(st.integers(1, 4))) for e in exps])


def small_limits():
    return st.sampled_from([parse(x) for x in ["w", "w*2", "w*3", "w^2", "w^2+w", "w^3", "w^w",
                                               "w^2*2+w*3", "w^(w+1)"]])
