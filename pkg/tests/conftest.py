import numpy as np
import pytest

from dpalloc import GenParams, Instance, PartyData, generate


def make_party(A, B, b, u, cap, kinds=None):
    return PartyData(shared_coeff=A, private_coeff=B, private_rhs=b, utility=u,
                     allot_cap=cap, row_kinds=kinds)


@pytest.fixture
def minimal_instance():
    """K=1, m=1 single-box instance."""
    party = make_party(A=[[1.0]], B=np.zeros((0, 1)), b=[], u=[1.0], cap=[1.0])
    return Instance(capacity=[1.0], parties=(party,))


@pytest.fixture
def tiny_params():
    return GenParams().tiny()


@pytest.fixture
def std_instance():
    return generate(7)


def tiny_instance(seed):
    return generate(seed, GenParams().tiny())
