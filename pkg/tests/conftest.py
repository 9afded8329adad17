import numpy as np
import pytest

from app.gaussian_core import SimulationContext


@pytest.fixture
def ctx():
    return SimulationContext("test")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def parse_text_report(text: str) -> dict:
    """把 'key: value' 形式的报告读回字典"""
    doc = {}
    for line in text.strip().splitlines():
        key, _, value = line.partition(": ")
        doc[key] = value
    return doc
