import json

import numpy as np
import pytest

from icregion.channel_model import ProductDistribution, random_conforming_instance
from icregion.errors import ValidationError
from icregion.serialization import (
    channel_from_json,
    distribution_from_json,
    distribution_to_json,
    dmic_to_json,
    dump_json,
    gaussian_to_json,
    load_channel,
)


def test_gaussian_round_trip(tmp_path):
    inst = random_conforming_instance(4, 3)
    path = tmp_path / "g.json"
    dump_json(gaussian_to_json(inst.ic), path)
    doc = json.loads(path.read_text())
    assert doc["type"] == "gaussian" and doc["k"] == 4
    assert np.array(doc["gains"]).shape == (4, 4, 2)
    assert load_channel(path) == inst.ic


def test_dmic_round_trip(adder3):
    back = channel_from_json(json.loads(dump_json(dmic_to_json(adder3))))
    assert back.input_sizes == adder3.input_sizes
    for a, b in zip(back.transitions, adder3.transitions):
        np.testing.assert_array_equal(a, b)


def test_distribution_round_trip():
    d = ProductDistribution([0.25, 0.75], [[[0.5, 0.5], [1, 0, 0]], [[0.1, 0.9], [0.2, 0.3, 0.5]]])
    back = distribution_from_json(json.loads(dump_json(distribution_to_json(d))))
    np.testing.assert_allclose(back.q_weights, d.q_weights)


@pytest.mark.parametrize("doc", [
    {},
    {"type": "other"},
    {"type": "gaussian", "k": 2, "powers": [1, 1], "gains": [[1, 0], [0, 1]]},
    {"type": "gaussian", "k": 2},
    {"type": "dmic", "k": 3, "input_sizes": [2, 2], "output_sizes": [2, 2], "transitions": []},
])
def test_malformed(doc):
    with pytest.raises(ValidationError):
        channel_from_json(doc)


def test_dump_is_sorted_and_newline_terminated(sym3):
    text = dump_json(gaussian_to_json(sym3))
    assert text.endswith("\n")
    keys = list(json.loads(text))
    assert keys == sorted(keys)
