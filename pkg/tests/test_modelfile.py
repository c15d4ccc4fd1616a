import json
from fractions import Fraction as F

import pytest

from unimix.core import (
    IID,
    Bernoulli,
    ConfigError,
    Deterministic,
    MixtureModel,
    NormalizedEnvironment,
    VariableRate,
    dump_model,
    dumps_model,
    load_model,
)
from unimix.toy_m import ToyMEnvironment

MODELS = [
    Bernoulli(F(1, 3)),
    IID((F(1, 2), F(1, 3), F(1, 6))),
    VariableRate(F(1, 2), -3),
    Deterministic((1, 1), (0, 1)),
    MixtureModel([(F(1, 3), Bernoulli(F(1, 4))), (F(1, 2), Bernoulli(F(1, 2)))]),
    NormalizedEnvironment(MixtureModel([(F(1, 2), Bernoulli(F(1, 7)))])),
    ToyMEnvironment(8, 16),
]


@pytest.mark.parametrize("env", MODELS, ids=lambda e: e.kind)
def test_round_trip(env, tmp_path):
    text = dumps_model(env)
    back = load_model(text)
    assert dump_model(back) == dump_model(env)
    path = tmp_path / "m.json"
    path.write_text(text)
    assert dump_model(load_model(path)) == dump_model(env)
    for x in ["", "0", "01", "110"]:
        if env.alphabet.size == 2:
            assert back.mass(x) == env.mass(x)


def test_exact_fractions_survive():
    theta = F(123456789, 987654321)
    doc = json.loads(dumps_model(Bernoulli(theta)))
    assert doc["environment"]["theta"] == "13717421/109739369"
    assert load_model(doc).theta == theta


@pytest.mark.parametrize("doc", [
    {"environment": {"kind": "bernoulli", "theta": "1/2", "extra": 1}},
    {"environment": {"kind": "nope"}},
    {"environment": {"kind": "bernoulli", "theta": 0.5}},
    {"environment": {"kind": "bernoulli"}},
    {"environment": {"kind": "bernoulli", "theta": "1/2"}, "colour": "red"},
    {"format": "other/9", "environment": {"kind": "bernoulli", "theta": "1/2"}},
    {"environment": {"kind": "variable-rate", "coef": "1/2", "exponent": "-3"}},
    {"environment": {"kind": "mixture", "components": [
        {"weight": "1/2", "environment": {"kind": "bernoulli", "theta": "1/2"}, "w": 1}]}},
])
def test_rejects_bad_documents(doc):
    with pytest.raises(ConfigError):
        load_model(doc)
