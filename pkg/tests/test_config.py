import json

import pytest

from islandstrat.config import config_from_dict, load_config
from islandstrat.exceptions import ConfigError

from conftest import small_config


def test_roundtrip():
    c = small_config(sample_per_pe=2, exact_tracking=True)
    assert config_from_dict(json.loads(json.dumps(c.to_dict()))) == c


@pytest.mark.parametrize(
    "patch, fragment",
    [
        ({"mesh": {"foo": 1}}, "mesh.foo"),
        ({"pe": {"pop_size": "32"}}, "pe.pop_size"),
        ({"surface": {"num_sites": 48}}, "surface"),
        ({"treatment": {"p_deleterious": 1.5}}, "treatment"),
        ({"bogus": 1}, "bogus"),
        ({"sample_per_pe": 99}, "sample_per_pe"),
    ],
)
def test_bad_values_name_the_key(patch, fragment):
    raw = small_config().to_dict()
    for k, v in patch.items():
        if isinstance(v, dict):
            raw[k].update(v)
        else:
            raw[k] = v
    with pytest.raises(ConfigError, match=fragment):
        config_from_dict(raw)


def test_seed_required():
    raw = small_config().to_dict()
    del raw["seed"]
    with pytest.raises(ConfigError, match="seed"):
        config_from_dict(raw)


def test_invalid_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(p)
