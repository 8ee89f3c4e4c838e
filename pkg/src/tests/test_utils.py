import pytest

from src.exceptions import ConfigError
from src.utils import apply_overrides, content_hash, parse_override, set_path


@pytest.mark.parametrize(
    "text, expected_result",
    [
        ("regulation.eps_ee=0.02", (("regulation", "eps_ee"), 0.02)),
        ("weights.w_ee = 14", (("weights", "w_ee"), 14)),
        ("seed=7", (("seed",), 7)),
        ("variant=full", (("variant",), "full")),
        ("regulation.regulate=[w_ee, w_ie]", (("regulation", "regulate"), ["w_ee", "w_ie"])),
        ("scan.x.size=12", (("scan", "x", "size"), 12)),
        ("output_dir=", (("output_dir",), None)),
        ("  integrator.dt=0.001", (("integrator", "dt"), 0.001)),
    ],
)
def test_parse_override(text, expected_result):
    actual_result = tuple(parse_override(text))
    assert actual_result == expected_result


@pytest.mark.parametrize("text", ["no equals sign", "=3", "1abc=2", "weights..w_ee=1"])
def test_parse_override__malformed(text):
    with pytest.raises(ConfigError):
        parse_override(text)


def test_parse_override__bad_yaml_names_key():
    with pytest.raises(ConfigError) as exc_info:
        parse_override("initial.points=[1, 2")

    assert exc_info.value.key == "initial.points"


@pytest.mark.parametrize(
    "data, path, value, expected_result",
    [
        ({}, ("seed",), 3, {"seed": 3}),
        ({}, ("weights", "w_ee"), 14, {"weights": {"w_ee": 14}}),
        (
            {"weights": {"w_ee": 12, "w_ei": 10}},
            ("weights", "w_ee"),
            14,
            {"weights": {"w_ee": 14, "w_ei": 10}},
        ),
    ],
)
def test_set_path(data, path, value, expected_result):
    actual_result = set_path(data, path, value)
    assert actual_result == expected_result


def test_set_path__inside_scalar():
    with pytest.raises(ConfigError):
        set_path({"weights": 3}, ("weights", "w_ee"), 14)


def test_apply_overrides__later_wins():
    actual_result = apply_overrides({"seed": 1}, ["seed=2", "seed=5", "integrator.dt=0.02"])
    assert actual_result == {"seed": 5, "integrator": {"dt": 0.02}}


def test_content_hash__key_order():
    assert content_hash({"a": 1, "b": [1, 2]}) == content_hash({"b": [1, 2], "a": 1})
    assert content_hash({"a": 1}) != content_hash({"a": 2})
