import pytest
from pydantic import ValidationError

from glc.core.config import dump_config, load_config_file, merge_sources, split_csv
from glc.core.errors import DataError, UsageError
from glc.models.schemas import AdaptConfig, ScenarioSpec, SweepConfig, Variant


def test_flat_file_with_comments(tmp_path) -> None:
    path = tmp_path / "run.txt"
    path.write_text("# adaptation\neta = 0.4   # weight\n\nrho=0.8\nclass_count =\n")

    assert load_config_file(path) == {"eta": "0.4", "rho": "0.8", "class_count": ""}


@pytest.mark.parametrize(
    ("body", "message"),
    [
        ("eta 0.4\n", ":1:"),
        ("eta = 0.4\n = 2\n", ":2:"),
        ("eta = 0.4\neta = 0.5\n", "duplicate"),
    ],
)
def test_malformed_files_are_usage_errors(tmp_path, body: str, message: str) -> None:
    path = tmp_path / "run.txt"
    path.write_text(body)

    with pytest.raises(UsageError, match=message):
        load_config_file(path)


def test_missing_file_is_a_data_error(tmp_path) -> None:
    with pytest.raises(DataError):
        load_config_file(tmp_path / "absent.txt")


def test_flags_win_over_file_values() -> None:
    merged = merge_sources(
        {"eta": "0.4", "rho": "0.8", "class_count": ""},
        {"eta": 0.2},
        [AdaptConfig],
    )

    assert merged == {"eta": 0.2, "rho": "0.8"}
    config = AdaptConfig.model_validate(merged)
    assert (config.eta, config.rho, config.class_count) == (0.2, 0.8, None)


def test_unknown_keys_are_rejected() -> None:
    with pytest.raises(UsageError, match="bogus"):
        merge_sources({"bogus": "1"}, {}, [AdaptConfig])

    assert merge_sources({"out": "d/"}, {}, [AdaptConfig], extra_keys=["out"]) == {"out": "d/"}


def test_dumped_scenario_reloads_to_the_same_spec(tmp_path) -> None:
    spec = ScenarioSpec(scenario="osda", shared=4, target_private=3, rotation_deg=12.5, seed=9)
    path = tmp_path / "scenario.txt"

    path.write_text(dump_config(spec.model_dump(mode="json")))

    assert ScenarioSpec.model_validate(load_config_file(path)) == spec


def test_dump_renders_plain_values() -> None:
    assert dump_config({"flag": True, "unset": None, "rate": 0.1, "name": "x"}) == (
        "flag = true\nunset = \nrate = 0.1\nname = x\n"
    )


def test_sweep_lists_parse_from_text() -> None:
    config = SweepConfig.model_validate(
        {"etas": "0.1, 0.3", "rhos": "0.75,1.0", "seeds": "0,1", "variants": "full,no_local"}
    )

    assert config.etas == (0.1, 0.3)
    assert config.rhos == (0.75, 1.0)
    assert config.seeds == (0, 1)
    assert config.variants == (Variant.FULL, Variant.NO_LOCAL)
    assert split_csv(" a, ,b ") == ("a", "b")


def test_empty_sweep_list_is_rejected() -> None:
    with pytest.raises(ValidationError):
        SweepConfig.model_validate({"etas": " , "})
