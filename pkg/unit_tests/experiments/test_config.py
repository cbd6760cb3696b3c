import numpy as np
import pytest

from experiments.config import DEFAULT_CONFIG, ConfigService, parse_override
from federation.entities import FederationConfig
from federation.enums import Mode
from unit_tests.helpers import TINY_OVERRIDES
from utils.exceptions import InvalidConfigurationException


@pytest.fixture
def config_file(tmp_path):
    def write(text, name="config.yaml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


def _diagnostics(error):
    return error.value.detail["diagnostics"]


def test_defaults_resolve_to_the_desk_profile():
    resolved = ConfigService.resolve()

    assert resolved.as_dict() == DEFAULT_CONFIG
    cfg = resolved.federation_config()
    assert cfg.total_rounds == 200 and cfg.warmup_rounds == 50
    assert cfg.learning_rate == pytest.approx(1e-3)
    assert cfg.mode is Mode.FEDMLP


def test_distilled_step_size_is_one_override_away():
    resolved = ConfigService.resolve(overrides=["federation.learning_rate=3.0e-5", "federation.rounds=500"])

    cfg = resolved.federation_config()
    assert cfg.learning_rate == pytest.approx(3e-5)
    assert cfg.total_rounds == 500
    assert FederationConfig().learning_rate == pytest.approx(3e-5)


def test_dotted_and_nested_files_are_equivalent(config_file):
    dotted = config_file("seed: 4\nfederation.rounds: 12\nfederation.warmup_rounds: 4\n", "dotted.yaml")
    nested = config_file("seed: 4\nfederation:\n  rounds: 12\n  warmup_rounds: 4\n", "nested.yaml")

    assert ConfigService.resolve(dotted).as_dict() == ConfigService.resolve(nested).as_dict()
    assert ConfigService.resolve(nested).values["federation"]["rounds"] == 12


def test_overrides_and_flags_take_precedence(config_file):
    path = config_file("seed: 4\nfederation.rounds: 12\n")
    resolved = ConfigService.resolve(path, ["federation.rounds=20"], extra={"seed": 9, "federation.threads": None})

    assert resolved.values["federation"]["rounds"] == 20
    assert resolved.seed == 9
    assert resolved.values["federation"]["threads"] == 1


def test_unknown_key_reports_file_and_line(config_file):
    path = config_file("seed: 1\nfederation:\n  rounds: 10\n  bogus: 2\n")

    with pytest.raises(InvalidConfigurationException) as error:
        ConfigService.resolve(path)

    assert _diagnostics(error) == [f"{path}:4: federation.bogus: unknown key"]


def test_invalid_value_reports_file_and_line(config_file):
    path = config_file("seed: 1\nfederation.rounds: -1\n")

    with pytest.raises(InvalidConfigurationException) as error:
        ConfigService.resolve(path)

    assert len(_diagnostics(error)) == 1
    assert _diagnostics(error)[0].startswith(f"{path}:2: federation.rounds: ")
    assert error.value.exit_code == 2


def test_override_diagnostics_name_their_position():
    with pytest.raises(InvalidConfigurationException) as error:
        ConfigService.resolve(overrides=["seed=2", "federation.rounds=abc"])
    assert _diagnostics(error)[0].startswith("<--set>:2: federation.rounds: ")


def test_cross_field_rules_are_checked():
    with pytest.raises(InvalidConfigurationException) as error:
        ConfigService.resolve(overrides=["federation.warmup_rounds=300", "partition.missing_classes=5"])

    keys = {diagnostic.split(": ")[1] for diagnostic in _diagnostics(error)}
    assert "federation.warmup_rounds" in keys


def test_too_many_missing_classes_are_rejected():
    with pytest.raises(InvalidConfigurationException) as error:
        ConfigService.resolve(overrides=["partition.missing_classes=5"])
    assert _diagnostics(error) == ["<--set>:1: partition.missing_classes: At most 4 classes can be hidden per client."]


def test_malformed_yaml_names_the_file(config_file):
    path = config_file("federation: [1, 2\nseed: 3\n")
    with pytest.raises(InvalidConfigurationException) as error:
        ConfigService.resolve(path)
    assert str(error.value).startswith(f"{path}:")


def test_top_level_must_be_a_mapping(config_file):
    path = config_file("- a\n- b\n")
    with pytest.raises(InvalidConfigurationException) as error:
        ConfigService.resolve(path)
    assert str(error.value).startswith(f"{path}:1:")


def test_missing_file_is_a_configuration_error(tmp_path):
    with pytest.raises(InvalidConfigurationException):
        ConfigService.resolve(str(tmp_path / "absent.yaml"))


def test_override_needs_a_key_and_value():
    assert parse_override("data.positive_rates=[0.1, 0.2]") == ("data.positive_rates", [0.1, 0.2])
    with pytest.raises(InvalidConfigurationException):
        parse_override("federation.rounds")


def test_resolved_config_builds_runtime_objects():
    resolved = ConfigService.resolve(overrides=TINY_OVERRIDES + ["data.label_correlation=0.3"])

    cfg = resolved.federation_config()
    spec = resolved.synthetic_spec()

    assert (cfg.num_clients, cfg.num_classes, cfg.total_rounds, cfg.warmup_rounds) == (3, 3, 6, 3)
    assert spec.positive_rates == (0.4, 0.3, 0.2)
    assert np.array_equal(spec.correlation_matrix(), [[1.0, 0.3, 0.3], [0.3, 1.0, 0.3], [0.3, 0.3, 1.0]])


def test_full_correlation_matrix_is_accepted():
    resolved = ConfigService.resolve(overrides=TINY_OVERRIDES + [
        "data.label_correlation=[[1, 0.2, 0], [0.2, 1, 0], [0, 0, 1]]",
    ])
    assert resolved.synthetic_spec().correlation_matrix()[0, 1] == pytest.approx(0.2)

    with pytest.raises(InvalidConfigurationException):
        ConfigService.resolve(overrides=TINY_OVERRIDES + ["data.label_correlation=[[1, 0.2], [0.2, 1]]"])


def test_with_overrides_revalidates():
    resolved = ConfigService.resolve(overrides=TINY_OVERRIDES)

    swapped = resolved.with_overrides({"federation.mode": Mode.FEDAVG.value})

    assert swapped.mode is Mode.FEDAVG
    assert resolved.mode is Mode.FEDMLP
    with pytest.raises(InvalidConfigurationException):
        resolved.with_overrides({"federation.clients": 0})
