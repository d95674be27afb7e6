import pytest

from curveflat.config import ScenarioConfig, ScenarioError, load_scenario, loads_scenario


def test_bundled_codogno_matches_defaults():
    cfg = load_scenario("codogno")
    assert cfg == ScenarioConfig().validate()
    assert cfg.network.n_nodes == 16000 and cfg.network.mean_degree == 19
    assert cfg.epidemic.beta_n == 0.0227
    assert (cfg.epidemic.gamma_E, cfg.epidemic.gamma_I) == (0.25, 0.1428)
    assert cfg.epidemic.i0_count == 800
    assert cfg.control.i_th == 0.025 and cfg.control.quantization_levels == 5
    assert cfg.network.edge_probability == pytest.approx(19 / 15999)


def test_empty_document_gives_defaults():
    assert loads_scenario("") == ScenarioConfig()


def test_partial_override():
    cfg = loads_scenario("runs: 5\nmeasurement:\n  delay_mean: 20\n")
    assert cfg.runs == 5
    assert cfg.measurement.delay_mean == 20.0
    assert cfg.measurement.update_interval == 7


def test_scientific_notation_string():
    assert loads_scenario("control:\n  epsilon: 1e-6\n").control.epsilon == 1e-6


@pytest.mark.parametrize("text,where", [
    ("runs: 5\nbogus: 1\n", "s.yaml:2"),
    ("network:\n  n_nodes: 10\n  mean_degree: x\n", "s.yaml:3"),
    ("runs: 2.5\n", "s.yaml:1"),
    ("control:\n  psi_s: 0\n", "s.yaml:2"),
    ("network: 3\n", "s.yaml:1"),
])
def test_errors_carry_position(text, where):
    with pytest.raises(ScenarioError, match=where):
        loads_scenario(text, "s.yaml")


def test_yaml_syntax_error():
    with pytest.raises(ScenarioError, match="YAML"):
        loads_scenario("runs: [1,\n", "s.yaml")


def test_cross_section_validation():
    with pytest.raises(ScenarioError, match="i0_count"):
        loads_scenario("network:\n  n_nodes: 100\n")


def test_replace_validates():
    cfg = ScenarioConfig()
    assert cfg.replace(control__psi_i=2.0).control.psi_i == 2.0
    with pytest.raises(ScenarioError):
        cfg.replace(measurement__update_interval=0)


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario(tmp_path / "nope.yaml")


def test_file_round_trip(tmp_path):
    p = tmp_path / "x.yaml"
    p.write_text("name: x\nhorizon: 90\n")
    assert load_scenario(p).horizon == 90
