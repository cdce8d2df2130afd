import json
import math

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from moneydebt import __version__
from moneydebt.errors import ModelError, ParseError, UnsupportedFormat, ValidationError
from moneydebt.evolve import TimeGrid
from moneydebt.exciton1d import GridSpec, Harmonic
from moneydebt.scenario import (
    ScenarioConfig,
    build_model,
    config_from_dict,
    delta_pr_sweep,
    export_series,
    list_presets,
    load_preset,
    load_scenario,
    parse_exciton_config,
    parse_scenario,
    preset_text,
    run_scenario,
    serialize_scenario,
    spectrum,
)

MINIMAL = {
    "schema_version": 1,
    "name": "tiny",
    "basis": {"money": 1, "debt": 1},
    "terms": [{"qe": {"amplitude": 1.0}}],
    "initial_state": {"vacuum": {}},
    "grid": {"t_end": 1.0, "n_steps": 3},
    "observables": ["N_money", "charge"],
    "seed": 0,
    "outputs": ["csv"],
}


def _doc(**changes):
    d = json.loads(json.dumps(MINIMAL))
    d.update(changes)
    return d


def _errors(doc) -> dict:
    with pytest.raises(ValidationError) as ei:
        config_from_dict(doc)
    return dict(ei.value.errors)


def test_minimal_config_defaults():
    c = config_from_dict(_doc())
    assert isinstance(c, ScenarioConfig) and c.is_fock
    assert c.grid == TimeGrid(0.0, 1.0, 3)
    assert c.energies.eps_money == (0.0,)
    assert c.terms[0].params == {"amplitude": 1.0, "pairs": [[0, 0]]}


def test_three_step_grid_gives_four_rows():
    res = run_scenario(config_from_dict(_doc()))
    csv = export_series(res, "csv")
    lines = csv.split("\n")
    assert lines[0] == "t,N_money,charge"
    assert len(lines) == 6 and lines[-1] == ""  # header + 4 rows + trailing newline
    assert "\r" not in csv


def test_every_error_reported_with_path():
    doc = _doc(
        terms=[{"qe": {"amplitude": "big"}}, {"viol": {"delta_pr": -1, "extra": 2}}],
        grid={"t_end": 0.0, "n_steps": 3},
        observables=["N_money", "bogus"],
        outputs=["xml"],
        color="blue",
    )
    errs = _errors(doc)
    assert "terms[0].qe.amplitude" in errs
    assert "terms[1].viol.delta_pr" in errs
    assert "terms[1].viol.extra" in errs
    assert "grid.t_end" in errs
    assert "bogus" in errs["observables[1]"] and "valid names" in errs["observables[1]"]
    assert "outputs[0]" in errs
    assert "color" in errs


def test_constant_schedule_rejected():
    doc = _doc(terms=[{"perturb": {"interest": {"kind": "constant", "value": 0.1}}}])
    msg = _errors(doc)["terms[0].perturb.interest"]
    assert "V(0)=0" in msg
    ok = _doc(terms=[{"perturb": {"interest": {"kind": "constant", "value": 0.0}}}])
    config_from_dict(ok)


@pytest.mark.parametrize(
    "change,path",
    [
        ({"schema_version": 2}, "schema_version"),
        ({"basis": {"money": 9, "debt": 9}}, "basis"),
        ({"basis": {"money": 1, "debt": 1, "sector": 4}}, "basis.sector"),
        ({"initial_state": {"bell_qe": {}}}, "initial_state.bell_qe"),
        ({"initial_state": {"occupation": {"bits": "1"}}}, "initial_state.occupation.bits"),
        ({"terms": [{"sigma_x": {"target": "a"}}]}, "terms[0].sigma_x"),
        ({"terms": [{"exciton": {"coupling": [[1, 2]]}}]}, "terms[0].exciton.coupling[0]"),
        ({"terms": [{"exchange": {"pairs": [["m0", "m0"]]}}]}, "terms[0].exchange.pairs[0]"),
        ({"terms": [{"exchange": {"pairs": [["m0", "d5"]]}}]}, "terms[0].exchange.pairs[0]"),
        ({"terms": [{"warp": {}}]}, "terms[0].warp"),
        ({"events": [{"repay": {"t": 9.0}}]}, "events[0].repay.t"),
        ({"events": [{"measure": {"t": 0.5, "target": "x"}}]}, "events[0].measure"),
        ({"observables": ["N_money", "N_money"]}, "observables[1]"),
        ({"seed": -1}, "seed"),
        ({"energies": {"money": [1.0, 2.0], "debt": [-1.0]}}, "energies.money"),
    ],
)
def test_validation_paths(change, path):
    assert path in _errors(_doc(**change))


def test_bipartite_observable_needs_two_sides():
    doc = _doc(basis={"money": 3, "debt": 0}, terms=[], observables=["entropy"])
    assert "needs a bipartition" in _errors(doc)["observables[0]"]


def test_register_config():
    doc = _doc(
        basis={"qubits": ["money_valuation", "bond_valuation"]},
        terms=[{"sigma_z": {"target": "bond_valuation", "amplitude": 0.5}}],
        initial_state={"bell_qe": {}},
        observables=["entropy", "separability_gap", "p_up:money_valuation"],
    )
    res = run_scenario(config_from_dict(doc))
    np.testing.assert_allclose(res.series.columns["entropy"], math.log(2), atol=1e-12)
    np.testing.assert_allclose(res.series.columns["separability_gap"], math.sqrt(3) / 2, atol=1e-12)
    np.testing.assert_allclose(res.series.columns["p_up:money_valuation"], 0.5, atol=1e-12)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_scenario("a: [1, 2")
    with pytest.raises(ValidationError):
        parse_scenario("just a string")


@pytest.mark.parametrize("name", list_presets())
def test_preset_roundtrip_and_hash(name):
    c = load_preset(name)
    again = parse_scenario(serialize_scenario(c))
    assert again == c
    assert again.config_hash() == c.config_hash()
    assert len(c.config_hash()) == 64


def test_hash_changes_with_content():
    c = load_preset("qe_pair_rabi")
    assert c.with_grid(TimeGrid(0.0, 1.0, 10)).config_hash() != c.config_hash()


def test_presets_listed():
    assert set(list_presets()) >= {
        "qe_pair_rabi",
        "gold_backed_collapse",
        "microloan",
        "informal_lending",
        "market_exchange",
        "earned_money",
    }
    with pytest.raises(KeyError):
        preset_text("nope")


def test_earned_money_has_charge_and_no_pairs():
    res = run_scenario(load_preset("earned_money").with_grid(TimeGrid(0.0, 1.0, 10)))
    assert res.summary["charge"] == pytest.approx(1.0)
    assert res.summary["exciton_count"] == 0.0


def test_microloan_repayment_returns_to_vacuum():
    res = run_scenario(load_preset("microloan"))
    t = res.series.times
    nm = res.series.columns["N_money"]
    i = int(np.argmin(np.abs(t - 5.0)))
    assert nm[i] == 0.0  # event applies before sampling at its grid point
    assert nm[i - 1] > 0.0
    np.testing.assert_allclose(res.series.columns["charge"], 0.0, atol=1e-12)


def test_gold_collapse_is_seeded():
    a = run_scenario(load_preset("gold_backed_collapse"))
    b = run_scenario(load_preset("gold_backed_collapse"))
    assert a.summary["measurements"] == b.summary["measurements"]
    p = a.series.columns["p_up:asset"]
    i = int(np.searchsorted(a.series.times, 5.0 - 1e-12))
    assert p[i] in (0.0, 1.0) or abs(p[i] - round(p[i])) < 1e-12


def test_market_exchange_moves_money_without_creating_it():
    res = run_scenario(load_preset("market_exchange"))
    cols = res.series.columns
    total = sum(cols[f"n:m{k}"] for k in range(3))
    np.testing.assert_allclose(total, 1.0, atol=1e-12)
    assert cols["n:m1"].max() > 0.1


def test_informal_sweep_pair_energy_gap():
    cfg = load_preset("informal_lending").with_grid(TimeGrid(0.0, 0.5, 5))
    runs = dict(delta_pr_sweep(cfg, [0.0, 2.0]))
    gap = runs[2.0].summary["pair_energy"] - runs[0.0].summary["pair_energy"]
    assert gap == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        delta_pr_sweep(load_preset("qe_pair_rabi"), [1.0])


def test_spectrum_and_model():
    np.testing.assert_allclose(spectrum(load_preset("qe_pair_rabi")), [-1, 0, 0, 1], atol=1e-14)
    model = build_model(load_preset("informal_lending"))
    assert model.perturbation(0.0).matrix.nnz == 0


def test_exports_are_deterministic_and_carry_metadata():
    c = load_preset("qe_pair_rabi").with_grid(TimeGrid(0.0, 1.0, 4))
    a, b = run_scenario(c), run_scenario(c)
    assert export_series(a, "csv") == export_series(b, "csv")
    lines = export_series(a, "jsonl").splitlines()
    head = json.loads(lines[0])
    assert head["type"] == "metadata"
    assert head["config_hash"] == c.config_hash()
    assert head["version"] == __version__ and head["rng"] == "numpy.random.PCG64"
    assert len(lines) == 6
    row = json.loads(lines[-1])
    assert row["t"] == 1.0
    with pytest.raises(UnsupportedFormat):
        export_series(a, "xml")


def test_csv_full_precision():
    c = load_preset("qe_pair_rabi").with_grid(TimeGrid(0.0, 1.0, 4))
    csv = export_series(run_scenario(c), "csv")
    row = csv.splitlines()[-1].split(",")
    assert float(row[1]) == pytest.approx(math.sin(1.0) ** 2, abs=1e-12)
    assert float(row[0]) == 1.0


def test_model_errors_are_named():
    # "10" is not in the neutral sector; detected when the state is built
    c = config_from_dict(_doc(basis={"money": 1, "debt": 1, "sector": 0}, initial_state={"occupation": {"bits": "10"}}))
    with pytest.raises(ModelError, match="scenario 'tiny'"):
        run_scenario(c)


def test_load_scenario_file(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(yaml.safe_dump(MINIMAL))
    assert load_scenario(p).name == "tiny"


def test_exciton_document(tmp_path):
    cfg = parse_exciton_config(
        "schema_version: 1\nname: h\npotential: {harmonic: {omega: 1.0}}\n"
        "grid: {x_min: -10, x_max: 10, n_points: 2000}\nn_states: 3\n"
    )
    assert cfg.grid == GridSpec(-10.0, 10.0, 2000) and cfg.potential == Harmonic(1.0)
    with pytest.raises(ValidationError):
        parse_exciton_config("schema_version: 1\nname: h\npotential: {harmonic: {omega: -1}}\n")
    (tmp_path / "v.csv").write_text("".join(f"{x / 10},{x * x / 200}\n" for x in range(-50, 51)))
    tab = parse_exciton_config("schema_version: 1\nname: t\npotential: {tabulated: {file: v.csv}}\n", tmp_path)
    assert tab.grid.n_points == 101
    with pytest.raises(OSError):
        parse_exciton_config("schema_version: 1\nname: t\npotential: {tabulated: {file: none.csv}}\n", tmp_path)


yaml_leaf = st.one_of(st.none(), st.booleans(), st.integers(-5, 20), st.floats(allow_nan=True), st.text(max_size=6))
yaml_doc = st.recursive(
    yaml_leaf,
    lambda kids: st.one_of(st.lists(kids, max_size=4), st.dictionaries(st.text(max_size=8), kids, max_size=4)),
    max_leaves=20,
)


@settings(max_examples=150, deadline=None)
@given(yaml_doc)
def test_fuzz_only_typed_errors(doc):
    try:
        config_from_dict(doc)
    except ValidationError:
        pass


@settings(max_examples=150, deadline=None)
@given(st.dictionaries(st.sampled_from(sorted(MINIMAL)), yaml_doc, max_size=4))
def test_fuzz_mutated_fields(changes):
    try:
        config_from_dict(_doc(**changes))
    except ValidationError:
        pass


@settings(max_examples=100, deadline=None)
@given(st.text(max_size=60))
def test_fuzz_text(text):
    try:
        parse_scenario(text)
    except (ParseError, ValidationError):
        pass
