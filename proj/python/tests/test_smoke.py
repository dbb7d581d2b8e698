import math

import pytest

import beurling_lab as bl

E_SYSTEM = {"kind": "measure", "params": {"atoms": [[math.e, 1.0]]}}


def test_tau_series():
    L = math.log(10.0)
    series = sum(L**k / (k * math.factorial(k)) for k in range(1, 60))
    assert bl.tau(10.0) == pytest.approx(series, rel=1e-13)


def test_sieve():
    assert len(bl.sieve_primes(100)) == 25


def test_generate_small():
    values = bl.generate({"kind": "custom", "atoms": [[2, 1], [3, 1], [5, 1]]}, 10.0)
    assert [v for v, _ in values] == [1, 2, 3, 4, 5, 6, 8, 9, 10]


def test_density_of_naturals():
    r = bl.density({"kind": "usual", "params": {"Y": 1e5}}, 1e5)
    assert r["trend"] == "CONVERGENT"
    assert abs(r["estimate"] - 1.0) < 2e-3


def test_euler_density():
    assert bl.euler_density([2.0, 3.0]) == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_transfer_closed_form():
    v = bl.transfer(E_SYSTEM, 2.0)
    assert abs(v["B"] + math.log(1 - math.exp(-2))) < 1e-10
    assert abs(v["Z"] - 2.0 * v["C"]) < 1e-12


def test_pole():
    with pytest.raises(bl.PoleError):
        bl.transfer({"kind": "measure", "params": {}}, 1.0)
    with pytest.raises(ValueError):
        bl.transfer({"kind": "measure", "params": {}}, 0.5)


def test_sides_agree():
    u = [2.0, 4.0]
    f = bl.fourier_counting(E_SYSTEM, 1.5, 0.1, u)
    probe = bl.density_via_c1(E_SYSTEM, 0.1, 8.0, "fourier")
    assert probe["reference_C1"] == pytest.approx(1 / (1 - math.exp(-1)), rel=1e-12)
    assert all(x > 0 for x in f)


def test_diamond():
    r = bl.diamond_integral({"kind": "random_sign", "params": {"n_max": 20}, "seed": 1}, [math.exp(n) for n in range(1, 21)])
    assert len(r["points"]) == 20


def test_config_error():
    with pytest.raises(bl.ConfigError):
        bl.validate_config({"experiment": "COUNTEREXAMPLE"})


def test_run_verify(tmp_path):
    r = bl.run({"experiment": "VERIFY"}, tmp_path)
    assert r["exit_code"] == 0
    assert (tmp_path / "report.json").exists()
