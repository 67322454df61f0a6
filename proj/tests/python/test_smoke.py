import math

import oclab


def binary():
    return oclab.Alphabet([0.0, 1.0])


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_ot_cost_binary():
    mu = oclab.Pmf(binary(), [0.5, 0.5])
    psi = oclab.Pmf(binary(), [0.25, 0.75])
    rho = oclab.DistortionMatrix.hamming(binary(), binary())
    res = oclab.ot_solve(mu, psi, rho)
    assert abs(res.cost - 0.25) < 1e-10
    assert res.dual_residual <= 1e-9


def test_imin_and_dcurve_binary_closed_form():
    u = oclab.Pmf(binary(), [0.5, 0.5])
    rho = oclab.DistortionMatrix.hamming(binary(), binary())
    r = oclab.i_min(u, u, rho, 0.25)
    assert abs(r.bits - (1 - h2(0.25))) < 1e-4
    assert r.coupling is not None
    d = oclab.d_curve(u, u, rho, 0.5)
    assert abs(h2(d) - 0.5) < 1e-3


def test_type_class_quantities():
    u = oclab.Pmf(binary(), [0.5, 0.5])
    assert oclab.closest_ntype_counts(u, 4) == [2, 2]
    assert abs(oclab.type_class_log_size_bits([2, 2], 4) - math.log2(6)) < 1e-12
    assert abs(oclab.normalized_type_kl_bits(u, 4) - 0.25 * math.log2(16 / 6)) < 1e-12
    seq = oclab.sample_uniform_type_class([2, 2], 4, seed=7)
    assert sorted(seq) == [0, 0, 1, 1]


def test_solve_p1_binary_benchmark():
    mu = oclab.Pmf(binary(), [0.5, 0.5])
    psi = oclab.Pmf(binary(), [0.25, 0.75])
    rho = oclab.DistortionMatrix.hamming(binary(), binary())
    sol = oclab.solve_p1(mu, psi, rho, levels=2)
    assert sol["status"] == "optimal"
    assert abs(sol["objective"] - 0.25) < 1e-9


def test_prokhorov_binary():
    metric = oclab.DistortionMatrix(2, 2, [0.0, 1.0, 1.0, 0.0])
    a = oclab.Pmf(binary(), [0.5, 0.5])
    b = oclab.Pmf(binary(), [0.25, 0.75])
    assert abs(oclab.prokhorov_distance(a, b, metric).distance - 0.25) < 1e-6


def test_simulate_small_run():
    config = {
        "mode": "finite",
        "mu": {"alphabet": [0.0, 1.0], "mass": [0.5, 0.5]},
        "psi": {"alphabet": [0.0, 1.0], "mass": [0.5, 0.5]},
        "rho": "hamming",
        "R": 0.43872,
        "nList": [4],
        "trials": 400,
        "seed": 42,
    }
    result = oclab.simulate(config, threads=2)
    rec = result["records"][0]
    assert rec["converse_pass"]
    assert rec["marginal_chi2_p"] > 0.01
    again = oclab.simulate(config, threads=1)
    assert again == result  # deterministic across thread counts
