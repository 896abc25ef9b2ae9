#!/usr/bin/env python3
"""Recompute experiment verdicts from their CSV tables and compare them with
the shipped report.json. Independent of the C++ implementation: only the
tables, the config, and the documented thresholds enter.

Usage: reverify.py <output-dir> [<output-dir> ...]
Exit code 0 when every recomputable verdict matches, 1 otherwise.
"""

import csv
import json
import math
import os
import sys

DEFAULTS = {
    "fit": {"r2_min": 0.98, "slope_band": [0.8, 1.2], "min_points": 4},
    "oracle": {"rel_err_max": 1e-6, "conservation_exact": 1e-10,
               "conservation_stepper": 1e-4},
    "theorem1": {"stability": 0.2, "constant_rate_max": 1e-4},
    "theorem2": {"exponent_rel_tol": 0.10, "exponent_rel_tol_constant": 0.05,
                 "constant_spread_max": 1.5, "deep_band_threshold": 20.0},
    "coercivity": {"small_t_bound": 0.5, "small_t_max": 0.03125,
                   "sigma_spread_max": 2.0},
    "boundedness": {"spread_max": 2.0},
    "seminorm_scaling": {"tolerance": 0.02},
    "dyadic_decay": {"exponent_margin": 0.5, "smoothness_n": 4},
    "gamma_identity": {"plancherel_tol": 1e-10, "derivative_tol": 1e-6,
                       "duality_ratio_max": 0.75},
}


def threshold(config, name, key):
    tol = config.get("tolerances", {})
    if key in tol:
        return tol[key]
    if key in DEFAULTS.get(name, {}):
        return DEFAULTS[name][key]
    return DEFAULTS["fit"][key]


def linear_fit(xs, ys):
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    syy = sum((y - my) ** 2 for y in ys)
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 - ss_res / syy if syy > 0 else 1.0
    return slope, r2


def loglog_fit(xs, ys):
    return linear_fit([math.log(x) for x in xs], [math.log(y) for y in ys])


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def rates_from_energy_csv(path, t_lo):
    rows = [(float(r["time"]), float(r["energy"])) for r in read_csv(path)
            if r["energy"] not in ("nan", "-nan") and float(r["time"]) > 0]
    best = -math.inf
    for i in range(1, len(rows) - 1):
        if rows[i][0] < t_lo:
            continue
        rate = (math.log(rows[i + 1][1]) - math.log(rows[i - 1][1])) / (
            rows[i + 1][0] - rows[i - 1][0])
        best = max(best, rate)
    return best


def recompute(dirpath, report, config):
    name = report["name"]
    v = {}
    if name == "oracle":
        rows = read_csv(os.path.join(dirpath, "oracle.csv"))
        v["rel_err"] = max(float(r["rel_err"]) for r in rows) <= threshold(
            config, name, "rel_err_max")
        rows2 = read_csv(os.path.join(dirpath, "oracle_L2x.csv"))
        v["rel_err_L2x"] = max(float(r["rel_err"]) for r in rows2) <= threshold(
            config, name, "rel_err_max")
        cons = read_csv(os.path.join(dirpath, "conservation.csv"))
        for route, key, tol_key in (("exact", "conservation_exact",
                                     "conservation_exact"),
                                    ("rk4", "conservation_stepper",
                                     "conservation_stepper")):
            es = [float(r["energy"]) for r in cons if r["route"] == route]
            drift = max(abs(e - es[0]) / es[0] for e in es)
            v[key] = drift <= threshold(config, name, tol_key)
    elif name == "theorem1":
        T = config["t_sweep"][-1]
        stab = threshold(config, name, "stability")
        base = rates_from_energy_csv(os.path.join(dirpath, "energy.csv"),
                                     T / 10.0)
        scale = max(abs(base), 1e-6)
        v["finite"] = math.isfinite(base)
        for tag, verdict in (("n2x", "stable_n"), ("dt_half", "stable_dt"),
                             ("L2x", "stable_L")):
            other = rates_from_energy_csv(
                os.path.join(dirpath, f"energy_{tag}.csv"), T / 10.0)
            v[verdict] = abs(other - base) <= stab * scale
        flat = abs(rates_from_energy_csv(
            os.path.join(dirpath, "energy_constant.csv"), T / 10.0))
        v["constant_control"] = flat <= threshold(config, name,
                                                  "constant_rate_max")
        seeds_ok = True
        for seed in config.get("seeds", []):
            p = os.path.join(dirpath, f"energy_seed{seed}.csv")
            seeds_ok = seeds_ok and math.isfinite(
                rates_from_energy_csv(p, T / 10.0))
        v["seeds_finite"] = seeds_ok
    elif name == "commutator_scaling":
        rows = read_csv(os.path.join(dirpath, "commutator_scaling.csv"))
        ts = [float(r["t"]) for r in rows]
        ns = [float(r["measured_norm"]) for r in rows]
        slope, r2 = loglog_fit(ts, ns)
        lo, hi = threshold(config, name, "slope_band")
        v["slope"] = lo <= slope <= hi
        v["r2"] = r2 >= threshold(config, name, "r2_min")
        v["points"] = len(ts) >= threshold(config, name, "min_points")
        wide = os.path.join(dirpath, "commutator_scaling_L2x.csv")
        if os.path.exists(wide):
            rows2 = read_csv(wide)
            slope2, _ = loglog_fit([float(r["t"]) for r in rows2],
                                   [float(r["measured_norm"]) for r in rows2])
            v["slope_stable_L"] = abs(slope2 - slope) <= 0.1
    elif name == "coercivity":
        rows = read_csv(os.path.join(dirpath, "coercivity.csv"))
        ts = [float(r["t"]) for r in rows]
        ns = [float(r["comm_norm"]) for r in rows]
        sig = [float(r["sigma_min"]) for r in rows]
        slope, r2 = loglog_fit(ts, ns)
        lo, hi = threshold(config, name, "slope_band")
        v["slope"] = lo <= slope <= hi
        v["r2"] = r2 >= threshold(config, name, "r2_min")
        v["small_t_contraction"] = all(
            n <= threshold(config, name, "small_t_bound")
            for t, n in zip(ts, ns)
            if t <= threshold(config, name, "small_t_max"))
        v["sigma_min_uniform"] = max(sig) / min(sig) < threshold(
            config, name, "sigma_spread_max")
    elif name == "dyadic_decay":
        rows = read_csv(os.path.join(dirpath, "dyadic_decay.csv"))
        js = [float(r["j"]) for r in rows]
        ns = [float(r["measured_norm"]) for r in rows]
        slope, _ = linear_fit(js, [math.log2(n) for n in ns])
        m1 = 1.0 / config["speed"]["c1"]
        required = (threshold(config, name, "smoothness_n") - 1.5 - m1
                    ) - threshold(config, name, "exponent_margin")
        v["decay"] = -slope >= required
        v["enough_windows"] = len(js) >= 3
    elif name == "boundedness":
        for tag in ("d", "pinv_weighted", "p"):
            rows = read_csv(os.path.join(dirpath, f"boundedness_{tag}.csv"))
            ns = [float(r["measured_norm"]) for r in rows]
            v[f"uniform_{tag}"] = max(ns) / min(ns) < threshold(
                config, name, "spread_max")
    elif name == "seminorm_scaling":
        rows = read_csv(os.path.join(dirpath, "seminorm_scaling.csv"))
        tol = threshold(config, name, "tolerance")
        for col, verdict in (("M_p", "monotone_M_p"), ("M_d", "monotone_M_d"),
                             ("N_pi_d", "monotone_N_pi_d")):
            vals = [float(r[col]) for r in rows]  # written from t=1 downward
            v[verdict] = all(vals[i + 1] <= vals[i] * (1 + tol)
                             for i in range(len(vals) - 1))
        v["estimates_converged"] = all(r["converged"] == "1" for r in rows)
    elif name == "gamma_identity":
        rows = read_csv(os.path.join(dirpath, "gamma_identity.csv"))
        worst = max(float(r["rel_err"]) for r in rows)
        v["plancherel"] = worst <= threshold(config, name, "plancherel_tol")
        checks = {r["check"]: float(r["value"]) for r in read_csv(
            os.path.join(dirpath, "gamma_checks.csv"))}
        v["derivative"] = checks["derivative_rel_err"] <= threshold(
            config, name, "derivative_tol")
        v["duality"] = checks["duality_ratio"] <= threshold(
            config, name, "duality_ratio_max")
    elif name == "theorem2":
        rows = read_csv(os.path.join(dirpath, "theorem2.csv"))
        c_loc = report["metrics"]["c_loc"]
        deep = threshold(config, name, "deep_band_threshold")
        ws, ratios = [], []
        for r in rows:
            t, xi0 = float(r["t"]), float(r["xi0"])
            l2 = float(r["l2_chif"])
            if c_loc * t * xi0 >= deep and l2 > 0:
                ws.append(float(r["weight"]))
                ratios.append(float(r["mid"]) / l2)
        slope, r2 = loglog_fit(ws, ratios)
        target = -1.0 / c_loc
        pert = config["speed"]["perturbation"]["type"]
        tol = threshold(config, name,
                        "exponent_rel_tol_constant" if pert == "none"
                        else "exponent_rel_tol")
        v["exponent_near_target"] = abs(slope - target) <= tol * abs(target)
        v["exponent_fit_r2"] = r2 >= threshold(config, name, "r2_min")
        v["enough_deep_probes"] = len(ws) >= threshold(config, name,
                                                       "min_points")
        spread_max = threshold(config, name, "constant_spread_max")
        for const, key in (("C1", "C1_stable"), ("C2", "C2_stable")):
            per_t = {}
            for r in rows:
                t = float(r["t"])
                l2 = float(r["l2_chif"])
                if l2 <= 0:
                    continue
                mid, slack = float(r["mid"]), float(r["slack"])
                if const == "C1":
                    val = (mid + slack) / float(r["lhs_norm"])
                    per_t[t] = min(per_t.get(t, math.inf), val)
                else:
                    val = max(mid - slack, 0.0) / float(r["rhs_norm"])
                    per_t[t] = max(per_t.get(t, 0.0), val)
            vals = list(per_t.values())
            v[key] = max(vals) / max(min(vals), 1e-300) <= spread_max
    return v


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 1
    mismatches = 0
    checked = 0
    for root in sys.argv[1:]:
        for dirpath, _dirs, files in os.walk(root):
            if "report.json" not in files:
                continue
            with open(os.path.join(dirpath, "report.json")) as f:
                report = json.load(f)
            with open(os.path.join(dirpath, "config.json")) as f:
                config = json.load(f)
            recomputed = recompute(dirpath, report, config)
            for key, value in recomputed.items():
                checked += 1
                if report["verdicts"].get(key) != value:
                    print(f"MISMATCH {report['name']}.{key}: "
                          f"report={report['verdicts'].get(key)} "
                          f"recomputed={value}")
                    mismatches += 1
            print(f"{report['name']}: {len(recomputed)} verdicts recomputed "
                  f"from tables, {'all match' if mismatches == 0 else 'MISMATCH'}")
    if checked == 0:
        print("no reports found")
        return 1
    return 0 if mismatches == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
