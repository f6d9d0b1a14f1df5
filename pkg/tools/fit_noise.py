"""One-time fit of the depth-noise growth coefficients.

For each (subject kind, domain) noise group this secant-iterates
depth_sigma_b until the distance-stability pipeline's max deviation in
the 20 m bin lands on the group's reference level. The resulting
values are committed as constants in vruloop.harness; this script
exists so the fit is reproducible, it is not part of the shipped
package.

Run from the repo root: python3 tools/fit_noise.py
"""

from dataclasses import replace

from scipy.stats import spearmanr

from vruloop import metrics
from vruloop.harness import run_scenario, scenario_from_catalog

TARGETS = {
    # group: (catalog ids averaged, reference max dev at the 20 m bin)
    "pedestrian": ((1, 4), 0.16),
    "cyclist_cp": ((10,), 0.23),
    "cyclist_rw": ((7,), 0.43),
}


def bin20_max(test_case_id: int, depth_sigma_b: float) -> float:
    cfg = scenario_from_catalog(test_case_id)
    cfg = replace(cfg, noise=replace(cfg.noise, depth_sigma_b=depth_sigma_b))
    log = run_scenario(cfg)
    b = metrics.StabilityReport(
        no_detects=0,
        false_detects=0,
        distance_variability=metrics.distance_stability(log),
        joint_sd={},
    ).bin_at(20.0)
    if b is None:
        raise RuntimeError(f"id {test_case_id}: 20 m bin empty")
    return b.max_dev_m


def group_value(ids: tuple[int, ...], b: float) -> float:
    return sum(bin20_max(i, b) for i in ids) / len(ids)


def fit(ids: tuple[int, ...], target: float, b0: float, b1: float) -> float:
    f0 = group_value(ids, b0) - target
    f1 = group_value(ids, b1) - target
    print(f"  b={b0:.6e} err={f0:+.4f}   b={b1:.6e} err={f1:+.4f}")
    for _ in range(12):
        if abs(f1) < 0.002:
            break
        b2 = b1 - f1 * (b1 - b0) / (f1 - f0)
        b2 = max(b2, 0.0)
        b0, f0, b1 = b1, f1, b2
        f1 = group_value(ids, b1) - target
        print(f"  b={b1:.6e} err={f1:+.4f}")
    return b1


def main() -> None:
    fitted = {}
    seeds = {"pedestrian": (1.5e-4, 2.4e-4), "cyclist_cp": (2.5e-4, 3.5e-4), "cyclist_rw": (5.5e-4, 7.0e-4)}
    for group, (ids, target) in TARGETS.items():
        print(f"{group}: ids={ids} target={target}")
        fitted[group] = fit(ids, target, *seeds[group])
        print(f"  -> {group}: depth_sigma_b = {fitted[group]:.6e}")

    print("\nverification with fitted values:")
    for group, (ids, target) in TARGETS.items():
        for i in ids:
            cfg = scenario_from_catalog(i)
            cfg = replace(cfg, noise=replace(cfg.noise, depth_sigma_b=fitted[group]))
            log = run_scenario(cfg)
            bins = metrics.distance_stability(log)
            rho = spearmanr(
                [b.lower_m for b in bins], [b.max_dev_m for b in bins]
            ).statistic
            b20 = next(b for b in bins if b.lower_m <= 20.0 < b.upper_m)
            print(
                f"  id {i:2d}: bin20 max={b20.max_dev_m:.4f} "
                f"(target {target}) spearman={rho:.3f} bins={len(bins)}"
            )


if __name__ == "__main__":
    main()
