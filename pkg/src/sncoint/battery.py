"""Ready-made test batteries for the Monte Carlo drivers.

Adapters here close over their tuning choices with ``functools.partial``
of module-level functions, so batteries can cross process boundaries
when experiments run on multiple workers.
"""

from __future__ import annotations

from dataclasses import replace
from functools import partial
from typing import Iterable, Mapping

from .bootstrap import BootstrapConfig, bootstrap_statistic, bootstrap_test
from .estimators import RestrictionSpec
from .kernels import BARTLETT, KernelSpec
from .selfnorm import self_normalized_test, traditional_wald
from .tables import CriticalValueTable, default_table
from .timeseries import CointegrationSample

__all__ = ["standard_battery", "standard_statistics"]

_EST_TAGS = {"Wald-IM": "IM", "Wald-FM": "FM", "Wald-D": "D"}
_BOOT_TAGS = {"SN-bootstrap": "sn", "Wald-IM-bootstrap": "wald-lrv", "tau1-bootstrap": "tau1"}


def _resolve_table(
    table: CriticalValueTable | None, sample: CointegrationSample, restriction: RestrictionSpec
) -> CriticalValueTable:
    if table is not None:
        return table
    return default_table(sample.n_regressors, restriction.n_restrictions, sample.det)


def _run_sn_asymptotic(table, alpha, sample, restriction, seed) -> bool:
    resolved = _resolve_table(table, sample, restriction)
    return self_normalized_test(sample, restriction, resolved, alpha).reject


def _run_traditional(tag, kernel, alpha, sample, restriction, seed) -> bool:
    return traditional_wald(tag, sample, restriction, kernel, alpha).reject


def _run_bootstrap(statistic, kernel, config, sample, restriction, seed) -> bool:
    cfg = replace(config, seed=seed)
    return bootstrap_test(sample, restriction, cfg, statistic=statistic, kernel=kernel).reject


def standard_battery(
    names: Iterable[str],
    table: CriticalValueTable | None = None,
    alpha: float = 0.05,
    kernel: KernelSpec | None = None,
    boot: BootstrapConfig | None = None,
) -> Mapping[str, object]:
    """Build (sample, restriction, seed) -> reject callables by method tag.

    Recognized tags: ``SN-asymptotic``, ``SN-bootstrap``, ``Wald-IM``,
    ``Wald-FM``, ``Wald-D``, ``Wald-IM-bootstrap``, ``tau1-bootstrap``.
    ``table`` defaults to the packaged quantiles matching each sample;
    ``kernel`` defaults to Bartlett with the plug-in bandwidth.
    """
    kernel = kernel or KernelSpec(BARTLETT, "andrews")
    battery: dict[str, object] = {}
    for name in names:
        if name == "SN-asymptotic":
            battery[name] = partial(_run_sn_asymptotic, table, alpha)
        elif name in _EST_TAGS:
            battery[name] = partial(_run_traditional, _EST_TAGS[name], kernel, alpha)
        elif name in _BOOT_TAGS:
            cfg = boot or BootstrapConfig(n_boot=199, alpha=alpha)
            if abs(cfg.alpha - alpha) > 1e-12:
                cfg = replace(cfg, alpha=alpha)
            battery[name] = partial(_run_bootstrap, _BOOT_TAGS[name], kernel, cfg)
        else:
            raise ValueError(f"unknown test tag {name!r}")
    return battery


def _stat_selfnorm(sample, restriction) -> float:
    return bootstrap_statistic(sample, restriction, "sn")


def _stat_wald_im(kernel, sample, restriction) -> float:
    return bootstrap_statistic(sample, restriction, "wald-lrv", kernel)


def _stat_traditional(tag, kernel, sample, restriction) -> float:
    return traditional_wald(tag, sample, restriction, kernel).statistic


def standard_statistics(
    names: Iterable[str], kernel: KernelSpec | None = None
) -> Mapping[str, object]:
    """Statistic callables (sample, restriction) -> value for power studies."""
    kernel = kernel or KernelSpec(BARTLETT, "andrews")
    stats: dict[str, object] = {}
    for name in names:
        if name == "SN":
            stats[name] = _stat_selfnorm
        elif name == "Wald-IM":
            stats[name] = partial(_stat_wald_im, kernel)
        elif name in ("Wald-FM", "Wald-D"):
            stats[name] = partial(_stat_traditional, _EST_TAGS[name], kernel)
        else:
            raise ValueError(f"unknown statistic tag {name!r}")
    return stats
