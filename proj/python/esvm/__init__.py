"""Spectral variance minimisation of Stein control variates for MCMC."""

import json as _json

try:
    from . import _esvm
except ImportError:  # in-tree build: the extension sits on PYTHONPATH next to the package
    import _esvm


ConfigError = _esvm.ConfigError
Error = _esvm.Error
IoError = _esvm.IoError
NumericError = _esvm.NumericError
Target = _esvm.Target
ar1_reference = _esvm.ar1_reference
autocorrelation = _esvm.autocorrelation
default_truncation = _esvm.default_truncation
empirical_variance = _esvm.empirical_variance
sample_autocovariance = _esvm.sample_autocovariance
sample_chain = _esvm.sample_chain
spectral_operator_dense = _esvm.spectral_operator_dense
spectral_variance = _esvm.spectral_variance
stein_values = _esvm.stein_values
trapezoid_kernel = _esvm.trapezoid_kernel

__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "NumericError",
    "Target",
    "ar1_reference",
    "autocorrelation",
    "default_truncation",
    "emit_report",
    "empirical_variance",
    "fit",
    "make_target",
    "normalize_config",
    "run_experiment",
    "sample_autocovariance",
    "sample_chain",
    "spectral_operator_dense",
    "spectral_variance",
    "stein_values",
    "trapezoid_kernel",
]


def _dump(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def make_target(spec):
    """Target from a config "target" block (dict or JSON text)."""
    return _esvm.make_target(_dump(spec))


def fit(target, states, f, family="second_order", criterion="ESVM", bn=50, centers=10):
    """Fits a Stein control variate on a training chain; returns a dict with theta and objectives."""
    return _esvm.fit(target, states, f, family, criterion, bn, centers)


def run_experiment(config):
    """Runs the full train / fit / test-chain protocol; returns the report as a dict."""
    return _json.loads(_esvm.run_experiment(_dump(config)))


def emit_report(report, directory):
    """Writes report.json, vrf.csv and boxplot.csv; returns the paths written."""
    return _esvm.emit_report(_dump(report), str(directory))


def normalize_config(config):
    """Config with defaults filled in, as the library sees it."""
    return _json.loads(_esvm.normalize_config(_dump(config)))
