"""Stability certificates and simulation for scalar delay differential
equations with positive and negative coefficients.

The package splits into five layers plus a command line front end:

- ``timefn``: time-dependent coefficients, delays, and window integrals.
- ``criteria``: explicit exponential-stability certificates.
- ``models``: Mackey-Glass population models, their linearizations, and
  the built-in example equations.
- ``solver``: method-of-steps RK4 integrator with dense Hermite output,
  fundamental solutions, and numerical identity checks.
- ``diagnostics``: trajectory classification, decay-rate fitting, and
  threshold search.
- ``cli``: the ``ddestab`` command (check / simulate / sweep / reproduce).
"""

from .timefn import (
    ConfigurationError,
    ConstantLag,
    GeneralDelay,
    IdentityDelay,
    constant,
    piecewise_constant,
    sinsq,
    sup_window_integral,
)
from .criteria import (
    ASYMPTOTIC,
    INCONCLUSIVE,
    MARGINAL,
    UNIFORM_EXPONENTIAL,
    Certificate,
    DistributedTerm,
    LinearDelayEquation,
    Term,
    UniformKernel,
    best_verdict,
    evaluate_all,
)
from .models import (
    BUILTINS,
    MackeyGlassProduction,
    MackeyGlassRemoval,
    equilibrium,
    linearize,
    make_builtin,
)
from .solver import (
    ConstantHistory,
    DivergenceError,
    FunctionHistory,
    Trajectory,
    fundamental_solution,
    integrate,
    verify_lemma3,
)
from .diagnostics import (
    DECAYING,
    GROWING,
    SUSTAINED,
    BehaviorReport,
    BracketError,
    certificate_predicate,
    classify,
    find_threshold,
    fit_decay,
)
from .cli import ConfigError, main, parse_config, serialize_config

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConfigurationError",
    "ConstantLag",
    "GeneralDelay",
    "IdentityDelay",
    "constant",
    "piecewise_constant",
    "sinsq",
    "sup_window_integral",
    "ASYMPTOTIC",
    "INCONCLUSIVE",
    "MARGINAL",
    "UNIFORM_EXPONENTIAL",
    "Certificate",
    "DistributedTerm",
    "LinearDelayEquation",
    "Term",
    "UniformKernel",
    "best_verdict",
    "evaluate_all",
    "BUILTINS",
    "MackeyGlassProduction",
    "MackeyGlassRemoval",
    "equilibrium",
    "linearize",
    "make_builtin",
    "ConstantHistory",
    "DivergenceError",
    "FunctionHistory",
    "Trajectory",
    "fundamental_solution",
    "integrate",
    "verify_lemma3",
    "DECAYING",
    "GROWING",
    "SUSTAINED",
    "BehaviorReport",
    "BracketError",
    "certificate_predicate",
    "classify",
    "find_threshold",
    "fit_decay",
    "ConfigError",
    "main",
    "parse_config",
    "serialize_config",
]
