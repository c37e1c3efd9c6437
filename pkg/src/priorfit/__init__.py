"""priorfit: adapt zero-shot embedding predictions to a label-distribution prior.

Kept import-light on purpose: the CLI configures thread environment
variables before numpy loads, so submodules are imported lazily.
"""

__version__ = "0.1.0"

_SUBMODULES = (
    "adapter",
    "cli",
    "dataio",
    "errors",
    "evaluate",
    "kernels",
    "losses",
    "priors",
    "promptselect",
    "synth",
    "trainer",
    "zeroshot",
)


def __getattr__(name):
    if name in _SUBMODULES:
        import importlib

        module = importlib.import_module(f".{name}", __name__)
        globals()[name] = module
        return module
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
