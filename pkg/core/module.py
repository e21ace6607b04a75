import core
import re
import inspect
import importlib
import pkgutil
from collections import namedtuple

# one handler per command name: {"train": Command(...)}
Command = namedtuple("Command", ["name", "owner", "func", "description"])
_command_registry = {}

_camel = re.compile(r"(?!^)([A-Z]+)")

class Module:
    """Base class for experiment modules. Commands are async methods marked with @command."""

    def __init__(self, manager):
        self.manager = manager

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        for _, func in inspect.getmembers(cls, inspect.isfunction):
            if getattr(func, "_command_name", None):
                register_command(func._command_name, cls, func)

    @property
    def config(self) -> "core.config.ExperimentConfig":
        return self.manager.config

    def result(self, data, success=True):
        """result dict every command returns"""
        return {
            "status": "success" if success else "error",
            "content": data,
        }

    def failed(self, what: str, e: Exception):
        """log an engine error and turn it into an error result"""
        core.log_error(f"{what} failed", e)
        return self.result(str(e), False)

    async def on_ready(self):
        """runs once after every module is loaded"""
        pass

def command(name, help=None):
    """
    Mark a Module method as the handler of `name`.
    Help text falls back to the first docstring line.
    """
    def decorator(func):
        func._command_name = name.lower().strip()
        doc = (func.__doc__ or "").strip()
        func._command_description = help or (doc.splitlines()[0] if doc else "")
        return func
    return decorator

def register_command(name: str, owner, func):
    known = _command_registry.get(name)
    if known is not None and known.owner is not owner and not issubclass(owner, known.owner):
        raise core.errors.ConfigError(f"command {name!r} is claimed by both {known.owner.__name__} and {owner.__name__}")
    _command_registry[name] = Command(name, owner, func, func._command_description)

def find_command(name: str):
    return _command_registry.get(name.lower().strip())

def commands_of(instance):
    """registered commands an instance can answer, sorted by name"""
    return sorted((c for c in _command_registry.values() if isinstance(instance, c.owner)), key=lambda c: c.name)

def load(package, base_class):
    """
    Import every submodule of `package` and collect the `base_class`
    subclasses defined there, in submodule order.
    """
    discovered = []
    if not hasattr(package, "__path__"):
        return tuple(discovered)

    for info in sorted(pkgutil.iter_modules(package.__path__), key=lambda i: i.name):
        try:
            module = importlib.import_module(f"{package.__name__}.{info.name}")
        except ImportError as e:
            core.log("warning", f"failed to import {info.name}: {e}")
            continue

        for _, cls in inspect.getmembers(module, inspect.isclass):
            if cls is base_class or not issubclass(cls, base_class) or cls.__module__ != module.__name__:
                continue
            discovered.append(cls)

    return tuple(discovered)

def get_name(obj):
    """converts a name like NoiseSweep to `noise_sweep`"""
    cls = obj if inspect.isclass(obj) else type(obj)
    return _camel.sub(r"_\1", cls.__name__).lower()
