"""Symbol registry: variables, constant parameters and abstract functions.

Every expression lives over a workspace.  Variable order is fixed at
registration time and drives the monomial order of normal forms, so a
workspace must be frozen before any computation that relies on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SymbolError(Exception):
    pass


VARIABLE = "variable"
CONSTANT = "constant"

# identifiers reserved by the operator notation; they never denote expressions
RESERVED_NAMES = frozenset({"dx", "dy", "dt", "d_x", "d_y", "d_t"})


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str = VARIABLE

    def __post_init__(self):
        if self.kind not in (VARIABLE, CONSTANT):
            raise SymbolError(f"unknown symbol kind {self.kind!r}")

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class FunctionSymbol:
    """An abstract function with a declared, ordered argument list."""

    name: str
    args: tuple[Symbol, ...]

    def __repr__(self):
        return f"{self.name}({', '.join(a.name for a in self.args)})"


def _check_identifier(name: str):
    if not name or not name[0].isalpha() or not all(
        c.isalnum() or c == "_" for c in name
    ):
        raise SymbolError(f"invalid identifier {name!r}")
    if name in RESERVED_NAMES:
        raise SymbolError(f"{name!r} is a reserved operator symbol")


@dataclass
class Workspace:
    """Ordered registry of symbols.  Registration freezes before use."""

    variables: list[Symbol] = field(default_factory=list)
    constants: list[Symbol] = field(default_factory=list)
    functions: dict[str, FunctionSymbol] = field(default_factory=dict)
    frozen: bool = False
    _by_name: dict[str, object] = field(default_factory=dict, repr=False)

    def _register(self, name: str):
        _check_identifier(name)
        if self.frozen:
            raise SymbolError(f"workspace is frozen; cannot register {name!r}")
        if name in self._by_name:
            raise SymbolError(f"symbol {name!r} already registered")

    def add_variables(self, *names: str) -> list[Symbol]:
        out = []
        for name in names:
            self._register(name)
            sym = Symbol(name, VARIABLE)
            self.variables.append(sym)
            self._by_name[name] = sym
            out.append(sym)
        return out

    def add_constants(self, *names: str) -> list[Symbol]:
        out = []
        for name in names:
            self._register(name)
            sym = Symbol(name, CONSTANT)
            self.constants.append(sym)
            self._by_name[name] = sym
            out.append(sym)
        return out

    def add_function(self, name: str, arg_names: list[str]) -> FunctionSymbol:
        self._register(name)
        args = tuple(self.require_symbol(a) for a in arg_names)
        fn = FunctionSymbol(name, args)
        self.functions[name] = fn
        self._by_name[name] = fn
        return fn

    def freeze(self) -> "Workspace":
        self.frozen = True
        return self

    def lookup(self, name: str):
        return self._by_name.get(name)

    def require_symbol(self, name: str) -> Symbol:
        sym = self._by_name.get(name)
        if not isinstance(sym, Symbol):
            raise SymbolError(
                f"unknown symbol {name!r}; registered: {self.registered_names()}"
            )
        return sym

    def registered_names(self) -> list[str]:
        return [s.name for s in self.variables] + [
            s.name for s in self.constants
        ] + list(self.functions)

    def extended(self, extra_constants: list[str]) -> "Workspace":
        """A copy with additional constants (for formal pencil parameters).

        The original workspace is untouched, so extension is allowed even
        after freezing.
        """
        ws = Workspace()
        ws.variables = list(self.variables)
        ws.constants = list(self.constants)
        ws.functions = dict(self.functions)
        ws._by_name = dict(self._by_name)
        for name in extra_constants:
            base, n = name, 0
            while name in ws._by_name:
                n += 1
                name = f"{base}{n}"
            sym = Symbol(name, CONSTANT)
            ws.constants.append(sym)
            ws._by_name[name] = sym
        ws.frozen = self.frozen
        return ws
