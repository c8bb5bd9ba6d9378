"""Preconditioner config strings: ``kind[:arg][,key=value...]``.

Examples: ``qr-r``, ``polar-left``, ``factor:trid``, ``direct:cholesky``,
``inner-cg:tol=1e-10,max=500``, ``gmg:levels=4,omega=1.0,smooth=2``.
"""

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigError


class PreconditionerKind(str, Enum):
    IDENTITY = "identity"
    QR_R = "qr-r"
    RQ_R = "rq-r"
    POLAR_LEFT = "polar-left"
    POLAR_RIGHT = "polar-right"
    FACTOR = "factor"
    DIRECT = "direct"
    INNER_CG = "inner-cg"
    GMG = "gmg"


# Allowed positional argument values and option keys per kind
_ARGS: dict[PreconditionerKind, set[str]] = {
    PreconditionerKind.FACTOR: {"trid", "advection"},
    PreconditionerKind.DIRECT: {"cholesky", "lu"},
}
_OPTIONS: dict[PreconditionerKind, dict[str, type]] = {
    PreconditionerKind.INNER_CG: {"tol": float, "max": int},
    PreconditionerKind.GMG: {"levels": int, "omega": float, "smooth": int, "pre": int, "post": int},
}
_DEFAULT_ARG = {PreconditionerKind.FACTOR: "trid", PreconditionerKind.DIRECT: "cholesky"}


class PreconditionerChoice(BaseModel):
    """A parsed preconditioner selection."""

    model_config = ConfigDict(frozen=True)

    kind: PreconditionerKind
    arg: str | None = None
    options: dict[str, float | int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "PreconditionerChoice":
        allowed_args = _ARGS.get(self.kind, set())
        if self.arg is not None and self.arg not in allowed_args:
            raise ValueError(f"'{self.kind.value}' takes no argument '{self.arg}' (allowed: {sorted(allowed_args)})")
        allowed = _OPTIONS.get(self.kind, {})
        unknown = set(self.options) - set(allowed)
        if unknown:
            raise ValueError(f"unknown options for '{self.kind.value}': {sorted(unknown)}")
        return self

    @property
    def method(self) -> str | None:
        return self.arg or _DEFAULT_ARG.get(self.kind)

    def option(self, key: str, default: Any) -> Any:
        return self.options.get(key, default)

    def __str__(self) -> str:
        text = self.kind.value
        parts = ([self.arg] if self.arg else []) + [f"{k}={v}" for k, v in self.options.items()]
        return f"{text}:{','.join(parts)}" if parts else text


def parse_preconditioner(text: str) -> PreconditionerChoice:
    """
    Parse a preconditioner config string.

    Raises:
        ConfigError: unknown kind, argument or option, or an unparsable value
    """
    text = text.strip()
    head, _, rest = text.partition(":")
    try:
        kind = PreconditionerKind(head.strip())
    except ValueError:
        known = ", ".join(k.value for k in PreconditionerKind)
        raise ConfigError(f"unknown preconditioner '{head}' (known: {known})") from None

    arg: str | None = None
    options: dict[str, float | int] = {}
    types = _OPTIONS.get(kind, {})
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        key = key.strip()
        if not eq:
            if arg is not None:
                raise ConfigError(f"'{text}': more than one positional argument")
            arg = key
            continue
        cast = types.get(key)
        if cast is None:
            raise ConfigError(f"'{text}': unknown option '{key}' for {kind.value}")
        try:
            options[key] = cast(float(value)) if cast is int and "e" in value.lower() else cast(value)
        except ValueError:
            raise ConfigError(f"'{text}': option '{key}' expects {cast.__name__}, got '{value}'") from None

    try:
        return PreconditionerChoice(kind=kind, arg=arg, options=options)
    except ValidationError as e:
        raise ConfigError(f"'{text}': {e.errors()[0]['msg']}") from e
