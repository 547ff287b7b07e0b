"""Positive supercompiler for a strict higher-order language."""

from ._scp import (
    DriverError,
    LetrecError,
    ParseError,
    check,
    embeds,
    evaluate,
    msg,
    parse,
    strict_vars,
    supercompile,
)

__all__ = [
    "DriverError",
    "LetrecError",
    "ParseError",
    "check",
    "embeds",
    "evaluate",
    "msg",
    "parse",
    "strict_vars",
    "supercompile",
]
