"""Runtime configuration: TOML file, IOTSH_-prefixed environment overrides.

Python 3.10 has no stdlib TOML reader and the deployment environment pins
the stdlib, so a strict subset parser lives here: comments, bare tables,
and scalar values (basic strings, integers, floats, booleans). That covers
every field this service defines; nested tables and arrays are rejected
loudly rather than half-parsed.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigurationError

ENV_PREFIX = "IOTSH_"

_KEY_RE = re.compile(r"^[A-Za-z0-9_-]+$")


def parse_toml_subset(text: str) -> dict:
    """Parse flat ``key = value`` TOML with optional [table] headers.

    Values: "basic strings" (\\\\ \\" \\n \\t escapes), integers, floats,
    true/false. Tables flatten to ``table.key`` entries.
    """
    out: dict = {}
    prefix = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ValueError(f"line {lineno}: malformed table header")
            name = line[1:-1].strip()
            if not _KEY_RE.match(name):
                raise ValueError(f"line {lineno}: unsupported table name {name!r}")
            prefix = name + "."
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ValueError(f"line {lineno}: bad key {key!r}")
        out[prefix + key] = _parse_value(value.strip(), lineno)
    return out


def _parse_value(token: str, lineno: int):
    if token.startswith('"'):
        if len(token) < 2 or not token.endswith('"'):
            raise ValueError(f"line {lineno}: unterminated string")
        body = token[1:-1]
        return re.sub(r'\\(["\\nt])',
                      lambda m: {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}[m.group(1)],
                      body)
    if token in ("true", "false"):
        return token == "true"
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ValueError(f"line {lineno}: unsupported value {token!r}") from None


@dataclass
class Config:
    corpus_dir: str = "docs"
    store_path: str = "store.jsonl"
    embed_endpoint: str = "stub"
    chat_endpoint: str = "stub"
    classify_endpoint: str | None = None
    default_k: int = 5
    chunk_size: int = 800
    chunk_overlap: int = 80
    label_column: str | None = None
    feature_policy_path: str | None = None
    listen_address: str = "127.0.0.1:8080"
    # plumbing beyond the pinned field list
    embed_dim: int = 256
    model_name: str = "stub-model"
    alert_threshold: float = 0.5
    nb_model_path: str | None = None
    records_path: str | None = None
    reports_dir: str | None = None

    def validate(self) -> None:
        if self.chunk_overlap >= self.chunk_size:
            raise ConfigurationError("chunk_overlap", "must be smaller than chunk_size")
        if self.chunk_size <= 0:
            raise ConfigurationError("chunk_size", "must be positive")
        if self.default_k < 1:
            raise ConfigurationError("default_k", "must be >= 1")
        if not 0 <= self.alert_threshold <= 1:
            raise ConfigurationError("alert_threshold", "must be in [0, 1]")
        for name in ("embed_endpoint", "chat_endpoint", "classify_endpoint"):
            value = getattr(self, name)
            if value is None:
                continue
            if value != "stub" and not value.startswith(("http://", "https://")):
                raise ConfigurationError(name, 'must be "stub" or an absolute http(s) URL')
        host, _, port = self.listen_address.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigurationError("listen_address", "expected host:port")


_INT_FIELDS = {"default_k", "chunk_size", "chunk_overlap", "embed_dim"}
_FLOAT_FIELDS = {"alert_threshold"}


def load_config(path: str | Path | None = None,
                env: dict | None = None) -> Config:
    """Build a Config from defaults, then the TOML file, then IOTSH_* env
    variables (highest precedence)."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        try:
            parsed = parse_toml_subset(Path(path).read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ConfigurationError(str(path), str(exc)) from exc
        values.update({k.rsplit(".", 1)[-1]: v for k, v in parsed.items()})

    known = {f.name for f in fields(Config)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigurationError(unknown[0], "unknown configuration field")

    for name in known:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = env[env_key]

    cfg = Config()
    for name, value in values.items():
        if value is not None and name in _INT_FIELDS:
            try:
                value = int(value)
            except (TypeError, ValueError):
                raise ConfigurationError(name, f"expected integer, got {value!r}") from None
        elif value is not None and name in _FLOAT_FIELDS:
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ConfigurationError(name, f"expected number, got {value!r}") from None
        setattr(cfg, name, value)
    cfg.validate()
    return cfg
