import hashlib
import json
import logging
import re
from typing import Any, NamedTuple

import yaml

from src.exceptions import ConfigError

logger = logging.getLogger(__name__)

OVERRIDE_PATTERN = re.compile(r"^\s*(?P<path>[A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*)\s*=(?P<value>.*)$")


class ParsedOverride(NamedTuple):
    path: tuple[str, ...]
    value: Any

    def __str__(self) -> str:
        return f"{'.'.join(self.path)}={self.value!r}"

    @property
    def key(self) -> str:
        return ".".join(self.path)


def parse_override(text: str, pattern: re.Pattern[str] | None = None) -> ParsedOverride:
    """
    Splits a `--set` argument into its key path and a YAML-typed value

    :param text: string like "regulation.eps_ee=0.02" or "weights.w_ee = 14"
    :param pattern: regexp with `path` and `value` groups
    :return <ParsedOverride> like ParsedOverride(("regulation", "eps_ee"), 0.02)
    """
    if not (match := (pattern or OVERRIDE_PATTERN).search(text)):
        raise ConfigError(f"Malformed override {text!r}, expected key.path=value")

    raw_value = match.group("value").strip()
    try:
        value = yaml.safe_load(raw_value) if raw_value else None
    except yaml.YAMLError as exc:
        raise ConfigError(f"Override value is not valid YAML: {exc}", key=match.group("path"))

    logger.debug("Parsed override: '%s' -> %r", text, value)
    return ParsedOverride(path=tuple(match.group("path").split(".")), value=value)


def set_path(data: dict[str, Any], path: tuple[str, ...], value: Any) -> dict[str, Any]:
    """Sets a nested key of a raw (not yet validated) scenario mapping, creating sections"""
    target = data
    for part in path[:-1]:
        node = target.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"Cannot override inside a scalar ({part!r})", key=".".join(path))
        target = node
    target[path[-1]] = value
    return data


def apply_overrides(data: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Applies `key.path=value` overrides in order, later ones win"""
    for text in overrides:
        override = parse_override(text)
        set_path(data, override.path, override.value)

    return data


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, default=str, separators=(",", ":"))


def content_hash(payload: Any) -> str:
    """sha1 of the canonical JSON form, git-object style"""
    return hashlib.sha1(canonical_json(payload).encode("utf-8")).hexdigest()
