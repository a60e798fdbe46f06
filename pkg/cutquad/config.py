import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from dotenv import load_dotenv

from cutquad._version import REVISION
from cutquad.errors import ArgumentError

logger = logging.getLogger(__name__)

# Extra keys a config file may carry on top of the Settings fields; they feed CLI flags.
SELECTION_KEYS = ("integrators", "testcases", "operations", "meshes", "params")

ENV_VARS = {
    "output_dir": "CUTQUAD_OUTPUT_DIR",
    "catalog_dir": "CUTQUAD_CATALOG_DIR",
    "revision": "CUTQUAD_REVISION",
    "log_level": "CUTQUAD_LOG_LEVEL",
    "jobs": "CUTQUAD_JOBS",
    "seed": "CUTQUAD_SEED",
}


@dataclass(frozen=True)
class Settings:
    output_dir: str = "artifacts"
    catalog_dir: str = "catalog"
    revision: str = REVISION
    log_level: str = "WARNING"
    jobs: int = 1
    seed: int = 42
    order: int = 5
    timing: bool = False
    selection: dict = field(default_factory=dict)


def _coerce(name, raw):
    if name in ("jobs", "seed", "order"):
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ArgumentError(f"Setting {name} expects an integer, got {raw!r}")
    if name == "timing":
        if isinstance(raw, bool):
            return raw
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    return str(raw)


def load_config_file(file_path):
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"The file {file_path} does not exist.")
    with open(file_path, "r") as file:
        try:
            data = json.load(file)
        except json.JSONDecodeError as e:
            raise ArgumentError(f"{file_path}:{e.lineno}: invalid config file: {e.msg}")
    if not isinstance(data, dict):
        raise ArgumentError(f"{file_path}: config file must hold a JSON object")
    known = {f.name for f in fields(Settings)} - {"selection"}
    unknown = sorted(set(data) - known - set(SELECTION_KEYS))
    if unknown:
        raise ArgumentError(f"{file_path}: unknown config keys: {', '.join(unknown)}")
    return data


def load_settings(config_path: Optional[str] = None, dotenv_path: Optional[str] = None) -> Settings:
    """Defaults, then environment (.env included), then the JSON config file.

    Command-line flags are applied on top by the CLI.
    """
    load_dotenv(dotenv_path=dotenv_path, override=False)

    settings = Settings()
    updates = {}
    for name, env_var in ENV_VARS.items():
        value = os.getenv(env_var)
        if value is not None and value != "":
            updates[name] = _coerce(name, value)
    settings = replace(settings, **updates)

    if config_path:
        data = load_config_file(config_path)
        file_updates = {k: _coerce(k, v) for k, v in data.items() if k not in SELECTION_KEYS}
        selection = {k: data[k] for k in SELECTION_KEYS if k in data}
        settings = replace(settings, selection=selection, **file_updates)
        logger.info("Loaded config file %s", config_path)

    return settings
