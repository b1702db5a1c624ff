"""Experiment configuration files and flag value parsing.

A configuration file is a YAML mapping. Either the parameters sit next to a ``command`` key::

    command: compare
    interval: 6
    orders: 1..5

or under a ``parameters`` mapping. Keys are the destination names of the sub-command's flags
(``--length-scale`` becomes ``length_scale``).
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from hicache.errors import ConfigurationError
from hicache.sim.generators import GeneratorSpec


@dataclass
class ExperimentConfig:
    """One reproducible CLI run: the sub-command plus its full parameter set."""

    command: Optional[str] = None
    parameters: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        """Serializable echo with parameters in sorted key order."""
        return {
            "command": self.command,
            "parameters": {key: self.parameters[key] for key in sorted(self.parameters)},
        }

    def to_yaml(self) -> str:
        """YAML text that ``parse_experiment_config`` reads back into the same config."""
        return yaml.safe_dump(self.as_dict(), sort_keys=False, default_flow_style=False)


def parse_experiment_config(data: Any) -> ExperimentConfig:
    """Parses an experiment configuration from a loaded YAML document.

    Args:
        data: The loaded YAML document.

    Returns:
        ExperimentConfig: The parsed configuration.

    Raises:
        ConfigurationError: If the document is not a mapping.
    """
    if data is None:
        return ExperimentConfig()
    if not isinstance(data, dict):
        raise ConfigurationError("A configuration file must contain a YAML mapping")
    command = data.get("command")
    if "parameters" in data:
        parameters = data["parameters"] or {}
        extra = set(data) - {"command", "parameters"}
        if extra:
            raise ConfigurationError(f"Unexpected top-level keys: {sorted(extra)}")
    else:
        parameters = {key: value for key, value in data.items() if key != "command"}
    if not isinstance(parameters, dict):
        raise ConfigurationError("'parameters' must be a mapping")
    return ExperimentConfig(command=command, parameters=dict(parameters))


def load_experiment_config(config_path: Union[str, Path]) -> ExperimentConfig:
    """Loads an experiment configuration from a YAML file.

    Args:
        config_path (str | Path): Path to the YAML file.

    Returns:
        ExperimentConfig: The parsed configuration.

    Raises:
        ConfigurationError: If the file is not valid YAML or not a mapping.
    """
    with open(config_path, "r", encoding="utf-8") as file:
        try:
            data = yaml.safe_load(file)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"Invalid YAML in {config_path}: {exc}") from exc
    return parse_experiment_config(data)


def parse_int_list(value: Any) -> list[int]:
    """Parses ``"1..5"``, ``"1,2,4"``, a single integer or a YAML list into sorted integers."""
    if isinstance(value, bool):
        raise ConfigurationError(f"Not an integer list: {value!r}")
    if isinstance(value, int):
        return [value]
    if isinstance(value, (list, tuple)):
        items = [parse_int_list(item) for item in value]
        return sorted({number for item in items for number in item})
    text = str(value).strip()
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
            if high < low:
                raise ConfigurationError(f"Empty range {text!r}")
            return list(range(low, high + 1))
        return sorted({int(part) for part in text.split(",") if part.strip()})
    except ValueError as exc:
        raise ConfigurationError(f"Not an integer list: {value!r}") from exc


def parse_float_list(value: Any) -> list[float]:
    """Parses ``"0.4,0.5"``, a single number or a YAML list into floats (input order kept)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [float(item) for item in value]
    try:
        return [float(part) for part in str(value).split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"Not a number list: {value!r}") from exc


def parse_generator_spec(parameters: dict, seed: Optional[int] = None) -> GeneratorSpec:
    """Builds a ``GeneratorSpec`` from generator flag values.

    Args:
        parameters (dict): Flag destinations (``kind``, ``dim``, ``steps``, ``length_scale``...).
        seed (Optional[int]): Overrides ``parameters["seed"]`` when given.

    Returns:
        GeneratorSpec: The validated spec.
    """
    return GeneratorSpec(
        kind=parameters["kind"],
        dim=int(parameters["dim"]),
        total_steps=int(parameters["steps"]),
        seed=int(parameters.get("seed", 0) if seed is None else seed),
        length_scale=float(parameters["length_scale"]),
        amplitude=float(parameters["amplitude"]),
        theta=float(parameters["theta"]),
        noise=float(parameters["noise"]),
        initial=float(parameters["initial"]),
        degree=int(parameters["degree"]),
        coeff_scale=float(parameters["coeff_scale"]),
    )
