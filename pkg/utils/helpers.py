"""
Helper utilities for nekcm: logging setup, JSON/CSV output and parameter sampling
"""

import csv
import os
import logging
import json
from fractions import Fraction
from typing import Dict, Any, List, Sequence

import numpy as np

from errors import ConfigError

SMALL_PRIMES = (2, 3, 5, 7, 11, 13)


def setup_logging(log_level: str = "INFO") -> logging.Logger:
    """
    Set up logging configuration

    Args:
        log_level (str): Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        logging.Logger: Configured logger
    """
    numeric_level = getattr(logging, log_level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValueError(f"Invalid log level: {log_level}")

    logging.basicConfig(
        level=numeric_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        force=True,
    )

    return logging.getLogger(__name__)


def ensure_directory(directory_path: str) -> None:
    """
    Ensure a directory exists

    Args:
        directory_path (str): Path to directory
    """
    if directory_path and not os.path.exists(directory_path):
        os.makedirs(directory_path)


def load_json_file(filepath: str) -> Dict[str, Any]:
    """
    Load a JSON file into a dictionary

    Args:
        filepath (str): Path to JSON file

    Returns:
        Dict[str, Any]: Loaded JSON data

    Raises:
        ConfigError: missing or malformed file
    """
    try:
        with open(filepath, 'r') as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"File not found: {filepath}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON in {filepath}: {str(e)}")


def to_jsonable(value: Any) -> Any:
    """
    Plain JSON form of a result: complex -> [re, im], exact rationals -> "p/q".
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if hasattr(value, "free_symbols"):
        if value.is_Rational:
            return str(value)
        if not value.free_symbols:
            c = complex(value)
            return [c.real, c.imag]
        return str(value)
    if hasattr(value, "imag") and hasattr(value, "real"):
        return [float(value.real), float(value.imag)]
    return value


def save_json_file(data: Dict[str, Any], filepath: str) -> None:
    """
    Save a dictionary to a JSON file with sorted keys

    Args:
        data (Dict[str, Any]): Data to save
        filepath (str): Path to save JSON file
    """
    ensure_directory(os.path.dirname(filepath))

    with open(filepath, 'w') as f:
        json.dump(to_jsonable(data), f, indent=2, sort_keys=True)
        f.write("\n")


def save_csv_file(header: Sequence[str], rows: Sequence[Sequence[Any]], filepath: str) -> None:
    """
    Write a table with a header row

    Args:
        header (Sequence[str]): Column names
        rows (Sequence[Sequence[Any]]): Table rows
        filepath (str): Path to the CSV file
    """
    ensure_directory(os.path.dirname(filepath))

    with open(filepath, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def parse_number(value: Any, exact: bool = False):
    """A number, "p/q" string or [re, im] pair as a complex or (exact) Fraction."""
    if exact:
        if isinstance(value, (list, tuple)):
            if len(value) != 2 or Fraction(str(value[1])) != 0:
                raise ConfigError(f"Exact mode needs real values, got {value}")
            value = value[0]
        try:
            return Fraction(str(value))
        except ValueError:
            raise ConfigError(f"Not a rational number: {value!r}")
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"Complex numbers are [re, im] pairs, got {value}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(float(Fraction(value)))
        except ValueError:
            raise ConfigError(f"Not a number: {value!r}")
    return complex(value)


def random_rational(rng: np.random.Generator, primes: Sequence[int] = SMALL_PRIMES) -> Fraction:
    """A signed ratio of two small primes plus a small integer offset."""
    numerator = int(rng.choice(primes))
    denominator = int(rng.choice(primes))
    sign = 1 if rng.random() < 0.5 else -1
    return sign * Fraction(numerator, denominator) + int(rng.integers(-2, 3))


def random_rational_params(rng: np.random.Generator, N: int) -> Dict[str, Any]:
    """
    Generic rational parameters {a, eps} with distinct moduli and nonzero eps.

    Returns:
        Dict[str, Any]: {"a": [Fraction] * N, "eps": [Fraction] * 3}
    """
    a: List[Fraction] = []
    while len(a) < N:
        value = random_rational(rng)
        if value not in a:
            a.append(value)
    eps = []
    while len(eps) < 3:
        value = random_rational(rng)
        if value == 0 or value in eps or -value in eps:
            continue
        if len(eps) == 2 and value + sum(eps) == 0:
            continue
        eps.append(value)
    return {"a": a, "eps": eps}
