"""File operations.

This module contains multiple methods for file handling:
source and stub files, JSON settings, clause dumps and
the records of failed property cases.
"""
import os
import json
import logging

logger = logging.getLogger(__name__)


def read_source(filepath):
    # type: (str) -> str
    """
    Return the text of a program or stub file.
    Supported extensions: `gt`, `gti` and `txt`.

    Raises:
        `FileNotFoundError`: Could not find the file.

        `AttributeError`: File not compatible.
    """
    _, extension = os.path.splitext(filepath.lower())

    match extension:
        case ".gt"|".gti"|".txt"|"":
            try:
                with open(filepath, 'r', encoding='UTF-8') as file:
                    text = file.read()
            except FileNotFoundError as exc:
                raise FileNotFoundError(f"{filepath} not found.") from exc
        case _:
            raise AttributeError(f"{filepath}: file not compatible.")

    return text


def load_json(filepath):
    # type: (str) -> dict
    """
    Load dictionary from a JSON file.

    Raises:
        `FileNotFoundError`: Could not find the file.
    """
    try:
        with open(filepath, 'r', encoding='UTF-8') as file:
            datos = json.load(file)
    except FileNotFoundError as exc:
        raise FileNotFoundError(f"{filepath} not found.") from exc
    return datos


def save_json(filepath, dictionary):
    """Save dictionary on a JSON file."""
    with open(filepath, 'w', encoding='UTF-8') as file:
        json.dump(dictionary, file, indent=2, default=str)


def save_text(filepath, text):
    """Write `text` to `filepath`, creating its directory if needed."""
    folder = os.path.dirname(filepath)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(filepath, 'w', encoding='UTF-8') as file:
        file.write(text)


def save_failure(folder, seed, record):
    # type: (str, int, dict) -> str
    """
    Dump a failed property case as `<folder>/case-<seed>.json`
    and return the path written.
    """
    os.makedirs(folder, exist_ok=True)
    filepath = os.path.join(folder, f"case-{seed}.json")
    save_json(filepath, record)
    logger.info("failure written to %s", filepath)
    return filepath
