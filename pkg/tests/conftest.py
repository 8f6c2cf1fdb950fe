import json
from importlib import resources

import pytest

from ful_reasoner.dsl import parse_kb

EXAMPLES = ("falsepromise", "murder", "surgeon", "neverhelp")


def load_example(name: str):
    text = (resources.files("ful_reasoner") / "kbs" / f"{name}.full").read_text(encoding="utf-8")
    return parse_kb(text)


@pytest.fixture(scope="session")
def kbs():
    return {name: load_example(name) for name in EXAMPLES}


@pytest.fixture(scope="session")
def verdict_schema():
    return json.loads((resources.files("ful_reasoner") / "schema" / "verdict.schema.json").read_text())
