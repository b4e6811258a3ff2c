import json
from pathlib import Path

import pytest

from globrename.core import intern
from globrename.syntax import parse

CORPUS = Path(__file__).parent / "fixtures" / "corpus"

CAPTURE = "int x ;\nint f(int y){\n  return y + x ;\n}\n"
NO_CAPTURE = "int x ;\nint f(int y){\n  return y + 1 ;\n}\n"
FREE_Y = "int x;\nint f(int x){\n  return y ;\n}\n"
TWO_PRINTF = 'int main(){\n  return printf("A") + printf("B");\n}\n'
EXTRACTED = 'int main(){\n  int r1 = printf("A") ;\n  int r2 = printf("B") ;\n  return r1 + r2 ;\n}\n'


def ids(*names):
    return tuple(intern(n) for n in names)


def corpus(name: str) -> str:
    return (CORPUS / name).read_text()


@pytest.fixture
def expected():
    return json.loads((CORPUS / "expected.json").read_text())


@pytest.fixture
def capture_prog():
    return parse(CAPTURE)


@pytest.fixture
def no_capture_prog():
    return parse(NO_CAPTURE)
